"""Experiment orchestration: the three-system comparison matrix.

One JSON config describes the corpus, a shared training template,
per-system overrides, and the evaluation setup. Runs live under
``out_dir/runs/<system>-seed<k>/``; ``compare`` reduces all of them to
a JSON report plus a markdown table of mean EER per condition, residual
probe accuracies, and a per-seed win/loss tally of the adversarial
system against plain augmentation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import Corpus, CorpusConfig, build_corpus, load_corpus
from .evaluation import CONDITIONS, build_probe_set, evaluate, residual_probe
from .seeding import derive_seed
from .train import SYSTEMS, TrainConfig, load_embedder, train

DEFAULT_SYSTEM_OVERRIDES = {
    "baseline": {"p_aug": 0.0, "adv_weight": 0.0},
    "da": {"adv_weight": 0.0},
    "ada": {},
}


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 0
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    out_dir: str | None = None
    corpus: CorpusConfig = field(default_factory=CorpusConfig)
    train: dict = field(default_factory=dict)
    systems: dict = field(default_factory=lambda: {k: dict(v) for k, v in DEFAULT_SYSTEM_OVERRIDES.items()})
    conditions: tuple[str, ...] = CONDITIONS
    n_target: int = 200
    n_nontarget: int = 200
    eval_snr_range_db: tuple[float, float] = (0.0, 20.0)
    probe_per_category: int = 48
    export_wavs: bool = False

    def validate(self) -> None:
        if not self.seeds:
            raise ValueError("seed list must be non-empty")
        self.corpus.validate()
        for condition in self.conditions:
            if condition not in CONDITIONS:
                raise ValueError(f"unknown condition {condition!r}")
        for system in self.systems:
            if system not in SYSTEMS:
                raise ValueError(f"unknown system {system!r}")
        for system in SYSTEMS:
            self.train_config(system, self.seeds[0]).validate()
        if self.n_target < 1 or self.n_nontarget < 1:
            raise ValueError("need at least one target and one nontarget trial")
        if self.probe_per_category < 8:
            raise ValueError("probe_per_category must be >= 8")

    def train_config(self, system: str, seed: int) -> TrainConfig:
        if system not in SYSTEMS:
            raise ValueError(f"unknown system {system!r}; expected one of {SYSTEMS}")
        merged = dict(self.train)
        merged.update(self.systems.get(system, {}))
        merged["system"] = system
        merged["seed"] = seed
        return TrainConfig.from_dict(merged)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "seeds": list(self.seeds),
            "out_dir": self.out_dir,
            "corpus": self.corpus.to_dict(),
            "train": dict(self.train),
            "systems": {k: dict(v) for k, v in self.systems.items()},
            "conditions": list(self.conditions),
            "n_target": self.n_target,
            "n_nontarget": self.n_nontarget,
            "eval_snr_range_db": list(self.eval_snr_range_db),
            "probe_per_category": self.probe_per_category,
            "export_wavs": self.export_wavs,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        kwargs = dict(d)
        if "corpus" in kwargs and isinstance(kwargs["corpus"], dict):
            kwargs["corpus"] = CorpusConfig.from_dict(kwargs["corpus"])
        for key in ("seeds", "conditions"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        if "eval_snr_range_db" in kwargs:
            kwargs["eval_snr_range_db"] = tuple(kwargs["eval_snr_range_db"])
        return cls(**kwargs)

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))


def run_dir(out_dir: str | Path, system: str, seed: int) -> Path:
    return Path(out_dir) / "runs" / f"{system}-seed{seed}"


def synth_corpus(exp: ExperimentConfig, out_dir: str | Path) -> Corpus:
    """Build and persist the corpus (manifest + sidecar, optional WAVs)."""
    exp.corpus.validate()
    corpus = build_corpus(exp.corpus, exp.seed)
    corpus_dir = Path(out_dir) / "corpus"
    corpus_dir.mkdir(parents=True, exist_ok=True)
    corpus.write_manifest(corpus_dir / "manifest.txt")
    corpus.write_sidecar(corpus_dir / "corpus.json")
    if exp.export_wavs:
        corpus.export_wavs(corpus_dir)
    return corpus


def open_corpus(out_dir: str | Path) -> Corpus:
    corpus_dir = Path(out_dir) / "corpus"
    if not (corpus_dir / "manifest.txt").exists():
        raise FileNotFoundError(f"no corpus manifest under {corpus_dir}; run synth first")
    return load_corpus(corpus_dir)


def train_system(exp: ExperimentConfig, corpus: Corpus, system: str, seed: int, out_dir: str | Path):
    cfg = exp.train_config(system, seed)
    return train(cfg, corpus, run_dir(out_dir, system, seed))


def eval_seed(exp: ExperimentConfig, seed: int) -> int:
    """Trial/condition randomness shared by every system at one training
    seed, so per-seed comparisons face identical trials."""
    return derive_seed(exp.seed, "eval", seed)


def evaluate_run(
    exp: ExperimentConfig, corpus: Corpus, system: str, seed: int, out_dir: str | Path
) -> dict:
    ckpt = run_dir(out_dir, system, seed) / "final.ckpt"
    if not ckpt.exists():
        raise FileNotFoundError(f"missing checkpoint for {system} seed {seed}: {ckpt}")
    embedder, _ = load_embedder(ckpt)
    return evaluate(
        embedder,
        corpus,
        list(exp.conditions),
        eval_seed(exp, seed),
        n_target=exp.n_target,
        n_nontarget=exp.n_nontarget,
        eval_snr_range_db=exp.eval_snr_range_db,
        out_dir=run_dir(out_dir, system, seed) / "eval",
    )


def probe_run(exp: ExperimentConfig, corpus: Corpus, system: str, seed: int, out_dir: str | Path) -> float:
    ckpt = run_dir(out_dir, system, seed) / "final.ckpt"
    if not ckpt.exists():
        raise FileNotFoundError(f"missing checkpoint for {system} seed {seed}: {ckpt}")
    embedder, _ = load_embedder(ckpt)
    probe_seed = derive_seed(exp.seed, "probe", seed)
    embeddings, labels = build_probe_set(
        embedder, corpus, probe_seed,
        n_per_category=exp.probe_per_category,
        eval_snr_range_db=exp.eval_snr_range_db,
    )
    return residual_probe(embeddings, labels, probe_seed)


def compare(
    exp: ExperimentConfig, out_dir: str | Path, train_missing: bool = False
) -> dict:
    """Evaluate every (system, seed), probe the augmented systems, and
    reduce to the comparison report."""
    exp.validate()
    out_dir = Path(out_dir)
    corpus = open_corpus(out_dir)

    missing = [
        (system, seed)
        for system in SYSTEMS
        for seed in exp.seeds
        if not (run_dir(out_dir, system, seed) / "final.ckpt").exists()
    ]
    if missing and not train_missing:
        gaps = ", ".join(f"{system}/seed{seed}" for system, seed in missing)
        raise FileNotFoundError(f"missing final.ckpt for: {gaps} (use --train-missing to train them)")
    for system, seed in missing:
        train_system(exp, corpus, system, seed, out_dir)

    per_seed: dict[str, dict[str, dict[str, float]]] = {s: {} for s in SYSTEMS}
    for system in SYSTEMS:
        for seed in exp.seeds:
            table = evaluate_run(exp, corpus, system, seed, out_dir)
            per_seed[system][str(seed)] = {c: table[c]["eer"] for c in exp.conditions}

    mean_eer = {
        system: {
            c: sum(per_seed[system][str(k)][c] for k in exp.seeds) / len(exp.seeds)
            for c in exp.conditions
        }
        for system in SYSTEMS
    }

    probe = {}
    for system in ("da", "ada"):
        probe[system] = {str(seed): probe_run(exp, corpus, system, seed, out_dir) for seed in exp.seeds}
        probe[system]["mean"] = sum(probe[system][str(k)] for k in exp.seeds) / len(exp.seeds)

    win_tally = {}
    for condition in exp.conditions:
        ada_wins = da_wins = ties = 0
        for seed in exp.seeds:
            a = per_seed["ada"][str(seed)][condition]
            d = per_seed["da"][str(seed)][condition]
            if a < d:
                ada_wins += 1
            elif d < a:
                da_wins += 1
            else:
                ties += 1
        win_tally[condition] = {"ada_wins": ada_wins, "da_wins": da_wins, "ties": ties}

    report = {
        "conditions": list(exp.conditions),
        "seeds": list(exp.seeds),
        "per_seed_eer": per_seed,
        "mean_eer": mean_eer,
        "probe_accuracy": probe,
        "win_tally_ada_vs_da": win_tally,
    }
    reports_dir = out_dir / "reports"
    reports_dir.mkdir(parents=True, exist_ok=True)
    (reports_dir / "compare.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    (reports_dir / "compare.md").write_text(format_markdown(report))
    return report


def format_markdown(report: dict) -> str:
    conditions = report["conditions"]
    lines = ["# System comparison (mean EER % across seeds)", ""]
    lines.append("| system | " + " | ".join(conditions) + " |")
    lines.append("|" + "---|" * (len(conditions) + 1))
    for system in SYSTEMS:
        cells = [f"{100 * report['mean_eer'][system][c]:.2f}" for c in conditions]
        lines.append(f"| {system} | " + " | ".join(cells) + " |")
    lines.append("")
    lines.append("## Residual probe accuracy (augmentation-label probe on embeddings)")
    lines.append("")
    lines.append("| system | mean accuracy |")
    lines.append("|---|---|")
    for system in ("da", "ada"):
        lines.append(f"| {system} | {report['probe_accuracy'][system]['mean']:.4f} |")
    lines.append("")
    lines.append("## Per-seed win tally, ada vs da (lower EER wins)")
    lines.append("")
    lines.append("| condition | ada wins | da wins | ties |")
    lines.append("|---|---|---|---|")
    for condition in conditions:
        t = report["win_tally_ada_vs_da"][condition]
        lines.append(f"| {condition} | {t['ada_wins']} | {t['da_wins']} | {t['ties']} |")
    lines.append("")
    return "\n".join(lines)


__all__ = [
    "DEFAULT_SYSTEM_OVERRIDES",
    "ExperimentConfig",
    "run_dir",
    "synth_corpus",
    "open_corpus",
    "train_system",
    "eval_seed",
    "evaluate_run",
    "probe_run",
    "compare",
    "format_markdown",
]
