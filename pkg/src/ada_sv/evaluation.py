"""Trial construction, cosine scoring, EER, and the residual probe.

Trials pair a clean enrollment utterance with a test utterance that is
augmented according to the evaluation condition (Clean, one fixed
category, or ALL = per-trial random seen category); the trial *list* is
condition-independent so scores are comparable across conditions. EER
comes from the accept-if-score>=threshold staircase with linear
interpolation at the FAR/FRR crossing.

The residual probe measures how much augmentation information is left
in embeddings: a small multinomial logistic regression trained on
frozen embeddings to predict the augmentation category, reported as
held-out accuracy.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .corpus import Corpus, NoiseCategory, Waveform, fit_noise, mix_at_snr
from .features import FbankConfig, fbank
from .seeding import derive_seed, rng_from

#: Report row order, mirroring the seen-condition table followed by the
#: unseen-condition table.
CONDITIONS = ("Clean", "Noise", "Music", "Speech", "ALL", "Car", "Cafe")

_CONDITION_CATEGORY = {
    "Clean": None,
    "Noise": NoiseCategory.NOISE,
    "Music": NoiseCategory.MUSIC,
    "Speech": NoiseCategory.SPEECH,
    "Car": NoiseCategory.CAR,
    "Cafe": NoiseCategory.CAFE,
}
_ALL_POOL = (NoiseCategory.NOISE, NoiseCategory.MUSIC, NoiseCategory.SPEECH)


@dataclass(frozen=True)
class Trial:
    enroll_utt: str
    test_utt: str
    target: int

    def __post_init__(self):
        if self.enroll_utt == self.test_utt:
            raise ValueError("a trial cannot compare an utterance with itself")
        if self.target not in (0, 1):
            raise ValueError("target must be 0 or 1")


def sample_trials(corpus: Corpus, n_target: int, n_nontarget: int, seed: int) -> list[Trial]:
    """Condition-independent trial list: enrollment utterances come from
    the trial-enroll split, test utterances from trial-test."""
    enroll_by_spk: dict[int, list[str]] = {}
    test_by_spk: dict[int, list[str]] = {}
    for rec in corpus.records("trial-enroll"):
        enroll_by_spk.setdefault(rec.speaker_id, []).append(rec.utt_id)
    for rec in corpus.records("trial-test"):
        test_by_spk.setdefault(rec.speaker_id, []).append(rec.utt_id)
    speakers = sorted(set(enroll_by_spk) & set(test_by_spk))
    if len(speakers) < 2:
        raise ValueError("need enroll and test utterances for at least 2 speakers")
    rng = rng_from(seed, "trials")
    trials = []
    for _ in range(n_target):
        spk = speakers[int(rng.integers(0, len(speakers)))]
        enr = enroll_by_spk[spk][int(rng.integers(0, len(enroll_by_spk[spk])))]
        tst = test_by_spk[spk][int(rng.integers(0, len(test_by_spk[spk])))]
        trials.append(Trial(enr, tst, 1))
    for _ in range(n_nontarget):
        a, b = rng.choice(len(speakers), size=2, replace=False).tolist()
        spk_a, spk_b = speakers[a], speakers[b]
        enr = enroll_by_spk[spk_a][int(rng.integers(0, len(enroll_by_spk[spk_a])))]
        tst = test_by_spk[spk_b][int(rng.integers(0, len(test_by_spk[spk_b])))]
        trials.append(Trial(enr, tst, 0))
    return trials


def build_trials(
    corpus: Corpus,
    n_target: int,
    n_nontarget: int,
    condition: str,
    seed: int,
    eval_snr_range_db: tuple[float, float] = (0.0, 20.0),
) -> tuple[list[Trial], list[Waveform]]:
    """Trial list plus the per-trial realized test waveforms.

    The pair sampling never consumes condition-dependent randomness, so
    every condition sees the same trials; only the test-side audio
    changes. Enrollment audio is never modified.
    """
    if condition not in CONDITIONS:
        raise ValueError(f"unknown condition {condition!r}; expected one of {CONDITIONS}")
    trials = sample_trials(corpus, n_target, n_nontarget, seed)
    cond_rng = rng_from(seed, "condition", condition)
    realized = []
    for trial in trials:
        clean = corpus.realize(corpus.record(trial.test_utt))
        if condition == "Clean":
            realized.append(clean)
            continue
        if condition == "ALL":
            category = _ALL_POOL[int(cond_rng.integers(0, len(_ALL_POOL)))]
        else:
            category = _CONDITION_CATEGORY[condition]
        pool = corpus.noise_pool(category, "eval")
        noise = pool[int(cond_rng.integers(0, len(pool)))]
        snr = float(cond_rng.uniform(*eval_snr_range_db))
        fitted = fit_noise(noise, len(clean), np.random.default_rng(int(cond_rng.integers(0, 2**62))))
        realized.append(mix_at_snr(clean, fitted, snr))
    return trials, realized


def cosine_score(e1: np.ndarray, e2: np.ndarray) -> float:
    e1 = np.asarray(e1, dtype=np.float64)
    e2 = np.asarray(e2, dtype=np.float64)
    n1, n2 = np.linalg.norm(e1), np.linalg.norm(e2)
    if n1 == 0.0 or n2 == 0.0:
        raise ValueError("cosine score undefined for a zero vector")
    return float(np.dot(e1, e2) / (n1 * n2))


@dataclass(frozen=True)
class ScoreSet:
    scores: tuple[float, ...]
    targets: tuple[int, ...]

    def __post_init__(self):
        if len(self.scores) != len(self.targets):
            raise ValueError("scores/targets length mismatch")


def _operating_points(scores: np.ndarray, targets: np.ndarray, thresholds: np.ndarray):
    tar = scores[targets == 1]
    non = scores[targets == 0]
    far = np.array([(non >= t).mean() for t in thresholds])
    frr = np.array([(tar < t).mean() for t in thresholds])
    return far, frr


def _interp_crossing(thresholds, far, frr):
    d = far - frr
    for k in range(len(d)):
        if d[k] <= 0.0:
            if k == 0 or d[k] == 0.0:
                return float(far[k]), float(thresholds[k])
            alpha = d[k - 1] / (d[k - 1] - d[k])
            eer = far[k - 1] + alpha * (far[k] - far[k - 1])
            thr = thresholds[k - 1] + alpha * (thresholds[k] - thresholds[k - 1])
            return float(eer), float(thr)
    raise AssertionError("FAR-FRR difference never crossed zero despite the appended endpoint")


def compute_eer(scores, targets) -> tuple[float, float]:
    """(EER, threshold) from the accept-iff-score>=t staircase, linearly
    interpolated between the two operating points where FAR-FRR flips
    sign. A virtual (FAR=0, FRR=1) endpoint above the top score closes
    the sweep so a crossing always exists."""
    scores = np.asarray(scores, dtype=np.float64)
    targets = np.asarray(targets)
    if scores.size != targets.size or scores.size == 0:
        raise ValueError("scores/targets must be equal-length and non-empty")
    if not ((targets == 1).any() and (targets == 0).any()):
        raise ValueError("EER needs both target and nontarget scores")
    thresholds = np.unique(scores)
    thresholds = np.append(thresholds, thresholds[-1] + 1.0)
    far, frr = _operating_points(scores, targets, thresholds)
    return _interp_crossing(thresholds, far, frr)


def embed_waveform(embedder, wave: Waveform, fbank_cfg: FbankConfig = FbankConfig()) -> np.ndarray:
    with torch.no_grad():
        feats = torch.from_numpy(fbank(wave, fbank_cfg)).to(next(embedder.parameters()).dtype)
        return embedder(feats).cpu().numpy()


def evaluate(
    embedder,
    corpus: Corpus,
    conditions: list[str],
    seed: int,
    n_target: int = 200,
    n_nontarget: int = 200,
    eval_snr_range_db: tuple[float, float] = (0.0, 20.0),
    fbank_cfg: FbankConfig = FbankConfig(),
    out_dir: str | Path | None = None,
) -> dict:
    """EER table over conditions: one row per requested condition.

    Enrollment embeddings are computed once (clean, shared across
    conditions); each condition embeds its own realized test waveforms.
    Optionally writes trials/scores files and the JSON report.
    """
    enroll_cache: dict[str, np.ndarray] = {}
    report: dict[str, dict] = {}
    out_path = Path(out_dir) if out_dir is not None else None
    for condition in conditions:
        trials, test_waves = build_trials(
            corpus, n_target, n_nontarget, condition, seed, eval_snr_range_db
        )
        scores = []
        clean_test_cache: dict[str, np.ndarray] = {}
        for trial, wave in zip(trials, test_waves):
            if trial.enroll_utt not in enroll_cache:
                enroll_cache[trial.enroll_utt] = embed_waveform(
                    embedder, corpus.realize(corpus.record(trial.enroll_utt)), fbank_cfg
                )
            if condition == "Clean":
                if trial.test_utt not in clean_test_cache:
                    clean_test_cache[trial.test_utt] = embed_waveform(embedder, wave, fbank_cfg)
                test_emb = clean_test_cache[trial.test_utt]
            else:
                test_emb = embed_waveform(embedder, wave, fbank_cfg)
            scores.append(cosine_score(enroll_cache[trial.enroll_utt], test_emb))
        targets = [t.target for t in trials]
        eer, threshold = compute_eer(scores, targets)
        report[condition] = {"eer": eer, "threshold": threshold, "n_trials": len(trials)}
        if out_path is not None:
            out_path.mkdir(parents=True, exist_ok=True)
            write_trials(out_path / f"trials-{condition.lower()}.txt", trials)
            write_scores(out_path / f"scores-{condition.lower()}.txt", trials, scores)
    if out_path is not None:
        (out_path / "eer-report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return report


def write_trials(path: str | Path, trials: list[Trial]) -> None:
    Path(path).write_text("".join(f"{t.enroll_utt} {t.test_utt} {t.target}\n" for t in trials))


def write_scores(path: str | Path, trials: list[Trial], scores: list[float]) -> None:
    if len(trials) != len(scores):
        raise ValueError("trials/scores length mismatch")
    Path(path).write_text(
        "".join(f"{t.enroll_utt} {t.test_utt} {s:.8g}\n" for t, s in zip(trials, scores))
    )


# -- residual probe ----------------------------------------------------


def build_probe_set(
    embedder,
    corpus: Corpus,
    seed: int,
    n_per_category: int = 48,
    categories: tuple[NoiseCategory, ...] = (
        NoiseCategory.CLEAN,
        NoiseCategory.NOISE,
        NoiseCategory.MUSIC,
        NoiseCategory.SPEECH,
    ),
    eval_snr_range_db: tuple[float, float] = (0.0, 20.0),
    fbank_cfg: FbankConfig = FbankConfig(),
) -> tuple[np.ndarray, list[NoiseCategory]]:
    """Balanced embedding set for the probe: held-out utterances, each
    augmented with one category (or left clean) at an evaluation SNR."""
    held_out = corpus.records("trial-test") + corpus.records("trial-enroll")
    if not held_out:
        raise ValueError("corpus has no held-out utterances")
    rng = rng_from(seed, "probe-set")
    embeddings, labels = [], []
    for category in categories:
        category = NoiseCategory(category)
        for _ in range(n_per_category):
            rec = held_out[int(rng.integers(0, len(held_out)))]
            clean = corpus.realize(rec)
            if category is NoiseCategory.CLEAN:
                wave = clean
            else:
                pool = corpus.noise_pool(category, "eval")
                noise = pool[int(rng.integers(0, len(pool)))]
                fitted = fit_noise(noise, len(clean), np.random.default_rng(int(rng.integers(0, 2**62))))
                wave = mix_at_snr(clean, fitted, float(rng.uniform(*eval_snr_range_db)))
            embeddings.append(embed_waveform(embedder, wave, fbank_cfg))
            labels.append(category)
    return np.stack(embeddings), labels


def _fit_softmax_regression(x: np.ndarray, y: np.ndarray, n_classes: int,
                            iters: int = 500, lr: float = 0.1, l2: float = 1e-4):
    """Full-batch gradient descent on multinomial logistic regression,
    zero-initialized; L2 applies to weights only."""
    n, d = x.shape
    w = np.zeros((n_classes, d))
    b = np.zeros(n_classes)
    onehot = np.eye(n_classes)[y]
    for _ in range(iters):
        z = x @ w.T + b
        z -= z.max(axis=1, keepdims=True)
        p = np.exp(z)
        p /= p.sum(axis=1, keepdims=True)
        err = (p - onehot) / n
        w -= lr * (err.T @ x + l2 * w)
        b -= lr * err.sum(axis=0)
    return w, b


def residual_probe(embeddings: np.ndarray, aug_labels: list[NoiseCategory], seed: int) -> float:
    """Held-out accuracy of an augmentation-label probe on frozen
    embeddings, averaged over 3 internal 70/30 splits. Classes are
    balanced by subsampling before splitting; features are standardized
    with train-split statistics."""
    embeddings = np.asarray(embeddings, dtype=np.float64)
    labels = [NoiseCategory(c) for c in aug_labels]
    if embeddings.shape[0] != len(labels):
        raise ValueError("embeddings/labels length mismatch")
    classes = sorted(set(labels), key=lambda c: c.value)
    if len(classes) < 2:
        raise ValueError("residual probe needs at least 2 categories")
    index = {c: k for k, c in enumerate(classes)}
    y_all = np.array([index[c] for c in labels])

    per_class = min(int((y_all == k).sum()) for k in range(len(classes)))
    if per_class < 4:
        raise ValueError("need at least 4 examples per category")
    accuracies = []
    for split in range(3):
        rng = rng_from(seed, "probe", split)
        train_idx, test_idx = [], []
        for k in range(len(classes)):
            members = np.flatnonzero(y_all == k)
            chosen = rng.choice(members, size=per_class, replace=False)
            n_train = int(round(0.7 * per_class))
            n_train = min(max(n_train, 1), per_class - 1)
            train_idx.extend(chosen[:n_train].tolist())
            test_idx.extend(chosen[n_train:].tolist())
        x_train, y_train = embeddings[train_idx], y_all[train_idx]
        x_test, y_test = embeddings[test_idx], y_all[test_idx]
        mu = x_train.mean(axis=0)
        sd = x_train.std(axis=0)
        sd[sd < 1e-12] = 1.0
        w, b = _fit_softmax_regression((x_train - mu) / sd, y_train, len(classes))
        pred = np.argmax(((x_test - mu) / sd) @ w.T + b, axis=1)
        accuracies.append(float((pred == y_test).mean()))
    return float(np.mean(accuracies))


__all__ = [
    "CONDITIONS",
    "Trial",
    "ScoreSet",
    "sample_trials",
    "build_trials",
    "cosine_score",
    "compute_eer",
    "embed_waveform",
    "evaluate",
    "write_trials",
    "write_scores",
    "build_probe_set",
    "residual_probe",
]
