"""Batch sampling and augmentation-pair construction.

Each training batch draws S distinct speakers with one utterance each.
Augmentation is decided per utterance by a Bernoulli(p_aug) coin (6:4
prior at the default 0.6), the category uniformly among the enabled
seen categories, and the SNR uniformly from the configured range, with
fresh noise mixed on the fly; a quota mode (exactly round(S*N*p_aug)
augmented per batch) and a static mode (reuse the corpus's fixed
augmented copies) are available as alternatives.

Sampling is split into a cheap metadata plan and its realization so
that distribution tests can run over many steps without synthesizing
audio, and so a batch is a pure function of (seed, step).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corpus import Corpus, NoiseCategory, SEEN_CATEGORIES, fit_noise, mix_at_snr
from .features import FbankConfig, fbank
from .seeding import derive_seed, rng_from


@dataclass(frozen=True)
class BatchSpec:
    S: int = 8
    N: int = 1
    p_aug: float = 0.6
    enabled_categories: tuple[NoiseCategory, ...] = SEEN_CATEGORIES
    snr_range_db: tuple[float, float] = (0.0, 20.0)
    #: "bernoulli": independent coin per utterance. "quota": exactly
    #: round(S*N*p_aug) utterances augmented per batch.
    aug_decision: str = "bernoulli"
    #: "otf": mix fresh noise per step. "static": reuse the corpus's
    #: pre-built augmented copies (fixed SNR per copy).
    augment_mode: str = "otf"
    fbank: FbankConfig = field(default_factory=FbankConfig)

    def validate(self, corpus: Corpus | None = None) -> None:
        if self.S < 2:
            raise ValueError("S must be >= 2")
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if not 0.0 <= self.p_aug <= 1.0:
            raise ValueError("p_aug must lie in [0, 1]")
        if self.p_aug > 0 and not self.enabled_categories:
            raise ValueError("p_aug > 0 requires at least one enabled category")
        for cat in self.enabled_categories:
            if NoiseCategory(cat) not in SEEN_CATEGORIES:
                raise ValueError(f"category {NoiseCategory(cat).value!r} is not a seen training category")
        if self.aug_decision not in ("bernoulli", "quota"):
            raise ValueError(f"unknown aug_decision {self.aug_decision!r}")
        if self.augment_mode not in ("otf", "static"):
            raise ValueError(f"unknown augment_mode {self.augment_mode!r}")
        if corpus is not None:
            if self.S > corpus.cfg.n_speakers:
                raise ValueError(f"S={self.S} exceeds the {corpus.cfg.n_speakers} available speakers")
            if self.augment_mode == "static":
                if not corpus.cfg.static_copies:
                    raise ValueError("static augment mode needs a corpus built with static copies")
                missing = [c.value for c in self.enabled_categories if c not in corpus.cfg.enabled_categories]
                if missing:
                    raise ValueError(f"corpus has no static copies for categories {missing}")


@dataclass(frozen=True)
class PlannedUtterance:
    """Everything needed to realize one batch slot, without audio."""

    utt_id: str
    speaker_id: int
    category: NoiseCategory
    snr_db: float | None
    noise_index: int | None
    fit_seed: int | None


@dataclass(frozen=True)
class BatchPlan:
    seed: int
    step: int
    utterances: tuple[PlannedUtterance, ...]

    @property
    def aug_labels(self) -> list[NoiseCategory]:
        return [u.category for u in self.utterances]


@dataclass(frozen=True)
class SampledBatch:
    features: list[np.ndarray]
    speaker_ids: list[int]
    aug_labels: list[NoiseCategory]
    utt_ids: list[str]

    def __post_init__(self):
        n = len(self.features)
        if not (len(self.speaker_ids) == len(self.aug_labels) == len(self.utt_ids) == n):
            raise ValueError("batch field lengths disagree")


def plan_batch(corpus: Corpus, spec: BatchSpec, seed: int, step: int) -> BatchPlan:
    """Choose speakers, utterances, and augmentation decisions for one step."""
    spec.validate(corpus)
    rng = rng_from(seed, "batch", step)
    speakers = rng.choice(corpus.speaker_ids, size=spec.S, replace=False)

    n_slots = spec.S * spec.N
    if spec.aug_decision == "quota":
        n_aug = int(round(n_slots * spec.p_aug))
        aug_slots = set(rng.choice(n_slots, size=n_aug, replace=False).tolist())
    planned = []
    slot = 0
    for spk in speakers.tolist():
        clean_records = corpus.clean_train_records(spk)
        picks = rng.integers(0, len(clean_records), size=spec.N)
        for pick in picks.tolist():
            rec = clean_records[pick]
            if spec.aug_decision == "bernoulli":
                augment = rng.random() < spec.p_aug
            else:
                augment = slot in aug_slots
            if not augment:
                planned.append(PlannedUtterance(rec.utt_id, spk, NoiseCategory.CLEAN, None, None, None))
            else:
                cat = spec.enabled_categories[int(rng.integers(0, len(spec.enabled_categories)))]
                if spec.augment_mode == "static":
                    copy = corpus.augmented_record(rec, cat)
                    planned.append(PlannedUtterance(copy.utt_id, spk, cat, copy.snr_db, None, None))
                else:
                    snr = float(rng.uniform(*spec.snr_range_db))
                    noise_index = int(rng.integers(0, corpus.cfg.noise_pool_size))
                    fit_seed = derive_seed(seed, "fit", step, slot)
                    planned.append(PlannedUtterance(rec.utt_id, spk, cat, snr, noise_index, fit_seed))
            slot += 1
    return BatchPlan(seed, step, tuple(planned))


def realize_batch(corpus: Corpus, plan: BatchPlan, fbank_cfg: FbankConfig | None = None) -> SampledBatch:
    """Synthesize/mix audio for a plan and extract features."""
    fbank_cfg = fbank_cfg or FbankConfig()
    feats, speaker_ids, labels, utt_ids = [], [], [], []
    for p in plan.utterances:
        rec = corpus.record(p.utt_id)
        if p.noise_index is None:
            wave = corpus.realize(rec)
        else:
            clean = corpus.realize(rec)
            pool = corpus.noise_pool(p.category, "train")
            noise = fit_noise(pool[p.noise_index], len(clean), np.random.default_rng(p.fit_seed))
            wave = mix_at_snr(clean, noise, p.snr_db)
        feats.append(fbank(wave, fbank_cfg))
        speaker_ids.append(p.speaker_id)
        labels.append(p.category)
        utt_ids.append(p.utt_id)
    return SampledBatch(feats, speaker_ids, labels, utt_ids)


def sample_batch(corpus: Corpus, spec: BatchSpec, seed: int, step: int) -> SampledBatch:
    return realize_batch(corpus, plan_batch(corpus, spec, seed, step), spec.fbank)


@dataclass(frozen=True)
class PairSet:
    """Unordered index pairs with same-augmentation targets.

    ``degenerate`` marks a set where one side (same or different) was
    empty, so balancing was impossible and the other side is returned
    whole.
    """

    index_pairs: tuple[tuple[int, int], ...]
    targets: tuple[int, ...]
    degenerate: bool = False

    def __len__(self) -> int:
        return len(self.index_pairs)

    @property
    def n_same(self) -> int:
        return sum(self.targets)

    @property
    def n_diff(self) -> int:
        return len(self.targets) - self.n_same


def make_pairs(
    aug_labels: list[NoiseCategory],
    seed: int,
    exclude_clean: bool = False,
) -> PairSet:
    """All unordered pairs, balanced by subsampling the majority side.

    Clean counts as its own category for the same/different target;
    ``exclude_clean`` instead drops every pair touching a clean
    utterance before balancing.
    """
    labels = [NoiseCategory(c) for c in aug_labels]
    if len(labels) < 2:
        raise ValueError("need at least 2 labels to form pairs")
    same, diff = [], []
    for i in range(len(labels)):
        for j in range(i + 1, len(labels)):
            if exclude_clean and (labels[i] is NoiseCategory.CLEAN or labels[j] is NoiseCategory.CLEAN):
                continue
            (same if labels[i] is labels[j] else diff).append((i, j))
    rng = rng_from(seed, "pairs")
    if same and diff:
        keep = min(len(same), len(diff))
        if len(same) > keep:
            same = [same[k] for k in sorted(rng.choice(len(same), size=keep, replace=False).tolist())]
        elif len(diff) > keep:
            diff = [diff[k] for k in sorted(rng.choice(len(diff), size=keep, replace=False).tolist())]
        degenerate = False
    else:
        degenerate = True
    pairs = sorted(same + diff)
    targets = tuple(1 if labels[i] is labels[j] else 0 for i, j in pairs)
    return PairSet(tuple(pairs), targets, degenerate)


__all__ = [
    "BatchSpec",
    "PlannedUtterance",
    "BatchPlan",
    "SampledBatch",
    "PairSet",
    "plan_batch",
    "realize_batch",
    "sample_batch",
    "make_pairs",
]
