"""Training objective: additive-angular-margin speaker loss, adversarial
augmentation loss, and their weighted combination L = L_spk + w * L_adv.

The speaker loss is AAM-Softmax: cosine logits against L2-normalized
class weights, the target class's angle pushed out by margin m, all
logits scaled by s, then mean cross-entropy. The adversarial loss is a
mean binary cross-entropy over same/different-augmentation pair logits
(with a per-embedding 4-class cross-entropy kept as an alternative
mode).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import torch
import torch.nn as nn
import torch.nn.functional as F

from .corpus import NoiseCategory

#: Class order for the multiclass adversarial mode and the residual probe.
TRAIN_CATEGORIES = (NoiseCategory.CLEAN, NoiseCategory.NOISE, NoiseCategory.MUSIC, NoiseCategory.SPEECH)

_COS_CLAMP = 1e-7


@dataclass(frozen=True)
class AamConfig:
    margin: float = 0.2
    scale: float = 30.0
    n_classes: int = 0  # filled in from the training-speaker count

    def __post_init__(self):
        if not 0.0 <= self.margin < math.pi / 2:
            raise ValueError("margin must lie in [0, pi/2)")
        if self.scale <= 0:
            raise ValueError("scale must be positive")


class AamHead(nn.Module):
    """Holds the class-weight matrix and applies the margin penalty."""

    def __init__(self, embedding_dim: int, cfg: AamConfig):
        super().__init__()
        if cfg.n_classes < 1:
            raise ValueError("n_classes must be >= 1")
        self.cfg = cfg
        self.weight = nn.Parameter(torch.empty(cfg.n_classes, embedding_dim))

    def cosines(self, embeddings: torch.Tensor) -> torch.Tensor:
        e = F.normalize(embeddings, dim=-1)
        w = F.normalize(self.weight, dim=-1)
        return torch.clamp(e @ w.t(), -1.0 + _COS_CLAMP, 1.0 - _COS_CLAMP)

    def forward(self, embeddings: torch.Tensor, labels: torch.Tensor) -> torch.Tensor:
        return aam_softmax(self.cosines(embeddings), labels, self.cfg)


def aam_softmax(cosines: torch.Tensor, labels: torch.Tensor, cfg: AamConfig) -> torch.Tensor:
    """Mean cross-entropy over margin-penalized scaled cosine logits.

    ``cosines`` is the (batch, n_classes) cosine-similarity matrix; the
    target entry cos(theta_y) becomes cos(theta_y + m) via the angle
    addition identity, using the clamped cosine so the sqrt stays
    differentiable at |cos| = 1.
    """
    if labels.min() < 0 or labels.max() >= cfg.n_classes:
        raise ValueError("speaker label out of range")
    cos_m, sin_m = math.cos(cfg.margin), math.sin(cfg.margin)
    sine = torch.sqrt(1.0 - cosines**2)
    penalized = cosines * cos_m - sine * sin_m
    # Past theta + m > pi the angle-addition form turns back upward;
    # switch to the monotone linear surrogate cos(theta) - m*sin(m)
    # there so a larger margin can never reduce the penalty.
    penalized = torch.where(
        cosines > math.cos(math.pi - cfg.margin),
        penalized,
        cosines - cfg.margin * sin_m,
    )
    one_hot = F.one_hot(labels, cfg.n_classes).to(cosines.dtype)
    logits = cfg.scale * (one_hot * penalized + (1.0 - one_hot) * cosines)
    return F.cross_entropy(logits, labels)


def adv_pair_loss(logits: torch.Tensor, targets: torch.Tensor) -> torch.Tensor:
    """Mean BCE on same-augmentation pair logits (stable logit form)."""
    if logits.numel() == 0:
        raise ValueError("no pair logits")
    if logits.shape != targets.shape:
        raise ValueError("logits/targets shape mismatch")
    return F.binary_cross_entropy_with_logits(logits, targets.to(logits.dtype))


def adv_multiclass_loss(logit_rows: torch.Tensor, labels: list[NoiseCategory]) -> torch.Tensor:
    """Mean 4-class cross-entropy over per-embedding category logits."""
    index = []
    for lab in labels:
        lab = NoiseCategory(lab)
        if lab not in TRAIN_CATEGORIES:
            raise ValueError(f"category {lab.value!r} is not a training category")
        index.append(TRAIN_CATEGORIES.index(lab))
    if logit_rows.shape[0] != len(index) or logit_rows.shape[1] != len(TRAIN_CATEGORIES):
        raise ValueError("logit rows must be (n, 4) matching the labels")
    return F.cross_entropy(logit_rows, torch.tensor(index, device=logit_rows.device))


@dataclass(frozen=True)
class LossBreakdown:
    """One step's loss components; ``l_adv`` is None when no pair loss
    was computable (degenerate pair set or non-adversarial system)."""

    l_spk: float
    l_adv: float | None
    adv_weight: float
    total: float

    def log_line(self, step: int) -> str:
        adv = "nan" if self.l_adv is None else f"{self.l_adv:.10g}"
        return f"{step} {self.l_spk:.10g} {adv} {self.total:.10g}"


def total_loss(l_spk: torch.Tensor, l_adv: torch.Tensor | None, adv_weight: float) -> torch.Tensor:
    """L = L_spk + w * L_adv (the weighted sum is the training scalar)."""
    if adv_weight < 0:
        raise ValueError("adversarial weight must be >= 0")
    if l_adv is None:
        return l_spk
    return l_spk + adv_weight * l_adv


__all__ = [
    "TRAIN_CATEGORIES",
    "AamConfig",
    "AamHead",
    "aam_softmax",
    "adv_pair_loss",
    "adv_multiclass_loss",
    "LossBreakdown",
    "total_loss",
]
