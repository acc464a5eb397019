"""Embedding extractor, gradient reversal, and discriminator heads.

The extractor is a small residual convolution stack over the
time-frequency map (a desk-scale stand-in for a ResNet34 trunk),
followed by attentive statistics pooling and an affine read-out to a
256-dimensional embedding. Smooth nonlinearities (GELU/tanh) and
GroupNorm are used throughout so every parameter admits a
finite-difference gradient check and inference carries no running
statistics.

Gradient reversal is an autograd identity whose backward negates and
scales the upstream gradient; the pairwise discriminator scores
|e_i - e_j| concatenated with e_i * e_j through one hidden layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import torch
import torch.nn as nn

from .seeding import derive_seed


@dataclass(frozen=True)
class EncoderConfig:
    widths: tuple[int, ...] = (16, 32, 64)
    time_strides: tuple[int, ...] = (2, 2, 1)
    freq_strides: tuple[int, ...] = (2, 2, 2)
    n_mels: int = 80
    embedding_dim: int = 256
    attention_hidden: int = 64
    group_size: int = 8
    #: Replaces the residual stack with a single stride-1 1x1 linear
    #: convolution (no norm, no activation) for ablation tests.
    identity_ablation: bool = False

    def __post_init__(self):
        if self.embedding_dim < 2:
            raise ValueError("embedding_dim must be >= 2")
        if not self.widths or any(w < 1 for w in self.widths):
            raise ValueError("widths must be non-empty positive integers")
        if not self.identity_ablation and not (
            len(self.widths) == len(self.time_strides) == len(self.freq_strides)
        ):
            raise ValueError("widths/time_strides/freq_strides must have equal lengths")
        if self.n_mels < 1 or self.attention_hidden < 1:
            raise ValueError("n_mels and attention_hidden must be >= 1")

    @property
    def total_time_stride(self) -> int:
        if self.identity_ablation:
            return 1
        return math.prod(self.time_strides)

    @property
    def frame_dim(self) -> int:
        """Per-frame channel count after flattening the frequency axis."""
        if self.identity_ablation:
            return self.widths[0] * self.n_mels
        f = self.n_mels
        for s in self.freq_strides:
            f = -(-f // s)
        return self.widths[-1] * f


def _group_norm(channels: int, group_size: int) -> nn.GroupNorm:
    return nn.GroupNorm(max(1, channels // group_size), channels)


class ResBlock(nn.Module):
    """3x3 conv pair with GroupNorm and GELU; strided shortcut when the
    shape changes."""

    def __init__(self, c_in: int, c_out: int, stride: tuple[int, int], group_size: int):
        super().__init__()
        self.conv1 = nn.Conv2d(c_in, c_out, 3, stride=stride, padding=1)
        self.norm1 = _group_norm(c_out, group_size)
        self.conv2 = nn.Conv2d(c_out, c_out, 3, padding=1)
        self.norm2 = _group_norm(c_out, group_size)
        self.act = nn.GELU()
        if stride != (1, 1) or c_in != c_out:
            self.shortcut = nn.Conv2d(c_in, c_out, 1, stride=stride)
        else:
            self.shortcut = nn.Identity()

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        h = self.act(self.norm1(self.conv1(x)))
        h = self.norm2(self.conv2(h))
        return self.act(h + self.shortcut(x))


class FrameEncoder(nn.Module):
    """(B, T, n_mels) features -> (B, T', frame_dim) frame vectors with
    T' = ceil(T / total_time_stride)."""

    def __init__(self, cfg: EncoderConfig):
        super().__init__()
        self.cfg = cfg
        if cfg.identity_ablation:
            self.stem = nn.Conv2d(1, cfg.widths[0], 1)
            self.stages = nn.Sequential()
        else:
            self.stem = nn.Sequential(
                nn.Conv2d(1, cfg.widths[0], 3, padding=1),
                _group_norm(cfg.widths[0], cfg.group_size),
                nn.GELU(),
            )
            blocks = []
            c_in = cfg.widths[0]
            for c_out, ts, fs in zip(cfg.widths, cfg.time_strides, cfg.freq_strides):
                blocks.append(ResBlock(c_in, c_out, (ts, fs), cfg.group_size))
                c_in = c_out
            self.stages = nn.Sequential(*blocks)

    def forward(self, feats: torch.Tensor) -> torch.Tensor:
        if feats.dim() == 2:
            feats = feats.unsqueeze(0)
        t = feats.shape[1]
        if t < self.cfg.total_time_stride:
            raise ValueError(f"need at least {self.cfg.total_time_stride} frames, got {t}")
        x = feats.unsqueeze(1)  # (B, 1, T, F)
        x = self.stages(self.stem(x))
        b, c, t_out, f_out = x.shape
        return x.permute(0, 2, 1, 3).reshape(b, t_out, c * f_out)


class AttentiveStatsPool(nn.Module):
    """Scalar-per-frame attention over time; returns mu ++ sigma (2C).

    With a zero-initialized attention MLP the softmax is uniform and the
    output reduces exactly to plain mean/std statistics pooling.
    """

    def __init__(self, in_dim: int, hidden: int, eps: float = 1e-6):
        super().__init__()
        self.att = nn.Sequential(nn.Linear(in_dim, hidden), nn.Tanh(), nn.Linear(hidden, 1))
        self.eps = eps

    def forward(self, frames: torch.Tensor) -> torch.Tensor:
        if frames.dim() == 2:
            frames = frames.unsqueeze(0)
        w = torch.softmax(self.att(frames), dim=1)  # (B, T', 1)
        mu = (w * frames).sum(dim=1)
        second = (w * frames**2).sum(dim=1)
        sigma = torch.sqrt(torch.clamp(second - mu**2, min=self.eps))
        return torch.cat([mu, sigma], dim=-1)


class SpeakerEmbedder(nn.Module):
    """features -> frame encoder -> attentive stats -> affine read-out."""

    def __init__(self, cfg: EncoderConfig):
        super().__init__()
        self.cfg = cfg
        self.encoder = FrameEncoder(cfg)
        self.pool = AttentiveStatsPool(cfg.frame_dim, cfg.attention_hidden)
        self.readout = nn.Linear(2 * cfg.frame_dim, cfg.embedding_dim)

    def forward(self, feats: torch.Tensor) -> torch.Tensor:
        squeeze = feats.dim() == 2
        emb = self.readout(self.pool(self.encoder(feats)))
        return emb.squeeze(0) if squeeze else emb


class _GradReverse(torch.autograd.Function):
    @staticmethod
    def forward(ctx, x, scale):
        ctx.scale = scale
        return x.view_as(x)

    @staticmethod
    def backward(ctx, grad_output):
        return grad_output.neg() * ctx.scale, None


def grad_reverse(x: torch.Tensor, scale: float = 1.0) -> torch.Tensor:
    """Identity forward; backward multiplies the gradient by -scale."""
    if scale <= 0:
        raise ValueError("scale must be positive")
    return _GradReverse.apply(x, scale)


@dataclass(frozen=True)
class DiscriminatorConfig:
    hidden: int = 64

    def __post_init__(self):
        if self.hidden < 1:
            raise ValueError("hidden must be >= 1")


class PairDiscriminator(nn.Module):
    """Same/different-augmentation logit for an embedding pair.

    The pair feature |e_i - e_j| ++ (e_i * e_j) is symmetric in its
    arguments, so the logit is too.
    """

    def __init__(self, embedding_dim: int, cfg: DiscriminatorConfig = DiscriminatorConfig()):
        super().__init__()
        self.embedding_dim = embedding_dim
        self.net = nn.Sequential(nn.Linear(2 * embedding_dim, cfg.hidden), nn.Tanh(), nn.Linear(cfg.hidden, 1))

    def pair_feature(self, e_i: torch.Tensor, e_j: torch.Tensor) -> torch.Tensor:
        if e_i.shape[-1] != e_j.shape[-1]:
            raise ValueError("embedding dimensions disagree")
        if e_i.shape[-1] != self.embedding_dim:
            raise ValueError(f"expected dim {self.embedding_dim}, got {e_i.shape[-1]}")
        return torch.cat([(e_i - e_j).abs(), e_i * e_j], dim=-1)

    def forward(self, e_i: torch.Tensor, e_j: torch.Tensor) -> torch.Tensor:
        return self.net(self.pair_feature(e_i, e_j)).squeeze(-1)


class CategoryDiscriminator(nn.Module):
    """Per-embedding multiclass logits over the trainable categories
    plus clean (alternative adversarial mode)."""

    def __init__(self, embedding_dim: int, n_classes: int = 4, hidden: int = 64):
        super().__init__()
        self.net = nn.Sequential(nn.Linear(embedding_dim, hidden), nn.Tanh(), nn.Linear(hidden, n_classes))

    def forward(self, e: torch.Tensor) -> torch.Tensor:
        return self.net(e)


def init_parameters(module: nn.Module, seed: int) -> None:
    """Deterministic, thread-count-independent initialization.

    Parameters are visited in registration order; each gets its own
    generator stream derived from (seed, name), so adding an unrelated
    module never shifts another module's draws. Weight matrices are
    scaled by 1/sqrt(fan_in); biases start at zero and normalization
    scales at one.
    """
    norm_scales = {
        (f"{mname}.weight" if mname else "weight")
        for mname, m in module.named_modules()
        if isinstance(m, (nn.GroupNorm, nn.LayerNorm, nn.BatchNorm1d, nn.BatchNorm2d))
    }
    for name, p in module.named_parameters():
        with torch.no_grad():
            if name in norm_scales:
                p.fill_(1.0)
            elif p.dim() >= 2:
                gen = torch.Generator().manual_seed(derive_seed(seed, "init", name) & 0x7FFF_FFFF)
                fan_in = p.shape[1] * (p[0, 0].numel() if p.dim() > 2 else 1)
                vals = torch.randn(p.shape, generator=gen, dtype=torch.float64) / math.sqrt(fan_in)
                p.copy_(vals.to(p.dtype))
            else:
                p.zero_()


__all__ = [
    "EncoderConfig",
    "DiscriminatorConfig",
    "ResBlock",
    "FrameEncoder",
    "AttentiveStatsPool",
    "SpeakerEmbedder",
    "PairDiscriminator",
    "CategoryDiscriminator",
    "grad_reverse",
    "init_parameters",
]
