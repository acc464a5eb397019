"""Training loop for the three-system comparison.

``baseline`` trains on clean audio only (p_aug = 0), ``da`` adds
augmentation with no adversarial term (weight 0), and ``ada`` adds the
pair discriminator behind a gradient reversal layer so the total
objective is l_spk + adv_weight * l_adv in a single optimizer step.

Every batch is a pure function of (seed, step), so a checkpoint resume
continues the exact trajectory of an uninterrupted run and two runs
with the same config are bitwise identical. The log is one
``step l_spk l_adv total`` line per step, with ``nan`` standing in for
steps where no adversarial loss existed (non-adversarial systems or a
degenerate pair set).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from .checkpoint import load_checkpoint, save_checkpoint
from .corpus import Corpus, NoiseCategory, SEEN_CATEGORIES
from .losses import AamConfig, AamHead, LossBreakdown, adv_multiclass_loss, adv_pair_loss, total_loss
from .model import (
    CategoryDiscriminator,
    DiscriminatorConfig,
    EncoderConfig,
    PairDiscriminator,
    SpeakerEmbedder,
    grad_reverse,
    init_parameters,
)
from .sampler import BatchSpec, PairSet, make_pairs, sample_batch
from .seeding import derive_seed

SYSTEMS = ("baseline", "da", "ada")


class NonFiniteLossError(RuntimeError):
    """A loss or gradient went NaN/Inf; carries the step and breakdown."""

    def __init__(self, step: int, detail: str, l_spk: float, l_adv: float | None, total: float):
        super().__init__(
            f"non-finite value at step {step} ({detail}): l_spk={l_spk} l_adv={l_adv} total={total}"
        )
        self.step = step
        self.detail = detail
        self.l_spk = l_spk
        self.l_adv = l_adv
        self.total = total


@dataclass(frozen=True)
class TrainConfig:
    system: str = "ada"
    steps: int = 300
    batch_s: int = 8
    batch_n: int = 1
    adv_weight: float = 0.01
    p_aug: float = 0.6
    enabled_categories: tuple[NoiseCategory, ...] = SEEN_CATEGORIES
    snr_range_db: tuple[float, float] = (0.0, 20.0)
    aug_decision: str = "bernoulli"
    augment_mode: str = "otf"
    adv_mode: str = "pair"  # or "multiclass"
    exclude_clean_pairs: bool = False
    grl_scale: float = 1.0
    optimizer: str = "adam"
    lr: float | None = None  # None -> 1e-3 for adam, 0.01 for sgd
    momentum: float = 0.9
    weight_decay: float = 0.0
    seed: int = 0
    checkpoint_every: int = 0  # 0 -> only the final checkpoint
    dtype: str = "float32"
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    aam_margin: float = 0.2
    aam_scale: float = 30.0
    disc_hidden: int = 64

    def __post_init__(self):
        object.__setattr__(
            self, "enabled_categories", tuple(NoiseCategory(c) for c in self.enabled_categories)
        )

    def validate(self) -> None:
        if self.system not in SYSTEMS:
            raise ValueError(f"unknown system {self.system!r}; expected one of {SYSTEMS}")
        if self.system == "baseline" and self.p_aug != 0.0:
            raise ValueError("baseline requires p_aug = 0")
        if self.system in ("baseline", "da") and self.adv_weight != 0.0:
            raise ValueError(f"{self.system} requires adversarial weight 0")
        if self.system == "ada" and self.adv_weight <= 0.0:
            raise ValueError("ada requires adversarial weight > 0")
        if self.steps < 0:
            raise ValueError("steps must be >= 0")
        if self.adv_mode not in ("pair", "multiclass"):
            raise ValueError(f"unknown adv_mode {self.adv_mode!r}")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if self.dtype not in ("float32", "float64"):
            raise ValueError("dtype must be float32 or float64")
        if self.checkpoint_every < 0:
            raise ValueError("checkpoint_every must be >= 0")
        if self.grl_scale <= 0:
            raise ValueError("grl_scale must be positive")
        self.batch_spec().validate()
        AamConfig(self.aam_margin, self.aam_scale, n_classes=1)

    def batch_spec(self) -> BatchSpec:
        return BatchSpec(
            S=self.batch_s,
            N=self.batch_n,
            p_aug=self.p_aug,
            enabled_categories=self.enabled_categories,
            snr_range_db=self.snr_range_db,
            aug_decision=self.aug_decision,
            augment_mode=self.augment_mode,
        )

    @property
    def effective_lr(self) -> float:
        if self.lr is not None:
            return self.lr
        return 1e-3 if self.optimizer == "adam" else 0.01

    @property
    def torch_dtype(self) -> torch.dtype:
        return torch.float64 if self.dtype == "float64" else torch.float32

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["enabled_categories"] = [c.value for c in self.enabled_categories]
        d["snr_range_db"] = list(self.snr_range_db)
        enc = dataclasses.asdict(self.encoder)
        for key in ("widths", "time_strides", "freq_strides"):
            enc[key] = list(enc[key])
        d["encoder"] = enc
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        kwargs = dict(d)
        if "enabled_categories" in kwargs:
            kwargs["enabled_categories"] = tuple(NoiseCategory(c) for c in kwargs["enabled_categories"])
        if "snr_range_db" in kwargs:
            kwargs["snr_range_db"] = tuple(kwargs["snr_range_db"])
        if "encoder" in kwargs and isinstance(kwargs["encoder"], dict):
            enc = dict(kwargs["encoder"])
            for key in ("widths", "time_strides", "freq_strides"):
                if key in enc:
                    enc[key] = tuple(enc[key])
            kwargs["encoder"] = EncoderConfig(**enc)
        return cls(**kwargs)


class AdaNet(torch.nn.Module):
    """Embedder + speaker head + both discriminator heads in one module
    so a single optimizer covers every parameter."""

    def __init__(self, cfg: TrainConfig, n_speakers: int):
        super().__init__()
        self.embedder = SpeakerEmbedder(cfg.encoder)
        self.aam = AamHead(
            cfg.encoder.embedding_dim, AamConfig(cfg.aam_margin, cfg.aam_scale, n_classes=n_speakers)
        )
        self.pair_disc = PairDiscriminator(cfg.encoder.embedding_dim, DiscriminatorConfig(cfg.disc_hidden))
        self.cat_disc = CategoryDiscriminator(cfg.encoder.embedding_dim, hidden=cfg.disc_hidden)


@dataclass
class TrainState:
    cfg: TrainConfig
    net: AdaNet
    optimizer: torch.optim.Optimizer
    step: int = 0
    history: list[LossBreakdown] = field(default_factory=list)


def _build_optimizer(cfg: TrainConfig, net: AdaNet) -> torch.optim.Optimizer:
    if cfg.optimizer == "adam":
        return torch.optim.Adam(
            net.parameters(), lr=cfg.effective_lr, betas=(0.9, 0.999), weight_decay=cfg.weight_decay
        )
    return torch.optim.SGD(
        net.parameters(), lr=cfg.effective_lr, momentum=cfg.momentum, weight_decay=cfg.weight_decay
    )


def init_state(cfg: TrainConfig, n_speakers: int) -> TrainState:
    cfg.validate()
    net = AdaNet(cfg, n_speakers)
    init_parameters(net, cfg.seed)
    net.to(cfg.torch_dtype)
    return TrainState(cfg, net, _build_optimizer(cfg, net))


def embed_batch(net: AdaNet, feats: list[np.ndarray], dtype: torch.dtype) -> torch.Tensor:
    """Embed a list of feature matrices; one batched forward when all
    shapes agree, otherwise per-utterance forwards."""
    shapes = {f.shape for f in feats}
    if len(shapes) == 1:
        x = torch.from_numpy(np.stack(feats)).to(dtype)
        return net.embedder(x)
    return torch.stack([net.embedder(torch.from_numpy(f).to(dtype)) for f in feats])


def run_step(
    state: TrainState,
    feats: list[np.ndarray],
    speaker_labels: list[int],
    aug_labels: list[NoiseCategory],
    pairs: PairSet | None,
    adv: bool,
    adv_weight: float,
) -> LossBreakdown:
    """One forward/backward/update. ``adv`` switches the discriminator
    path on; the weight may be any value >= 0 (the config-level ban on
    ada with weight 0 lives in TrainConfig.validate, not here)."""
    cfg = state.cfg
    net = state.net
    emb = embed_batch(net, feats, cfg.torch_dtype)
    l_spk = net.aam(emb, torch.tensor(speaker_labels, dtype=torch.long))

    l_adv_t = None
    if adv:
        if cfg.adv_mode == "pair":
            if pairs is not None and len(pairs) > 0 and not pairs.degenerate:
                rev = grad_reverse(emb, cfg.grl_scale)
                idx_i = torch.tensor([i for i, _ in pairs.index_pairs], dtype=torch.long)
                idx_j = torch.tensor([j for _, j in pairs.index_pairs], dtype=torch.long)
                logits = net.pair_disc(rev[idx_i], rev[idx_j])
                l_adv_t = adv_pair_loss(logits, torch.tensor(pairs.targets, dtype=torch.long))
        else:
            rev = grad_reverse(emb, cfg.grl_scale)
            l_adv_t = adv_multiclass_loss(net.cat_disc(rev), aug_labels)

    total_t = total_loss(l_spk, l_adv_t, adv_weight)
    l_spk_v = float(l_spk.detach())
    l_adv_v = None if l_adv_t is None else float(l_adv_t.detach())
    total_v = float(total_t.detach())
    if not np.isfinite([l_spk_v, total_v] + ([l_adv_v] if l_adv_v is not None else [])).all():
        raise NonFiniteLossError(state.step, "loss", l_spk_v, l_adv_v, total_v)

    state.optimizer.zero_grad(set_to_none=True)
    total_t.backward()
    for name, p in state.net.named_parameters():
        if p.grad is not None and not torch.isfinite(p.grad).all():
            raise NonFiniteLossError(state.step, f"gradient of {name}", l_spk_v, l_adv_v, total_v)
    state.optimizer.step()
    state.step += 1

    out = LossBreakdown(l_spk_v, l_adv_v, adv_weight, total_v)
    state.history.append(out)
    return out


def train_step(state: TrainState, batch, pairs: PairSet | None) -> LossBreakdown:
    cfg = state.cfg
    adv = cfg.system == "ada"
    return run_step(
        state, batch.features, batch.speaker_ids, batch.aug_labels, pairs,
        adv=adv, adv_weight=cfg.adv_weight if adv else 0.0,
    )


def train(
    cfg: TrainConfig,
    corpus: Corpus,
    out_dir: str | Path | None = None,
    resume: TrainState | None = None,
) -> TrainState:
    """Run cfg.steps training steps (or the remainder when resuming),
    appending to train.log and writing final.ckpt under out_dir."""
    cfg.validate()
    if cfg.batch_s > corpus.cfg.n_speakers:
        raise ValueError(f"batch_s={cfg.batch_s} exceeds the {corpus.cfg.n_speakers}-speaker corpus")
    state = resume if resume is not None else init_state(cfg, corpus.cfg.n_speakers)
    spec = cfg.batch_spec()

    out_path = Path(out_dir) if out_dir is not None else None
    log_fh = None
    if out_path is not None:
        out_path.mkdir(parents=True, exist_ok=True)
        log_fh = open(out_path / "train.log", "a" if state.step > 0 else "w")
    try:
        for step in range(state.step, cfg.steps):
            batch = sample_batch(corpus, spec, cfg.seed, step)
            pairs = None
            if cfg.system == "ada" and cfg.adv_mode == "pair":
                pairs = make_pairs(
                    batch.aug_labels, derive_seed(cfg.seed, "pairs", step), cfg.exclude_clean_pairs
                )
            breakdown = train_step(state, batch, pairs)
            if log_fh is not None:
                log_fh.write(breakdown.log_line(step) + "\n")
                log_fh.flush()
            if out_path is not None and cfg.checkpoint_every > 0 and (step + 1) % cfg.checkpoint_every == 0:
                save_state(state, out_path / f"ckpt-{step + 1:06d}.ckpt")
    finally:
        if log_fh is not None:
            log_fh.close()
    if out_path is not None:
        save_state(state, out_path / "final.ckpt")
    return state


# -- checkpoint round-trip --------------------------------------------


def state_tensors(state: TrainState) -> dict[str, np.ndarray]:
    """Flatten model parameters and optimizer state to named arrays."""
    tensors: dict[str, np.ndarray] = {}
    for name, p in state.net.named_parameters():
        tensors[f"param.{name}"] = p.detach().cpu().numpy()
    for name, p in state.net.named_parameters():
        opt_state = state.optimizer.state.get(p)
        if not opt_state:
            continue
        for key, value in opt_state.items():
            if torch.is_tensor(value):
                tensors[f"opt.{name}.{key}"] = value.detach().cpu().numpy()
            else:
                tensors[f"opt.{name}.{key}"] = np.asarray(float(value))
    return tensors


def save_state(state: TrainState, path: str | Path) -> None:
    meta = {
        "kind": "train-state",
        "step": state.step,
        "config": state.cfg.to_dict(),
        "n_speakers": state.net.aam.cfg.n_classes,
    }
    save_checkpoint(path, state_tensors(state), meta)


def load_state(path: str | Path) -> TrainState:
    """Rebuild a TrainState that resumes the saved trajectory exactly."""
    tensors, meta = load_checkpoint(path)
    if meta.get("kind") != "train-state":
        raise ValueError(f"{path}: not a training checkpoint")
    cfg = TrainConfig.from_dict(meta["config"])
    state = init_state(cfg, meta["n_speakers"])
    state.step = int(meta["step"])
    params = dict(state.net.named_parameters())
    with torch.no_grad():
        for name, p in params.items():
            key = f"param.{name}"
            if key not in tensors:
                raise ValueError(f"{path}: missing tensor {key}")
            p.copy_(torch.from_numpy(tensors[key]).to(p.dtype))
    # Optimizer moment/step tensors mirror what a live optimizer would
    # hold (float32 step scalar, param-dtype moments), keyed by the
    # parameter objects of the rebuilt network.
    for name, p in params.items():
        entries = {
            key.split(".")[-1]: value
            for key, value in tensors.items()
            if key.startswith(f"opt.{name}.")
        }
        if not entries:
            continue
        opt_state: dict[str, torch.Tensor] = {}
        for key, value in entries.items():
            if key == "step":
                opt_state[key] = torch.tensor(float(value), dtype=torch.float32)
            else:
                opt_state[key] = torch.from_numpy(value).to(p.dtype)
        state.optimizer.state[p] = opt_state
    return state


def load_embedder(path: str | Path) -> tuple[SpeakerEmbedder, dict]:
    """Embedding-only view of a checkpoint, in float64 for scoring."""
    tensors, meta = load_checkpoint(path)
    cfg = TrainConfig.from_dict(meta["config"])
    embedder = SpeakerEmbedder(cfg.encoder).double()
    with torch.no_grad():
        for name, p in embedder.named_parameters():
            key = f"param.embedder.{name}"
            if key not in tensors:
                raise ValueError(f"{path}: missing tensor {key}")
            p.copy_(torch.from_numpy(tensors[key]))
    embedder.eval()
    return embedder, meta


__all__ = [
    "SYSTEMS",
    "NonFiniteLossError",
    "TrainConfig",
    "AdaNet",
    "TrainState",
    "init_state",
    "embed_batch",
    "run_step",
    "train_step",
    "train",
    "state_tensors",
    "save_state",
    "load_state",
    "load_embedder",
]
