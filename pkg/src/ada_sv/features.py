"""Log-Mel filterbank features.

80-dimensional log-Mel energies over 25 ms Hamming windows with a 10 ms
shift, HTK mel scale, optional per-utterance mean normalization. The
binary dump format is a `T D` uint32 header followed by row-major
little-endian float32 frames.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Waveform


@dataclass(frozen=True)
class FbankConfig:
    n_mels: int = 80
    n_fft: int = 512
    frame_length_ms: float = 25.0
    frame_shift_ms: float = 10.0
    low_hz: float = 20.0
    high_hz: float = 7600.0
    log_floor: float = 1e-10
    cmn: bool = True

    def validate(self, sample_rate_hz: int) -> None:
        if self.n_mels < 1:
            raise ValueError("n_mels must be >= 1")
        if not (0 <= self.low_hz < self.high_hz <= sample_rate_hz / 2):
            raise ValueError("need 0 <= low_hz < high_hz <= Nyquist")
        if self.frame_length_ms <= 0 or self.frame_shift_ms <= 0:
            raise ValueError("frame length/shift must be positive")
        if self.n_fft < self.frame_samples(sample_rate_hz):
            raise ValueError("n_fft smaller than the frame length")
        if self.log_floor <= 0:
            raise ValueError("log_floor must be positive")

    def frame_samples(self, sample_rate_hz: int) -> int:
        return int(round(self.frame_length_ms * sample_rate_hz / 1000.0))

    def shift_samples(self, sample_rate_hz: int) -> int:
        return int(round(self.frame_shift_ms * sample_rate_hz / 1000.0))


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(cfg: FbankConfig, sample_rate_hz: int) -> np.ndarray:
    """Triangular mel filters as an (n_mels, n_fft//2 + 1) matrix."""
    n_bins = cfg.n_fft // 2 + 1
    fft_hz = np.arange(n_bins) * sample_rate_hz / cfg.n_fft
    edges_hz = mel_to_hz(np.linspace(hz_to_mel(cfg.low_hz), hz_to_mel(cfg.high_hz), cfg.n_mels + 2))
    fb = np.zeros((cfg.n_mels, n_bins))
    for i in range(cfg.n_mels):
        lo, center, hi = edges_hz[i], edges_hz[i + 1], edges_hz[i + 2]
        up = (fft_hz - lo) / (center - lo)
        down = (hi - fft_hz) / (hi - center)
        fb[i] = np.maximum(0.0, np.minimum(up, down))
    return fb


def band_centers_hz(cfg: FbankConfig) -> np.ndarray:
    """Center frequency of each mel band (edge points 1..n_mels)."""
    edges_hz = mel_to_hz(np.linspace(hz_to_mel(cfg.low_hz), hz_to_mel(cfg.high_hz), cfg.n_mels + 2))
    return edges_hz[1:-1]


def n_frames(n_samples: int, cfg: FbankConfig, sample_rate_hz: int) -> int:
    frame = cfg.frame_samples(sample_rate_hz)
    if n_samples < frame:
        raise ValueError(f"waveform of {n_samples} samples is shorter than one {frame}-sample frame")
    return 1 + (n_samples - frame) // cfg.shift_samples(sample_rate_hz)


def fbank(w: Waveform, cfg: FbankConfig = FbankConfig()) -> np.ndarray:
    """Log-Mel feature matrix of shape (T, n_mels).

    Frames are Hamming-windowed, the magnitude-squared spectrum is
    pooled through the triangular mel filterbank, and band energies pass
    through log(max(energy, log_floor)). With cmn on, the per-band mean
    over the utterance is subtracted.
    """
    cfg.validate(w.sample_rate_hz)
    frame = cfg.frame_samples(w.sample_rate_hz)
    shift = cfg.shift_samples(w.sample_rate_hz)
    t = n_frames(len(w), cfg, w.sample_rate_hz)

    idx = np.arange(frame)[None, :] + shift * np.arange(t)[:, None]
    frames = w.samples[idx] * np.hamming(frame)[None, :]
    power = np.abs(np.fft.rfft(frames, n=cfg.n_fft, axis=1)) ** 2
    mel_energy = power @ mel_filterbank(cfg, w.sample_rate_hz).T
    feats = np.log(np.maximum(mel_energy, cfg.log_floor))
    if cfg.cmn:
        feats = feats - feats.mean(axis=0, keepdims=True)
    return feats


def write_feature_dump(path: str | Path, feats: np.ndarray) -> None:
    feats = np.asarray(feats)
    if feats.ndim != 2:
        raise ValueError("feature matrix must be 2-D")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(struct.pack("<II", feats.shape[0], feats.shape[1]))
        fh.write(np.ascontiguousarray(feats, dtype="<f4").tobytes())


def read_feature_dump(path: str | Path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < 8:
        raise ValueError("feature dump truncated: missing header")
    t, d = struct.unpack("<II", raw[:8])
    body = np.frombuffer(raw[8:], dtype="<f4")
    if body.size != t * d:
        raise ValueError(f"feature dump body has {body.size} values, header says {t}x{d}")
    return body.reshape(t, d).astype(np.float64)


__all__ = [
    "FbankConfig",
    "hz_to_mel",
    "mel_to_hz",
    "mel_filterbank",
    "band_centers_hz",
    "n_frames",
    "fbank",
    "write_feature_dump",
    "read_feature_dump",
]
