"""Synthetic multi-speaker corpus and additive-noise augmentation.

Stands in for a real speech + noise collection at desk scale: speakers
are harmonic sources with fixed per-speaker spectral signatures, and
five procedurally generated noise categories (stationary noise, music,
babble, car, cafe) support SNR-controlled mixing. Three of the
categories are trainable "seen" types; car and cafe are evaluation-only
"unseen" types.

Everything here is a pure function of its seed: rebuilding a corpus, a
single utterance, or a noise instance from the same inputs is bitwise
reproducible.
"""

from __future__ import annotations

import json
import wave
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

import numpy as np

from .seeding import derive_seed, rng_from


class NoiseCategory(str, Enum):
    CLEAN = "clean"
    NOISE = "noise"
    MUSIC = "music"
    SPEECH = "speech"
    CAR = "car"
    CAFE = "cafe"


#: Categories that may be used for training-time augmentation.
SEEN_CATEGORIES = (NoiseCategory.NOISE, NoiseCategory.MUSIC, NoiseCategory.SPEECH)
#: Evaluation-only categories never shown to the model during training.
UNSEEN_CATEGORIES = (NoiseCategory.CAR, NoiseCategory.CAFE)

_CATEGORY_ORDER = (
    NoiseCategory.CLEAN,
    NoiseCategory.NOISE,
    NoiseCategory.MUSIC,
    NoiseCategory.SPEECH,
    NoiseCategory.CAR,
    NoiseCategory.CAFE,
)

_SPLITS = ("train", "trial-enroll", "trial-test")
_SPLIT_TAG = {"train": "trn", "trial-enroll": "enr", "trial-test": "tst"}


@dataclass(frozen=True)
class Waveform:
    """Mono audio: float samples (nominal range [-1, 1]) plus a rate."""

    samples: np.ndarray
    sample_rate_hz: int = 16000

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        object.__setattr__(self, "samples", samples)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("waveform must be a non-empty 1-D sample array")
        if not np.isfinite(samples).all():
            raise ValueError("waveform contains non-finite samples")
        if self.sample_rate_hz <= 0:
            raise ValueError("sample rate must be positive")

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz


@dataclass(frozen=True)
class SpeakerProfile:
    """Fixed per-speaker voice identity.

    The spectral signature (per-band gains in dB at log-spaced center
    frequencies) is drawn once per speaker; individual utterances vary
    only in their excitation seed.
    """

    speaker_id: int
    fundamental_hz: float
    band_centers_hz: np.ndarray
    band_gains_db: np.ndarray


def make_speaker_profile(
    seed: int,
    speaker_id: int,
    f0_range_hz: tuple[float, float] = (80.0, 300.0),
    n_bands: int = 24,
    band_range_hz: tuple[float, float] = (100.0, 7600.0),
    gain_std_db: float = 6.0,
) -> SpeakerProfile:
    rng = rng_from(seed, "speaker", speaker_id)
    f0 = rng.uniform(*f0_range_hz)
    centers = np.geomspace(band_range_hz[0], band_range_hz[1], n_bands)
    gains = rng.normal(0.0, gain_std_db, n_bands)
    return SpeakerProfile(speaker_id, f0, centers, gains)


def _peak_normalize(x: np.ndarray, peak: float = 0.9) -> np.ndarray:
    m = np.max(np.abs(x))
    if m == 0.0:
        return x
    return x * (peak / m)


def _smooth_envelope(rng: np.random.Generator, n: int, sample_rate_hz: int, rate_hz: float) -> np.ndarray:
    """Slow positive modulation in (0.35, 1.0), interpolated from coarse noise."""
    n_nodes = max(3, int(np.ceil(n / sample_rate_hz * rate_hz)) + 2)
    nodes = rng.standard_normal(n_nodes)
    t = np.linspace(0.0, n_nodes - 1.0, n)
    z = np.interp(t, np.arange(n_nodes), nodes)
    return 0.35 + 0.65 * (0.5 + 0.5 * np.tanh(z))


def synth_utterance(
    profile: SpeakerProfile,
    duration_s: float,
    seed: int,
    sample_rate_hz: int = 16000,
) -> Waveform:
    """Voiced utterance: vibrato-modulated harmonic stack shaped by the
    speaker signature, with a syllable-like amplitude envelope and a low
    excitation-noise floor. Peak-normalized to 0.9.
    """
    if duration_s <= 0:
        raise ValueError("duration_s must be positive")
    n = int(round(duration_s * sample_rate_hz))
    if n < 1:
        raise ValueError("duration_s too short for one sample")
    rng = np.random.default_rng(seed)
    t = np.arange(n) / sample_rate_hz

    vib_rate = rng.uniform(3.0, 7.0)
    vib_depth = rng.uniform(0.005, 0.02)
    vib_phase = rng.uniform(0.0, 2.0 * np.pi)
    f_inst = profile.fundamental_hz * (1.0 + vib_depth * np.sin(2.0 * np.pi * vib_rate * t + vib_phase))
    phase = 2.0 * np.pi * np.cumsum(f_inst) / sample_rate_hz

    max_h = int(np.floor(0.45 * sample_rate_hz / profile.fundamental_hz))
    k = np.arange(1, min(60, max_h) + 1)
    gains_db = np.interp(
        np.log(k * profile.fundamental_hz),
        np.log(profile.band_centers_hz),
        profile.band_gains_db,
    )
    amps = 10.0 ** (gains_db / 20.0) / k**0.6
    phases = rng.uniform(0.0, 2.0 * np.pi, k.size)

    harm = amps @ np.sin(np.outer(k, phase) + phases[:, None])
    env = _smooth_envelope(rng, n, sample_rate_hz, rate_hz=6.0)
    x = _peak_normalize(harm * env, 1.0)
    x = x + 0.015 * rng.standard_normal(n)
    return Waveform(_peak_normalize(x), sample_rate_hz)


def _shaped_noise(rng: np.random.Generator, n: int, sample_rate_hz: int, gain_fn) -> np.ndarray:
    """White noise shaped in the frequency domain by an amplitude response."""
    white = rng.standard_normal(n)
    spec = np.fft.rfft(white)
    f = np.fft.rfftfreq(n, d=1.0 / sample_rate_hz)
    return np.fft.irfft(spec * gain_fn(f), n)


def synth_noise(
    category: NoiseCategory,
    duration_s: float,
    seed: int,
    sample_rate_hz: int = 16000,
) -> Waveform:
    """Deterministic noise instance of one of the five non-clean categories."""
    category = NoiseCategory(category)
    if category is NoiseCategory.CLEAN:
        raise ValueError("cannot synthesize the 'clean' category")
    if duration_s <= 0:
        raise ValueError("duration_s must be positive")
    n = int(round(duration_s * sample_rate_hz))
    rng = np.random.default_rng(derive_seed(seed, "noise", category.value))
    t = np.arange(n) / sample_rate_hz

    if category is NoiseCategory.NOISE:
        tilt = rng.uniform(-1.2, 0.3)
        x = _shaped_noise(rng, n, sample_rate_hz, lambda f: ((f + 50.0) / 1000.0) ** (tilt / 2.0))
    elif category is NoiseCategory.MUSIC:
        n_tones = rng.integers(3, 9)
        x = np.zeros(n)
        for _ in range(n_tones):
            midi = rng.integers(45, 78)
            f0 = 440.0 * 2.0 ** ((midi - 69) / 12.0)
            gain = rng.uniform(0.4, 1.0)
            env_rate = rng.uniform(0.08, 0.5)
            env_phase = rng.uniform(0.0, 2.0 * np.pi)
            tone = np.zeros(n)
            for h in range(1, 5):
                if h * f0 >= 0.45 * sample_rate_hz:
                    break
                ph = rng.uniform(0.0, 2.0 * np.pi)
                tone += h**-1.5 * np.sin(2.0 * np.pi * h * f0 * t + ph)
            env = 0.5 * (1.0 - np.cos(2.0 * np.pi * env_rate * t + env_phase))
            x += gain * tone * env
    elif category is NoiseCategory.SPEECH:
        x = _babble(rng, n, duration_s, sample_rate_hz)
    elif category is NoiseCategory.CAR:
        x = _shaped_noise(rng, n, sample_rate_hz, lambda f: 1.0 / (1.0 + (f / 120.0) ** 3))
        engine_f0 = rng.uniform(25.0, 45.0)
        for h in range(1, 6):
            ph = rng.uniform(0.0, 2.0 * np.pi)
            x += 0.15 * np.std(x) / h * np.sin(2.0 * np.pi * h * engine_f0 * t + ph)
    else:  # CAFE
        x = _babble(rng, n, duration_s, sample_rate_hz)
        x = _peak_normalize(x, 1.0)
        n_bursts = rng.poisson(1.2 * duration_s)
        for _ in range(n_bursts):
            width = int(rng.uniform(0.004, 0.025) * sample_rate_hz)
            start = rng.integers(0, max(1, n - width))
            burst = rng.standard_normal(width) * np.hanning(width)
            x[start : start + width] += rng.uniform(2.0, 4.0) * burst

    return Waveform(_peak_normalize(x), sample_rate_hz)


def _babble(rng: np.random.Generator, n: int, duration_s: float, sample_rate_hz: int) -> np.ndarray:
    """Sum of several ad-hoc synthetic voices."""
    n_voices = int(rng.integers(3, 7))
    x = np.zeros(n)
    for v in range(n_voices):
        voice_seed = int(rng.integers(0, 2**62))
        profile = make_speaker_profile(voice_seed, speaker_id=-1 - v)
        x += synth_utterance(profile, duration_s, voice_seed, sample_rate_hz).samples[:n]
    return x


def signal_power(w: Waveform) -> float:
    """Mean squared sample value."""
    if len(w) == 0:
        raise ValueError("empty waveform")
    return float(np.mean(w.samples**2))


def mix_at_snr(clean: Waveform, noise: Waveform, snr_db: float) -> Waveform:
    """Add noise to a clean signal at an exact component SNR.

    The noise is cropped to the clean length (tiling/offsetting shorter
    noise is the caller's concern, see :func:`fit_noise`) and scaled so
    that 10*log10(P_clean / P_scaled_noise) == snr_db by construction.
    No clipping is applied.
    """
    if clean.sample_rate_hz != noise.sample_rate_hz:
        raise ValueError("sample rate mismatch between clean and noise")
    if len(noise) < len(clean):
        raise ValueError("noise must be at least as long as the clean signal")
    crop = noise.samples[: len(clean)]
    p_noise = float(np.mean(crop**2))
    if p_noise <= 0.0:
        raise ValueError("noise has zero power in the mixed span")
    p_clean = float(np.mean(clean.samples**2))
    gain = np.sqrt(p_clean / (p_noise * 10.0 ** (snr_db / 10.0)))
    return Waveform(clean.samples + gain * crop, clean.sample_rate_hz)


def fit_noise(noise: Waveform, length: int, rng: np.random.Generator) -> Waveform:
    """Random-offset crop of a noise instance to an exact sample count,
    tiling first when the instance is shorter than the target."""
    if length < 1:
        raise ValueError("length must be positive")
    samples = noise.samples
    if samples.size < length:
        reps = int(np.ceil((length + samples.size) / samples.size))
        tiled = np.tile(samples, reps)
        offset = int(rng.integers(0, samples.size))
        segment = tiled[offset : offset + length]
    else:
        offset = int(rng.integers(0, samples.size - length + 1))
        segment = samples[offset : offset + length]
    return Waveform(segment.copy(), noise.sample_rate_hz)


@dataclass(frozen=True)
class CorpusConfig:
    """Knobs for the synthetic corpus.

    ``utts_per_speaker`` counts clean *training* utterances; enroll/test
    utterances for trials are held out separately. The default SNR range
    applies to every category unless overridden per category.
    """

    n_speakers: int = 20
    utts_per_speaker: int = 8
    n_enroll_per_speaker: int = 2
    n_test_per_speaker: int = 2
    duration_range_s: tuple[float, float] = (1.2, 2.0)
    sample_rate_hz: int = 16000
    enabled_categories: tuple[NoiseCategory, ...] = SEEN_CATEGORIES
    snr_range_db: tuple[float, float] = (0.0, 20.0)
    snr_ranges_by_category: dict[NoiseCategory, tuple[float, float]] = field(default_factory=dict)
    f0_range_hz: tuple[float, float] = (80.0, 300.0)
    signature_bands: int = 24
    signature_band_range_hz: tuple[float, float] = (100.0, 7600.0)
    signature_std_db: float = 6.0
    noise_pool_size: int = 6
    noise_pool_duration_s: float = 4.0
    static_copies: bool = True

    def __post_init__(self):
        cats = tuple(NoiseCategory(c) for c in self.enabled_categories)
        object.__setattr__(self, "enabled_categories", cats)

    def validate(self) -> None:
        if self.n_speakers < 2:
            raise ValueError("need at least 2 speakers to form trials")
        if self.utts_per_speaker < 1:
            raise ValueError("utts_per_speaker must be >= 1")
        if self.n_enroll_per_speaker < 1 or self.n_test_per_speaker < 1:
            raise ValueError("need at least one enroll and one test utterance per speaker")
        lo, hi = self.duration_range_s
        if lo <= 0 or hi < lo:
            raise ValueError("invalid duration range")
        if self.sample_rate_hz <= 0:
            raise ValueError("sample rate must be positive")
        for cat in self.enabled_categories:
            if cat not in SEEN_CATEGORIES:
                raise ValueError(f"category {cat.value!r} is not trainable (seen categories only)")
        if self.noise_pool_size < 1:
            raise ValueError("noise_pool_size must be >= 1")

    def snr_range_for(self, category: NoiseCategory) -> tuple[float, float]:
        return self.snr_ranges_by_category.get(NoiseCategory(category), self.snr_range_db)

    def to_dict(self) -> dict:
        return {
            "n_speakers": self.n_speakers,
            "utts_per_speaker": self.utts_per_speaker,
            "n_enroll_per_speaker": self.n_enroll_per_speaker,
            "n_test_per_speaker": self.n_test_per_speaker,
            "duration_range_s": list(self.duration_range_s),
            "sample_rate_hz": self.sample_rate_hz,
            "enabled_categories": [c.value for c in self.enabled_categories],
            "snr_range_db": list(self.snr_range_db),
            "snr_ranges_by_category": {c.value: list(r) for c, r in self.snr_ranges_by_category.items()},
            "f0_range_hz": list(self.f0_range_hz),
            "signature_bands": self.signature_bands,
            "signature_band_range_hz": list(self.signature_band_range_hz),
            "signature_std_db": self.signature_std_db,
            "noise_pool_size": self.noise_pool_size,
            "noise_pool_duration_s": self.noise_pool_duration_s,
            "static_copies": self.static_copies,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CorpusConfig":
        kwargs = dict(d)
        for key in ("duration_range_s", "snr_range_db", "f0_range_hz", "signature_band_range_hz"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        if "enabled_categories" in kwargs:
            kwargs["enabled_categories"] = tuple(NoiseCategory(c) for c in kwargs["enabled_categories"])
        if "snr_ranges_by_category" in kwargs:
            kwargs["snr_ranges_by_category"] = {
                NoiseCategory(c): tuple(r) for c, r in kwargs["snr_ranges_by_category"].items()
            }
        return cls(**kwargs)


@dataclass(frozen=True)
class UtteranceRecord:
    """Descriptor of one (possibly augmented) utterance.

    Records are pure metadata; the waveform is synthesized on demand
    from the stored seeds, so a corpus is cheap to build and manifests
    never depend on audio having been rendered.
    """

    utt_id: str
    speaker_id: int
    split: str
    category: NoiseCategory
    snr_db: float | None
    duration_s: float
    excitation_seed: int
    noise_seed: int | None = None

    def __post_init__(self):
        if (self.category is NoiseCategory.CLEAN) != (self.snr_db is None):
            raise ValueError("snr_db must be present iff the utterance is augmented")

    @property
    def wav_path(self) -> str:
        return f"wav/{self.utt_id}.wav"


@dataclass(frozen=True)
class AugmentedUtterance:
    """A realized utterance: waveform plus its labels."""

    waveform: Waveform
    speaker_id: int
    aug_label: NoiseCategory
    snr_db: float | None


class Corpus:
    """Deterministic utterance collection with train and trial splits."""

    def __init__(self, cfg: CorpusConfig, seed: int, speakers: list[SpeakerProfile], utterances: list[UtteranceRecord]):
        self.cfg = cfg
        self.seed = seed
        self.speakers = speakers
        self.utterances = utterances
        self._by_id = {u.utt_id: u for u in utterances}
        self._profile_by_id = {p.speaker_id: p for p in speakers}
        self._wave_cache: dict[str, Waveform] = {}
        self._noise_pools: dict[tuple[str, NoiseCategory], list[Waveform]] = {}

    @property
    def speaker_ids(self) -> list[int]:
        return [p.speaker_id for p in self.speakers]

    def profile(self, speaker_id: int) -> SpeakerProfile:
        return self._profile_by_id[speaker_id]

    def record(self, utt_id: str) -> UtteranceRecord:
        return self._by_id[utt_id]

    def records(self, split: str) -> list[UtteranceRecord]:
        if split not in _SPLITS:
            raise ValueError(f"unknown split {split!r}")
        return [u for u in self.utterances if u.split == split]

    def clean_train_records(self, speaker_id: int | None = None) -> list[UtteranceRecord]:
        return [
            u
            for u in self.utterances
            if u.split == "train"
            and u.category is NoiseCategory.CLEAN
            and (speaker_id is None or u.speaker_id == speaker_id)
        ]

    def augmented_record(self, clean: UtteranceRecord, category: NoiseCategory) -> UtteranceRecord:
        return self._by_id[f"{clean.utt_id}-{NoiseCategory(category).value}"]

    def realize(self, record: UtteranceRecord) -> Waveform:
        """Synthesize (and cache) the waveform for a record."""
        cached = self._wave_cache.get(record.utt_id)
        if cached is not None:
            return cached
        if record.category is NoiseCategory.CLEAN:
            wave_out = synth_utterance(
                self.profile(record.speaker_id), record.duration_s, record.excitation_seed, self.cfg.sample_rate_hz
            )
        else:
            base = self.realize(self.record(record.utt_id.rsplit("-", 1)[0]))
            noise = synth_noise(record.category, record.duration_s, record.noise_seed, self.cfg.sample_rate_hz)
            wave_out = mix_at_snr(base, noise, record.snr_db)
        self._wave_cache[record.utt_id] = wave_out
        return wave_out

    def load(self, utt_id: str) -> AugmentedUtterance:
        rec = self.record(utt_id)
        return AugmentedUtterance(self.realize(rec), rec.speaker_id, rec.category, rec.snr_db)

    def noise_pool(self, category: NoiseCategory, kind: str = "train") -> list[Waveform]:
        """Cached noise instances for on-the-fly mixing.

        ``kind`` separates the training pool from the evaluation pool so
        that test-time noise consists of fresh instances of each
        category rather than the exact waveforms seen in training.
        """
        category = NoiseCategory(category)
        if kind not in ("train", "eval"):
            raise ValueError(f"unknown noise pool kind {kind!r}")
        key = (kind, category)
        pool = self._noise_pools.get(key)
        if pool is None:
            pool = [
                synth_noise(
                    category,
                    self.cfg.noise_pool_duration_s,
                    derive_seed(self.seed, "noisepool", kind, category.value, i),
                    self.cfg.sample_rate_hz,
                )
                for i in range(self.cfg.noise_pool_size)
            ]
            self._noise_pools[key] = pool
        return pool

    # -- manifest / disk interface ------------------------------------

    def manifest_lines(self) -> list[str]:
        lines = []
        for u in self.utterances:
            snr = "NA" if u.snr_db is None else f"{u.snr_db:.6f}"
            lines.append(f"{u.utt_id} {u.speaker_id} {u.category.value} {snr} {u.wav_path}")
        return lines

    def write_manifest(self, path: str | Path) -> None:
        Path(path).write_text("\n".join(self.manifest_lines()) + "\n")

    def write_sidecar(self, path: str | Path) -> None:
        payload = {"seed": self.seed, "config": self.cfg.to_dict()}
        Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")

    def export_wavs(self, out_dir: str | Path) -> None:
        out_dir = Path(out_dir)
        for u in self.utterances:
            write_wav(out_dir / u.wav_path, self.realize(u))


def build_corpus(cfg: CorpusConfig, seed: int) -> Corpus:
    """Assemble the corpus manifest: clean train utterances, one static
    augmented copy per enabled category (the (k+1)-fold training set),
    and held-out clean enroll/test utterances for trials."""
    cfg.validate()
    speakers = [
        make_speaker_profile(
            seed,
            i,
            cfg.f0_range_hz,
            cfg.signature_bands,
            cfg.signature_band_range_hz,
            cfg.signature_std_db,
        )
        for i in range(cfg.n_speakers)
    ]
    records: list[UtteranceRecord] = []
    counts = {"train": cfg.utts_per_speaker, "trial-enroll": cfg.n_enroll_per_speaker, "trial-test": cfg.n_test_per_speaker}
    for split in _SPLITS:
        tag = _SPLIT_TAG[split]
        for spk in range(cfg.n_speakers):
            for u in range(counts[split]):
                dur = float(rng_from(seed, "dur", split, spk, u).uniform(*cfg.duration_range_s))
                utt_id = f"{tag}-s{spk:04d}-u{u:03d}"
                records.append(
                    UtteranceRecord(
                        utt_id=utt_id,
                        speaker_id=spk,
                        split=split,
                        category=NoiseCategory.CLEAN,
                        snr_db=None,
                        duration_s=dur,
                        excitation_seed=derive_seed(seed, "utt", split, spk, u),
                    )
                )
                if split == "train" and cfg.static_copies:
                    for cat in _CATEGORY_ORDER:
                        if cat not in cfg.enabled_categories:
                            continue
                        snr = float(rng_from(seed, "snr", spk, u, cat.value).uniform(*cfg.snr_range_for(cat)))
                        records.append(
                            UtteranceRecord(
                                utt_id=f"{utt_id}-{cat.value}",
                                speaker_id=spk,
                                split=split,
                                category=cat,
                                snr_db=snr,
                                duration_s=dur,
                                excitation_seed=derive_seed(seed, "utt", split, spk, u),
                                noise_seed=derive_seed(seed, "copy-noise", spk, u, cat.value),
                            )
                        )
    return Corpus(cfg, seed, speakers, records)


def load_corpus(corpus_dir: str | Path, verify_manifest: bool = True) -> Corpus:
    """Rebuild a corpus from its sidecar config, optionally checking that
    the regenerated manifest matches the one on disk."""
    corpus_dir = Path(corpus_dir)
    sidecar = corpus_dir / "corpus.json"
    if not sidecar.exists():
        raise FileNotFoundError(f"missing corpus sidecar: {sidecar}")
    payload = json.loads(sidecar.read_text())
    corpus = build_corpus(CorpusConfig.from_dict(payload["config"]), payload["seed"])
    manifest = corpus_dir / "manifest.txt"
    if verify_manifest and manifest.exists():
        on_disk = manifest.read_text()
        regenerated = "\n".join(corpus.manifest_lines()) + "\n"
        if on_disk != regenerated:
            raise ValueError(f"manifest {manifest} does not match its sidecar config")
    return corpus


def write_wav(path: str | Path, w: Waveform) -> None:
    """16-bit mono PCM export; values are clamped to [-1, 1] here only."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    clamped = np.clip(w.samples, -1.0, 1.0)
    pcm = (clamped * 32767.0).round().astype("<i2")
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(w.sample_rate_hz)
        fh.writeframes(pcm.tobytes())


def read_wav(path: str | Path) -> Waveform:
    with wave.open(str(path), "rb") as fh:
        if fh.getnchannels() != 1 or fh.getsampwidth() != 2:
            raise ValueError("expected 16-bit mono WAV")
        rate = fh.getframerate()
        pcm = np.frombuffer(fh.readframes(fh.getnframes()), dtype="<i2")
    return Waveform(pcm.astype(np.float64) / 32767.0, rate)


__all__ = [
    "NoiseCategory",
    "SEEN_CATEGORIES",
    "UNSEEN_CATEGORIES",
    "Waveform",
    "SpeakerProfile",
    "AugmentedUtterance",
    "UtteranceRecord",
    "CorpusConfig",
    "Corpus",
    "make_speaker_profile",
    "synth_utterance",
    "synth_noise",
    "signal_power",
    "mix_at_snr",
    "fit_noise",
    "build_corpus",
    "load_corpus",
    "write_wav",
    "read_wav",
]
