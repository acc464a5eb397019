"""Acceptance suite: the eight guarantees this package ships with.

Each test prints one PASS/FAIL line (visible even under pytest's output
capture). Checks 6 and 7 share a session-scoped training pass — three
systems x five seeds on a 30-speaker corpus, roughly half an hour of
single-threaded CPU — so run this file with patience or deselect it via
`-k "not direction and not unseen"` during development.  The remaining
checks finish in seconds.
"""

import json
import time

import numpy as np
import pytest
import torch

from test_evaluation import brute_force_eer
from test_model import fd_check, small_encoder_cfg

from ada_sv.cli import EXIT_OK, main
from ada_sv.corpus import (
    NoiseCategory,
    make_speaker_profile,
    mix_at_snr,
    synth_noise,
    synth_utterance,
)
from ada_sv.evaluation import compute_eer
from ada_sv.experiment import ExperimentConfig, compare, synth_corpus
from ada_sv.losses import AamConfig, AamHead, aam_softmax, adv_pair_loss
from ada_sv.model import (
    AttentiveStatsPool,
    PairDiscriminator,
    SpeakerEmbedder,
    grad_reverse,
    init_parameters,
)
from ada_sv.sampler import make_pairs, sample_batch
from ada_sv.seeding import derive_seed
from ada_sv.train import TrainConfig, init_state, run_step


def announce(capsys, name: str, passed: bool, detail: str = ""):
    suffix = f" ({detail})" if detail else ""
    with capsys.disabled():
        print(f"\n[acceptance] {name}: {'PASS' if passed else 'FAIL'}{suffix}")
    assert passed, f"{name}{suffix}"


# -- 1: gradient reversal ---------------------------------------------


def test_1_gradient_reversal_flips_encoder_gradients(capsys):
    """Adversarial gradients reach the encoder negated (scale 1) while
    discriminator gradients are untouched, within 1e-9 relative."""
    t0 = time.time()
    torch.manual_seed(0)
    embedder = SpeakerEmbedder(small_encoder_cfg()).double()
    init_parameters(embedder, seed=5)
    disc = PairDiscriminator(12).double()
    init_parameters(disc, seed=6)

    rng = np.random.default_rng(7)
    feats = torch.tensor(rng.normal(size=(6, 20, 16)))
    labels = [
        NoiseCategory.CLEAN, NoiseCategory.NOISE, NoiseCategory.CLEAN,
        NoiseCategory.MUSIC, NoiseCategory.SPEECH, NoiseCategory.NOISE,
    ]
    pairs = make_pairs(labels, seed=8)
    assert not pairs.degenerate
    idx_i = torch.tensor([i for i, _ in pairs.index_pairs])
    idx_j = torch.tensor([j for _, j in pairs.index_pairs])
    targets = torch.tensor(pairs.targets)

    def adv_loss(reverse: bool):
        emb = embedder(feats)
        h = grad_reverse(emb, 1.0) if reverse else emb
        return adv_pair_loss(disc(h[idx_i], h[idx_j]), targets)

    enc_params = list(embedder.parameters())
    disc_params = list(disc.parameters())
    with_grl = torch.autograd.grad(adv_loss(True), enc_params + disc_params)
    without = torch.autograd.grad(adv_loss(False), enc_params + disc_params)

    worst = 0.0
    for g_rev, g_id in zip(with_grl[: len(enc_params)], without[: len(enc_params)]):
        err = (g_rev + g_id).abs().max().item()
        scale = max(g_id.abs().max().item(), 1e-30)
        worst = max(worst, err / scale)
    disc_equal = all(
        torch.equal(a, b)
        for a, b in zip(with_grl[len(enc_params):], without[len(enc_params):])
    )
    elapsed = time.time() - t0
    announce(
        capsys, "gradient-reversal", worst < 1e-9 and disc_equal and elapsed < 10.0,
        f"max encoder rel err {worst:.2e}, discriminator grads equal: {disc_equal}, {elapsed:.1f}s",
    )


# -- 2: finite-difference gradient checks -----------------------------


def test_2_finite_difference_gradients(capsys):
    """Speaker loss head, attentive pooling, discriminator, and the full
    embed+loss composite all match central finite differences (double
    precision, step 1e-5) within 1e-4 relative on 20 instances each."""
    t0 = time.time()
    instances = 0

    for k in range(20):  # speaker-loss head
        rng = np.random.default_rng(100 + k)
        head = AamHead(6, AamConfig(margin=0.2, scale=30.0, n_classes=4)).double()
        with torch.no_grad():
            head.weight.copy_(torch.tensor(rng.normal(size=(4, 6))))
        emb = torch.tensor(rng.normal(size=(5, 6)))
        labels = torch.tensor(rng.integers(0, 4, size=5))
        fd_check(lambda: head(emb, labels), [head.weight], n_probes=3, seed=k)
        instances += 1

    for k in range(20):  # attentive pooling
        rng = np.random.default_rng(200 + k)
        pool = AttentiveStatsPool(5, 4).double()
        frames = torch.tensor(rng.normal(size=(2, 9, 5)))
        fd_check(
            lambda: pool(frames).square().sum(),
            list(pool.parameters()), n_probes=2, seed=k,
        )
        instances += 1

    for k in range(20):  # pair discriminator
        rng = np.random.default_rng(300 + k)
        disc = PairDiscriminator(6).double()
        a = torch.tensor(rng.normal(size=(4, 6)))
        b = torch.tensor(rng.normal(size=(4, 6)))
        targets = torch.tensor(rng.integers(0, 2, size=4))
        fd_check(
            lambda: adv_pair_loss(disc(a, b), targets),
            list(disc.parameters()), n_probes=2, seed=k,
        )
        instances += 1

    for k in range(20):  # full embed + speaker-loss composite
        rng = np.random.default_rng(400 + k)
        embedder = SpeakerEmbedder(small_encoder_cfg()).double()
        init_parameters(embedder, seed=500 + k)
        head = AamHead(12, AamConfig(margin=0.2, scale=30.0, n_classes=3)).double()
        with torch.no_grad():
            head.weight.copy_(torch.tensor(rng.normal(size=(3, 12))))
        feats = torch.tensor(rng.normal(size=(3, 14, 16)))
        labels = torch.tensor(rng.integers(0, 3, size=3))
        fd_check(
            lambda: head(embedder(feats), labels),
            list(embedder.parameters()) + [head.weight], n_probes=1, seed=k,
        )
        instances += 1

    elapsed = time.time() - t0
    announce(
        capsys, "finite-difference-gradients", elapsed < 120.0,
        f"{instances} instances, rel tol 1e-4, {elapsed:.1f}s",
    )


# -- 3: reduction suite -----------------------------------------------


def test_3_reductions(capsys, small_corpus):
    """(a) margin 0 / scale 1 speaker loss is plain cosine cross-entropy;
    (b) the adversarial system at weight 0 updates bitwise like plain
    augmentation; (c) zero attention reduces pooling to plain statistics."""
    # (a)
    rng = np.random.default_rng(31)
    cosines = torch.tensor(rng.uniform(-0.999, 0.999, size=(16, 5)))
    labels = torch.tensor(rng.integers(0, 5, size=16))
    ours = aam_softmax(cosines, labels, AamConfig(margin=0.0, scale=1.0, n_classes=5))
    plain = torch.nn.functional.cross_entropy(cosines, labels)
    a_err = abs(float(ours) - float(plain))
    a_ok = a_err < 1e-9

    # (b)
    cfg = TrainConfig(
        system="da", steps=1, batch_s=4, adv_weight=0.0, seed=3,
        encoder=small_encoder_cfg(n_mels=80), dtype="float64",
    )
    batch = sample_batch(small_corpus, cfg.batch_spec(), cfg.seed, 0)
    pairs = make_pairs(batch.aug_labels, derive_seed(cfg.seed, "pairs", 0))
    assert not pairs.degenerate
    state_da = init_state(cfg, small_corpus.cfg.n_speakers)
    state_zero = init_state(cfg, small_corpus.cfg.n_speakers)
    run_step(state_da, batch.features, batch.speaker_ids, batch.aug_labels, pairs,
             adv=False, adv_weight=0.0)
    run_step(state_zero, batch.features, batch.speaker_ids, batch.aug_labels, pairs,
             adv=True, adv_weight=0.0)
    b_ok = all(
        torch.equal(p, q)
        for (_, p), (_, q) in zip(
            state_da.net.named_parameters(), state_zero.net.named_parameters()
        )
    )

    # (c) -- 8 frames so the uniform weight 1/8 is an exact power of two
    pool = AttentiveStatsPool(6, 4).double()
    with torch.no_grad():
        for p in pool.parameters():
            p.zero_()
    frames = torch.tensor(np.random.default_rng(32).normal(size=(3, 8, 6)))
    mu = frames.mean(dim=1)
    second = (frames * frames).mean(dim=1)
    sigma = torch.sqrt(torch.clamp(second - mu * mu, min=1e-6))
    c_ok = torch.equal(pool(frames), torch.cat([mu, sigma], dim=1))

    announce(
        capsys, "reductions", a_ok and b_ok and c_ok,
        f"plain-CE err {a_err:.1e}; weight-0 bitwise: {b_ok}; plain-stats pooling: {c_ok}",
    )


# -- 4: SNR mixing accuracy -------------------------------------------


def test_4_snr_mixing(capsys):
    t0 = time.time()
    rng = np.random.default_rng(41)
    worst = 0.0
    checked = 0
    categories = [NoiseCategory.NOISE, NoiseCategory.MUSIC, NoiseCategory.SPEECH,
                  NoiseCategory.CAR, NoiseCategory.CAFE]
    for target_db in (-5.0, 0.0, 5.0, 20.0):
        for k in range(100):
            profile = make_speaker_profile(int(rng.integers(2**31)), speaker_id=0)
            clean = synth_utterance(profile, float(rng.uniform(0.4, 0.8)),
                                    int(rng.integers(2**31)))
            noise = synth_noise(categories[k % len(categories)], len(clean) / 16000.0,
                                int(rng.integers(2**31)))
            mixed = mix_at_snr(clean, noise, target_db)
            scaled = mixed.samples - clean.samples
            measured = 10.0 * np.log10(
                float(np.mean(clean.samples**2)) / float(np.mean(scaled**2))
            )
            worst = max(worst, abs(measured - target_db))
            checked += 1
    elapsed = time.time() - t0
    announce(
        capsys, "snr-mixing", worst < 0.01 and elapsed < 10.0,
        f"{checked} pairs, worst |error| {worst:.2e} dB, {elapsed:.1f}s",
    )


# -- 5: EER oracle equivalence ----------------------------------------


def test_5_eer_oracle(capsys):
    rng = np.random.default_rng(51)
    mismatches = 0
    for _ in range(200):
        n_tar = int(rng.integers(2, 500))
        n_non = int(rng.integers(2, 500))
        tar = rng.normal(rng.uniform(0, 2), 1.0, size=n_tar)
        non = rng.normal(0.0, 1.0, size=n_non)
        if rng.uniform() < 0.3:
            tar, non = np.round(tar, 1), np.round(non, 1)
        scores = np.concatenate([tar, non]).tolist()
        targets = [1] * n_tar + [0] * n_non
        eer, _ = compute_eer(scores, targets)
        if eer != brute_force_eer(scores, targets):
            mismatches += 1

    perfect, _ = compute_eer([0.9, 0.8, 0.1, 0.2], [1, 1, 0, 0])
    hand, hand_thr = compute_eer(
        [0.9, 0.8, 0.7, 0.3, 0.5, 0.2, 0.15, 0.1], [1, 1, 1, 1, 0, 0, 0, 0]
    )
    hand_ok = perfect == 0.0 and abs(hand - 0.25) < 1e-12
    announce(
        capsys, "eer-oracle", mismatches == 0 and hand_ok,
        f"200/200 score sets exact, hand cases 0.0 and {hand:.4g}@{hand_thr:.2g}",
    )


# -- 6 & 7: the trained three-system matrix ---------------------------


ACCEPTANCE_EXPERIMENT = {
    "seed": 11,
    "seeds": [0, 1, 2, 3, 4],
    "corpus": {
        "n_speakers": 30,
        "utts_per_speaker": 10,
        "duration_range_s": [1.5, 1.5],
        "static_copies": False,
    },
    "train": {
        "steps": 2000,
        "batch_s": 8,
        "dtype": "float32",
        "encoder": {"widths": [8, 16, 32]},
    },
    "systems": {
        "baseline": {"p_aug": 0.0, "adv_weight": 0.0},
        "da": {"adv_weight": 0.0},
        "ada": {"adv_weight": 0.01},
    },
    "n_target": 300,
    "n_nontarget": 300,
    "probe_per_category": 48,
}


@pytest.fixture(scope="session")
def trained_matrix(tmp_path_factory):
    """Train and evaluate all systems x seeds once; both direction-of-
    effect checks read from this report."""
    out = tmp_path_factory.mktemp("acceptance-e2e")
    exp = ExperimentConfig.from_dict(ACCEPTANCE_EXPERIMENT)
    synth_corpus(exp, out)
    t0 = time.time()
    report = compare(exp, out, train_missing=True)
    return report, time.time() - t0


def test_6_training_direction_of_effect(capsys, trained_matrix):
    """Plain augmentation beats the clean-only baseline on mixed noisy
    trials; the adversarial variant strips augmentation information from
    embeddings without giving up verification accuracy."""
    report, elapsed = trained_matrix
    seeds = [str(s) for s in report["seeds"]]
    per_system_budget = elapsed / 3.0

    da_wins = sum(
        report["per_seed_eer"]["da"][s]["ALL"] < report["per_seed_eer"]["baseline"][s]["ALL"]
        for s in seeds
    )
    a_ok = da_wins >= 4

    probe_da = report["probe_accuracy"]["da"]["mean"]
    probe_ada = report["probe_accuracy"]["ada"]["mean"]
    b_ok = probe_ada < probe_da

    mean_da = report["mean_eer"]["da"]["ALL"]
    mean_ada = report["mean_eer"]["ada"]["ALL"]
    c_ok = mean_ada <= mean_da + 0.005
    tally = report["win_tally_ada_vs_da"]["ALL"]

    budget_ok = per_system_budget <= 15 * 60
    announce(
        capsys, "training-direction-of-effect",
        a_ok and b_ok and c_ok and budget_ok,
        f"aug<baseline on ALL in {da_wins}/5 seeds; "
        f"probe {probe_ada:.3f} (adv) vs {probe_da:.3f}; "
        f"mean ALL EER {100*mean_ada:.2f}% (adv) vs {100*mean_da:.2f}%; "
        f"adv-vs-aug tally {tally['ada_wins']}W/{tally['da_wins']}L/{tally['ties']}T; "
        f"{per_system_budget/60:.1f} min/system",
    )


def test_7_unseen_condition_generalization(capsys, trained_matrix):
    """Both augmented systems carry their advantage to noise categories
    never seen in training."""
    report, _ = trained_matrix
    seeds = [str(s) for s in report["seeds"]]
    for cond in ("Car", "Cafe"):
        for system in ("baseline", "da", "ada"):
            assert all(cond in report["per_seed_eer"][system][s] for s in seeds)

    da_wins = sum(
        report["per_seed_eer"]["da"][s]["Cafe"] < report["per_seed_eer"]["baseline"][s]["Cafe"]
        for s in seeds
    )
    ada_wins = sum(
        report["per_seed_eer"]["ada"][s]["Cafe"] < report["per_seed_eer"]["baseline"][s]["Cafe"]
        for s in seeds
    )
    announce(
        capsys, "unseen-condition-generalization",
        da_wins >= 4 and ada_wins >= 4,
        f"on Cafe: aug beats baseline {da_wins}/5, adversarial {ada_wins}/5; "
        f"baseline mean {100*report['mean_eer']['baseline']['Cafe']:.2f}%, "
        f"aug {100*report['mean_eer']['da']['Cafe']:.2f}%, "
        f"adversarial {100*report['mean_eer']['ada']['Cafe']:.2f}%",
    )


# -- 8: end-to-end determinism ----------------------------------------


def test_8_pipeline_determinism(capsys, tmp_path):
    """Two complete pipeline runs from one seed are byte-identical:
    manifest, every checkpoint, every report."""
    config = {
        "seed": 0,
        "seeds": [0],
        "corpus": {
            "n_speakers": 8,
            "utts_per_speaker": 4,
            "duration_range_s": [0.8, 1.0],
            "static_copies": False,
            "noise_pool_size": 2,
            "noise_pool_duration_s": 2.0,
        },
        "train": {
            "steps": 8,
            "batch_s": 4,
            "dtype": "float32",
            "encoder": {
                "widths": [4, 8], "time_strides": [2, 2], "freq_strides": [4, 4],
                "n_mels": 80, "embedding_dim": 16, "attention_hidden": 8,
            },
        },
        "conditions": ["Clean", "ALL", "Cafe"],
        "n_target": 6,
        "n_nontarget": 6,
        "probe_per_category": 8,
    }
    cfg_path = tmp_path / "exp.json"
    cfg_path.write_text(json.dumps(config))

    for out in (tmp_path / "a", tmp_path / "b"):
        args = ["--config", str(cfg_path), "--out", str(out), "--threads", "0"]
        assert main(args + ["synth"]) == EXIT_OK
        assert main(args + ["compare", "--train-missing"]) == EXIT_OK

    files_a = sorted(
        p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file()
    )
    files_b = sorted(
        p.relative_to(tmp_path / "b") for p in (tmp_path / "b").rglob("*") if p.is_file()
    )
    same_sets = files_a == files_b
    diffs = [
        str(rel)
        for rel in files_a
        if (tmp_path / "a" / rel).read_bytes() != (tmp_path / "b" / rel).read_bytes()
    ] if same_sets else ["<file sets differ>"]
    checkpoints = sum(1 for rel in files_a if rel.suffix == ".ckpt")
    announce(
        capsys, "pipeline-determinism", same_sets and not diffs,
        f"{len(files_a)} files compared ({checkpoints} checkpoints), differing: {diffs or 'none'}",
    )
