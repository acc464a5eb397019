"""Command-line interface: exit codes, output layout, full pipeline."""

import json

import pytest
import torch

from ada_sv.cli import EXIT_CONFIG, EXIT_IO, EXIT_NUMERIC, EXIT_OK, main
from ada_sv.train import NonFiniteLossError

TINY_EXPERIMENT = {
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
        "steps": 6,
        "batch_s": 4,
        "dtype": "float32",
        "encoder": {
            "widths": [4, 8],
            "time_strides": [2, 2],
            "freq_strides": [4, 4],
            "n_mels": 80,
            "embedding_dim": 16,
            "attention_hidden": 8,
        },
    },
    "conditions": ["Clean", "ALL", "Cafe"],
    "n_target": 6,
    "n_nontarget": 6,
    "probe_per_category": 8,
}


def write_config(path, **overrides):
    cfg = json.loads(json.dumps(TINY_EXPERIMENT))
    cfg.update(overrides)
    path.write_text(json.dumps(cfg))
    return path


@pytest.fixture()
def config_file(tmp_path):
    return write_config(tmp_path / "exp.json")


class TestSynth:
    def test_deterministic_across_directories(self, tmp_path, config_file):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert main(["--config", str(config_file), "--out", str(out_a), "synth"]) == EXIT_OK
        assert main(["--config", str(config_file), "--out", str(out_b), "synth"]) == EXIT_OK
        for name in ("manifest.txt", "corpus.json"):
            assert (out_a / "corpus" / name).read_bytes() == (out_b / "corpus" / name).read_bytes()

    def test_invalid_corpus_rejected(self, tmp_path):
        cfg = write_config(tmp_path / "bad.json")
        bad = json.loads(cfg.read_text())
        bad["corpus"]["n_speakers"] = 1
        cfg.write_text(json.dumps(bad))
        out = tmp_path / "out"
        assert main(["--config", str(cfg), "--out", str(out), "synth"]) == EXIT_CONFIG
        assert not (out / "corpus").exists()

    def test_contradictory_system_override_rejected(self, tmp_path):
        cfg = write_config(
            tmp_path / "bad.json",
            systems={"baseline": {"p_aug": 0.5, "adv_weight": 0.0}},
        )
        assert main(["--config", str(cfg), "--out", str(tmp_path / "o"), "synth"]) == EXIT_CONFIG

    def test_missing_config_file(self, tmp_path):
        code = main(["--config", str(tmp_path / "nope.json"), "--out", str(tmp_path), "synth"])
        assert code == EXIT_IO


class TestErrorPaths:
    def test_train_without_corpus(self, tmp_path, config_file, capsys):
        code = main(["--config", str(config_file), "--out", str(tmp_path / "empty"),
                     "train", "--system", "da"])
        assert code == EXIT_IO
        assert "synth" in capsys.readouterr().err

    def test_compare_names_missing_runs(self, tmp_path, config_file, capsys):
        out = tmp_path / "out"
        assert main(["--config", str(config_file), "--out", str(out), "synth"]) == EXIT_OK
        code = main(["--config", str(config_file), "--out", str(out), "compare"])
        assert code == EXIT_IO
        err = capsys.readouterr().err
        assert "baseline/seed0" in err and "ada/seed0" in err

    def test_numeric_abort_exit_code(self, tmp_path, config_file, monkeypatch, capsys):
        out = tmp_path / "out"
        assert main(["--config", str(config_file), "--out", str(out), "synth"]) == EXIT_OK

        def poisoned(*args, **kwargs):
            raise NonFiniteLossError(3, "loss", float("nan"), None, float("nan"))

        monkeypatch.setattr("ada_sv.cli.train_system", poisoned)
        code = main(["--config", str(config_file), "--out", str(out), "train", "--system", "da"])
        assert code == EXIT_NUMERIC
        assert "step 3" in capsys.readouterr().err

    def test_eval_needs_system_or_ckpt(self, tmp_path, config_file):
        out = tmp_path / "out"
        assert main(["--config", str(config_file), "--out", str(out), "synth"]) == EXIT_OK
        assert main(["--config", str(config_file), "--out", str(out), "eval"]) == EXIT_CONFIG


class TestOutResolution:
    def test_env_fallback(self, tmp_path, config_file, monkeypatch):
        out = tmp_path / "from-env"
        monkeypatch.setenv("ADA_SV_OUT", str(out))
        assert main(["--config", str(config_file), "synth"]) == EXIT_OK
        assert (out / "corpus" / "manifest.txt").exists()

    def test_flag_beats_env(self, tmp_path, config_file, monkeypatch):
        monkeypatch.setenv("ADA_SV_OUT", str(tmp_path / "ignored"))
        out = tmp_path / "explicit"
        assert main(["--config", str(config_file), "--out", str(out), "synth"]) == EXIT_OK
        assert (out / "corpus" / "manifest.txt").exists()
        assert not (tmp_path / "ignored").exists()

    def test_no_out_anywhere(self, config_file, monkeypatch):
        monkeypatch.delenv("ADA_SV_OUT", raising=False)
        assert main(["--config", str(config_file), "synth"]) == EXIT_CONFIG


class TestThreads:
    def test_thread_count_applied(self, tmp_path, config_file):
        try:
            code = main(["--config", str(config_file), "--out", str(tmp_path / "o"),
                         "--threads", "2", "synth"])
            assert code == EXIT_OK
            assert torch.get_num_threads() == 2
        finally:
            torch.set_num_threads(1)


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """One full synth -> train x3 -> eval/probe/compare pass, shared by
    the assertions below."""
    root = tmp_path_factory.mktemp("pipeline")
    config = write_config(root / "exp.json")
    out = root / "out"
    codes = {"synth": main(["--config", str(config), "--out", str(out), "synth"])}
    for system in ("baseline", "da", "ada"):
        codes[f"train-{system}"] = main(
            ["--config", str(config), "--out", str(out), "train", "--system", system]
        )
    codes["eval"] = main(["--config", str(config), "--out", str(out), "eval", "--system", "da"])
    codes["probe"] = main(["--config", str(config), "--out", str(out), "probe", "--system", "ada"])
    codes["compare"] = main(["--config", str(config), "--out", str(out), "compare"])
    return config, out, codes


class TestPipeline:
    def test_every_stage_succeeds(self, pipeline):
        _, _, codes = pipeline
        assert all(code == EXIT_OK for code in codes.values()), codes

    def test_run_layout(self, pipeline):
        _, out, _ = pipeline
        for system in ("baseline", "da", "ada"):
            run = out / "runs" / f"{system}-seed0"
            assert (run / "final.ckpt").exists()
            assert len((run / "train.log").read_text().splitlines()) == 6
        eval_dir = out / "runs" / "da-seed0" / "eval"
        assert (eval_dir / "eer-report.json").exists()
        for cond in ("clean", "all", "cafe"):
            assert (eval_dir / f"trials-{cond}.txt").exists()
            assert (eval_dir / f"scores-{cond}.txt").exists()

    def test_compare_report_contents(self, pipeline):
        _, out, _ = pipeline
        report = json.loads((out / "reports" / "compare.json").read_text())
        assert set(report["per_seed_eer"]) == {"baseline", "da", "ada"}
        for system in ("baseline", "da", "ada"):
            for cond in ("Clean", "ALL", "Cafe"):
                assert 0.0 <= report["mean_eer"][system][cond] <= 1.0
        assert set(report["probe_accuracy"]) == {"da", "ada"}
        assert "mean" in report["probe_accuracy"]["da"]
        assert set(report["win_tally_ada_vs_da"]) == {"Clean", "ALL", "Cafe"}
        markdown = (out / "reports" / "compare.md").read_text()
        for token in ("Clean", "ALL", "Cafe", "baseline", "da", "ada", "probe"):
            assert token in markdown

    def test_eval_from_explicit_checkpoint(self, pipeline, capsys):
        config, out, _ = pipeline
        ckpt = out / "runs" / "ada-seed0" / "final.ckpt"
        code = main(["--config", str(config), "--out", str(out), "eval", "--ckpt", str(ckpt)])
        assert code == EXIT_OK
        printed = capsys.readouterr().out
        for cond in ("Clean", "ALL", "Cafe"):
            assert cond in printed

    def test_seed_override_places_run(self, pipeline):
        config, out, _ = pipeline
        code = main(["--config", str(config), "--out", str(out),
                     "--seed", "1", "train", "--system", "baseline"])
        assert code == EXIT_OK
        assert (out / "runs" / "baseline-seed1" / "final.ckpt").exists()


class TestCompareTrainMissing:
    def test_trains_absent_runs(self, tmp_path, config_file):
        out = tmp_path / "out"
        assert main(["--config", str(config_file), "--out", str(out), "synth"]) == EXIT_OK
        code = main(["--config", str(config_file), "--out", str(out), "compare", "--train-missing"])
        assert code == EXIT_OK
        for system in ("baseline", "da", "ada"):
            assert (out / "runs" / f"{system}-seed0" / "final.ckpt").exists()
        assert (out / "reports" / "compare.json").exists()
