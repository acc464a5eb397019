"""Command-line interface.

Commands: ``synth`` (corpus to disk), ``train --system ...`` (one
system at one seed), ``eval`` (EER table for a checkpoint), ``probe``
(residual-probe accuracy), ``compare`` (full three-system reduction).

Exit codes: 0 success, 2 configuration/validation error, 3 numeric
abort (non-finite loss), 4 I/O error. The output directory resolves
from --out, then the ADA_SV_OUT environment variable, then the config's
out_dir field.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import torch

from .evaluation import CONDITIONS
from .experiment import (
    ExperimentConfig,
    compare,
    evaluate_run,
    open_corpus,
    probe_run,
    run_dir,
    synth_corpus,
    train_system,
)
from .train import SYSTEMS, NonFiniteLossError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ada-sv",
        description="Adversarial data augmentation for speaker verification, desk scale.",
    )
    parser.add_argument("--config", type=Path, help="experiment config JSON")
    parser.add_argument("--seed", type=int, help="override the run seed")
    parser.add_argument("--out", type=Path, help="output directory (or env ADA_SV_OUT)")
    parser.add_argument(
        "--threads", type=int, default=0,
        help="torch thread count; 0 = serial-deterministic (single thread)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("synth", help="build the corpus and write its manifest")

    p_train = sub.add_parser("train", help="train one system at one seed")
    p_train.add_argument("--system", required=True, choices=SYSTEMS)

    p_eval = sub.add_parser("eval", help="evaluate a checkpoint over the configured conditions")
    p_eval.add_argument("--system", choices=SYSTEMS, help="evaluate this system's run directory")
    p_eval.add_argument("--ckpt", type=Path, help="explicit checkpoint path (overrides --system)")

    p_probe = sub.add_parser("probe", help="residual-probe accuracy for a trained system")
    p_probe.add_argument("--system", required=True, choices=SYSTEMS)

    p_cmp = sub.add_parser("compare", help="evaluate all systems x seeds and write the report")
    p_cmp.add_argument("--train-missing", action="store_true", help="train any missing run first")
    return parser


def _load_config(args) -> ExperimentConfig:
    if args.config is None:
        raise ValueError("--config is required for this command")
    if not args.config.exists():
        raise FileNotFoundError(f"config file not found: {args.config}")
    try:
        exp = ExperimentConfig.load(args.config)
    except json.JSONDecodeError as exc:
        raise ValueError(f"config {args.config} is not valid JSON: {exc}") from exc
    exp.validate()
    return exp


def _resolve_out(args, exp: ExperimentConfig) -> Path:
    if args.out is not None:
        return args.out
    env = os.environ.get("ADA_SV_OUT")
    if env:
        return Path(env)
    if exp.out_dir:
        return Path(exp.out_dir)
    raise ValueError("no output directory: pass --out, set ADA_SV_OUT, or put out_dir in the config")


def _run_seed(args, exp: ExperimentConfig) -> int:
    return args.seed if args.seed is not None else exp.seeds[0]


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    torch.set_num_threads(args.threads if args.threads and args.threads > 0 else 1)
    try:
        exp = _load_config(args)
        out = _resolve_out(args, exp)

        if args.command == "synth":
            corpus = synth_corpus(exp, out)
            print(f"corpus: {len(corpus.utterances)} utterances "
                  f"({len(corpus.records('train'))} train) -> {out / 'corpus'}")
        elif args.command == "train":
            seed = _run_seed(args, exp)
            corpus = open_corpus(out)
            state = train_system(exp, corpus, args.system, seed, out)
            last = state.history[-1].total if state.history else float("nan")
            print(f"trained {args.system} seed {seed}: {state.step} steps, "
                  f"final total loss {last:.4f} -> {run_dir(out, args.system, seed)}")
        elif args.command == "eval":
            seed = _run_seed(args, exp)
            corpus = open_corpus(out)
            if args.ckpt is not None:
                from .evaluation import evaluate
                from .experiment import eval_seed
                from .train import load_embedder

                if not args.ckpt.exists():
                    raise FileNotFoundError(f"checkpoint not found: {args.ckpt}")
                embedder, _ = load_embedder(args.ckpt)
                table = evaluate(
                    embedder, corpus, list(exp.conditions), eval_seed(exp, seed),
                    n_target=exp.n_target, n_nontarget=exp.n_nontarget,
                    eval_snr_range_db=exp.eval_snr_range_db,
                )
            elif args.system is not None:
                table = evaluate_run(exp, corpus, args.system, seed, out)
            else:
                raise ValueError("eval needs --system or --ckpt")
            for condition in exp.conditions:
                row = table[condition]
                print(f"{condition:8s} EER {100 * row['eer']:6.2f}%  "
                      f"threshold {row['threshold']:+.4f}  trials {row['n_trials']}")
        elif args.command == "probe":
            seed = _run_seed(args, exp)
            corpus = open_corpus(out)
            accuracy = probe_run(exp, corpus, args.system, seed, out)
            print(f"probe accuracy ({args.system}, seed {seed}): {accuracy:.4f}")
        elif args.command == "compare":
            report = compare(exp, out, train_missing=args.train_missing)
            print((Path(out) / "reports" / "compare.md").read_text())
            print(f"report -> {Path(out) / 'reports' / 'compare.json'}")
        return EXIT_OK
    except NonFiniteLossError as exc:
        print(f"numeric abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (FileNotFoundError, PermissionError, IsADirectoryError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, TypeError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
