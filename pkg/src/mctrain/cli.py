"""Command-line interface.

Subcommands: prepare, train, sweep, verify, report. Shared flags
(--config/--seed/--out-dir/--data-dir) are accepted by every subcommand;
TOML configuration values are overridden by whatever flags are given.
The data directory may also come from the MCTRAIN_DATA_DIR environment
variable.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .experiment import load_config, load_prepared, prepare, report, run_single, sweep
from .suites import SUITE_NAMES, run_suite

DATA_DIR_ENV = "MCTRAIN_DATA_DIR"


def _float_list(text):
    return tuple(float(v) for v in text.split(",") if v != "")


def _int_list(text):
    return tuple(int(v) for v in text.split(",") if v != "")


def _common_flags():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML configuration file")
    common.add_argument("--seed", type=int, help="master seed (data preparation and default training seed)")
    common.add_argument("--out-dir", help="artifact directory")
    common.add_argument(
        "--data-dir",
        default=os.environ.get(DATA_DIR_ENV),
        help=f"directory holding the IDX files (or ${DATA_DIR_ENV})",
    )
    return common


def build_parser():
    common = _common_flags()
    parser = argparse.ArgumentParser(
        prog="mctrain",
        description="Train networks on several datasets at once with weighted losses, "
        "and verify the toolkit's efficiency and stability claims by brute force.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", parents=[common], help="split, noise and cache the training data")
    p.add_argument("--images", help="images IDX file")
    p.add_argument("--labels", help="labels IDX file")
    p.add_argument("--sample-count", type=int, help="subsample the pool to this many rows")
    p.add_argument("--validation-fraction", type=float, help="clean held-out fraction, in (0, 1)")
    p.add_argument("--parts", type=int, help="number of training subsets")
    p.add_argument("--sigmas", type=_float_list, help="comma-separated noise levels, one per part")
    p.add_argument("--crop", action="store_true", default=None, help="center-crop images to 20x20")

    t = sub.add_parser("train", parents=[common], help="train one network on the prepared parts")
    t.add_argument("--epsilon", type=float, required=True, help="weight perturbation (0 = benchmark)")
    t.add_argument("--arch", choices=("mlp", "residual"), help="network architecture")
    t.add_argument("--epochs", type=int)
    t.add_argument("--batch-size", type=int)
    t.add_argument("--learning-rate", type=float)

    s = sub.add_parser("sweep", parents=[common], help="train across the epsilon grid plus the benchmark")
    s.add_argument("--epsilons", type=_float_list, help="comma-separated epsilon grid")
    s.add_argument("--seeds", type=_int_list, help="comma-separated training seeds")
    s.add_argument("--arch", choices=("mlp", "residual"))
    s.add_argument("--epochs", type=int)
    s.add_argument("--batch-size", type=int)
    s.add_argument("--learning-rate", type=float)

    v = sub.add_parser("verify", parents=[common], help="run a randomized verification suite")
    v.add_argument("suite", choices=SUITE_NAMES)
    v.add_argument("--trials", type=int, default=1000,
                   help="trial count (verification steps for 'convergence', per-dimension sets for 'scalarization')")
    v.add_argument("--out", help="CSV output path (default <out-dir>/verify_<suite>.csv)")

    r = sub.add_parser("report", parents=[common], help="summarize a sweep CSV as benchmark vs best")
    r.add_argument("sweep_csv", help="path to a sweep.csv")
    r.add_argument("--out", help="write the two-row table as CSV here")
    return parser


def _config_from_args(args, **extra):
    overrides = dict(
        data_dir=args.data_dir,
        out_dir=args.out_dir,
        seed=args.seed,
        **extra,
    )
    return load_config(args.config, **overrides)


def main(argv=None):
    args = build_parser().parse_args(argv)

    if args.command == "prepare":
        config = _config_from_args(
            args, images=args.images, labels=args.labels, sample_count=args.sample_count,
            validation_fraction=args.validation_fraction, parts=args.parts,
            sigmas=args.sigmas, crop=args.crop,
        )
        manifest = prepare(config)
        sizes = {name: entry["rows"] for name, entry in manifest["datasets"].items()}
        print(f"prepared {sizes} in {Path(config.out_dir) / 'prepared'}")
        return 0

    if args.command == "train":
        config = _config_from_args(
            args, architecture=args.arch, epochs=args.epochs,
            batch_size=args.batch_size, learning_rate=args.learning_rate,
        )
        datasets, validation = load_prepared(config.out_dir)
        seed = config.train_seeds[0]
        run_dir = Path(config.out_dir) / "runs" / f"eps{args.epsilon:.6g}_seed{seed}"
        row = run_single(config, datasets, validation, args.epsilon, seed, run_dir)
        print(
            f"epsilon={row['epsilon']:.6g} seed={row['seed']} "
            f"train_acc={row['train_acc']:.4f} val_acc={row['val_acc']:.4f} "
            f"final_loss={row['final_loss']:.6g} ({run_dir})"
        )
        return 0

    if args.command == "sweep":
        config = _config_from_args(
            args, epsilons=args.epsilons, seeds=args.seeds, architecture=args.arch,
            epochs=args.epochs, batch_size=args.batch_size, learning_rate=args.learning_rate,
        )
        result = sweep(config)
        print(f"sweep wrote {len(result.rows)} rows to {Path(config.out_dir) / 'sweep.csv'}")
        for error in result.errors:
            print(f"failed cell epsilon={error['epsilon']:.6g} seed={error['seed']}: {error['error']}",
                  file=sys.stderr)
        return 1 if result.errors else 0

    if args.command == "verify":
        config = _config_from_args(args)
        seed = args.seed if args.seed is not None else 0
        result = run_suite(args.suite, args.trials, seed)
        out_dir = Path(config.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        out_path = Path(args.out) if args.out else out_dir / f"verify_{args.suite}.csv"
        out_path.write_text(result.to_csv())
        print(result.summary())
        print(f"rows written to {out_path}")
        return 0 if result.passed else 1

    if args.command == "report":
        out = args.out
        text = report(args.sweep_csv, out_path=out)
        print(text, end="")
        return 0

    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
