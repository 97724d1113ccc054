"""Command line entry point: ``vqdqn train | eval | compare-params``.

Exit codes: 0 on success, 1 on validation errors, 2 on runtime errors.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys

from . import __version__, vqc
from .config import load_config
from .errors import ValidationError, VqdqnError
from .experiment import compare_params, evaluate_checkpoint, format_eval_table, run_experiment, run_seeds

log = logging.getLogger("vqdqn")


def parse_range(text: str) -> list[int]:
    """``"2..5"`` -> [2, 3, 4, 5]; ``"2,4"`` -> [2, 4]; ``"3"`` -> [3]."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            values = list(range(int(lo), int(hi) + 1))
        else:
            values = [int(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad channel range {text!r}") from None
    if not values or min(values) < 2 or max(values) > 5:
        raise argparse.ArgumentTypeError(f"channel counts must lie in 2..5, got {text!r}")
    return values


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vqdqn", description="Variational-circuit deep Q-learning experiments")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train from a JSON config")
    t.add_argument("config")
    t.add_argument("--parallel-seeds", type=int, default=1, metavar="K",
                   help="run seeds seed..seed+K-1, each in <output_dir>/seed-<s>")

    e = sub.add_parser("eval", help="greedy episodes with a saved model")
    e.add_argument("checkpoint")
    e.add_argument("env", help="bundled environment name or file")
    e.add_argument("--backend", choices=("analytic", "shots"), default="analytic")
    e.add_argument("--shots", type=int, default=1024)
    e.add_argument("--device", default=None, help="device CSV (or bundled name) for the noise model")
    e.add_argument("--assignment", default=None, help="device qubits for logical qubits 1..n, e.g. 0,1,3,4")
    e.add_argument("--episodes", type=int, default=5)
    e.add_argument("--seed", type=int, default=0, help="shot-sampling seed")

    c = sub.add_parser("compare-params", help="parameter counts per channel count (CSV)")
    c.add_argument("--env", choices=("radio",), default="radio")
    c.add_argument("--n", type=parse_range, default=[2, 3, 4, 5], help="channel range, e.g. 2..5")
    return p


def cmd_train(args) -> int:
    cfg = load_config(args.config)
    if args.parallel_seeds < 1:
        raise ValidationError("--parallel-seeds must be >= 1")
    if args.parallel_seeds == 1:
        result = run_experiment(cfg)
        last = result.log[-1].rolling_mean_100 if result.log else float("nan")
        print(f"trained {cfg.episodes} episodes, final rolling mean {last:.3f}; outputs in {cfg.output_dir}")
    else:
        logs = run_seeds(cfg, args.parallel_seeds)
        for s, run in zip(range(cfg.seed, cfg.seed + args.parallel_seeds), logs):
            last = run[-1].rolling_mean_100 if run else float("nan")
            print(f"seed {s}: final rolling mean {last:.3f}")
        print(f"outputs in {cfg.output_dir}/seed-*")
    return 0


def cmd_eval(args) -> int:
    if args.shots < 1 or args.episodes < 0:
        raise ValidationError("--shots must be >= 1 and --episodes >= 0")
    model, _ = vqc.load_checkpoint(args.checkpoint)
    assignment = [int(q) for q in args.assignment.split(",")] if args.assignment else None
    rows = evaluate_checkpoint(model, args.env, args.backend, args.shots, args.device, args.episodes, args.seed, assignment)
    print(format_eval_table(rows))
    return 0


def cmd_compare_params(args) -> int:
    writer = csv.DictWriter(sys.stdout, fieldnames=["n", "q_table", "dqn", "vq_dqn"], lineterminator="\n")
    writer.writeheader()
    writer.writerows(compare_params(args.env, args.n))
    return 0


COMMANDS = {"train": cmd_train, "eval": cmd_eval, "compare-params": cmd_compare_params}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; those are validation errors here
        return 0 if exc.code == 0 else 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (VqdqnError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
