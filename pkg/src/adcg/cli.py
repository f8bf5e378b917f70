"""Command-line interface.

Subcommands:

* ``solve --config <path>`` — run an experiment config; writes traces,
  metric tables and a summary into the configured output directory.
* ``generate --kind {twosource|lowrank|lti} --out <dir> --seed <n>`` —
  write a synthetic dataset plus a ready-to-run config.
* ``score --kind {f1|rmse|sysid} --est <path> --truth <path> [...]`` —
  stand-alone scoring of results against ground truth.

Exit codes: 0 success, 1 solver warning (an inner solve hit its iteration
cap), 2 I/O or configuration error. Errors are reported as one JSON object
on stderr. See docs/config.md for config keys and file formats.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .bench.data import IngestError, load_frames, load_io
from .bench.experiment import ConfigError, run_experiment
from .bench.generate import generate
from .bench.metrics import match_sources, matcomp_rmse, sysid_score
from .measure import AtomicMeasure


def _fail(code: int, kind: str, message: str, **extra) -> int:
    report = {"error": kind, "message": message}
    report.update(extra)
    print(json.dumps(report), file=sys.stderr)
    return code


def _cmd_solve(args) -> int:
    try:
        return run_experiment(args.config)
    except (ConfigError, IngestError) as exc:
        return _fail(2, type(exc).__name__, str(exc), config=args.config)
    except FileNotFoundError as exc:
        return _fail(2, "FileNotFoundError", str(exc), path=exc.filename)


def _cmd_generate(args) -> int:
    kwargs = {}
    if args.frames is not None:
        kwargs["n_frames"] = args.frames
    try:
        paths = generate(args.kind, args.out, seed=args.seed, **kwargs)
    except (ValueError, OSError) as exc:
        return _fail(2, type(exc).__name__, str(exc))
    print(json.dumps({"generated": paths}))
    return 0


def _load_single_column(path):
    vals = []
    with open(path) as fh:
        header = fh.readline()
        if header.strip() == "":
            raise IngestError(f"{path}: empty file")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            try:
                vals.append(float(line.split(",")[0]))
            except ValueError as exc:
                raise IngestError(f"{path}:{lineno}: {exc}") from exc
    return np.asarray(vals)


def _load_localizations(path):
    """CSV frame,x_nm,y_nm,weight -> dict frame -> list of triples."""
    per_frame: dict[int, list] = {}
    with open(path) as fh:
        fh.readline()
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            fields = line.split(",")
            if len(fields) != 4:
                raise IngestError(f"{path}:{lineno}: expected 4 columns")
            f = int(float(fields[0]))
            per_frame.setdefault(f, []).append(tuple(float(v) for v in fields[1:]))
    return per_frame


def _cmd_score(args) -> int:
    try:
        if args.kind == "f1":
            if args.radius is None:
                raise ConfigError("--radius is required for f1 scoring")
            est = _load_localizations(args.est)
            truth = _load_localizations(args.truth)
            frames = sorted(truth)
            scores = [
                match_sources(est.get(f, []), truth[f], args.radius) for f in frames
            ]
            arr = np.asarray(scores).reshape(-1, 3)
            out = {
                "radius": args.radius,
                "precision": float(arr[:, 0].mean()),
                "recall": float(arr[:, 1].mean()),
                "f1": float(arr[:, 2].mean()),
                "n_frames": len(frames),
            }
        elif args.kind == "rmse":
            if args.shape is None:
                raise ConfigError("--shape N M is required for rmse scoring")
            with open(args.est) as fh:
                result = json.load(fh)
            measure = AtomicMeasure.from_json_dict(result.get("measure", result))
            triples = []
            with open(args.truth) as fh:
                fh.readline()
                for line in fh:
                    if line.strip():
                        u, i, r = line.strip().split(",")
                        triples.append((int(u), int(i), float(r)))
            out = {
                "rmse": matcomp_rmse(measure, triples, args.train_mean, args.shape[0])
            }
        else:  # sysid
            y_pred = _load_single_column(args.est)
            y_test = _load_single_column(args.truth)
            out = {"score": sysid_score(y_pred, y_test)}
    except (ConfigError, IngestError, ValueError, KeyError) as exc:
        return _fail(2, type(exc).__name__, str(exc))
    except FileNotFoundError as exc:
        return _fail(2, "FileNotFoundError", str(exc), path=exc.filename)
    print(json.dumps(out))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="adcg", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run an experiment config")
    p_solve.add_argument("--config", required=True)
    p_solve.set_defaults(func=_cmd_solve)

    p_gen = sub.add_parser("generate", help="write a synthetic dataset and config")
    p_gen.add_argument("--kind", required=True, choices=["twosource", "lowrank", "lti"])
    p_gen.add_argument("--out", required=True)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--frames", type=int, default=None,
                       help="frame count (twosource only)")
    p_gen.set_defaults(func=_cmd_generate)

    p_score = sub.add_parser("score", help="score estimates against ground truth")
    p_score.add_argument("--kind", required=True, choices=["f1", "rmse", "sysid"])
    p_score.add_argument("--est", required=True)
    p_score.add_argument("--truth", required=True)
    p_score.add_argument("--radius", type=float, default=None, help="match radius in nm (f1)")
    p_score.add_argument("--shape", type=int, nargs=2, default=None,
                         help="matrix shape N M (rmse)")
    p_score.add_argument("--train-mean", type=float, default=0.0,
                         help="training mean added to predictions (rmse)")
    p_score.set_defaults(func=_cmd_score)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
