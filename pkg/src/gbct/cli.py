"""Batch command-line front end: fit, gen, eval, plot, bench.

Exit status: 0 on success, 1 for I/O or parse problems (and eval length
mismatch), 2 when the input is degenerate, K cannot be reached, or a plot of
d>2 data is requested without --dims.
"""
from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import __version__
from .cluster_formation import (
    DEFAULT_JUMP_FACTOR,
    DEFAULT_NOISE_FACTOR,
    KNEE_RULES,
    write_trace_csv,
)
from .dataset import SHAPES, DatasetError, generate, inject_noise, load_csv, save_csv, save_labels_csv, standardize
from .errors import DegenerateInputError
from .evaluation import accuracy, nmi
from .granular_ball import POLICY_ALIASES, SplitConfig, generate_balls
from .pipeline import fit
from .svg import scatter_svg

EXIT_OK, EXIT_IO, EXIT_DEGENERATE = 0, 1, 2
BENCH_SIZES = (1000, 2000, 4000, 8000)
# fixed generator for the bench ladder
BENCH_CENTERS = [[0.0, 0.0], [20.0, 0.0], [10.0, 17.0]]


class UsageError(Exception):
    """Argument combination that is well-formed but unusable (exit 2)."""


@dataclass
class RunConfig:
    input: str
    output: str
    k: Optional[int] = None  # None selects adaptive mode
    consistency_threshold: float = 0.70
    split_acceptance: str = "both"
    noise_factor: float = DEFAULT_NOISE_FACTOR
    jump_factor: float = DEFAULT_JUMP_FACTOR
    seed: int = 42
    standardize: bool = False
    label_col: Optional[int] = None
    header: bool = False
    trace_out: Optional[str] = None
    density_average: str = "arithmetic"
    knee: str = "merge"

    def split_config(self) -> SplitConfig:
        return SplitConfig(consistency_threshold=self.consistency_threshold,
                           split_acceptance=POLICY_ALIASES[self.split_acceptance], seed=self.seed)


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _read_label_column(path: str, col: Optional[int]) -> np.ndarray:
    """Labels from a CSV: the given column, the only column, or the last one."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise DatasetError(f"{path}: no rows")
    out = []
    for i, row in enumerate(rows, start=1):
        j = col if col is not None else len(row) - 1
        try:
            cell = row[j].strip()
        except IndexError:
            raise DatasetError(f"{path}: row {i} has no column {j}") from None
        try:
            v = float(cell)
        except ValueError:
            if i == 1:
                continue  # header row
            raise DatasetError(f"{path}: row {i}: label {cell!r} is not a number") from None
        if v != int(v):
            raise DatasetError(f"{path}: row {i}: label {cell!r} is not an integer")
        out.append(int(v))
    return np.array(out, dtype=np.int64)


def _parse_dims(text: str) -> tuple[int, int]:
    try:
        i, j = (int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"--dims expects 'i,j', got {text!r}") from None
    return i, j


def cmd_fit(cfg: RunConfig) -> int:
    ds = load_csv(cfg.input, has_header=cfg.header, label_col=cfg.label_col)
    if cfg.standardize:
        ds = standardize(ds)
    res = fit(ds, k=cfg.k, split=cfg.split_config(), noise_factor=cfg.noise_factor,
              jump_factor=cfg.jump_factor, knee=cfg.knee, density_average=cfg.density_average)
    save_labels_csv(cfg.output, res.labels)
    if cfg.trace_out:
        write_trace_csv(cfg.trace_out, res.clustering.trace)
    print(f"n={ds.n}")
    print(f"m={res.m}")
    print(f"k={res.k}")
    if cfg.k is None:
        print(f"knee={'yes' if res.clustering.knee_detected else 'no'}")
    for key in ("coarse_ms", "fine_ms", "split_ms", "merge_ms", "total_ms"):
        print(f"{key}={res.timings[key]:.3f}")
    if cfg.k is None and not res.clustering.knee_detected:
        _log("no knee in merge distances; reporting a single cluster")
    return EXIT_OK


def cmd_gen(args) -> int:
    params = {}
    if args.jitter is not None:
        params["jitter"] = args.jitter
    if args.shape == "blobs":
        params["centers"] = args.centers
        params["std"] = args.std
        params["dim"] = args.dim
    ds = generate(args.shape, args.n, params, seed=args.seed)
    if args.noise:
        ds = inject_noise(ds, args.noise, seed=args.seed)
    save_csv(args.output, ds)
    print(f"n={ds.n}")
    print(f"d={ds.dim}")
    return EXIT_OK


def cmd_eval(args) -> int:
    pred = _read_label_column(args.pred, args.pred_col)
    truth = _read_label_column(args.truth, args.label_col)
    print(f"ACC {accuracy(pred, truth):.6f}")
    print(f"NMI {nmi(pred, truth):.6f}")
    return EXIT_OK


def cmd_plot(args) -> int:
    ds = load_csv(args.input, has_header=args.header, label_col=args.label_col)
    if args.dims is None:
        if ds.dim > 2:
            raise UsageError(f"data has d={ds.dim}; choose two axes with --dims i,j")
        dims = (0, 1) if ds.dim == 2 else (0, 0)
    else:
        dims = args.dims
        if not all(-ds.dim <= i < ds.dim for i in dims):
            raise UsageError(f"--dims {dims} out of range for d={ds.dim}")
    labels = ds.labels
    if args.labels:
        labels = _read_label_column(args.labels, None)
        if labels.size != ds.n:
            raise DatasetError(f"{args.labels}: {labels.size} labels for {ds.n} points")
    xy = ds.points[:, list(dims)]
    if ds.dim == 1:
        xy = np.column_stack([ds.points[:, 0], np.zeros(ds.n)])
    circles = None
    if args.balls:
        cfg = SplitConfig(consistency_threshold=args.threshold,
                          split_acceptance=POLICY_ALIASES[args.split_policy], seed=args.seed)
        balls = generate_balls(ds.points, cfg)
        circles = [(b.center[dims[0]], b.center[dims[1]] if ds.dim > 1 else 0.0, b.max_radius)
                   for b in balls]
    with open(args.output, "w") as fh:
        fh.write(scatter_svg(xy, labels, circles))
    print(f"points={ds.n}")
    if circles:
        print(f"balls={len(circles)}")
    return EXIT_OK


def cmd_bench(args) -> int:
    cfg = SplitConfig(seed=args.seed)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["n", "m", "split_ms", "merge_ms", "total_ms"])
    for n in args.sizes:
        ds = generate("blobs", n, {"centers": np.array(BENCH_CENTERS), "std": 1.5}, seed=args.seed)
        best = None
        for _ in range(args.repeats):
            res = fit(ds, k=args.k, split=cfg)
            if best is None or res.timings["total_ms"] < best.timings["total_ms"]:
                best = res
        t = best.timings
        writer.writerow([n, best.m, f"{t['split_ms']:.3f}", f"{t['merge_ms']:.3f}", f"{t['total_ms']:.3f}"])
        sys.stdout.flush()
    return EXIT_OK


def _add_split_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--threshold", type=float, default=0.70,
                   help="consistency needed to stop splitting a ball (default 0.70)")
    p.add_argument("--split-policy", choices=sorted(POLICY_ALIASES), default="both",
                   help="when a binary split is kept (default both)")
    p.add_argument("--seed", type=int, default=42)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gbct", description="Granular-ball clustering.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="cluster a CSV and write one label per row")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--k", type=int, help="number of clusters")
    mode.add_argument("--adaptive", action="store_true", help="detect K (default when --k is absent)")
    _add_split_flags(p)
    p.add_argument("--noise-factor", type=float, default=DEFAULT_NOISE_FACTOR)
    p.add_argument("--jump-factor", type=float, default=DEFAULT_JUMP_FACTOR)
    p.add_argument("--density-average", choices=["arithmetic", "geometric"], default="arithmetic",
                   help="mean used for the noise-ball density threshold")
    p.add_argument("--knee", choices=sorted(KNEE_RULES), default="merge",
                   help="knee rule for adaptive K")
    p.add_argument("--standardize", action="store_true")
    p.add_argument("--label-col", type=int, help="column holding truth labels, excluded from features")
    p.add_argument("--header", action="store_true", help="skip a header row")
    p.add_argument("--trace-out", help="write the per-round merge trace CSV here")

    p = sub.add_parser("gen", help="write a labeled synthetic dataset")
    p.add_argument("--shape", choices=SHAPES, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--jitter", type=float)
    p.add_argument("--centers", type=int, default=3, help="blob count (blobs only)")
    p.add_argument("--std", type=float, default=1.0, help="blob spread (blobs only)")
    p.add_argument("--dim", type=int, default=2, help="dimension (blobs only)")
    p.add_argument("--noise", type=float, default=0.0, help="fraction of uniform noise points")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)

    p = sub.add_parser("eval", help="print ACC and NMI of predictions against truth")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--label-col", type=int, help="truth label column (default: last)")
    p.add_argument("--pred-col", type=int, help="prediction column (default: last)")

    p = sub.add_parser("plot", help="2-D scatter SVG")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--labels", help="label file to color by (overrides --label-col)")
    p.add_argument("--label-col", type=int)
    p.add_argument("--header", action="store_true")
    p.add_argument("--dims", type=_parse_dims)
    p.add_argument("--balls", action="store_true", help="overlay granular-ball circles")
    _add_split_flags(p)

    p = sub.add_parser("bench", help="time fit over a size ladder, CSV on stdout")
    p.add_argument("--sizes", type=lambda s: [int(t) for t in s.split(",")], default=list(BENCH_SIZES))
    p.add_argument("--repeats", type=int, default=3, help="keep the fastest of this many runs")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--seed", type=int, default=42)
    return ap


def _fit_config(args) -> RunConfig:
    return RunConfig(input=args.input, output=args.output, k=args.k,
                     consistency_threshold=args.threshold, split_acceptance=args.split_policy,
                     noise_factor=args.noise_factor, jump_factor=args.jump_factor, seed=args.seed,
                     standardize=args.standardize, label_col=args.label_col, header=args.header,
                     trace_out=args.trace_out, density_average=args.density_average, knee=args.knee)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "fit":
            return cmd_fit(_fit_config(args))
        handler = {"gen": cmd_gen, "eval": cmd_eval, "plot": cmd_plot, "bench": cmd_bench}[args.command]
        return handler(args)
    except (DegenerateInputError, UsageError) as exc:
        _log(f"gbct {args.command}: {exc}")
        return EXIT_DEGENERATE
    except (DatasetError, OSError, ValueError) as exc:
        _log(f"gbct {args.command}: {exc}")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
