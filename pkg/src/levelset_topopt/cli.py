"""Command-line driver: ``python -m levelset_topopt <case> [options]``.

Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys

import numpy as np

from .cases import CASE_NAMES, get_case
from .exceptions import ConfigurationError, SolverError
from .optimizer import IterationRecord, OptimizerConfig, RunHistory, run

logger = logging.getLogger(__name__)

SUPERSAMPLE = 4
HISTORY_HEADER = ["iter", "J", "objective", "volume", "volume_fraction", "beta", "ls"]

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


def bilinear(phi: np.ndarray, lx: float, ly: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Bilinear interpolant of grid values ``phi`` at points ``(x, y)``."""
    Ny, Nx = phi.shape[0] - 1, phi.shape[1] - 1
    s = np.clip(x * Nx / lx, 0.0, Nx)
    t = np.clip(y * Ny / ly, 0.0, Ny)
    i = np.minimum(np.floor(s).astype(int), Nx - 1)
    j = np.minimum(np.floor(t).astype(int), Ny - 1)
    a, b = s - i, t - j
    return (
        (1 - a) * (1 - b) * phi[j, i] + a * (1 - b) * phi[j, i + 1]
        + (1 - a) * b * phi[j + 1, i] + a * b * phi[j + 1, i + 1]
    )


def rasterize(phi: np.ndarray, lx: float, ly: float, supersample: int = SUPERSAMPLE) -> np.ndarray:
    """``uint8`` image, 0 where the design is material and 255 elsewhere; row 0 is ``y = ly``."""
    Ny, Nx = phi.shape[0] - 1, phi.shape[1] - 1
    W, H = supersample * Nx, supersample * Ny
    x = (np.arange(W) + 0.5) * lx / W
    y = ly - (np.arange(H) + 0.5) * ly / H
    X, Y = np.meshgrid(x, y)
    return np.where(bilinear(phi, lx, ly, X, Y) < 0.0, 0, 255).astype(np.uint8)


def render_design(phi: np.ndarray, path, lx: float = None, ly: float = None, supersample: int = SUPERSAMPLE) -> None:
    """Write the design ``{phi < 0}`` as a binary PGM (P5) file."""
    if lx is None or ly is None:
        lx, ly = float(phi.shape[1] - 1), float(phi.shape[0] - 1)
    img = rasterize(phi, lx, ly, supersample)
    H, W = img.shape
    with open(path, "wb") as f:
        f.write(b"P5\n%d %d\n255\n" % (W, H))
        f.write(img.tobytes())


def read_pgm(path) -> np.ndarray:
    with open(path, "rb") as f:
        data = f.read()
    parts = data.split(b"\n", 3)
    if parts[0] != b"P5":
        raise ValueError("not a binary PGM")
    W, H = map(int, parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(H, W)


def _fmt(v: float) -> str:
    return f"{v:.12g}"


def write_history(history: RunHistory, path) -> None:
    if len(history) == 0:
        raise ValueError("empty history")
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(HISTORY_HEADER)
        for r in history.records:
            w.writerow(
                [r.iteration, _fmt(r.J), _fmt(r.objective), _fmt(r.volume),
                 _fmt(r.volume_fraction), _fmt(r.beta), r.ls]
            )


def read_history(path) -> RunHistory:
    hist = RunHistory()
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            hist.append(
                IterationRecord(
                    int(row["iter"]), float(row["J"]), float(row["objective"]),
                    float(row["volume"]), float(row["volume_fraction"]),
                    float(row["beta"]), int(row["ls"]),
                )
            )
    return hist


def run_directory(out: str, case_name: str, Lambda: float, Nx: int) -> str:
    return os.path.join(out, case_name, f"LagVol={int(Lambda)}_Nx={Nx}")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="levelset-topopt",
        description="Level-set topology optimization with distributed shape derivatives.",
    )
    p.add_argument("case", help=f"one of: {', '.join(CASE_NAMES)}")
    p.add_argument("--nx", type=int, help="cells along x")
    p.add_argument("--ny", type=int, help="cells along y")
    p.add_argument("--lambda", dest="Lambda", type=float, help="volume multiplier override")
    p.add_argument("--out", default=".", help="output root directory")
    p.add_argument("--max-iters", type=int, help="override the iteration cap")
    p.add_argument(
        "--seed-figures", action="store_true",
        help="also write a design image at iteration 1, every 10th iteration and the last",
    )
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        case = get_case(args.case)
        if args.Lambda is not None:
            case = case.with_lambda(args.Lambda)
        nx = args.nx if args.nx is not None else case.nx
        ny = args.ny if args.ny is not None else (
            case.ny if args.nx is None else int(round(nx * case.ly / case.lx))
        )
        if nx < 1 or ny < 1 or abs(case.lx / nx - case.ly / ny) > 1e-12 * case.lx / nx:
            raise ConfigurationError(
                f"--nx {nx} --ny {ny} do not give square cells on {case.lx} x {case.ly}"
            )
        case = case.with_grid(nx, ny)
        config = OptimizerConfig.for_case(case, max_iters=args.max_iters)
        if config.max_iters is not None and config.max_iters < 1:
            raise ConfigurationError("--max-iters must be positive")
    except ConfigurationError as exc:
        print(f"levelset-topopt: {exc}", file=sys.stderr)
        return EXIT_USAGE

    rd = run_directory(args.out, case.name, case.Lambda, nx)
    it_max = config.it_max(nx)

    def snapshot(state):
        it = state.record.iteration + 1
        if args.seed_figures and (it % 10 == 0 or it == 1 or it == it_max or state.record.stop):
            render_design(state.phi_next, os.path.join(rd, f"it_{it}.pgm"), case.lx, case.ly)

    try:
        os.makedirs(rd, exist_ok=True)
        result = run(case, config, nx, ny, callback=snapshot)
        write_history(result.history, os.path.join(rd, "history.csv"))
        render_design(result.phi, os.path.join(rd, "design.pgm"), case.lx, case.ly)
    except ConfigurationError as exc:
        print(f"levelset-topopt: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SolverError, OSError) as exc:
        print(f"levelset-topopt: run failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"{case.name}: {result.status} after {len(result.history)} iterations, "
          f"J = {result.history.J[-1]:.6g}; output in {rd}")
    return EXIT_OK
