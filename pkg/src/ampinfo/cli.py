"""Command-line entry point: regenerate the figure data as CSV files.

Angles on the command line are in degrees; the library works in radians.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import dist as dist_mod
from .dist import OutcomeDistribution, multinomial_enumerate
from .encode import EncodingKind, default_grid, prob_bits_correct
from .errors import DomainError, SizeError
from .mc import SamplerConfig, calibration_cells
from .repvec import (
    PhaseVector,
    VectorKind,
    asymptotic_component,
    dispersion_component,
    dispersion_total,
    endpoint_prob,
)
from .unitary import (
    EmbeddedRotation,
    Rotation2Params,
    UnitaryK,
    compose,
    dispersion_transformed,
    random_factors,
    rotation2,
)

COMMANDS = ("fig1", "fig3", "fig4", "fig5", "klevel", "transform", "mc-check")
FIG4_SMALL_N = 100
LADDER_STEPS = 6
MC_FAIL_FRACTION = 0.10


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _factor_specs(text: str) -> list[tuple[int, int, float, float, float]]:
    out = []
    for item in text.split(";"):
        if not item.strip():
            continue
        parts = item.split(":")
        if len(parts) != 5:
            raise argparse.ArgumentTypeError(f"factor must be i:j:tau:theta:phi, got {item!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
            tau, theta, phi = (float(x) for x in parts[2:])
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad factor {item!r}")
        out.append((i, j, tau, theta, phi))
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="ampinfo",
        description="Bit credibility and dispersion of encoded probabilistic data.",
    )
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--trials", type=int, default=4000, help="number of trials N")
    ap.add_argument("--bits", type=int, default=6, help="bit budget S")
    ap.add_argument("--grid-points", type=int, default=199)
    ap.add_argument("--outcomes", type=int, default=None, help="number of outcomes K")
    ap.add_argument("--dist", type=_floats, default=None, help="p1,p2,...")
    ap.add_argument("--rotation", type=_floats, default=[75.0, 50.0, 110.0],
                    help="tau,theta,phi in degrees")
    ap.add_argument("--factors", type=_factor_specs, default=None,
                    help="i:j:tau:theta:phi;... with 1-based i<j and angles in degrees")
    ap.add_argument("--random-factors", type=int, default=None,
                    help="use this many random embedded rotations drawn from --seed")
    ap.add_argument("--phases", type=_floats, default=None, help="d1,d2,... in degrees")
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--reps", type=int, default=10_000)
    ap.add_argument("--oracle", action="store_true",
                    help="klevel: add the brute-force enumeration column")
    ap.add_argument("--include-endpoints", action="store_true",
                    help="add p = 0 and p = 1 to the grid")
    ap.add_argument("--out", type=Path, default=None, help="CSV path (default <command>.csv)")
    return ap


def _grid(args) -> np.ndarray:
    return default_grid(args.grid_points, args.include_endpoints)


def _rotation(args) -> Rotation2Params:
    if len(args.rotation) != 3:
        raise DomainError("--rotation needs tau,theta,phi")
    return Rotation2Params.from_degrees(*args.rotation)


def _phases(args, k: int) -> PhaseVector:
    if args.phases is None:
        return PhaseVector.zeros(k)
    if len(args.phases) != k:
        raise DomainError(f"{len(args.phases)} phases given for K={k}")
    return PhaseVector.from_degrees(args.phases)


def _distribution(args) -> OutcomeDistribution:
    if args.dist is not None:
        d = OutcomeDistribution(tuple(args.dist))
        if args.outcomes is not None and args.outcomes != d.k:
            raise DomainError(f"--dist has {d.k} entries but --outcomes is {args.outcomes}")
        return d
    return OutcomeDistribution.uniform(args.outcomes or 2)


def cmd_fig1(args):
    grid = _grid(args)
    header = ["p", "prob_frequency", "prob_amplitude", "prob_arcsine"]
    kinds = (EncodingKind.FREQUENCY, EncodingKind.AMPLITUDE, EncodingKind.ARCSINE)
    cols = [np.array([prob_bits_correct(k, args.trials, p, args.bits) for p in grid]) for k in kinds]
    rows = [[p, *(c[i] for c in cols)] for i, p in enumerate(grid)]
    parts = [f"{k.value} min={c.min():.4f} max={c.max():.4f}" for k, c in zip(kinds, cols)]
    summary = [f"fig1 N={args.trials} S={args.bits}: " + "; ".join(parts)]
    return header, rows, summary


def cmd_fig3(args):
    grid = _grid(args)
    eta = np.array([endpoint_prob(VectorKind.ETA, args.trials, p, args.bits) for p in grid])
    chi = np.array([endpoint_prob(VectorKind.CHI, args.trials, p, args.bits) for p in grid])
    rows = [[p, e, c] for p, e, c in zip(grid, eta, chi)]
    diff = float(np.max(np.abs(eta - chi)))
    summary = [f"fig3 N={args.trials} S={args.bits}: max |eta - chi| = {diff:.3g}"]
    return ["p", "endpoint_prob_eta", "endpoint_prob_chi"], rows, summary


def cmd_fig4(args):
    grid = _grid(args)
    small, large = FIG4_SMALL_N, args.trials
    header = ["p_j", f"n_times_D2_at_N{small}", f"n_times_D2_at_N{large}", "asymptote"]
    rows = []
    worst = 0.0
    for p in grid:
        a = small * dispersion_component(small, p)
        b = large * dispersion_component(large, p)
        asym = asymptotic_component(p)
        rows.append([p, a, b, asym])
        if 0.1 <= p <= 0.95:
            worst = max(worst, abs(b - asym) / asym)
    summary = [f"fig4: max relative gap to (1-p)/4 at N={large} on [0.1, 0.95] = {worst:.3g}"]
    return header, rows, summary


def cmd_fig5(args):
    grid = _grid(args)
    u = UnitaryK(rotation2(_rotation(args)).matrix)
    phases = _phases(args, 2)
    n = args.trials
    rows = []
    for p in grid:
        d = OutcomeDistribution.binary(p)
        before = dispersion_transformed(n, d, phases, UnitaryK.identity(2))
        after = dispersion_transformed(n, d, phases, u)
        rows.append([p, *before.n_scaled, before.n_scaled_total, *after.n_scaled, after.n_scaled_total])
    gap = max(abs(r[3] - r[6]) for r in rows)
    totals = [r[6] for r in rows]
    header = ["p1", "D2_eta1", "D2_eta2", "D2_eta_total", "D2_psi1", "D2_psi2", "D2_psi_total"]
    summary = [
        f"fig5 N={n} rotation={','.join(fmt(a) for a in args.rotation)} deg: "
        f"max |D2_eta_total - D2_psi_total| = {gap:.3g}; "
        f"D2_psi_total in [{min(totals):.5f}, {max(totals):.5f}]"
    ]
    return header, rows, summary


def _ladder(n_max: int) -> list[int]:
    ns = sorted({n_max >> k for k in range(LADDER_STEPS)} - {0})
    return ns


def _enumerated_dispersion(n: int, d: OutcomeDistribution) -> float:
    table = multinomial_enumerate(n, d)
    eta = np.array([np.sqrt(np.array(c.counts) / n) for c, _ in table])
    w = np.array([wt for _, wt in table])
    mean = w @ eta
    return float(w @ np.sum((eta - mean) ** 2, axis=1))


def cmd_klevel(args):
    d = _distribution(args)
    header = ["N", "n_times_D2", "asymptote", "relative_gap"]
    if args.oracle:
        header.append("n_times_D2_oracle")
    asym = (d.k - 1) / 4.0
    rows = []
    worst_oracle = 0.0
    for n in _ladder(args.trials):
        value = dispersion_total(n, d).n_scaled_total
        row = [n, value, asym, abs(value - asym) / asym]
        if args.oracle:
            if dist_mod.composition_count(n, d.k) <= dist_mod.ENUMERATION_LIMIT:
                ref = n * _enumerated_dispersion(n, d)
                worst_oracle = max(worst_oracle, abs(ref - value))
                row.append(ref)
            else:
                row.append(math.nan)
        rows.append(row)
    summary = [f"klevel K={d.k} N={rows[-1][0]}: N*D2={rows[-1][1]:.6f} asymptote={asym} "
               f"relative gap={rows[-1][3]:.3g}"]
    if args.oracle:
        summary.append(f"max |N*D2 - enumeration| = {worst_oracle:.3g}")
    return header, rows, summary


def _transform_factors(args, k: int) -> list[EmbeddedRotation]:
    if args.random_factors is not None:
        return random_factors(k, args.random_factors, np.random.default_rng(args.seed))
    out = []
    for i, j, tau, theta, phi in args.factors or []:
        rot = rotation2(Rotation2Params.from_degrees(tau, theta, phi))
        out.append(EmbeddedRotation(i, j, rot, k))
    return out


def cmd_transform(args):
    d = _distribution(args)
    k = d.k
    phases = _phases(args, k)
    u = compose(_transform_factors(args, k), dim=k)
    n = args.trials
    before = dispersion_transformed(n, d, phases, UnitaryK.identity(k))
    after = dispersion_transformed(n, d, phases, u)
    rows = [[str(c + 1), b, a] for c, (b, a) in enumerate(zip(before.n_scaled, after.n_scaled))]
    rows.append(["total", before.n_scaled_total, after.n_scaled_total])
    with np.printoptions(precision=6, suppress=True):
        matrix = str(u.entries)
    summary = [
        f"transform K={k} N={n}",
        "unitary:",
        *matrix.splitlines(),
        f"unitarity residual = {u.residual():.3g}",
        f"N*D2 before = {before.n_scaled_total:.12f}",
        f"N*D2 after  = {after.n_scaled_total:.12f}",
        f"conservation residual = {abs(after.total - before.total):.3g}",
    ]
    return ["component", "n_times_D2_eta", "n_times_D2_psi"], rows, summary


def cmd_mc_check(args):
    cells = calibration_cells(SamplerConfig(args.seed, args.reps))
    rows = []
    lines = []
    for c in cells:
        status = "PASS" if c.passed else "FAIL"
        lines.append(f"{status} {c.name}: exact={c.exact:.6g} mc={c.estimate.mean:.6g} "
                     f"se={c.estimate.std_error:.3g}")
        rows.append([c.name, c.exact, c.estimate.mean, c.estimate.std_error, int(c.passed)])
    failed = sum(not c.passed for c in cells)
    lines.append(f"mc-check seed={args.seed} reps={args.reps} generator={cells[0].estimate.generator}: "
                 f"{len(cells) - failed}/{len(cells)} cells pass")
    header = ["cell", "exact", "mc_mean", "mc_std_error", "passed"]
    return header, rows, lines, failed > MC_FAIL_FRACTION * len(cells)


HANDLERS = {
    "fig1": cmd_fig1,
    "fig3": cmd_fig3,
    "fig4": cmd_fig4,
    "fig5": cmd_fig5,
    "klevel": cmd_klevel,
    "transform": cmd_transform,
}


def render_csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([v if isinstance(v, (str, int, np.integer)) else fmt(v) for v in row])
    return buf.getvalue()


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    failed = False
    try:
        if args.command == "mc-check":
            header, rows, summary, failed = cmd_mc_check(args)
            out = args.out
        else:
            header, rows, summary = HANDLERS[args.command](args)
            out = args.out or Path(f"{args.command}.csv")
    except (DomainError, SizeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if out is not None:
        try:
            out.write_text(render_csv(header, rows))
        except OSError as exc:
            print(f"error: cannot write {out}: {exc}", file=sys.stderr)
            return 1
    for line in summary:
        print(line)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
