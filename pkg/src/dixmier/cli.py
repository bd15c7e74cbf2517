"""Command-line experiment runner.

Every subcommand prints a short verdict to stdout and writes CSV reports
into ``--out``.  Each report starts with ``# key=value`` lines recording the
configuration, so identical invocations give byte-identical files.

Exit codes: 0 success, 1 bad input, 2 tolerance or verdict failure,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import averaging as avg
from .errors import (DomainError, InvariantError, NumericalError,
                     PreconditionError, ResourceError)
from .logscale import LN2
from .profile import CesaroProfile, cesaro_log_mean
from .psi import check_concavity, check_doubling, check_taub, psi_by_name
from .spectra import (dixmier_weight_sequence, marcinkiewicz_norm,
                      read_matrix_csv, singular_values, write_spectrum_csv)
from .stepfn import read_stepfn, squares_example, tower_example

EXIT_OK, EXIT_INPUT, EXIT_TOLERANCE, EXIT_NUMERICAL = 0, 1, 2, 3

TOWER_A_SUP = 2.0 / LN2
TOWER_CD_SUP = 4.0 / (math.e * LN2)
TOWER_G_PEAK = 2.0 / (math.e * LN2)
SQUARES_MX = 1.0 / (2.0 * LN2)
SQUARES_CD = 1.0 / LN2
SQUARES_GAP = 0.58


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; bad input is exit 1 here
    def error(self, message):
        raise _UsageError(message)


@dataclass
class ExperimentConfig:
    command: str
    psi: str
    example: str
    n_min: int | None
    n_max: int | None
    tol: float | None
    out: str
    strict: bool
    emit_profile: bool

    def validate(self):
        if (self.n_min is None) != (self.n_max is None):
            raise DomainError("give both --n-min and --n-max")
        if self.n_min is not None and not self.n_min < self.n_max:
            raise DomainError("--n-min must be below --n-max")
        if self.tol is not None and not self.tol > 0:
            raise DomainError("--tol must be positive")

    @property
    def blocks(self):
        return None if self.n_min is None else (self.n_min, self.n_max)

    def header(self, **extra) -> list[str]:
        items = {
            "command": self.command,
            "psi": self.psi,
            "example": self.example,
            "n_min": self.n_min,
            "n_max": self.n_max,
            "tol": self.tol,
        }
        items.update(extra)
        return [f"# {k}={v}" for k, v in items.items()]


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _write_rows(path, header, columns, rows):
    with open(path, "w", newline="") as fh:
        for line in header:
            fh.write(line + "\n")
        fh.write(",".join(columns) + "\n")
        for r in rows:
            fh.write(",".join(_fmt(v) if not isinstance(v, str) else v for v in r) + "\n")


def _write_two_column(path, header, u, y):
    """gnuplot-friendly whitespace-separated ``u y`` table."""
    with open(path, "w") as fh:
        for line in header:
            fh.write(line + "\n")
        fh.write("# u y\n")
        for a, b in zip(u, y):
            fh.write(f"{float(a)!r} {float(b)!r}\n")


def _emit_profile(cfg, stem, prof, window, header, per_piece=32):
    lo, hi = prof.pieces_in(*window)
    s = np.linspace(0.0, 1.0, per_piece + 1)
    u = (lo[:, None] + (hi - lo)[:, None] * s).ravel()
    for pts in prof.critical.values():
        u = np.concatenate([u, pts[(pts >= lo[0]) & (pts <= hi[-1])]])
    u = np.unique(u)
    y = np.asarray(prof(u), dtype=float)
    csv_path = os.path.join(cfg.out, f"{stem}.csv")
    with open(csv_path, "w") as fh:
        for line in header:
            fh.write(line + "\n")
        fh.write("u,y\n")
        for a, b in zip(u, y):
            fh.write(f"{float(a)!r},{float(b)!r}\n")
    _write_two_column(os.path.join(cfg.out, f"{stem}.dat"), header, u, y)
    return csv_path


def _load_example(which: str):
    if which == "tower":
        return tower_example()
    if which == "squares":
        return squares_example()
    if which.startswith("file:"):
        return read_stepfn(which[5:])
    raise DomainError(f"unknown example {which!r}; use tower, squares or file:<path>")


def _row(name, expected, computed, ok):
    err = abs(computed - expected) if expected is not None else None
    return [name, _fmt(expected), _fmt(computed), _fmt(err), "pass" if ok else "fail"]


_COLUMNS = ["quantity", "paper_value", "computed", "abs_error"]


def _report(path, header, rows):
    """CSV without the status column; status goes to stdout."""
    _write_rows(path, header, _COLUMNS, [r[:4] for r in rows])
    for r in rows:
        print(f"{r[0]:>16}  expected={r[1]:<20} computed={r[2]:<20} {r[4]}")


# -- subcommands ---------------------------------------------------------


def run_verify_theorem2(cfg: ExperimentConfig) -> int:
    """Tower example: upper limits of ``a`` and of its Cesaro mean differ."""
    f = tower_example()
    psi = psi_by_name(cfg.psi)
    blocks = cfg.blocks or avg.example_defaults(f)["blocks"]
    tol_a = cfg.tol or 1e-3
    tol_cd = cfg.tol or 5e-3
    a_win, c_win, u_max = avg.block_windows(f, blocks)
    a = avg.a_curve(f, psi, u_max)
    sup_a = avg.limsup_estimate(a, a_win, tol=tol_a)
    m = CesaroProfile(a)
    sup_m = avg.limsup_estimate(m, c_win, tol=tol_cd)
    x = avg.tower_x_profile(blocks[1] + 1)
    g_peak = float(cesaro_log_mean(x, 2.0 ** (blocks[1] + 1.0 / LN2 - 1.0)))
    gap = sup_a.estimate - sup_m.estimate

    checks = [
        ("a_limsup", TOWER_A_SUP, sup_a.estimate, tol_a),
        ("cesaro_a_limsup", TOWER_CD_SUP, sup_m.estimate, tol_cd),
        ("g_peak", TOWER_G_PEAK, g_peak, tol_a),
    ]
    rows = [_row(n, p, c, abs(c - p) <= t) for n, p, c, t in checks]
    rows.append(_row("gap", TOWER_A_SUP - TOWER_CD_SUP, gap, gap > 0))
    ok = all(r[-1] == "pass" for r in rows)
    converged = sup_a.converged and sup_m.converged

    header = cfg.header(n_window=f"{blocks[0]}..{blocks[1]}", tol_a=tol_a,
                        tol_cesaro=tol_cd, converged=_fmt(converged))
    _report(os.path.join(cfg.out, "theorem2.csv"), header, rows)
    if cfg.emit_profile:
        _emit_profile(cfg, "a_profile", a, a_win, header)
        _emit_profile(cfg, "Ma_profile", m, c_win, header)
    print(f"upper limits differ: {'yes' if gap > 0 else 'no'} (gap {gap:.6f})")
    if not ok or (cfg.strict and not converged):
        return EXIT_TOLERANCE
    return EXIT_OK


def _mx_limit(n_max: int) -> float:
    x = avg.squares_x_profile(n_max + 1)
    return float(cesaro_log_mean(x, float(n_max * n_max)))


def run_verify_theorem4(cfg: ExperimentConfig, mx_only: bool = False) -> int:
    """Squares example: Cesaro means converge, the a-profile does not."""
    f = squares_example()
    psi = psi_by_name(cfg.psi)
    blocks = cfg.blocks or avg.example_defaults(f)["blocks"]
    n_top = blocks[1]
    tol_a = cfg.tol or 1e-3
    tol_cd = cfg.tol or 5e-3

    mx = _mx_limit(n_top)
    rows = [_row("mx_limit", SQUARES_MX, mx, abs(mx - SQUARES_MX) <= tol_a)]
    converged = True
    if not mx_only:
        cd = avg.connes_dixmier_bounds(f, psi, blocks=blocks, tol=tol_cd)
        dv = avg.dixmier_verdict(f, psi, tol=tol_a, blocks=blocks)
        a_sq = avg.a_profile(f, psi, float(n_top) ** 2)
        a_half = avg.a_profile(f, psi, (n_top + 0.5) ** 2)
        cd_val = 0.5 * (cd.bounds[0] + cd.bounds[1])
        gap = dv.bounds[1] - dv.bounds[0]
        rows += [
            _row("cesaro_a_liminf", None, cd.bounds[0], True),
            _row("cesaro_a_limsup", None, cd.bounds[1], True),
            _row("cesaro_a_value", SQUARES_CD, cd_val,
                 cd.measurable and abs(cd_val - SQUARES_CD) <= tol_cd),
            _row("a_at_square", 2.0, a_sq, abs(a_sq - 2.0) <= tol_a),
            _row("a_at_half_square", math.sqrt(2.0), a_half,
                 abs(a_half - math.sqrt(2.0)) <= tol_a),
            _row("a_liminf", None, dv.bounds[0], True),
            _row("a_limsup", 2.0, dv.bounds[1], abs(dv.bounds[1] - 2.0) <= tol_a),
            _row("a_gap", SQUARES_GAP, gap, (not dv.measurable) and gap >= SQUARES_GAP),
        ]
        converged = all(e.converged for e in (cd.evidence["liminf"],
                                               cd.evidence["limsup"]))
    ok = all(r[-1] == "pass" for r in rows)

    header = cfg.header(n_window=f"{blocks[0]}..{blocks[1]}", tol_a=tol_a,
                        tol_cesaro=tol_cd, mx_only=_fmt(mx_only),
                        converged=_fmt(converged))
    _report(os.path.join(cfg.out, "theorem4.csv"), header, rows)
    if cfg.emit_profile and not mx_only:
        a_win, c_win, u_max = avg.block_windows(f, blocks)
        a = avg.a_curve(f, psi, u_max)
        _emit_profile(cfg, "a_profile", a, a_win, header, per_piece=8)
        _emit_profile(cfg, "Ma_profile", CesaroProfile(a), c_win, header, per_piece=8)
    if not mx_only:
        print("Connes-Dixmier measurable: " + ("yes" if cd.measurable else "no"))
        print("Dixmier measurable: " + ("yes" if dv.measurable else "no"))
    if not ok or (cfg.strict and not converged):
        return EXIT_TOLERANCE
    return EXIT_OK


def run_check_psi(cfg: ExperimentConfig) -> int:
    psi = psi_by_name(cfg.psi)
    dbl = check_doubling(psi)
    taub = check_taub(psi)
    conc = check_concavity(psi)
    dbl_text = {"limit": "satisfied", "liminf": "liminf only",
                "fails": "fails"}[dbl.verdict]
    taub_text = {"bounded": "bounded on grid", "unbounded": "unbounded on grid",
                 "inconclusive": "inconclusive on grid"}[taub.verdict]
    print(f"doubling ratio -> 1: {dbl_text}; log-derivative bound: {taub_text}")
    print(f"max second divided difference: {conc:.3e}")
    header = cfg.header(doubling=dbl.verdict, growth=taub.verdict,
                        concavity=_fmt(conc))
    _write_rows(os.path.join(cfg.out, "doubling.csv"), header, ["u", "ratio"],
                zip(dbl.u, dbl.ratio))
    _write_rows(os.path.join(cfg.out, "growth.csv"), header, ["t", "g"],
                zip(taub.t, taub.g))
    failed = dbl.verdict == "fails" or taub.verdict != "bounded"
    return EXIT_TOLERANCE if cfg.strict and failed else EXIT_OK


def _verdict_line(trace, v):
    if v.measurable:
        return f"{trace} measurable (value {v.value:.6f})"
    return f"not {trace} measurable (bounds {v.bounds[0]:.6f}, {v.bounds[1]:.6f})"


def run_measurability(cfg: ExperimentConfig) -> int:
    f = _load_example(cfg.example)
    psi = psi_by_name(cfg.psi)
    tol = cfg.tol or 1e-2
    cd = avg.connes_dixmier_bounds(f, psi, blocks=cfg.blocks, tol=max(tol, 5e-3))
    rows = [["connes_dixmier", cd.kind, _fmt(cd.bounds[0]), _fmt(cd.bounds[1]),
             _fmt(cd.value)]]
    try:
        dv = avg.dixmier_verdict(f, psi, tol=tol, blocks=cfg.blocks)
    except PreconditionError as exc:
        print(f"Dixmier verdict skipped: {exc}")
        rep = avg.uniform_cesaro_diagnostic(f, psi, cd.value if cd.measurable
                                            else cd.bounds[1], tol=tol)
        print(f"uniform Cesaro diagnostic: {rep.verdict} on grid "
              f"(witness shift {rep.witness:g})")
        rows.append(["uniform_cesaro", rep.verdict, "", _fmt(rep.sup_dev[-1]), ""])
        dixmier_ok = rep.uniform
    else:
        print(_verdict_line("Dixmier", dv))
        rows.append(["dixmier", dv.kind, _fmt(dv.bounds[0]), _fmt(dv.bounds[1]),
                     _fmt(dv.value)])
        dixmier_ok = dv.measurable
    print(_verdict_line("Connes-Dixmier", cd))
    _write_rows(os.path.join(cfg.out, "measurability.csv"), cfg.header(),
                ["trace", "verdict", "low", "high", "value"], rows)
    if cfg.strict and not (dixmier_ok and cd.measurable):
        return EXIT_TOLERANCE
    return EXIT_OK


def run_trace_bounds(cfg: ExperimentConfig, matrix: str, n: int | None) -> int:
    if not matrix:
        raise DomainError("trace-bounds needs --matrix")
    psi = psi_by_name(cfg.psi)
    mu = singular_values(read_matrix_csv(matrix))
    idx = len(mu) - 1 if n is None else n
    w = dixmier_weight_sequence(mu, psi, idx)
    norm = marcinkiewicz_norm(mu, psi)
    print(f"weight at n={idx}: {w:.6f}")
    print(f"Marcinkiewicz norm: {norm.value:.6f} at n={int(norm.argmax)}")
    write_spectrum_csv(os.path.join(cfg.out, "spectrum.csv"), mu)
    weights = [dixmier_weight_sequence(mu, psi, k) for k in range(len(mu))]
    _write_rows(os.path.join(cfg.out, "trace_bounds.csv"),
                cfg.header(matrix=os.path.basename(matrix), n=idx),
                ["n", "mu", "weight"],
                zip(range(len(mu)), mu.values, weights))
    return EXIT_OK


def run_profile(cfg: ExperimentConfig) -> int:
    f = _load_example(cfg.example)
    psi = psi_by_name(cfg.psi)
    a, a_win, c_win = avg._a_setup(f, psi, cfg.blocks)
    m = CesaroProfile(a)
    if c_win is None:
        c_win = avg._generic_window(m, 12)
    header = cfg.header()
    p1 = _emit_profile(cfg, "a_profile", a, a_win, header)
    p2 = _emit_profile(cfg, "Ma_profile", m, c_win, header)
    print(p1)
    print(p2)
    return EXIT_OK


# -- entry point ---------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--psi", default=None,
                        help="log | sqrt2 | identity | file:<psi-v1 table>")
    common.add_argument("--example", default="tower",
                        help="tower | squares | file:<stepfn-v1 file>")
    common.add_argument("--n-min", type=int, default=None)
    common.add_argument("--n-max", type=int, default=None)
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--out", default="results")
    common.add_argument("--strict", action="store_true",
                        help="also fail when estimates have not converged")
    common.add_argument("--emit-profile", action="store_true")

    parser = _Parser(prog="dixmier", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("verify-theorem2", parents=[common],
                   help="tower example: Dixmier vs Connes-Dixmier upper limits")
    p4 = sub.add_parser("verify-theorem4", parents=[common],
                        help="squares example: Cesaro-measurable, not Dixmier measurable")
    p4.add_argument("--mx-only", action="store_true")
    sub.add_parser("check-psi", parents=[common], help="doubling and growth checks")
    sub.add_parser("measurability", parents=[common], help="measurability verdicts")
    tb = sub.add_parser("trace-bounds", parents=[common],
                        help="singular values and weights of a CSV matrix")
    tb.add_argument("--matrix", default=None)
    tb.add_argument("--n", type=int, default=None)
    sub.add_parser("profile", parents=[common], help="emit a and M(a) profiles")
    return parser


_DEFAULT_PSI = {"verify-theorem4": "sqrt2"}
_FIXED_EXAMPLE = {"verify-theorem2": "tower", "verify-theorem4": "squares"}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    psi = args.psi or _DEFAULT_PSI.get(args.command, "log")
    example = _FIXED_EXAMPLE.get(args.command, args.example)
    cfg = ExperimentConfig(args.command, psi, example, args.n_min,
                           args.n_max, args.tol, args.out, args.strict,
                           args.emit_profile)
    try:
        cfg.validate()
        psi_by_name(cfg.psi)
        os.makedirs(cfg.out, exist_ok=True)
        if args.command == "verify-theorem2":
            return run_verify_theorem2(cfg)
        if args.command == "verify-theorem4":
            return run_verify_theorem4(cfg, mx_only=args.mx_only)
        if args.command == "check-psi":
            return run_check_psi(cfg)
        if args.command == "measurability":
            return run_measurability(cfg)
        if args.command == "trace-bounds":
            return run_trace_bounds(cfg, args.matrix, args.n)
        return run_profile(cfg)
    except (DomainError, PreconditionError, InvariantError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalError, ResourceError, ArithmeticError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
