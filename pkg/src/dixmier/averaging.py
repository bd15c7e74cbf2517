"""Normalised averages ``a(t, f)``, their Cesaro means and trace diagnostics.

For a nonincreasing step function ``f`` and a normalising ``psi``,

    a(t, f) = (1 / psi(t)) * integral_0^t f*(s) ds.

On the step piece ``[t_{k-1}, t_k)`` with value ``c_k`` the integral is
``P_k + c_k t`` where ``P_k = F(t_{k-1}) - c_k t_{k-1} >= 0``.  So in ``u``
coordinates every piece of the a-profile is the sum of ``P_k / psi(2**u)``
and ``c_k 2**u / psi(2**u)``; the second summand is exactly
``t f*(t) / psi(t)``, whose Cesaro mean tends to zero for the examples.

The supremum of Dixmier traces of an operator with singular values ``f`` is
the upper limit of ``a``; the supremum over Connes-Dixmier traces is the
upper limit of the Cesaro mean ``M a``.  The functions below estimate both
envelopes on explicit windows of pieces, using golden-section refinement
and each example's registered critical points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, PreconditionError, ResourceError
from .logscale import LN2, ZERO, LogReal, log_mul, log_sub_pos
from .profile import (CesaroProfile, ExpNegSqrtTerm, GrowthTerm,
                      InvLogTerm, OverPsiTerm, PiecewiseProfile, Profile,
                      cesaro_log_mean)
from .psi import PsiFunction, check_doubling
from .stepfn import StepFunction, cumulative_integral

__all__ = [
    "a_profile",
    "a_curve",
    "residual_profile",
    "residual_lemma12",
    "tower_x_profile",
    "squares_x_profile",
    "tower_g",
    "ExtremumEstimate",
    "limsup_estimate",
    "liminf_estimate",
    "envelope",
    "MeasurabilityVerdict",
    "dixmier_verdict",
    "connes_dixmier_bounds",
    "distance_to_separable",
    "UniformityReport",
    "uniform_cesaro_diagnostic",
    "example_defaults",
    "block_windows",
]

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def a_profile(f: StepFunction, psi: PsiFunction, u):
    """``a(2**u, f)`` computed from the cumulative integral.

    >>> from dixmier.stepfn import tower_example
    >>> from dixmier.psi import PsiLog
    >>> round(a_profile(tower_example(), PsiLog(), 4.0), 6)
    1.764781
    """
    scalar = np.ndim(u) == 0
    us = np.atleast_1d(np.asarray(u, dtype=float))
    out = np.empty(us.shape)
    for i, ui in enumerate(us):
        F = cumulative_integral(f, float(ui))
        if F.sign == 0:
            out[i] = 0.0
        else:
            out[i] = 2.0 ** (F.exponent - float(psi.eval_log(ui)))
    return float(out[0]) if scalar else out


def _registered(families: dict, lo: float, hi: float, n_cap: int = 10 ** 6):
    """Materialise ``n -> u`` families on ``[lo, hi]``."""
    out = {}
    for name, fn in families.items():
        pts = []
        n = 0
        while n < n_cap:
            u = fn(n)
            if u > hi:
                break
            if u >= lo:
                pts.append(u)
            n += 1
        out[name] = np.array(pts)
    return out


def a_curve(f: StepFunction, psi: PsiFunction, u_max: float,
            u_min: float = None) -> PiecewiseProfile:
    """The a-profile ``u -> a(2**u, f)`` as a piecewise profile.

    Pieces follow the step function.  Beyond a finite support the constant
    numerator is split into dyadic pieces up to ``u_max`` so that windows
    of pieces still make sense there.

    Parameters
    ----------
    f : StepFunction
        Nonincreasing input; lazy tails are generated up to ``u_max``.
    psi : PsiFunction
    u_max : float
        The profile extends at least this far.
    u_min : float, optional
        Left end of the first piece; defaults to 16 below the first
        breakpoint (and never above 0).
    """
    if not f.is_nonincreasing():
        raise DomainError("a-profiles need a nonincreasing (rearranged) input")
    f.cover(u_max)
    pieces = f.pieces()
    first_bp = pieces[0][0] if pieces else 0.0
    start = min(0.0, first_bp - 16.0) if u_min is None else float(u_min)
    if pieces and start >= first_bp:
        raise DomainError("u_min must lie below the first breakpoint")

    edges = [start]
    p_exp, g_exp, anchors = [], [], []
    for k, (u, c) in enumerate(pieces):
        if edges[-1] >= u_max and k > 0:
            break
        if k == 0:
            P = ZERO
        else:
            F_prev = f.cumulative_at(k - 1)
            P = log_sub_pos(F_prev, log_mul(c, f.left_edge(k)))
        p_exp.append(P.exponent)
        g_exp.append(c.exponent + u if c.sign else -math.inf)
        anchors.append(u)
        edges.append(u)

    if not f.is_lazy and edges[-1] < u_max:
        total = f.total() if pieces else ZERO
        j = max(1, math.floor(math.log2(max(edges[-1], 1.0))) + 1)
        while True:
            nxt = 2.0 ** j
            if nxt > edges[-1]:
                edges.append(nxt)
                p_exp.append(total.exponent)
                g_exp.append(-math.inf)
                anchors.append(nxt)
            if nxt >= u_max:
                break
            j += 1
        # constant numerator continues to infinity
        edges.append(math.inf)
        p_exp.append(total.exponent)
        g_exp.append(-math.inf)
        anchors.append(math.inf)

    terms = [OverPsiTerm(psi, p_exp), GrowthTerm(psi, g_exp, anchors)]
    hi = edges[-1] if math.isfinite(edges[-1]) else edges[-2]
    crit_a = {k: v for k, v in f.critical.items() if k != "cesaro"}
    prof = PiecewiseProfile(edges, terms,
                            critical=_registered(crit_a, start, hi),
                            name=f"a[{f.meta.get('name', 'f')},{psi.name}]")
    cesaro = _registered({"cesaro": f.critical["cesaro"]}, 0.0, hi) \
        if "cesaro" in f.critical else {}
    prof.critical["cesaro"] = cesaro.get("cesaro", np.zeros(0))
    prof.block_offset = f.meta.get("block_offset", 0)
    return prof


def residual_profile(a: PiecewiseProfile) -> PiecewiseProfile:
    """The ``t f*(t) / psi(t)`` part of an a-profile."""
    growth = [t for t in a.terms if isinstance(t, GrowthTerm)]
    return PiecewiseProfile(a.edges, growth, name=f"resid[{a.name}]")


def residual_lemma12(f: StepFunction, psi: PsiFunction, u: float) -> float:
    """Cesaro mean of ``s f*(s) / psi(s)`` at ``t = 2**u``.

    Tends to zero for every ``f`` of finite Marcinkiewicz norm along
    generalized limits; on the examples the decay is visible directly.
    """
    return cesaro_log_mean(residual_profile(a_curve(f, psi, u)), u)


# -- reference constructions ---------------------------------------------


def tower_x_profile(n_max: int) -> PiecewiseProfile:
    """``x(t) = 2**n / log t`` on ``[2**(2**n), 2**(2**(n+1)))``, zero below 2.

    Integrated through the closed form of ``d log s / log s``.
    """
    edges = [0.0, 1.0] + [2.0 ** (n + 1) for n in range(n_max + 1)]
    inv = InvLogTerm([0.0] + [2.0 ** n for n in range(n_max + 1)])
    prof = PiecewiseProfile(edges, [inv], name="x[tower]")
    peaks = np.array([2.0 ** (n + 1.0 / LN2 - 1.0) for n in range(n_max + 1)])
    prof.critical["self"] = peaks
    prof.critical["cesaro"] = peaks
    return prof


def squares_x_profile(n_max: int) -> PiecewiseProfile:
    """``x(t) = 2**(n - sqrt(log2 t))`` on ``[2**(n**2), 2**((n+1)**2))``.

    Integrated through the closed form of ``2**(-sqrt(log2 s)) ds / s``.
    """
    edges = [float(n * n) for n in range(n_max + 2)]
    lc = [float(n) for n in range(n_max + 1)]
    return PiecewiseProfile(edges, [ExpNegSqrtTerm(lc)], name="x[squares]")


def tower_g(u):
    """``(2**n / u) * (1 + log2 u - n)`` for ``u`` in ``[2**n, 2**(n+1))``.

    The leading part of ``(M x)`` for the tower construction; its maxima
    all equal ``2 / (e log 2)``.
    """
    u = np.asarray(u, dtype=float)
    n = np.floor(np.log2(u))
    out = np.exp2(n) / u * (1.0 + np.log2(u) - n)
    return float(out) if out.ndim == 0 else out


# -- extremum estimation -------------------------------------------------


@dataclass
class ExtremumEstimate:
    """Per-piece extrema of a profile over a window and their limit.

    ``estimate`` is the last per-piece extremum when the tail values agree
    within ``tol`` (``converged``); otherwise the extreme tail value.
    """

    estimate: float
    values: np.ndarray
    locations: np.ndarray
    converged: bool
    window: tuple
    kind: str = "sup"


def _window_bounds(x: Profile, window):
    i0, i1 = int(window[0]), int(window[1])
    if i1 - i0 + 1 < 5:
        raise DomainError("an extremum window must cover at least 5 pieces")
    if i0 < 0:
        raise DomainError("window starts before the first piece")
    if i1 >= x.n_pieces or not math.isfinite(x.edges[i1 + 1]):
        raise ResourceError(
            f"window reaches piece {i1} but the profile has "
            f"{x.n_pieces} finite pieces")
    return x.edges[i0:i1 + 1].copy(), x.edges[i0 + 1:i1 + 2].copy()


def _sample(x: Profile, lo, hi, grid):
    s = np.linspace(0.0, 1.0, grid)
    pts = lo[:, None] + (hi - lo)[:, None] * s
    pts[:, -1] = hi
    return pts, np.asarray(x(pts.ravel()), dtype=float).reshape(pts.shape)


def _golden(x, a, b, sign, iters=80):
    """Vectorised golden-section search for the maximum of ``sign * x``."""
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc = sign * np.asarray(x(c), dtype=float)
    fd = sign * np.asarray(x(d), dtype=float)
    for _ in range(iters):
        if np.all(b - a <= 1e-10 * np.maximum(1.0, np.abs(b))):
            break
        left = fc > fd
        # keep [a, d] where c wins, else [c, b]; one new point per row
        a, b = np.where(left, a, c), np.where(left, d, b)
        c, d = np.where(left, b - _GOLDEN * (b - a), d), np.where(left, c, a + _GOLDEN * (b - a))
        fc, fd = np.where(left, 0.0, fd), np.where(left, fc, 0.0)
        new = np.where(left, c, d)
        fn = sign * np.asarray(x(new), dtype=float)
        fc = np.where(left, fn, fc)
        fd = np.where(left, fd, fn)
    mid = 0.5 * (a + b)
    return mid, sign * np.asarray(x(mid), dtype=float)


def _piece_extrema(x: Profile, lo, hi, sign, sampled):
    """Grid seed, golden-section polish and critical points on every piece."""
    pts, raw = sampled
    grid = pts.shape[1]
    vals = sign * raw
    n = len(lo)
    rows = np.arange(n)
    j = np.argmax(vals, axis=1)
    best = vals[rows, j]
    where = pts[rows, j]

    a = pts[rows, np.maximum(j - 1, 0)]
    b = pts[rows, np.minimum(j + 1, grid - 1)]
    mid, fm = _golden(x, a, b, sign)
    better = fm > best
    best = np.where(better, fm, best)
    where = np.where(better, mid, where)

    for pts_c in x.critical.values():
        inside = pts_c[(pts_c >= lo[0]) & (pts_c <= hi[-1])]
        if not len(inside):
            continue
        owner = np.clip(np.searchsorted(hi, inside, side="left"), 0, n - 1)
        ok = (inside >= lo[owner]) & (inside <= hi[owner])
        inside, owner = inside[ok], owner[ok]
        if not len(inside):
            continue
        cv = sign * np.asarray(x(inside), dtype=float)
        for o, u, v in zip(owner, inside, cv):
            if v > best[o]:
                best[o] = v
                where[o] = u
    return sign * best, where


def _extremum(x, window, tol, sign, grid, tail_fraction, sampled=None):
    lo, hi = _window_bounds(x, window)
    if sampled is None:
        sampled = _sample(x, lo, hi, grid)
    values, locs = _piece_extrema(x, lo, hi, sign, sampled)
    n_tail = max(3, int(math.ceil(tail_fraction * len(values))))
    tail = values[-n_tail:]
    converged = bool(np.max(tail) - np.min(tail) <= tol)
    if converged:
        est = float(values[-1])
    else:
        est = float(np.max(tail) if sign > 0 else np.min(tail))
    return ExtremumEstimate(est, values, locs, converged, tuple(window),
                            "sup" if sign > 0 else "inf")


def envelope(x: Profile, window, tol: float = 1e-3, grid: int = 64,
             tail_fraction: float = 0.25):
    """``(liminf, limsup)`` estimates sharing one grid evaluation."""
    lo, hi = _window_bounds(x, window)
    sampled = _sample(x, lo, hi, grid)
    return (_extremum(x, window, tol, -1.0, grid, tail_fraction, sampled),
            _extremum(x, window, tol, 1.0, grid, tail_fraction, sampled))


def limsup_estimate(x: Profile, window, tol: float = 1e-3, grid: int = 64,
                    tail_fraction: float = 0.25) -> ExtremumEstimate:
    """Estimate ``limsup x`` from per-piece maxima over ``window``.

    Parameters
    ----------
    x : Profile
    window : (int, int)
        First and last piece index, inclusive; at least 5 pieces.
    tol : float
        Cauchy tolerance on the tail of the per-piece maxima.
    grid : int
        Seed points per piece before golden-section refinement.
    """
    return _extremum(x, window, tol, 1.0, grid, tail_fraction)


def liminf_estimate(x: Profile, window, tol: float = 1e-3, grid: int = 64,
                    tail_fraction: float = 0.25) -> ExtremumEstimate:
    """Mirror image of :func:`limsup_estimate`."""
    return _extremum(x, window, tol, -1.0, grid, tail_fraction)


# -- verdicts ------------------------------------------------------------


_EXAMPLE_DEFAULTS = {
    "tower": {
        "blocks": (20, 40),
        "uniform_u_grid": np.exp2(np.arange(4, 31, 2.0)),
        "uniform_shift_m": range(4, 35),
    },
    "squares": {
        "blocks": (200, 2000),
        "uniform_u_grid": np.exp2(np.arange(4, 13, 1.0)),
        "uniform_shift_m": [2 ** k for k in range(3, 13)],
    },
}


def example_defaults(f: StepFunction) -> dict:
    """Default windows and grids for the built-in examples (empty otherwise)."""
    return dict(_EXAMPLE_DEFAULTS.get(f.meta.get("name"), {}))


@dataclass
class MeasurabilityVerdict:
    """Outcome of a measurability test on a window.

    ``bounds`` are the (lower, upper) envelope estimates; a measurable
    verdict means ``bounds[1] - bounds[0] <= tol`` and ``value`` is their
    midpoint.
    """

    kind: str
    value: float
    bounds: tuple
    tol: float
    evidence: dict = field(default_factory=dict)

    @property
    def measurable(self) -> bool:
        return self.kind == "measurable"


def block_windows(f: StepFunction, blocks=None, generic_pieces: int = 12):
    """Translate block indices into piece windows and a profile extent.

    Block ``n`` of an example ends at the right edge of step piece
    ``n - block_offset``.  The a-profile window holds the pieces ending at
    blocks ``n_min..n_max``; the Cesaro window is shifted one piece right,
    where the Cesaro mean of the block peaks.  Returns
    ``(a_window, cesaro_window, u_max)``.
    """
    if blocks is None:
        blocks = example_defaults(f).get("blocks")
    if blocks is None:
        # finite input: dyadic pieces up to 2**30, use the last complete ones
        if f.is_lazy:
            raise DomainError("give a block window for lazily generated input")
        return None, None, 2.0 ** 30
    n_min, n_max = blocks
    if not n_min < n_max:
        raise DomainError("block window needs n_min < n_max")
    off = f.meta.get("block_offset", 0)
    a_win = (n_min - off, n_max - off)
    c_win = (n_min - off + 1, n_max - off + 1)
    f.ensure(c_win[1] + 1)
    u_max = f.breakpoints(c_win[1] + 1)[c_win[1]]
    return a_win, c_win, u_max


def _generic_window(prof: Profile, count: int):
    finite = np.isfinite(prof.edges[1:])
    last = int(np.flatnonzero(finite)[-1])
    return (max(0, last - count + 1), last)


def _a_setup(f, psi, blocks):
    """a-profile plus windows; finite inputs get their last dozen pieces."""
    a_win, c_win, u_max = block_windows(f, blocks)
    a = a_curve(f, psi, u_max)
    if a_win is None:
        a_win = _generic_window(a, 12)
    return a, a_win, c_win


def dixmier_verdict(f: StepFunction, psi: PsiFunction, tol: float = 1e-2,
                    blocks=None, check_psi: bool = True) -> MeasurabilityVerdict:
    """Dixmier measurability through the existence of ``lim a(t, f)``.

    Valid when ``psi(2t)/psi(t) -> 1``; other ``psi`` raise
    :class:`PreconditionError`; use :func:`uniform_cesaro_diagnostic`
    for those.
    """
    if check_psi:
        rep = check_doubling(psi)
        if not rep.satisfies_limit:
            raise PreconditionError(
                f"psi={psi.name}: doubling ratio does not tend to 1 "
                f"({rep.verdict}); use uniform_cesaro_diagnostic instead")
    a, a_win, _ = _a_setup(f, psi, blocks)
    lo, hi = envelope(a, a_win, tol=min(tol, 1e-3))
    top = a.edges[a_win[1] + 1]
    evidence = {
        "window": a_win,
        "limsup": hi,
        "liminf": lo,
        "residual": cesaro_log_mean(residual_profile(a), top),
    }
    return _verdict(lo.estimate, hi.estimate, tol, evidence)


def _verdict(low, high, tol, evidence):
    if high - low <= tol:
        return MeasurabilityVerdict("measurable", 0.5 * (low + high),
                                    (low, high), tol, evidence)
    return MeasurabilityVerdict("not-measurable", math.nan, (low, high), tol,
                                evidence)


def connes_dixmier_bounds(f: StepFunction, psi: PsiFunction, blocks=None,
                          tol: float = 5e-3) -> MeasurabilityVerdict:
    """Envelope ``[liminf, limsup]`` of the Cesaro mean of the a-profile."""
    a, _, c_win = _a_setup(f, psi, blocks)
    m = CesaroProfile(a)
    if c_win is None:
        c_win = _generic_window(m, 12)
    lo, hi = envelope(m, c_win, tol=tol)
    evidence = {"window": c_win, "limsup": hi, "liminf": lo}
    return _verdict(lo.estimate, hi.estimate, tol, evidence)


def distance_to_separable(f: StepFunction, psi: PsiFunction, blocks=None,
                          tol: float = 1e-3) -> float:
    """Distance to the separable part: the upper limit of the a-profile."""
    a, a_win, _ = _a_setup(f, psi, blocks)
    return limsup_estimate(a, a_win, tol=tol).estimate


@dataclass
class UniformityReport:
    """Deviation matrix ``D[shift, u]`` of shifted Cesaro means from ``A``.

    Row ``j`` uses dilation ``alpha = 2**shift[j]``.  ``sup_dev[u]`` is the
    column maximum; ``witness`` is the shift attaining it at the last ``u``.
    """

    A: float
    shifts: np.ndarray
    u_grid: np.ndarray
    deviations: np.ndarray
    sup_dev: np.ndarray
    verdict: str
    witness: float
    tol: float

    @property
    def uniform(self) -> bool:
        return self.verdict == "uniform"


def _default_shifts(f: StepFunction, m_values):
    shifts = [float(j) for j in range(65)]
    for key in ("shift_family", "shift_family_mid"):
        fam = f.meta.get(key)
        if fam is not None:
            shifts.extend(float(fam(m)) for m in m_values)
    return np.unique(np.array(shifts))


def uniform_cesaro_diagnostic(f: StepFunction, psi: PsiFunction, A: float,
                              shifts=None, u_grid=None, tol: float = 1e-2,
                              tail_fraction: float = 0.25) -> UniformityReport:
    """Test ``(1/u) integral_0^u a(2**(j+v)) dv -> A`` uniformly in ``j``.

    Shifts default to ``j = 0..64`` plus the example's aligned families.
    ``"uniform"`` means the column maxima are within ``tol`` at the end of
    the grid and nonincreasing (up to ``tol``) over its tail; the verdict
    only speaks for the tested grid.
    """
    dflt = example_defaults(f)
    if u_grid is None:
        u_grid = dflt.get("uniform_u_grid", np.exp2(np.arange(4, 21, 1.0)))
    u_grid = np.asarray(u_grid, dtype=float)
    if shifts is None:
        shifts = _default_shifts(f, dflt.get("uniform_shift_m", []))
    shifts = np.asarray(shifts, dtype=float)
    if np.any(shifts < 0):
        raise DomainError("dilations alpha = 2**shift need shift >= 0")
    if np.any(u_grid <= 0):
        raise DomainError("u grid must be positive")

    a = a_curve(f, psi, float(np.max(shifts) + np.max(u_grid)))
    J, U = np.meshgrid(shifts, u_grid, indexing="ij")
    _, c_hi = a.centred_cumulative((J + U).ravel())
    _, c_lo = a.centred_cumulative(J.ravel())
    ref = a._ref
    means = ref + (c_hi - c_lo).reshape(J.shape) / U
    dev = np.abs(means - A)
    sup_dev = dev.max(axis=0)
    n_tail = max(2, int(math.ceil(tail_fraction * len(u_grid))))
    tail = sup_dev[-n_tail:]
    if sup_dev[-1] <= tol and np.all(np.diff(tail) <= tol):
        verdict = "uniform"
    else:
        verdict = "non-uniform"
    witness = float(shifts[int(np.argmax(dev[:, -1]))])
    return UniformityReport(float(A), shifts, u_grid, dev, sup_dev, verdict,
                            witness, tol)
