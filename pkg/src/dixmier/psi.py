"""Concave normalising functions ``psi`` evaluated in log-domain.

A :class:`PsiFunction` is only ever asked for ``log2 psi(2**u)`` because its
argument reaches ``2**(2**50)``.  Three functions are built in:

``log``       ``psi(t) = log(1 + t)``
``sqrt2``     ``psi(t) = 2**sqrt(log2(1 + t)) - 1``
``identity``  ``psi(t) = t`` (fails the doubling condition)

plus :class:`PsiTable` for tabulated user input.  The checkers sample the
doubling ratio ``psi(2t)/psi(t)``, the growth quantity
``t * d/dt log psi(e**t)`` and concavity; their verdicts describe the tested
grid only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InvariantError, NumericalError
from .profile import CallableTerm, ConstTerm, PiecewiseProfile, cesaro_log_mean

__all__ = [
    "PsiFunction",
    "PsiLog",
    "PsiSqrt",
    "PsiIdentity",
    "PsiTable",
    "psi_by_name",
    "read_psi_table",
    "DoublingReport",
    "GrowthReport",
    "check_doubling",
    "check_taub",
    "check_concavity",
    "psi_ratio_cesaro",
    "DEFAULT_DOUBLING_GRID",
    "DEFAULT_TAUB_GRID",
]

LN2 = math.log(2.0)

#: u = 2**(j/4), j = 0..208: reaches u = 2**52 where u + 1 is still exact
DEFAULT_DOUBLING_GRID = np.exp2(np.arange(0, 209) / 4.0)
DEFAULT_TAUB_GRID = np.exp2(np.arange(0, 81) / 4.0)


def _log1p_exp2(u):
    """``log(1 + 2**u)`` without overflow."""
    u = np.asarray(u, dtype=float)
    return np.maximum(u, 0.0) * LN2 + np.log1p(np.exp2(-np.abs(u)))


def _log2_1p_exp2(u):
    """``log2(1 + 2**u)``."""
    u = np.asarray(u, dtype=float)
    return np.maximum(u, 0.0) + np.log1p(np.exp2(-np.abs(u))) / LN2


def _log2_exp2m1(s):
    """``log2(2**s - 1)`` for ``s > 0``."""
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        small = np.log2(np.expm1(np.minimum(s, 1.0) * LN2))
        big = s + np.log1p(-np.exp2(-np.maximum(s, 1.0))) / LN2
    return np.where(s > 1, big, small)


def _scalar(x, like):
    return float(x) if np.ndim(like) == 0 else x


class PsiFunction:
    """Base class: subclasses implement :meth:`eval_log`.

    ``deriv_log(u)`` returns the elasticity ``t psi'(t) / psi(t)`` at
    ``t = 2**u`` when a closed form is known and ``None`` otherwise.
    """

    name = "custom"

    def eval_log(self, u):
        """``log2 psi(2**u)``, vectorised."""
        raise NotImplementedError

    def deriv_log(self, u):
        return None

    def doubling_log_ratio(self, u):
        """``log2(psi(2**(u+1)) / psi(2**u))``."""
        u = np.asarray(u, dtype=float)
        return self.eval_log(u + 1.0) - self.eval_log(u)

    def doubling_ratio_term(self, n=1):
        """Term family for ``v -> psi(2**(v+1)) / psi(2**v)``."""
        return CallableTerm(lambda v: np.exp2(self.doubling_log_ratio(v)), n)

    def __call__(self, t):
        """``psi(t)`` for moderate ``t`` (direct evaluation)."""
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            out = np.exp2(self.eval_log(np.log2(t)))
        out = np.where(t == 0, 0.0, out)
        return _scalar(out, t)

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


class PsiLog(PsiFunction):
    """``psi(t) = log(1 + t)``."""

    name = "log"

    def eval_log(self, u):
        u = np.asarray(u, dtype=float)
        return _scalar(np.log2(_log1p_exp2(u)), u)

    def deriv_log(self, u):
        u = np.asarray(u, dtype=float)
        return _scalar(1.0 / ((1.0 + np.exp2(-u)) * _log1p_exp2(u)), u)

    def doubling_log_ratio(self, u):
        u = np.asarray(u, dtype=float)
        l0 = _log1p_exp2(u)
        l1 = _log1p_exp2(u + 1.0)
        big = u > 0
        diff = np.empty(u.shape)
        # log(1+2t) - log(1+t) = log 2 + log1p(2**-(u+1)) - log1p(2**-u)
        diff[big] = (LN2 + np.log1p(np.exp2(-u[big] - 1.0))
                     - np.log1p(np.exp2(-u[big])))
        diff[~big] = l1[~big] - l0[~big]
        return _scalar(np.log1p(diff / l0) / LN2, u)


class PsiSqrt(PsiFunction):
    """``psi(t) = 2**sqrt(log2(1 + t)) - 1``."""

    name = "sqrt2"

    def eval_log(self, u):
        u = np.asarray(u, dtype=float)
        return _scalar(_log2_exp2m1(np.sqrt(_log2_1p_exp2(u))), u)

    def deriv_log(self, u):
        u = np.asarray(u, dtype=float)
        r = np.sqrt(_log2_1p_exp2(u))
        out = 1.0 / ((1.0 + np.exp2(-u)) * 2.0 * r * -np.expm1(-r * LN2))
        return _scalar(out, u)

    def doubling_log_ratio(self, u):
        u = np.asarray(u, dtype=float)
        L0 = _log2_1p_exp2(u)
        L1 = _log2_1p_exp2(u + 1.0)
        big = u > 0
        dL = np.empty(u.shape)
        dL[big] = 1.0 + (np.log1p(np.exp2(-u[big] - 1.0))
                         - np.log1p(np.exp2(-u[big]))) / LN2
        dL[~big] = L1[~big] - L0[~big]
        r0, r1 = np.sqrt(L0), np.sqrt(L1)
        dr = dL / (r0 + r1)
        corr = np.empty(u.shape)
        hi = r0 > 1
        corr[hi] = (np.log1p(-np.exp2(-r1[hi]))
                    - np.log1p(-np.exp2(-r0[hi]))) / LN2
        corr[~hi] = (_log2_exp2m1(r1[~hi]) - r1[~hi]) - (
            _log2_exp2m1(r0[~hi]) - r0[~hi])
        return _scalar(dr + corr, u)


class PsiIdentity(PsiFunction):
    """``psi(t) = t``; the doubling ratio is identically 2."""

    name = "identity"

    def eval_log(self, u):
        u = np.asarray(u, dtype=float)
        return _scalar(u + 0.0, u)

    def deriv_log(self, u):
        u = np.asarray(u, dtype=float)
        return _scalar(np.ones(u.shape), u)

    def doubling_log_ratio(self, u):
        u = np.asarray(u, dtype=float)
        return _scalar(np.ones(u.shape), u)

    def doubling_ratio_term(self, n=1):
        return ConstTerm(np.full(n, 2.0))


class PsiTable(PsiFunction):
    """Tabulated ``(u, log2 psi(2**u))`` with linear interpolation.

    Outside the table range evaluation is a :class:`DomainError`.
    """

    name = "table"

    def __init__(self, u, log_psi, name=None):
        u = np.asarray(u, dtype=float)
        lp = np.asarray(log_psi, dtype=float)
        if u.ndim != 1 or u.shape != lp.shape or len(u) < 2:
            raise DomainError("psi table needs two matching columns, >= 2 rows")
        if np.any(np.diff(u) <= 0):
            raise DomainError("psi table abscissae must increase")
        if np.any(np.diff(lp) < 0):
            raise InvariantError("psi table must be nondecreasing")
        self.u = u
        self.log_psi = lp
        if name:
            self.name = name

    def eval_log(self, u):
        u = np.asarray(u, dtype=float)
        if np.any(u < self.u[0]) or np.any(u > self.u[-1]):
            raise DomainError(
                f"psi table covers u in [{self.u[0]}, {self.u[-1]}]")
        return _scalar(np.interp(u, self.u, self.log_psi), u)


_REGISTRY = {"log": PsiLog, "sqrt2": PsiSqrt, "identity": PsiIdentity}


def psi_by_name(name: str) -> PsiFunction:
    """Built-in by name, or ``file:<path>`` for a ``psi-v1`` table."""
    if name.startswith("file:"):
        return read_psi_table(name[5:])
    try:
        return _REGISTRY[name]()
    except KeyError:
        raise DomainError(
            f"unknown psi {name!r}; choose from {sorted(_REGISTRY)} or file:<path>"
        ) from None


def read_psi_table(path) -> PsiTable:
    """Read a ``psi-v1`` file: header line, then ``u log2psi`` rows."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    if not lines or lines[0] != "psi-v1":
        raise DomainError("missing 'psi-v1' header")
    try:
        rows = [tuple(float(x) for x in ln.split()) for ln in lines[1:]]
    except ValueError as exc:
        raise DomainError(f"bad psi table row: {exc}") from None
    if any(len(r) != 2 for r in rows):
        raise DomainError("psi table rows need exactly two columns")
    u, lp = zip(*rows) if rows else ((), ())
    return PsiTable(u, lp, name=f"file:{path}")


# -- checkers ------------------------------------------------------------


@dataclass
class DoublingReport:
    """Samples of ``psi(2t)/psi(t)`` and the verdict on the grid.

    ``verdict`` is ``"limit"`` (ratio tends to 1), ``"liminf"`` (ratio comes
    back to 1 but does not settle) or ``"fails"``.
    """

    u: np.ndarray
    ratio: np.ndarray
    liminf: float
    verdict: str
    tol: float = 1e-6

    @property
    def satisfies_limit(self) -> bool:
        return self.verdict == "limit"

    @property
    def satisfies_liminf(self) -> bool:
        return self.verdict in ("limit", "liminf")


def check_doubling(psi: PsiFunction, u_grid=None, tol: float = 1e-6,
                   tail_fraction: float = 0.25) -> DoublingReport:
    """Sample the doubling ratio and classify its tail.

    The tail is the last ``tail_fraction`` of the grid.  ``"limit"`` needs
    the deviation ``|ratio - 1|`` to be within ``tol`` at the end of the
    grid and nonincreasing (up to ``tol``) across the tail.
    """
    u = DEFAULT_DOUBLING_GRID if u_grid is None else np.asarray(u_grid, dtype=float)
    if u[-1] < 2.0 ** 20:
        raise DomainError("doubling grid must reach u >= 2**20")
    d = np.asarray(psi.doubling_log_ratio(u), dtype=float)
    if np.any(d < 0):
        raise InvariantError(f"{psi.name}: psi decreases somewhere on the grid")
    ratio = np.exp2(d)
    n_tail = max(2, int(math.ceil(tail_fraction * len(u))))
    dev = np.abs(ratio[-n_tail:] - 1.0)
    liminf = float(np.min(ratio[-n_tail:]))
    if dev[-1] <= tol and np.all(np.diff(dev) <= tol):
        verdict = "limit"
    elif np.min(dev) <= tol:
        verdict = "liminf"
    else:
        verdict = "fails"
    return DoublingReport(u, ratio, liminf, verdict, tol)


@dataclass
class GrowthReport:
    """Samples of ``g(t) = t * d/dt log psi(e**t)`` on a ``t`` grid."""

    t: np.ndarray
    g: np.ndarray
    verdict: str
    method: str = "closed-form"
    notes: dict = field(default_factory=dict)

    @property
    def bounded(self) -> bool:
        return self.verdict == "bounded"


def _numeric_elasticity(psi, u, h=1e-4):
    d1 = (psi.eval_log(u + h) - psi.eval_log(u - h)) / (2 * h)
    d2 = (psi.eval_log(u + 2 * h) - psi.eval_log(u - 2 * h)) / (4 * h)
    d1, d2 = np.asarray(d1), np.asarray(d2)
    scale = np.maximum(np.abs(d1), 1e-300)
    if np.any(np.abs(d1 - d2) > 1e-3 * scale):
        raise NumericalError("central differences disagree between step sizes")
    return d1


def check_taub(psi: PsiFunction, t_grid=None, growth_cutoff: float = 100.0,
               tol: float = 1e-6, tail_fraction: float = 0.25) -> GrowthReport:
    """Sample ``g(t) = t * (e**t psi'(e**t) / psi(e**t))`` and judge boundedness.

    ``"unbounded"`` once any value exceeds ``growth_cutoff``; ``"bounded"``
    when the tail is nonincreasing (up to ``tol``) toward a finite value;
    ``"inconclusive"`` otherwise.
    """
    t = DEFAULT_TAUB_GRID if t_grid is None else np.asarray(t_grid, dtype=float)
    if np.any(t <= 0):
        raise DomainError("t grid must be positive")
    u = t / LN2
    elasticity = psi.deriv_log(u)
    method = "closed-form"
    if elasticity is None:
        elasticity = _numeric_elasticity(psi, u)
        method = "central-difference"
    g = t * np.asarray(elasticity, dtype=float)
    n_tail = max(2, int(math.ceil(tail_fraction * len(t))))
    tail = g[-n_tail:]
    if np.any(g > growth_cutoff):
        verdict = "unbounded"
    elif np.all(np.diff(tail) <= tol * np.maximum(1.0, np.abs(tail[1:]))):
        verdict = "bounded"
    else:
        verdict = "inconclusive"
    return GrowthReport(t, g, verdict, method)


def check_concavity(psi: PsiFunction, t_grid=None) -> float:
    """Largest second divided difference of ``psi`` on a ``t`` grid.

    Nonpositive (up to rounding) for concave ``psi``.  Evaluation is direct,
    so keep the grid at moderate ``t``.
    """
    t = (np.exp2(np.linspace(-10, 20, 301)) if t_grid is None
         else np.asarray(t_grid, dtype=float))
    y = np.asarray(psi(t), dtype=float)
    s = np.diff(y) / np.diff(t)
    dd = np.diff(s) / (t[2:] - t[:-2])
    return float(np.max(dd))


def psi_ratio_cesaro(psi: PsiFunction, u):
    """Logarithmic Cesaro mean of the doubling ratio up to ``t = 2**u``."""
    x = PiecewiseProfile([0.0, math.inf], [psi.doubling_ratio_term(1)],
                         name=f"ratio({psi.name})")
    return cesaro_log_mean(x, u)
