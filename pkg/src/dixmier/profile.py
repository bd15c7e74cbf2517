"""Sampled and piecewise curves over ``u = log2 t`` and their integrals.

Everything here works in ``u`` coordinates.  Since ``ds / s = log(2) du``,
the logarithmic Cesaro transform

    (M x)(t) = 1/log(t) * integral_1^t x(s) ds/s

becomes the plain mean ``(1/u) * integral_0^u x(2**v) dv``.  A
:class:`PiecewiseProfile` is a partition of the ``u`` axis together with a
list of term families; each family stores one parameter array entry per
piece and knows how to evaluate and integrate itself.  Families with a
closed-form antiderivative use it; the others fall back to 32-node
Gauss-Legendre panels chosen to suit their shape.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError

__all__ = [
    "GL_ORDER",
    "gauss_legendre",
    "panel_quadrature",
    "Term",
    "ConstTerm",
    "LinearTerm",
    "InvLogTerm",
    "ExpNegSqrtTerm",
    "OverPsiTerm",
    "GrowthTerm",
    "CallableTerm",
    "Profile",
    "PiecewiseProfile",
    "CesaroProfile",
    "constant_profile",
    "from_samples",
    "cesaro_log_mean",
    "write_profile_csv",
    "read_profile_csv",
]

LN2 = math.log(2.0)
GL_ORDER = 32
# log2 of contributions that cannot register in a double
_UNDERFLOW = -1100.0
_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(GL_ORDER)


def gauss_legendre(fn, a, b):
    """Single 32-node Gauss-Legendre panel on ``[a, b]`` (broadcasting)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    x = mid[..., None] + half[..., None] * _NODES
    return (fn(x) * _WEIGHTS).sum(axis=-1) * half


def _zmap(v, off):
    return np.sign(v) * (np.log2(off + np.abs(v)) - np.log2(off))


def _zinv(z, off):
    return np.sign(z) * off * (np.exp2(np.abs(z)) - 1.0)


def _log_panels(a, b):
    """Panel edges, shape (N, m + 1), uniform in ``sign(v) log2(c + |v|)``.

    ``a`` and ``b`` must not straddle zero; ``c`` is ``min(|a|, |b|)``
    clipped to ``[2**-30, 1]``.  Each panel spans at most a factor of two in
    ``c + |v|``, which suits integrands that vary on the scale of ``v``
    itself (reciprocals of logarithms and the like).
    """
    # offset so that intervals starting just off zero still get
    # geometric panels in |v|
    near = np.minimum(np.abs(a), np.abs(b))
    off = np.clip(np.where(near > 0, near, 1.0), 2.0 ** -30, 1.0)
    za, zb = _zmap(a, off), _zmap(b, off)
    m = int(max(1, math.ceil(float(np.max(np.abs(zb - za), initial=0.0)))))
    s = np.linspace(0.0, 1.0, m + 1)
    z = za[:, None] + (zb - za)[:, None] * s
    edges = _zinv(z, off[:, None])
    edges[:, 0] = a
    edges[:, -1] = b
    return edges


def _graded_panels(a, b):
    """Panel edges, shape (N, m + 1), doubling in width away from ``b``.

    Suits integrands that grow like ``2**v`` towards the right end.
    """
    length = b - a
    m = int(max(1, math.ceil(math.log2(float(np.max(length, initial=0.0)) + 1.0))))
    w = np.exp2(np.arange(m + 1, dtype=float)) - 1.0
    w = np.minimum(w[None, :], length[:, None])
    return (b[:, None] - w)[:, ::-1]


def _integrate_on_edges(fn, edges):
    lo = edges[:, :-1]
    hi = edges[:, 1:]
    return gauss_legendre(lambda x: fn(x), lo, hi).sum(axis=-1)


def panel_quadrature(fn, a, b, grading="log"):
    """Composite 32-node Gauss-Legendre quadrature of a vectorised ``fn``.

    Parameters
    ----------
    fn : callable
        Receives an array of abscissae of shape ``(N, m, 32)``.
    a, b : array_like
        Interval endpoints, ``a <= b`` elementwise.
    grading : {"log", "growth"}
        Panel layout.  ``"log"`` spaces panels geometrically in
        ``c + |v|``; ``"growth"`` doubles panel widths leftwards from ``b``.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    a, b = np.broadcast_arrays(a, b)
    if grading == "growth":
        return _integrate_on_edges(fn, _graded_panels(a, b))
    out = np.zeros(a.shape)
    neg = a < 0
    if np.any(neg):
        aa, bb = a[neg], np.minimum(b[neg], 0.0)
        out[neg] += _integrate_on_edges(
            _restrict(fn, neg), _log_panels(aa, bb))
    pos = b > 0
    if np.any(pos):
        aa, bb = np.maximum(a[pos], 0.0), b[pos]
        out[pos] += _integrate_on_edges(
            _restrict(fn, pos), _log_panels(aa, bb))
    return out


class _Restricted:
    """Wrap ``fn`` so per-row parameters follow a boolean row selection."""

    def __init__(self, fn, mask):
        self.fn = fn
        self.mask = mask

    def __call__(self, x):
        return self.fn(x, self.mask)


def _restrict(fn, mask):
    if getattr(fn, "_row_aware", False):
        return _Restricted(fn, mask)
    return fn


def _col(p, ndim):
    """Reshape per-row parameters for broadcasting against ``ndim`` arrays."""
    return p.reshape(p.shape + (1,) * (ndim - 1))


# -- term families -------------------------------------------------------


class Term:
    """A family of terms, one member per piece of a profile.

    Subclasses hold one parameter array per coefficient and implement
    ``_eval(x, idx)``, where ``x`` has leading dimension ``len(idx)``.
    Families with an antiderivative override :meth:`integral`.
    """

    closed_form = False
    grading = "log"

    def __len__(self):
        raise NotImplementedError

    def _eval(self, x, idx):
        raise NotImplementedError

    def __call__(self, u, idx):
        u = np.asarray(u, dtype=float)
        return self._eval(u, np.asarray(idx))

    def quadrature(self, a, b, idx):
        """Integral by composite Gauss-Legendre panels."""
        idx = np.atleast_1d(np.asarray(idx))
        term = self

        class _F:
            _row_aware = True

            def __call__(self, x, mask=None):
                rows = idx if mask is None else idx[mask]
                return term._eval(x, rows)

        return panel_quadrature(_F(), a, b, grading=self.grading)

    def integral(self, a, b, idx):
        return self.quadrature(a, b, idx)

    def take(self, idx):
        """Sub-family restricted to the pieces ``idx``."""
        raise NotImplementedError

    def shifted(self, d):
        return _ShiftedTerm(self, d)


class _ShiftedTerm(Term):

    def __init__(self, base, d):
        self.base = base
        self.d = float(d)
        self.closed_form = base.closed_form
        self.grading = base.grading

    def __len__(self):
        return len(self.base)

    def _eval(self, x, idx):
        return self.base._eval(x - self.d, idx)

    def integral(self, a, b, idx):
        return self.base.integral(np.asarray(a) - self.d,
                                  np.asarray(b) - self.d, idx)

    def take(self, idx):
        return _ShiftedTerm(self.base.take(idx), self.d)


class ConstTerm(Term):
    """``y = c``."""

    closed_form = True

    def __init__(self, c):
        self.c = np.atleast_1d(np.asarray(c, dtype=float))

    def __len__(self):
        return len(self.c)

    def _eval(self, x, idx):
        return np.broadcast_to(_col(self.c[idx], np.ndim(x)), np.shape(x)) + 0.0

    def integral(self, a, b, idx):
        return self.c[idx] * (np.asarray(b) - np.asarray(a))

    def take(self, idx):
        return ConstTerm(self.c[idx])


class LinearTerm(Term):
    """Linear interpolation between ``(u0, y0)`` and ``(u1, y1)``."""

    closed_form = True

    def __init__(self, u0, y0, u1, y1):
        self.u0 = np.atleast_1d(np.asarray(u0, dtype=float))
        self.y0 = np.atleast_1d(np.asarray(y0, dtype=float))
        self.u1 = np.atleast_1d(np.asarray(u1, dtype=float))
        self.y1 = np.atleast_1d(np.asarray(y1, dtype=float))

    def __len__(self):
        return len(self.u0)

    def _slope(self, idx):
        return (self.y1[idx] - self.y0[idx]) / (self.u1[idx] - self.u0[idx])

    def _eval(self, x, idx):
        n = np.ndim(x)
        return (_col(self.y0[idx], n)
                + _col(self._slope(idx), n) * (x - _col(self.u0[idx], n)))

    def integral(self, a, b, idx):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        return 0.5 * (self._eval(a, idx) + self._eval(b, idx)) * (b - a)

    def take(self, idx):
        return LinearTerm(self.u0[idx], self.y0[idx], self.u1[idx], self.y1[idx])


class InvLogTerm(Term):
    """``y = c / log s = c / (u log 2)``.

    Its antiderivative in ``u`` is ``(c / log 2) * log(u)``, the same
    ``d log s / log s`` integral that governs the tower construction.
    """

    closed_form = True

    def __init__(self, c):
        self.c = np.atleast_1d(np.asarray(c, dtype=float))

    def __len__(self):
        return len(self.c)

    def _eval(self, x, idx):
        c = _col(self.c[idx], np.ndim(x))
        # pieces with c = 0 may touch u = 0
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(c == 0, 0.0, c / (x * LN2))

    def integral(self, a, b, idx):
        a, b = np.broadcast_arrays(np.atleast_1d(np.asarray(a, dtype=float)),
                                   np.atleast_1d(np.asarray(b, dtype=float)))
        c = np.broadcast_to(self.c[np.atleast_1d(np.asarray(idx))], a.shape)
        live = c != 0
        if np.any(a[live] <= 0):
            raise DomainError("c / log s is not integrable down to s = 1")
        out = np.zeros(a.shape)
        out[live] = c[live] / LN2 * np.log1p((b[live] - a[live]) / a[live])
        return out

    def take(self, idx):
        return InvLogTerm(self.c[idx])


def _one_minus_1px_emx(x):
    """``1 - (1 + x) exp(-x)`` for ``x >= 0`` without cancellation near 0."""
    x = np.asarray(x, dtype=float)
    small = x < 0.125
    xs = np.where(small, x, 0.0)
    # sum over n >= 2 of (-1)**n (n - 1) x**n / n!
    series = np.zeros_like(xs)
    term = np.ones_like(xs)
    for n in range(1, 18):
        term = term * xs / n
        if n >= 2:
            series += (-1) ** n * (n - 1) * term
    xb = np.where(small, 1.0, x)
    return np.where(small, series, -np.expm1(-xb) - xb * np.exp(-xb))


class ExpNegSqrtTerm(Term):
    """``y = 2**(lc - sqrt(u))``, i.e. ``c * 2**(-sqrt(log2 s))``.

    Antiderivative ``-(2 / log 2) * 2**(lc - sqrt(u)) * (sqrt(u) + 1/log 2)``.
    """

    closed_form = True

    def __init__(self, lc):
        self.lc = np.atleast_1d(np.asarray(lc, dtype=float))

    def __len__(self):
        return len(self.lc)

    def _eval(self, x, idx):
        return np.exp2(_col(self.lc[idx], np.ndim(x)) - np.sqrt(x))

    def _prim(self, x, idx):
        r = np.sqrt(x)
        return -(2.0 / LN2) * np.exp2(self.lc[idx] - r) * (r + 1.0 / LN2)

    def integral(self, a, b, idx):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if np.any(a < 0):
            raise DomainError("2**(-sqrt(u)) needs u >= 0")
        # F(b) - F(a) regrouped around d = sqrt(b) - sqrt(a) so that every
        # term is nonnegative; the plain difference cancels on narrow pieces
        ra = np.sqrt(a)
        root_sum = ra + np.sqrt(b)
        with np.errstate(invalid="ignore", divide="ignore"):
            d = np.where(root_sum > 0, (b - a) / root_sum, 0.0)
        x = LN2 * d
        e = -np.expm1(-x)
        bracket = ra * e + _one_minus_1px_emx(x) / LN2
        return (2.0 / LN2) * np.exp2(self.lc[idx] - ra) * bracket

    def quadrature(self, a, b, idx):
        """Gauss-Legendre in ``r = sqrt(u)`` on pieces that reach down near
        zero, where the integrand is not smooth in ``u``; plain panels
        elsewhere, since ``sqrt(b) - sqrt(a)`` cancels on narrow pieces."""
        a = np.atleast_1d(np.asarray(a, dtype=float))
        b = np.atleast_1d(np.asarray(b, dtype=float))
        idx = np.atleast_1d(np.asarray(idx))
        a, b = np.broadcast_arrays(a, b)
        idx = np.broadcast_to(idx, a.shape)
        near = a < b - a
        out = np.zeros(a.shape)
        if np.any(~near):
            out[~near] = super().quadrature(a[~near], b[~near], idx[~near])
        if np.any(near):
            out[near] = self._root_quadrature(a[near], b[near], idx[near])
        return out

    def _root_quadrature(self, a, b, idx):
        lc = self.lc

        class _F:
            _row_aware = True

            def __call__(self, r, mask=None):
                rows = idx if mask is None else idx[mask]
                return 2.0 * r * np.exp2(_col(lc[rows], np.ndim(r)) - r)

        return panel_quadrature(_F(), np.sqrt(a), np.sqrt(b))

    def take(self, idx):
        return ExpNegSqrtTerm(self.lc[idx])


class OverPsiTerm(Term):
    """``y = P / psi(2**u)`` with ``P = 2**p`` (``p = -inf`` for zero)."""

    def __init__(self, psi, p):
        self.psi = psi
        self.p = np.atleast_1d(np.asarray(p, dtype=float))

    def __len__(self):
        return len(self.p)

    def _eval(self, x, idx):
        return np.exp2(_col(self.p[idx], np.ndim(x)) - self.psi.eval_log(x))

    def integral(self, a, b, idx):
        a, b = np.broadcast_arrays(np.atleast_1d(np.asarray(a, dtype=float)),
                                   np.atleast_1d(np.asarray(b, dtype=float)))
        idx = np.broadcast_to(np.atleast_1d(np.asarray(idx)), a.shape)
        out = np.zeros(a.shape)
        live = np.isfinite(self.p[idx]) & (b > a)
        if np.any(live):
            out[live] = self.quadrature(a[live], b[live], idx[live])
        return out

    def take(self, idx):
        return OverPsiTerm(self.psi, self.p[idx])


class GrowthTerm(Term):
    """``y = c * 2**u / psi(2**u)``, stored relative to an anchor.

    ``g = log2(c) + anchor`` so that ``y = 2**(g + (u - anchor) - log2 psi)``
    stays exact when ``c`` is as small as ``2**(-2**40)``.  This is the
    ``t f*(t) / psi(t)`` part of an averaged step function.
    """

    grading = "growth"

    def __init__(self, psi, g, anchor):
        self.psi = psi
        self.g = np.atleast_1d(np.asarray(g, dtype=float))
        self.anchor = np.atleast_1d(np.asarray(anchor, dtype=float))

    def __len__(self):
        return len(self.g)

    def _eval(self, x, idx):
        n = np.ndim(x)
        return np.exp2(_col(self.g[idx], n) + (x - _col(self.anchor[idx], n))
                       - self.psi.eval_log(x))

    def integral(self, a, b, idx):
        a, b = np.broadcast_arrays(np.atleast_1d(np.asarray(a, dtype=float)),
                                   np.atleast_1d(np.asarray(b, dtype=float)))
        idx = np.broadcast_to(np.atleast_1d(np.asarray(idx)), a.shape)
        out = np.zeros(a.shape)
        live = np.isfinite(self.g[idx]) & (b > a)
        if np.any(live):
            # the integrand increases in u, so its value at b bounds the rest
            peak = (self.g[idx[live]] + (b[live] - self.anchor[idx[live]])
                    - self.psi.eval_log(b[live]) + np.log2(b[live] - a[live] + 1.0))
            keep = np.flatnonzero(live)[peak > _UNDERFLOW]
            if len(keep):
                lo = self._cut(a[keep], b[keep], idx[keep])
                out[keep] = self.quadrature(lo, b[keep], idx[keep])
        return out

    def _cut(self, a, b, idx, reach=96.0):
        """Drop the far-left stretch where the integrand is below 2**-60 of its peak."""
        cut = b - reach
        far = a < cut
        if not np.any(far):
            return a
        g, anc = self.g[idx[far]], self.anchor[idx[far]]
        lg_b = g + (b[far] - anc) - self.psi.eval_log(b[far])
        lg_c = g + (cut[far] - anc) - self.psi.eval_log(cut[far])
        negligible = lg_b - lg_c - np.log2(cut[far] - a[far]) > 60.0
        out = a.copy()
        rows = np.flatnonzero(far)[negligible]
        out[rows] = cut[rows]
        return out

    def take(self, idx):
        return GrowthTerm(self.psi, self.g[idx], self.anchor[idx])


class CallableTerm(Term):
    """The same vectorised function on every piece."""

    def __init__(self, fn, n=1, grading="log"):
        self.fn = fn
        self.n = n
        self.grading = grading

    def __len__(self):
        return self.n

    def _eval(self, x, idx):
        return np.asarray(self.fn(x), dtype=float)

    def take(self, idx):
        return CallableTerm(self.fn, len(np.atleast_1d(idx)), self.grading)


# -- profiles ------------------------------------------------------------


class Profile:
    """A real-valued curve on an interval of the ``u`` axis.

    Attributes
    ----------
    edges : ndarray
        Piece boundaries; piece ``i`` is ``[edges[i], edges[i+1]]``.
    critical : dict
        Registered critical points, ``name -> array of u``, that extremum
        searches always inspect.
    """

    def __init__(self, edges, critical=None, name=None):
        edges = np.asarray(edges, dtype=float)
        if edges.ndim != 1 or len(edges) < 2 or np.any(np.diff(edges) <= 0):
            raise DomainError("profile edges must be strictly increasing")
        self.edges = edges
        self.critical = {k: np.asarray(v, dtype=float)
                         for k, v in (critical or {}).items()}
        self.name = name

    @property
    def n_pieces(self) -> int:
        return len(self.edges) - 1

    @property
    def domain(self):
        return self.edges[0], self.edges[-1]

    def piece_index(self, u):
        """Index of the piece containing ``u`` (left piece at shared edges)."""
        u = np.asarray(u, dtype=float)
        if np.any(u < self.edges[0]) or np.any(u > self.edges[-1]):
            raise DomainError(
                f"profile {self.name or ''} is defined on "
                f"[{self.edges[0]}, {self.edges[-1]}]")
        i = np.searchsorted(self.edges, u, side="left") - 1
        return np.clip(i, 0, self.n_pieces - 1)

    def pieces_in(self, lo, hi):
        """Lower and upper bounds of pieces ``lo..hi`` inclusive."""
        return self.edges[lo:hi + 1], self.edges[lo + 1:hi + 2]

    def __call__(self, u):
        raise NotImplementedError

    def sample(self, us):
        """Return ``(u, y)`` arrays at the requested abscissae."""
        us = np.asarray(us, dtype=float)
        return us, np.asarray(self(us), dtype=float)


class PiecewiseProfile(Profile):
    """Profile given as a sum of term families on a fixed partition.

    Examples
    --------
    >>> x = constant_profile(3.0)
    >>> cesaro_log_mean(x, 7.5)
    3.0
    """

    def __init__(self, edges, terms, critical=None, name=None):
        super().__init__(edges, critical=critical, name=name)
        self.terms = list(terms)
        for t in self.terms:
            if len(t) != self.n_pieces:
                raise DomainError("every term family needs one entry per piece")
        self._prefix = None
        self._ref = None

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        idx = self.piece_index(u)
        out = np.zeros(u.shape)
        for t in self.terms:
            out = out + t(u, idx)
        return out if out.ndim else float(out)

    def values_in_piece(self, x, idx):
        """Evaluate with an explicit piece assignment (``x`` shape (N, ...))."""
        out = 0.0
        for t in self.terms:
            out = out + t._eval(x, idx)
        return out

    @property
    def closed_form(self) -> bool:
        return all(t.closed_form for t in self.terms)

    def piece_integral(self, a, b, idx):
        """Integral over ``[a, b]`` inside piece ``idx`` (arrays)."""
        a = np.atleast_1d(np.asarray(a, dtype=float))
        b = np.atleast_1d(np.asarray(b, dtype=float))
        idx = np.atleast_1d(np.asarray(idx))
        out = np.zeros(np.broadcast(a, b).shape)
        for t in self.terms:
            out = out + t.integral(a, b, idx)
        return out

    def quadrature_integral(self, a, b, idx):
        """Same as :meth:`piece_integral` but forcing panel quadrature."""
        a = np.atleast_1d(np.asarray(a, dtype=float))
        b = np.atleast_1d(np.asarray(b, dtype=float))
        idx = np.atleast_1d(np.asarray(idx))
        out = np.zeros(np.broadcast(a, b).shape)
        for t in self.terms:
            out = out + t.quadrature(a, b, idx)
        return out

    # centred prefix sums: integral_0^u y = ref * u + C(u).  Constant
    # profiles then give C = 0 exactly and their mean comes out exact.

    def _build_prefix(self):
        if self.edges[0] > 0:
            raise DomainError("profile must cover u = 0 for Cesaro means")
        first = int(self.piece_index(0.0))
        lo = np.maximum(self.edges[first:-1], 0.0)
        hi = self.edges[first + 1:]
        finite = np.isfinite(hi)
        lo, hi = lo[finite], hi[finite]
        idx = np.arange(first, first + len(lo))
        ints = self.piece_integral(lo, hi, idx) if len(idx) else np.zeros(0)
        lens = hi - lo
        ref = None
        for I, L in zip(ints, lens):
            if L > 0:
                ref = float(I / L)
                break
        if ref is None:
            # no finite piece past zero: take the mean over [lo, lo + 1]
            lo0 = max(self.edges[first], 0.0)
            ref = float(self.piece_integral(lo0, lo0 + 1.0, first)[0])
        self._ref = ref
        self._first = first
        centred = ints - ref * lens
        self._prefix = np.concatenate([[0.0], np.cumsum(centred)])

    def centred_cumulative(self, u):
        """``C(u)`` with ``integral_0^u y dv = ref * u + C(u)``; returns (ref, C)."""
        if self._prefix is None:
            self._build_prefix()
        u = np.atleast_1d(np.asarray(u, dtype=float))
        if np.any(u < 0):
            raise DomainError("cumulative integrals start at u = 0")
        idx = self.piece_index(u)
        lo = np.maximum(self.edges[idx], 0.0)
        k = idx - self._first
        partial = self.piece_integral(lo, u, idx)
        return self._ref, self._prefix[k] + (partial - self._ref * (u - lo))

    def cumulative(self, u):
        """``integral_0^u y(v) dv``."""
        ref, c = self.centred_cumulative(u)
        out = ref * np.atleast_1d(np.asarray(u, dtype=float)) + c
        return out if np.ndim(u) else float(out[0])

    def shifted(self, d):
        """Profile of ``v -> y(v - d)``: the dilation by ``2**d`` in ``t``."""
        crit = {k: v + d for k, v in self.critical.items()}
        return PiecewiseProfile(self.edges + d, [t.shifted(d) for t in self.terms],
                                critical=crit, name=self.name)

    def truncated(self, n):
        """The first ``n`` pieces."""
        idx = np.arange(n)
        return PiecewiseProfile(self.edges[:n + 1], [t.take(idx) for t in self.terms],
                                critical=self.critical, name=self.name)


class CesaroProfile(Profile):
    """``u -> (M x)(2**u)`` for a piecewise profile ``x``, on ``u >= 0``.

    The pieces mirror those of ``x``.  Registered critical points come from
    ``x.critical["cesaro"]`` when present.
    """

    def __init__(self, base: PiecewiseProfile, name=None):
        if base.edges[0] > 0:
            raise DomainError("base profile must cover u = 0")
        edges = base.edges[base.edges > 0]
        edges = np.concatenate([[0.0], edges])
        crit = {}
        if "cesaro" in base.critical:
            crit["self"] = base.critical["cesaro"]
        super().__init__(edges, critical=crit, name=name or f"M({base.name})")
        self.base = base

    def __call__(self, u):
        return cesaro_log_mean(self.base, u)


def constant_profile(c, lo=-64.0, hi=math.inf):
    return PiecewiseProfile([lo, hi], [ConstTerm([c])], name="constant")


def from_samples(u, y, name=None):
    """Piecewise-linear profile through sample points."""
    u = np.asarray(u, dtype=float)
    y = np.asarray(y, dtype=float)
    if u.shape != y.shape or u.ndim != 1 or len(u) < 2:
        raise DomainError("need matching 1-d sample arrays of length >= 2")
    if not np.all(np.isfinite(y)):
        raise DomainError("sample values must be finite")
    term = LinearTerm(u[:-1], y[:-1], u[1:], y[1:])
    return PiecewiseProfile(u, [term], name=name)


def cesaro_log_mean(x: Profile, u):
    """Logarithmic Cesaro mean ``(1/u) * integral_0^u x(2**v) dv``.

    Parameters
    ----------
    x : Profile
        Must cover ``[0, u]``.  Generic (non-piecewise) profiles are
        integrated by quadrature of their evaluator on their own pieces.
    u : float or array
        Positive upper limit(s) in ``log2`` coordinates.  ``u = 0`` returns
        ``x(0)``, the limiting value.
    """
    if not isinstance(x, PiecewiseProfile):
        x = PiecewiseProfile(x.edges, [CallableTerm(x, x.n_pieces)],
                             critical=x.critical, name=x.name)
    scalar = np.ndim(u) == 0
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if np.any(u < 0):
        raise DomainError("Cesaro mean needs u >= 0")
    out = np.empty(u.shape)
    zero = u == 0
    if np.any(zero):
        out[zero] = x(np.zeros(int(zero.sum())))
    if np.any(~zero):
        ref, c = x.centred_cumulative(u[~zero])
        out[~zero] = ref + c / u[~zero]
    return float(out[0]) if scalar else out


# -- CSV -----------------------------------------------------------------


def write_profile_csv(path, u, y):
    """Write ``u,y`` rows at full double precision."""
    with open(path, "w") as fh:
        fh.write("u,y\n")
        for a, b in zip(np.asarray(u, dtype=float), np.asarray(y, dtype=float)):
            fh.write(f"{float(a)!r},{float(b)!r}\n")


def read_profile_csv(path):
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "u,y":
            raise DomainError("profile CSV must start with 'u,y'")
        rows = [ln.strip().split(",") for ln in fh if ln.strip()]
    u = np.array([float(r[0]) for r in rows])
    y = np.array([float(r[1]) for r in rows])
    return u, y
