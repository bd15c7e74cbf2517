"""Nonincreasing step functions on ``(0, inf)`` with log-domain breakpoints.

A :class:`StepFunction` is a list of pieces ``(u_k, v_k)``: piece ``k`` takes
the value ``v_k`` (a :class:`~dixmier.logscale.LogReal`) on the interval
from ``2**u_{k-1}`` to ``2**u_k`` (piece 0 starts at ``t = 0``).  Past the
last piece the function is zero, unless a tail generator supplies more
pieces on demand.

Two explicit functions with doubly exponential supports are provided:
:func:`tower_example`, with breakpoints at ``2**(2**k)``, and
:func:`squares_example`, with breakpoints at ``2**(k**2)``.
"""

from __future__ import annotations

import bisect
import math
import threading
from typing import Callable, Iterable, Sequence

from .errors import DomainError, InvariantError, ResourceError
from .logscale import (LN2, ONE, ZERO, LogReal, from_real, log_add, log_mul,
                       log_sub_pos)

__all__ = [
    "StepFunction",
    "rearrange",
    "cumulative_integral",
    "pi_embed",
    "dilate",
    "indicator",
    "tower_example",
    "squares_example",
    "read_stepfn",
    "write_stepfn",
    "format_stepfn",
    "parse_stepfn",
    "DEFAULT_BUDGET",
]

DEFAULT_BUDGET = 64

TailGenerator = Callable[[int], "tuple[float, LogReal]"]


class StepFunction:
    """Piecewise constant function stored by ``log2`` breakpoints.

    Parameters
    ----------
    breakpoints : sequence of float
        ``u_k = log2`` of the right endpoint of piece ``k``; strictly
        increasing.
    values : sequence of LogReal
        Value on each piece.
    tail : callable, optional
        ``tail(k) -> (u_k, v_k)`` for ``k >= len(breakpoints)``.  Pieces are
        generated on demand and cached.
    budget : int
        Maximum number of pieces a tail may generate.  Asking for more is a
        :class:`~dixmier.errors.ResourceError` rather than a hang.
    closed : {"left", "right"}
        Which endpoint of each piece belongs to it.  ``"left"`` gives
        ``[t_{k-1}, t_k)``; ``"right"`` gives ``(t_{k-1}, t_k]`` as used by
        sequence embeddings.
    critical : dict, optional
        Registered families of critical points, ``name -> (n -> u)``.
    meta : dict, optional
        Free-form descriptive data (example name, default windows, ...).
    """

    def __init__(self, breakpoints: Sequence[float] = (),
                 values: Sequence[LogReal] = (), tail: TailGenerator = None,
                 budget: int = DEFAULT_BUDGET, closed: str = "left",
                 critical: dict = None, meta: dict = None):
        if len(breakpoints) != len(values):
            raise InvariantError("breakpoints and values differ in length")
        if closed not in ("left", "right"):
            raise DomainError(f"closed must be 'left' or 'right', not {closed!r}")
        self._u = [float(u) for u in breakpoints]
        self._v = list(values)
        for u0, u1 in zip(self._u, self._u[1:]):
            if not u1 > u0:
                raise InvariantError("breakpoints must be strictly increasing")
        for v in self._v:
            if not isinstance(v, LogReal):
                raise InvariantError("values must be LogReal instances")
        self._tail = tail
        self.budget = int(budget)
        self.closed = closed
        self.critical = dict(critical or {})
        self.meta = dict(meta or {})
        self._cum = []
        self._lock = threading.RLock()

    # -- piece access -----------------------------------------------------

    @property
    def is_lazy(self) -> bool:
        return self._tail is not None

    @property
    def n_pieces(self) -> int:
        """Number of pieces materialised so far."""
        return len(self._u)

    def _grow(self, n: int):
        # caller holds the lock
        while len(self._u) < n:
            k = len(self._u)
            if k >= self.budget:
                raise ResourceError(
                    f"tail generator exhausted its budget of {self.budget} pieces")
            u, v = self._tail(k)
            u = float(u)
            if self._u and not u > self._u[-1]:
                raise InvariantError(f"tail piece {k} does not advance")
            self._u.append(u)
            self._v.append(v)

    def ensure(self, n: int):
        """Materialise at least ``n`` pieces (no-op for finite functions)."""
        if n <= len(self._u) or self._tail is None:
            return
        with self._lock:
            self._grow(n)

    def cover(self, u: float):
        """Materialise pieces until one ends at or beyond ``u``."""
        if self._tail is None or (self._u and self._u[-1] >= u):
            return
        with self._lock:
            while not (self._u and self._u[-1] >= u):
                self._grow(len(self._u) + 1)

    def piece(self, k: int) -> tuple[float, LogReal]:
        self.ensure(k + 1)
        if k >= len(self._u):
            raise IndexError(k)
        return self._u[k], self._v[k]

    def pieces(self, n: int = None) -> list[tuple[float, LogReal]]:
        """First ``n`` pieces (all materialised pieces by default)."""
        if n is not None:
            self.ensure(n)
        with self._lock:
            m = len(self._u) if n is None else min(n, len(self._u))
            return list(zip(self._u[:m], self._v[:m]))

    def breakpoints(self, n: int = None) -> list[float]:
        return [u for u, _ in self.pieces(n)]

    def index_at(self, u: float) -> int:
        """Index of the piece containing ``t = 2**u``.

        Returns the number of pieces when ``t`` lies beyond a finite support.
        """
        if self._tail is not None:
            # the covering piece must end strictly after u for left-closed
            self.cover(u)
            if self.closed == "left" and self._u[-1] == u:
                self.ensure(len(self._u) + 1)
        if self.closed == "left":
            return bisect.bisect_right(self._u, u)
        return bisect.bisect_left(self._u, u)

    def value_at(self, u: float) -> LogReal:
        """Value at ``t = 2**u``."""
        k = self.index_at(u)
        if k >= len(self._u):
            return ZERO
        return self._v[k]

    def __call__(self, t: float) -> float:
        if t <= 0:
            raise DomainError("step functions live on (0, inf)")
        return float(self.value_at(math.log2(t)))

    # -- integrals --------------------------------------------------------

    def left_edge(self, k: int) -> LogReal:
        """``t_{k-1}`` as a LogReal (zero for the first piece)."""
        if k == 0:
            return ZERO
        return LogReal(1, self._u[k - 1])

    def cumulative_at(self, k: int) -> LogReal:
        """``F(t_k)``, the integral of the function over ``(0, t_k)``."""
        self.ensure(k + 1)
        with self._lock:
            while len(self._cum) <= k:
                j = len(self._cum)
                prev = self._cum[-1] if self._cum else ZERO
                width = log_sub_pos(LogReal(1, self._u[j]), self.left_edge(j))
                self._cum.append(log_add(prev, log_mul(self._v[j], width)))
            return self._cum[k]

    def total(self) -> LogReal:
        """Integral over the whole support of a finite function."""
        if self._tail is not None:
            raise DomainError("total integral of a lazily generated function")
        if not self._u:
            return ZERO
        return self.cumulative_at(len(self._u) - 1)

    # -- structure --------------------------------------------------------

    def is_canonical(self) -> bool:
        """Strictly decreasing positive values on the materialised pieces."""
        if any(v.sign <= 0 for v in self._v):
            return False
        return all(b < a for a, b in zip(self._v, self._v[1:]))

    def is_nonincreasing(self) -> bool:
        if any(v.sign < 0 for v in self._v):
            return False
        return all(b <= a for a, b in zip(self._v, self._v[1:]))

    def __eq__(self, other):
        if not isinstance(other, StepFunction):
            return NotImplemented
        if self.is_lazy or other.is_lazy:
            return self is other
        return (self.closed == other.closed and self._u == other._u
                and self._v == other._v)

    __hash__ = object.__hash__

    def __repr__(self):
        kind = "lazy" if self.is_lazy else "finite"
        return f"<StepFunction {kind}, {len(self._u)} pieces>"


def _canonical_merge(pieces: Iterable[tuple[float, LogReal]]):
    """Drop zero pieces at the end and merge equal neighbours."""
    us, vs = [], []
    for u, v in pieces:
        if vs and v == vs[-1]:
            us[-1] = u
        else:
            us.append(u)
            vs.append(v)
    while vs and vs[-1].sign == 0:
        us.pop()
        vs.pop()
    return us, vs


def rearrange(level_sets) -> StepFunction:
    """Decreasing rearrangement.

    Parameters
    ----------
    level_sets : list of (LogReal, LogReal) or StepFunction
        Unordered ``(value, measure)`` pairs, or a finite step function.

    Returns
    -------
    StepFunction
        The canonical nonincreasing function equimeasurable with the input.

    Examples
    --------
    >>> f = rearrange([(ONE, from_real(2)), (from_real(3), ONE)])
    >>> [(u, float(v)) for u, v in f.pieces()]
    [(0.0, 3.0), (1.584962500721156, 1.0)]
    """
    if isinstance(level_sets, StepFunction):
        f = level_sets
        if f.is_lazy:
            raise DomainError("cannot rearrange a lazily generated function")
        if f.is_nonincreasing():
            us, vs = _canonical_merge(f.pieces())
            return StepFunction(us, vs, closed=f.closed)
        level_sets = []
        for k, (u, v) in enumerate(f.pieces()):
            level_sets.append((v, log_sub_pos(LogReal(1, u), f.left_edge(k))))

    merged = {}
    for value, measure in level_sets:
        if not isinstance(value, LogReal):
            value = from_real(value)
        if not isinstance(measure, LogReal):
            measure = from_real(measure)
        if measure.sign <= 0:
            raise DomainError("level-set measures must be positive")
        if value.sign < 0:
            raise DomainError("rearrangement acts on |f|; pass magnitudes")
        if value.sign == 0:
            continue
        merged[value] = log_add(merged.get(value, ZERO), measure)

    us, vs = [], []
    total = ZERO
    for value in sorted(merged, reverse=True):
        total = log_add(total, merged[value])
        us.append(total.exponent)
        vs.append(value)
    return StepFunction(us, vs)


def cumulative_integral(f: StepFunction, u: float) -> LogReal:
    """``F(2**u)``: integral of ``f`` over ``(0, 2**u)`` as a LogReal.

    Lazy tails are extended until a piece covers ``2**u``.

    >>> float(cumulative_integral(tower_example(), 4.0))
    5.0
    """
    k = f.index_at(u)
    if k >= f.n_pieces:
        return f.cumulative_at(f.n_pieces - 1) if f.n_pieces else ZERO
    prev = f.cumulative_at(k - 1) if k > 0 else ZERO
    _, v = f.piece(k)
    width = log_sub_pos(LogReal(1, u), f.left_edge(k))
    return log_add(prev, log_mul(v, width))


def pi_embed(x) -> StepFunction:
    """Embed a finite nonincreasing sequence as a step function.

    ``x[n]`` occupies ``(n, n + 1]``; equal neighbours are merged and
    trailing zeros dropped.

    >>> f = pi_embed([3, 2, 1])
    >>> [f(t) for t in (0.5, 1.0, 1.5, 3.0, 3.5)]
    [3.0, 3.0, 2.0, 1.0, 0.0]
    """
    vals = [v if isinstance(v, LogReal) else from_real(v) for v in x]
    for v in vals:
        if v.sign < 0:
            raise DomainError("sequence entries must be nonnegative")
    for a, b in zip(vals, vals[1:]):
        if b > a:
            raise DomainError("sequence must be nonincreasing; rearrange first")
    pieces = [(math.log2(n + 1), v) for n, v in enumerate(vals)]
    us, vs = _canonical_merge(pieces)
    return StepFunction(us, vs, closed="right")


def _shift_family(fn, shift):
    return lambda n: fn(n) + shift


def dilate(f: StepFunction, s) -> StepFunction:
    """Dilation ``t -> f(t / s)``: every breakpoint moves by ``log2 s``."""
    if isinstance(s, LogReal):
        if s.sign <= 0:
            raise DomainError("dilation factor must be positive")
        shift = s.exponent
    else:
        if not s > 0:
            raise DomainError("dilation factor must be positive")
        shift = math.log2(s)
    tail = None
    if f.is_lazy:
        base = f._tail

        def tail(k):
            u, v = base(k)
            return u + shift, v
    pieces = f.pieces()
    critical = {name: _shift_family(fn, shift) for name, fn in f.critical.items()}
    return StepFunction([u + shift for u, _ in pieces], [v for _, v in pieces],
                        tail=tail, budget=f.budget, closed=f.closed,
                        critical=critical, meta=f.meta)


def indicator(t: float = 1.0) -> StepFunction:
    """Indicator of ``[0, t)``."""
    if not t > 0:
        raise DomainError("support length must be positive")
    return StepFunction([math.log2(t)], [ONE])


def _tower_piece(k):
    if k == 0:
        return 2.0, LogReal(1, -1)
    n = k + 1
    return float(2 ** n), LogReal(1, n - 2 ** n)


def tower_example(budget: int = DEFAULT_BUDGET) -> StepFunction:
    """``sup_k 2**(k - 2**k) * 1[0, 2**(2**k))`` in canonical form.

    The ``k = 0`` and ``k = 1`` blocks both have value 1/2, so the first
    piece is ``1/2`` on ``[0, 4)``.  Piece ``i >= 1`` carries block
    ``n = i + 1``: value ``2**(n - 2**n)`` on ``[2**(2**(n-1)), 2**(2**n))``.
    """
    critical = {
        "a": lambda n: 2.0 ** n,
        "cesaro": lambda n: 2.0 ** (n + 1.0 / LN2 - 1.0),
    }
    meta = {
        "name": "tower",
        "block_offset": 1,
        "shift_family": lambda m: 2.0 ** m,
    }
    return StepFunction(tail=_tower_piece, budget=budget, critical=critical,
                        meta=meta)


def _squares_piece(k):
    if k == 0:
        return 1.0, ONE
    n = k + 1
    return float(n * n), LogReal(1, n - n * n)


def squares_example(budget: int = 20000) -> StepFunction:
    """``sup_k 2**(k - k**2) * 1[0, 2**(k**2))`` in canonical form.

    Value 1 on ``[0, 2)``, then ``2**(n - n**2)`` on
    ``[2**((n-1)**2), 2**(n**2))`` for ``n >= 2``.  The piece budget is
    larger than the default because the interesting window runs to
    ``n = 2000``.
    """
    critical = {
        "a": lambda n: float(n) ** 2,
        "a_mid": lambda n: (n + 0.5) ** 2,
    }
    meta = {
        "name": "squares",
        "block_offset": 1,
        "shift_family": lambda m: float(m) ** 2,
        "shift_family_mid": lambda m: (m + 0.5) ** 2,
    }
    return StepFunction(tail=_squares_piece, budget=budget, critical=critical,
                        meta=meta)


# -- text format ---------------------------------------------------------

HEADER = "stepfn-v1"


def format_stepfn(f: StepFunction, n: int = None) -> str:
    """Serialise the first ``n`` pieces (all materialised by default)."""
    if f.is_lazy and n is None:
        raise DomainError("give the number of pieces to write for a lazy function")
    lines = [HEADER]
    for u, v in f.pieces(n):
        lines.append(f"{u!r}\t{v.sign}\t{v.exponent if v.sign else 0.0!r}")
    return "\n".join(lines) + "\n"


def parse_stepfn(text: str) -> StepFunction:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines or lines[0].strip() != HEADER:
        raise DomainError(f"missing '{HEADER}' header")
    us, vs = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split("\t")
        if len(fields) != 3:
            raise DomainError(f"line {lineno}: expected 3 tab-separated fields")
        try:
            u, sign, e = float(fields[0]), int(fields[1]), float(fields[2])
        except ValueError as exc:
            raise DomainError(f"line {lineno}: {exc}") from None
        us.append(u)
        vs.append(LogReal(sign, e))
    return StepFunction(us, vs)


def write_stepfn(f: StepFunction, path, n: int = None):
    with open(path, "w") as fh:
        fh.write(format_stepfn(f, n))


def read_stepfn(path) -> StepFunction:
    with open(path) as fh:
        return parse_stepfn(fh.read())
