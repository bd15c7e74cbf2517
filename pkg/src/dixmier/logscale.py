"""Signed reals stored in base-2 logarithmic form.

Quantities such as ``2**(k - 2**k)`` for ``k`` up to 50 overflow or
underflow double precision long before they stop mattering, so every
magnitude that crosses such scales is carried as a :class:`LogReal`.

The exponent ``log2|x|`` is held as an integer part and a fractional part
in ``[0, 1)``.  The split keeps the fractional bits at full precision no
matter how large the exponent grows; :attr:`LogReal.exponent` exposes the
plain float view.
"""

from __future__ import annotations

import contextlib
import contextvars
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DomainError

__all__ = [
    "LogReal",
    "ZERO",
    "ONE",
    "log_add",
    "log_sub_pos",
    "log_mul",
    "log_div",
    "compare",
    "from_real",
    "to_real",
    "track_cancellations",
    "CancellationLog",
    "CANCELLATION_THRESHOLD",
]

LN2 = math.log(2.0)

#: exponent gaps below this are treated as exact cancellation in
#: :func:`log_sub_pos`
CANCELLATION_THRESHOLD = 2.0 ** -30

# beyond this gap 2**-gap is below the smallest subnormal
_NEGLIGIBLE_GAP = 1100


class LogReal:
    """A real number ``sign * 2**exponent``.

    Parameters
    ----------
    sign : {-1, 0, 1}
        Zero encodes the exact value zero; the exponent is then ignored.
    exponent : int or float
        ``log2`` of the magnitude.  Integers are split exactly, so
        exponents like ``40 - 2**40`` lose nothing.

    Examples
    --------
    >>> LogReal(1, 3) * LogReal(1, 4)
    LogReal(1, 7.0)
    >>> float(LogReal(1, 0) + LogReal(1, 0))
    2.0
    """

    __slots__ = ("sign", "_whole", "_frac")

    def __init__(self, sign: int, exponent: float = 0.0):
        if sign not in (-1, 0, 1):
            raise DomainError(f"sign must be -1, 0 or 1, got {sign!r}")
        if sign == 0:
            whole, frac = 0, 0.0
        elif isinstance(exponent, int):
            whole, frac = exponent, 0.0
        else:
            exponent = float(exponent)
            if not math.isfinite(exponent):
                raise DomainError(f"exponent must be finite, got {exponent!r}")
            whole = math.floor(exponent)
            frac = exponent - whole
        object.__setattr__(self, "sign", sign)
        object.__setattr__(self, "_whole", whole)
        object.__setattr__(self, "_frac", frac)

    @classmethod
    def _from_parts(cls, sign: int, whole: int, frac: float) -> "LogReal":
        # normalise frac into [0, 1); frac is always moderate here
        if not math.isfinite(frac):
            raise DomainError("non-finite exponent in log-domain arithmetic")
        shift = math.floor(frac)
        self = cls.__new__(cls)
        object.__setattr__(self, "sign", sign)
        object.__setattr__(self, "_whole", whole + shift if sign else 0)
        object.__setattr__(self, "_frac", frac - shift if sign else 0.0)
        return self

    def __setattr__(self, name, value):
        raise AttributeError("LogReal is immutable")

    @property
    def exponent(self) -> float:
        """``log2|x|`` as a float (``-inf`` for zero)."""
        if self.sign == 0:
            return -math.inf
        return self._whole + self._frac

    @property
    def parts(self) -> tuple[int, float]:
        """Integer and fractional parts of the exponent."""
        return self._whole, self._frac

    def is_zero(self) -> bool:
        return self.sign == 0

    def __repr__(self):
        if self.sign == 0:
            return "LogReal(0)"
        return f"LogReal({self.sign}, {self.exponent!r})"

    def __float__(self):
        return to_real(self)

    def __hash__(self):
        return hash((self.sign, self._whole, self._frac))

    def __eq__(self, other):
        if not isinstance(other, LogReal):
            return NotImplemented
        return compare(self, other) == 0

    def __lt__(self, other):
        return compare(self, other) < 0

    def __le__(self, other):
        return compare(self, other) <= 0

    def __gt__(self, other):
        return compare(self, other) > 0

    def __ge__(self, other):
        return compare(self, other) >= 0

    def __neg__(self):
        return LogReal._from_parts(-self.sign, self._whole, self._frac)

    def __abs__(self):
        return LogReal._from_parts(abs(self.sign), self._whole, self._frac)

    def __add__(self, other):
        return log_add(self, other)

    def __sub__(self, other):
        return log_add(self, -other)

    def __mul__(self, other):
        return log_mul(self, other)

    def __truediv__(self, other):
        return log_div(self, other)


ZERO = LogReal(0)
ONE = LogReal(1, 0)


@dataclass
class CancellationLog:
    """Record of subtractions that were flushed to zero."""

    events: list = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.events)


_cancellations: contextvars.ContextVar = contextvars.ContextVar(
    "dixmier_cancellations", default=None)


@contextlib.contextmanager
def track_cancellations():
    """Collect cancellation events raised inside the ``with`` block.

    >>> with track_cancellations() as log:
    ...     _ = log_sub_pos(LogReal(1, 1.0), LogReal(1, 1.0 - 1e-12))
    >>> log.count
    1
    """
    log = CancellationLog()
    token = _cancellations.set(log)
    try:
        yield log
    finally:
        _cancellations.reset(token)


def _magnitude_key(x: LogReal):
    return (x._whole, x._frac)


def _gap(hi: LogReal, lo: LogReal) -> float:
    """Exponent difference ``hi - lo`` (hi the larger magnitude)."""
    dw = hi._whole - lo._whole
    if dw > _NEGLIGIBLE_GAP:
        return math.inf
    return dw + (hi._frac - lo._frac)


def compare(a: LogReal, b: LogReal) -> int:
    """Three-way comparison consistent with the real ordering."""
    if a.sign != b.sign:
        return -1 if a.sign < b.sign else 1
    if a.sign == 0:
        return 0
    ka, kb = _magnitude_key(a), _magnitude_key(b)
    if ka == kb:
        return 0
    bigger = 1 if ka > kb else -1
    return bigger * a.sign


def _add_magnitudes(hi: LogReal, lo: LogReal, sign: int) -> LogReal:
    d = _gap(hi, lo)
    if d == math.inf:
        return LogReal._from_parts(sign, hi._whole, hi._frac)
    inc = math.log1p(2.0 ** -d) / LN2
    return LogReal._from_parts(sign, hi._whole, hi._frac + inc)


def _sub_magnitudes(hi: LogReal, lo: LogReal, sign: int) -> LogReal:
    d = _gap(hi, lo)
    if d == 0.0:
        return ZERO
    if d < CANCELLATION_THRESHOLD:
        log = _cancellations.get()
        if log is not None:
            log.events.append((hi.exponent, lo.exponent))
        return ZERO
    if d == math.inf:
        return LogReal._from_parts(sign, hi._whole, hi._frac)
    dec = math.log2(-math.expm1(-d * LN2))
    return LogReal._from_parts(sign, hi._whole, hi._frac + dec)


def log_add(a: LogReal, b: LogReal) -> LogReal:
    """Return ``a + b``.

    The larger magnitude is factored out and the remainder folded in with
    ``log1p``, so the result does not depend on argument order.
    """
    if a.sign == 0:
        return b
    if b.sign == 0:
        return a
    ka, kb = _magnitude_key(a), _magnitude_key(b)
    hi, lo = (a, b) if ka >= kb else (b, a)
    if a.sign == b.sign:
        return _add_magnitudes(hi, lo, a.sign)
    return _sub_magnitudes(hi, lo, hi.sign)


def log_sub_pos(a: LogReal, b: LogReal) -> LogReal:
    """Return ``a - b`` for ``a >= b >= 0``.

    Differences whose exponent gap is below :data:`CANCELLATION_THRESHOLD`
    are returned as exact zero and logged to any active
    :func:`track_cancellations` block.
    """
    if a.sign < 0 or b.sign < 0:
        raise DomainError("log_sub_pos needs nonnegative operands")
    if b.sign == 0:
        return a
    if a.sign == 0 or _magnitude_key(a) < _magnitude_key(b):
        raise DomainError(f"log_sub_pos needs a >= b, got {a!r} < {b!r}")
    return _sub_magnitudes(a, b, 1)


def log_mul(a: LogReal, b: LogReal) -> LogReal:
    """Return ``a * b``."""
    if a.sign == 0 or b.sign == 0:
        return ZERO
    return LogReal._from_parts(a.sign * b.sign, a._whole + b._whole,
                               a._frac + b._frac)


def log_div(a: LogReal, b: LogReal) -> LogReal:
    """Return ``a / b``; division by zero is a :class:`DomainError`."""
    if b.sign == 0:
        raise DomainError("division by zero")
    if a.sign == 0:
        return ZERO
    return LogReal._from_parts(a.sign * b.sign, a._whole - b._whole,
                               a._frac - b._frac)


def log2_ratio(a: LogReal, b: LogReal) -> float:
    """``log2(a / b)`` for positive operands, without forming the quotient."""
    if a.sign <= 0 or b.sign <= 0:
        raise DomainError("log2_ratio needs positive operands")
    return (a._whole - b._whole) + (a._frac - b._frac)


def from_real(value) -> LogReal:
    """Convert a finite float, int or Fraction."""
    if isinstance(value, Fraction):
        if value == 0:
            return ZERO
        sign = 1 if value > 0 else -1
        num, den = abs(value.numerator), value.denominator
        shift = num.bit_length() - den.bit_length()
        scaled = Fraction(num, den) / Fraction(2) ** shift
        m = float(scaled)
        return LogReal._from_parts(sign, shift, math.log2(m))
    value = float(value)
    if not math.isfinite(value):
        raise DomainError(f"cannot convert {value!r}")
    if value == 0.0:
        return ZERO
    sign = 1 if value > 0 else -1
    m, e = math.frexp(abs(value))
    # m in [0.5, 1): 2m in [1, 2) keeps log2 in [0, 1)
    return LogReal._from_parts(sign, e - 1, math.log2(2.0 * m))


def to_real(x: LogReal) -> float:
    """Convert to a float; underflows to 0.0, overflow raises."""
    if x.sign == 0:
        return 0.0
    return x.sign * math.ldexp(2.0 ** x._frac, x._whole)
