"""Singular values of dense matrices and the discrete Dixmier weights.

The operator side enters through the singular value sequence
``mu(0) >= mu(1) >= ...``.  Embedding it as a step function with unit
pieces turns the normalised partial sums into values of the a-profile,
so both sides share one numerical path.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .averaging import _piece_extrema, _sample, a_curve, block_windows
from .errors import DomainError, NumericalError
from .psi import PsiFunction
from .stepfn import StepFunction, cumulative_integral, pi_embed

__all__ = [
    "SingularSpectrum",
    "singular_values",
    "dixmier_weight_sequence",
    "NormReport",
    "marcinkiewicz_norm",
    "read_matrix_csv",
    "write_spectrum_csv",
]

MAX_DIM = 512
MAX_SWEEPS = 64
# off-diagonal Gram mass relative to ||A||_F**4
GRAM_TOL = 1e-24


@dataclass(frozen=True)
class SingularSpectrum:
    """Nonincreasing nonnegative singular values and the source dimension."""

    values: np.ndarray
    dim: int

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or np.any(v < 0) or np.any(np.diff(v) > 0):
            raise DomainError("spectrum must be nonincreasing and nonnegative")
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.values)

    def as_stepfn(self) -> StepFunction:
        return pi_embed(self.values)


def _round_robin(n: int):
    """Pairings of ``0..n-1`` (``n`` even) covering every pair once."""
    players = list(range(n))
    rounds = []
    for _ in range(n - 1):
        half = n // 2
        rounds.append((np.array(players[:half]), np.array(players[half:][::-1])))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def _off_gram(A: np.ndarray) -> float:
    G = A.T @ A
    np.fill_diagonal(G, 0.0)
    return float(np.sum(G * G))


def singular_values(A) -> SingularSpectrum:
    """Singular values by one-sided Jacobi rotations.

    Columns are orthogonalised in parallel round-robin order until the
    squared off-diagonal Gram mass drops below ``1e-24 * ||A||_F**4``.

    >>> singular_values(np.diag([3.0, 1.0, 2.0])).values.tolist()
    [3.0, 2.0, 1.0]
    """
    A = np.array(A, dtype=float)
    if A.ndim != 2:
        raise DomainError("expected a 2-d matrix")
    if not np.all(np.isfinite(A)):
        raise DomainError("matrix entries must be finite")
    m, n = A.shape
    if max(m, n) > MAX_DIM:
        raise DomainError(f"dense path supports dimensions up to {MAX_DIM}")
    if m < n:
        A = A.T
        m, n = n, m
    dim = n
    if n == 0:
        return SingularSpectrum(np.zeros(0), 0)
    if n % 2:
        A = np.hstack([A, np.zeros((m, 1))])
    fro2 = float(np.sum(A * A))
    if fro2 == 0.0:
        return SingularSpectrum(np.zeros(dim), dim)
    target = GRAM_TOL * fro2 * fro2
    # rows of B are the columns of A; row slices stay contiguous
    B = np.ascontiguousarray(A.T)
    rounds = _round_robin(B.shape[0])
    for _ in range(MAX_SWEEPS):
        if _off_gram(B.T) <= target:
            break
        for p, q in rounds:
            bp, bq = B[p], B[q]
            alpha = np.einsum("ij,ij->i", bp, bp)
            beta = np.einsum("ij,ij->i", bq, bq)
            gamma = np.einsum("ij,ij->i", bp, bq)
            rot = gamma != 0.0
            zeta = (beta - alpha) / np.where(rot, 2.0 * gamma, 1.0)
            t = np.where(rot, np.copysign(1.0, zeta) / (np.abs(zeta) + np.hypot(1.0, zeta)), 0.0)
            c = (1.0 / np.hypot(1.0, t))[:, None]
            s = c * t[:, None]
            B[p] = c * bp - s * bq
            B[q] = s * bp + c * bq
    else:
        if _off_gram(B.T) > target:
            raise NumericalError(f"Jacobi sweeps did not converge in {MAX_SWEEPS}")
    sv = np.sort(np.sqrt(np.einsum("ij,ij->i", B, B)))[::-1][:dim]
    return SingularSpectrum(sv, dim)


def dixmier_weight_sequence(mu, psi: PsiFunction, n: int) -> float:
    """``(mu(0) + ... + mu(n)) / psi(n + 1)``.

    Computed as ``a(n + 1, pi(mu))`` so the two sides agree exactly.

    >>> from dixmier.psi import PsiLog
    >>> round(dixmier_weight_sequence([1.0, 1.0, 1.0], PsiLog(), 2), 6)
    2.164043
    """
    values = mu.values if isinstance(mu, SingularSpectrum) else np.asarray(mu, dtype=float)
    if not 0 <= n < len(values):
        raise DomainError(f"index {n} outside a spectrum of length {len(values)}")
    f = pi_embed(values)
    u = math.log2(n + 1)
    F = cumulative_integral(f, u)
    if F.sign == 0:
        return 0.0
    return 2.0 ** (F.exponent - float(psi.eval_log(u)))


@dataclass
class NormReport:
    """Supremum of the normalised averages and where it was attained.

    ``argmax`` is an index ``n`` for spectra and ``u = log2 t`` for step
    functions.  ``in_space`` is False when the maxima still grow at the
    end of the window.
    """

    value: float
    argmax: float
    in_space: bool


def marcinkiewicz_norm(x, psi: PsiFunction, blocks=None, u_max: float = None,
                       tol: float = 1e-6) -> NormReport:
    """Marcinkiewicz norm of a spectrum or of a step function on a window."""
    if isinstance(x, StepFunction):
        return _function_norm(x, psi, blocks, u_max, tol)
    values = x.values if isinstance(x, SingularSpectrum) else np.asarray(x, dtype=float)
    if len(values) == 0:
        raise DomainError("empty spectrum")
    csum = np.cumsum(values)
    n = np.arange(len(values))
    w = csum / np.exp2(psi.eval_log(np.log2(n + 1.0)))
    k = int(np.argmax(w))
    return NormReport(float(w[k]), float(k), _settled(w, tol))


def _settled(maxima, tol):
    if len(maxima) < 5:
        return True
    tail = maxima[-max(3, len(maxima) // 4):]
    return not (np.all(np.diff(tail) > tol) and np.argmax(maxima) == len(maxima) - 1)


def _function_norm(f, psi, blocks, u_max, tol):
    if u_max is None:
        _, _, u_max = block_windows(f, blocks)
    a = a_curve(f, psi, u_max)
    finite = np.flatnonzero(np.isfinite(a.edges[1:]))
    last = int(finite[-1])
    lo, hi = a.edges[:last + 1], a.edges[1:last + 2]
    maxima, locs = _piece_extrema(a, lo, hi, 1.0, _sample(a, lo, hi, 64))
    k = int(np.argmax(maxima))
    return NormReport(float(maxima[k]), float(locs[k]), _settled(maxima, tol))


def read_matrix_csv(path) -> np.ndarray:
    """Dense matrix from comma-separated rows."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    if not rows:
        raise DomainError(f"{path}: no matrix rows")
    try:
        data = [[float(c) for c in r] for r in rows]
    except ValueError as exc:
        raise DomainError(f"{path}: {exc}") from None
    if len({len(r) for r in data}) != 1:
        raise DomainError(f"{path}: ragged rows")
    return np.array(data)


def write_spectrum_csv(path, spectrum: SingularSpectrum):
    with open(path, "w") as fh:
        fh.write("mu\n")
        for v in spectrum.values:
            fh.write(f"{float(v)!r}\n")
