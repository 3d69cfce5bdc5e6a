"""Flat versus triangular spectra and state pairs built from traceless operators.

The flat state puts weight ``1/m`` on ``m`` levels; the triangular state puts
``2(n-k)/(n(n+1))`` on level ``k``. No flat spectrum comes close to a large
triangular one: the 1-distance between their sorted spectra stays above
``2/11`` and its half tends to ``2(1 - 1/sqrt(2))^2``, reached near
``m = n/sqrt(2)``.
"""

from __future__ import annotations

import dataclasses
from fractions import Fraction
from typing import Sequence

import numpy as np

from probrep import _kernels
from probrep._config import TOL
from probrep.operators import SeedLike, as_hermitian, random_hermitian, rng_from, trace_norm

AIRPLANE_FLOOR = Fraction(2, 11)
AIRPLANE_MAX_N = 2**12
HALF_DISTANCE_LIMIT = 2 * (1 - 1 / np.sqrt(2)) ** 2


def flat_weights(m: int) -> list[Fraction]:
    if m < 1:
        raise ValueError("m must be positive")
    return [Fraction(1, m)] * m


def triangular_weights(n: int) -> list[Fraction]:
    if n < 1:
        raise ValueError("n must be positive")
    return [Fraction(2 * (n - k), n * (n + 1)) for k in range(n)]


def _diagonal_state(weights: Sequence[Fraction], dim: int) -> np.ndarray:
    if len(weights) > dim:
        raise ValueError(f"{len(weights)} levels do not fit in dim {dim}")
    diag = np.zeros(dim)
    diag[: len(weights)] = [float(w) for w in weights]
    return np.diag(diag).astype(complex)


def flat_state(m: int, dim: int) -> np.ndarray:
    return _diagonal_state(flat_weights(m), dim)


def triangular_state(n: int, dim: int | None = None) -> np.ndarray:
    return _diagonal_state(triangular_weights(n), n if dim is None else dim)


def spectral_distance(p: Sequence, q: Sequence) -> float | Fraction:
    """1-distance of two spectra after sorting descending and zero padding.

    Exact when both inputs hold Fractions or ints.
    """
    p = sorted(p, reverse=True)
    q = sorted(q, reverse=True)
    size = max(len(p), len(q))
    p = p + [0] * (size - len(p))
    q = q + [0] * (size - len(q))
    return sum((abs(a - b) for a, b in zip(p, q)), start=0 * (p[0] if p else 0))


def airplane_distances(n: int, m_max: int | None = None) -> list[Fraction]:
    """Exact ``||spectrum(triangular_n) - spectrum(flat_m)||_1`` for ``m = 1..m_max`` (default ``4n``)."""
    m_max = 4 * n if m_max is None else m_max
    numerators = _kernels.airplane_numerators(n, m_max)
    scale = n * (n + 1)
    return [Fraction(int(num), scale * m) for m, num in enumerate(numerators, start=1)]


def airplane_scan(n: int) -> tuple[Fraction, int]:
    """Minimum over ``m <= 4n`` of the spectral distance, with the smallest minimizing ``m``."""
    if not 1 <= n <= AIRPLANE_MAX_N:
        raise ValueError(f"n must be in 1..{AIRPLANE_MAX_N}")
    dists = airplane_distances(n)
    best = min(dists)
    return best, dists.index(best) + 1


def airplane_threshold(k_max: int = 12) -> tuple[list[tuple[int, Fraction, int]], int | None]:
    """Scan ``n = 2^k`` for ``k = 0..k_max``.

    Returns the rows ``(n, min, argmin)`` and the smallest ``n`` from which the
    ``2/11`` floor holds for every larger scanned power of two (``None`` if it
    fails at ``2^k_max``).
    """
    rows = []
    for k in range(k_max + 1):
        best, arg = airplane_scan(2**k)
        rows.append((2**k, best, arg))
    threshold = None
    for n, best, _ in reversed(rows):
        if best < AIRPLANE_FLOOR:
            break
        threshold = n
    return rows, threshold


@dataclasses.dataclass(frozen=True)
class TracelessWitness:
    """Hermitian ``A`` with ``tr A = 0`` and ``tr A_+ <= 1/11``."""

    operator: np.ndarray

    def __post_init__(self):
        a = as_hermitian(self.operator, tol=TOL.constraint)
        if abs(np.trace(a)) > 1e-12 * max(1.0, a.shape[0]):
            raise ValueError(f"witness trace is {np.trace(a).real:.3e}, expected 0")
        if self.positive_weight_of(a) > 1 / 11 + 1e-12:
            raise ValueError("positive part of the witness has trace above 1/11")
        a.setflags(write=False)
        object.__setattr__(self, "operator", a)

    @staticmethod
    def positive_weight_of(a: np.ndarray) -> float:
        vals = np.linalg.eigvalsh(a)
        return float(vals[vals > 0].sum())

    @property
    def dim(self) -> int:
        return self.operator.shape[0]

    @property
    def positive_weight(self) -> float:
        return self.positive_weight_of(self.operator)


def random_traceless_witness(dim: int, seed: SeedLike = None) -> TracelessWitness:
    """Random traceless Hermitian operator with ``tr A_+`` uniform in ``[0, 1/11]``."""
    if dim < 2:
        raise ValueError("a nonzero traceless operator needs dim >= 2")
    rng = rng_from(seed)
    h = random_hermitian(dim, rng)
    h -= np.trace(h).real / dim * np.eye(dim)
    plus = TracelessWitness.positive_weight_of(h)
    h *= rng.uniform(0, 1 / 11) / plus
    return TracelessWitness(h)


def witness_pair(a: TracelessWitness, pointer: int, dim: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """States ``rho``, ``sigma`` with ``rho - sigma = A``.

    ``rho = (1 - tr A_+)|p><p| + A_+`` and ``sigma = (1 + tr A_-)|p><p| - A_-``,
    with ``A`` embedded in the top-left corner of the working dimension.
    """
    if not isinstance(a, TracelessWitness):
        a = TracelessWitness(a)
    dim = max(a.dim, pointer + 1) if dim is None else dim
    if pointer < 0 or pointer >= dim or a.dim > dim:
        raise ValueError(f"pointer {pointer} or witness dim {a.dim} does not fit in dim {dim}")
    vals, vecs = np.linalg.eigh(a.operator)
    plus = np.zeros((dim, dim), complex)
    minus = np.zeros((dim, dim), complex)
    k = a.dim
    plus[:k, :k] = (vecs * np.clip(vals, 0, None)) @ vecs.conj().T
    minus[:k, :k] = (vecs * np.clip(vals, None, 0)) @ vecs.conj().T
    pointer_proj = np.zeros((dim, dim), complex)
    pointer_proj[pointer, pointer] = 1
    rho = (1 - np.trace(plus).real) * pointer_proj + plus
    sigma = (1 + np.trace(minus).real) * pointer_proj - minus
    return rho, sigma


def spectral_gap_check(rho: np.ndarray, sigma: np.ndarray) -> tuple[float, float]:
    """``(||spectrum(rho) - spectrum(sigma)||_1, ||rho - sigma||_1)``; the first never exceeds the second."""
    p = np.linalg.eigvalsh(as_hermitian(rho, tol=TOL.constraint))
    q = np.linalg.eigvalsh(as_hermitian(sigma, tol=TOL.constraint))
    return float(spectral_distance(list(p), list(q))), trace_norm(rho - sigma)
