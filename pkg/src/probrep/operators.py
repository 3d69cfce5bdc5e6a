"""Dense Hermitian operators, states, POVMs and Haar sampling.

Operators are plain ``numpy`` arrays. The ``as_*`` helpers validate an array
against the invariants of the role it plays (Hermitian operator, density
matrix, pure state, POVM element) and return a clean copy; every other
function here is pure and leaves its inputs untouched.
"""

from __future__ import annotations

import dataclasses
from typing import Sequence, Union

import numpy as np

from probrep._config import TOL

SeedLike = Union[int, np.random.Generator, np.random.SeedSequence, None]


def rng_from(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _square(a: np.ndarray, name: str) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise ValueError(f"{name} must be a nonempty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def as_hermitian(a: np.ndarray, *, tol: float | None = None) -> np.ndarray:
    """Validate ``a`` as a Hermitian matrix and return its exact Hermitian part."""
    a = _square(a, "operator").astype(complex)
    tol = TOL.hermitian if tol is None else tol
    scale = max(1.0, float(np.max(np.abs(a))))
    if np.max(np.abs(a - a.conj().T)) > tol * scale:
        raise ValueError("operator is not Hermitian")
    return (a + a.conj().T) / 2


def as_density_matrix(rho: np.ndarray) -> np.ndarray:
    """Validate a density matrix.

    Eigenvalues in ``[-TOL.constraint, 0)`` are clamped to zero; anything more
    negative is rejected. The trace must equal one to ``TOL.trace`` (loosened
    to ``TOL.constraint`` after clamping).
    """
    rho = as_hermitian(rho, tol=TOL.constraint)
    if abs(np.trace(rho).real - 1.0) > TOL.constraint:
        raise ValueError(f"trace is {np.trace(rho).real!r}, expected 1")
    vals, vecs = np.linalg.eigh(rho)
    if vals[0] < -TOL.constraint:
        raise ValueError(f"density matrix has negative eigenvalue {vals[0]:.3e}")
    if vals[0] < 0:
        vals = np.clip(vals, 0.0, None)
        rho = (vecs * vals) @ vecs.conj().T
        rho = rho / np.trace(rho).real
    return rho


def as_pure_state(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1 or psi.size == 0:
        raise ValueError("pure state must be a nonempty vector")
    if not np.all(np.isfinite(psi)):
        raise ValueError("pure state has non-finite entries")
    if abs(np.linalg.norm(psi) - 1.0) > TOL.hermitian * 10:
        raise ValueError(f"pure state has norm {np.linalg.norm(psi)!r}")
    return psi.copy()


def as_povm_element(e: np.ndarray) -> np.ndarray:
    e = as_hermitian(e, tol=TOL.constraint)
    vals = np.linalg.eigvalsh(e)
    if vals[0] < -TOL.constraint or vals[-1] > 1 + TOL.constraint:
        raise ValueError(f"POVM element eigenvalues {vals[0]:.3e}..{vals[-1]:.3e} outside [0, 1]")
    return e


@dataclasses.dataclass(frozen=True)
class Measurement:
    """A finite-outcome POVM. ``elements`` has shape ``(outcomes, dim, dim)``."""

    elements: np.ndarray

    def __post_init__(self):
        elems = np.asarray(self.elements, dtype=complex)
        if elems.ndim != 3 or elems.shape[0] == 0:
            raise ValueError("a measurement needs a nonempty stack of square elements")
        elems = np.stack([as_povm_element(e) for e in elems])
        dim = elems.shape[1]
        if np.max(np.abs(elems.sum(axis=0) - np.eye(dim))) > TOL.constraint:
            raise ValueError("POVM elements do not sum to the identity")
        elems.setflags(write=False)
        object.__setattr__(self, "elements", elems)

    @classmethod
    def from_basis(cls, basis: np.ndarray) -> "Measurement":
        """Rank-1 projective measurement onto the columns of a unitary."""
        basis = np.asarray(basis, dtype=complex)
        return cls(np.einsum("ik,jk->kij", basis, basis.conj()))

    @classmethod
    def computational(cls, dim: int) -> "Measurement":
        return cls.from_basis(np.eye(dim))

    @property
    def dim(self) -> int:
        return self.elements.shape[1]

    def __len__(self) -> int:
        return self.elements.shape[0]


def spectrum(a: np.ndarray) -> np.ndarray:
    """Eigenvalues of a Hermitian operator, in descending order."""
    return np.linalg.eigvalsh(as_hermitian(a))[::-1]


def trace_norm(a: np.ndarray) -> float:
    return float(np.sum(np.abs(np.linalg.eigvalsh(as_hermitian(a, tol=TOL.constraint)))))


def pos_neg_parts(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split ``a = a_plus + a_minus`` with ``a_plus >= 0``, ``a_minus <= 0`` and orthogonal supports."""
    vals, vecs = np.linalg.eigh(as_hermitian(a, tol=TOL.constraint))
    plus = (vecs * np.clip(vals, 0, None)) @ vecs.conj().T
    minus = (vecs * np.clip(vals, None, 0)) @ vecs.conj().T
    return plus, minus


def born_rule(m: Measurement, a: np.ndarray) -> np.ndarray:
    """Outcome weights ``tr(E_i a)``; signed when ``a`` is not a state."""
    a = np.asarray(a)
    if a.shape != (m.dim, m.dim):
        raise ValueError(f"operator shape {a.shape} does not match measurement dim {m.dim}")
    return np.einsum("kij,ji->k", m.elements, a).real


def check_probability_vector(p: Sequence[float], *, signed: bool = False) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if not signed:
        if np.any(p < -TOL.hermitian):
            raise ValueError("probability vector has negative weights")
        if abs(p.sum() - 1.0) > TOL.constraint:
            raise ValueError(f"probabilities sum to {p.sum()!r}")
    return p


def tensor(*ops: np.ndarray) -> np.ndarray:
    out = np.asarray(ops[0])
    for op in ops[1:]:
        out = np.kron(out, op)
    return out


def partial_trace(a: np.ndarray, dims: tuple[int, int], keep: int) -> np.ndarray:
    """Trace out one factor of a bipartite operator; ``keep`` is 0 or 1."""
    da, db = dims
    t = np.asarray(a).reshape(da, db, da, db)
    if keep == 0:
        return np.einsum("ijkj->ik", t)
    return np.einsum("ijil->jl", t)


def haar_unitary(dim: int, seed: SeedLike = None) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix with phase fixing."""
    if dim < 1:
        raise ValueError("dim must be positive")
    return haar_unitaries(dim, 1, seed)[0]


def haar_unitaries(dim: int, count: int, seed: SeedLike = None) -> np.ndarray:
    rng = rng_from(seed)
    z = (rng.standard_normal((count, dim, dim)) + 1j * rng.standard_normal((count, dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=1, axis2=2)
    return q * (d / np.abs(d))[:, None, :]


def haar_state(dim: int, seed: SeedLike = None, count: int | None = None) -> np.ndarray:
    """Uniform pure state(s) from normalized complex Gaussian vectors."""
    rng = rng_from(seed)
    shape = (dim,) if count is None else (count, dim)
    v = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def random_density_matrix(dim: int, seed: SeedLike = None, rank: int | None = None) -> np.ndarray:
    """Ginibre-ensemble density matrix of the given rank (full rank by default)."""
    rng = rng_from(seed)
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_hermitian(dim: int, seed: SeedLike = None) -> np.ndarray:
    rng = rng_from(seed)
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (g + g.conj().T) / 2


def random_povm_element(dim: int, seed: SeedLike = None, rank: int | None = None) -> np.ndarray:
    """Random ``0 <= E <= 1``: Haar eigenbasis, uniform eigenvalues (zeros beyond ``rank``)."""
    rng = rng_from(seed)
    u = haar_unitary(dim, rng)
    vals = rng.uniform(0, 1, dim)
    if rank is not None:
        vals[rank:] = 0
    return (u * vals) @ u.conj().T


def random_measurement(dim: int, outcomes: int, seed: SeedLike = None) -> Measurement:
    """Random POVM: normalized Wishart blocks ``S^{-1/2} W_i S^{-1/2}``."""
    rng = rng_from(seed)
    blocks = []
    for _ in range(outcomes):
        g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        blocks.append(g @ g.conj().T)
    total = sum(blocks)
    vals, vecs = np.linalg.eigh(total)
    inv_sqrt = (vecs / np.sqrt(vals)) @ vecs.conj().T
    elems = np.stack([inv_sqrt @ b @ inv_sqrt for b in blocks])
    elems = (elems + elems.conj().transpose(0, 2, 1)) / 2
    return Measurement(elems)


def projector_support(pi: np.ndarray) -> np.ndarray:
    """Orthonormal basis (columns) of the range of an orthogonal projector."""
    pi = as_hermitian(pi, tol=TOL.constraint)
    if np.max(np.abs(pi @ pi - pi)) > TOL.constraint:
        raise ValueError("operator is not an orthogonal projector (not idempotent)")
    vals, vecs = np.linalg.eigh(pi)
    return vecs[:, vals > 0.5]


def restrict_measurement(m: Measurement, pi: np.ndarray) -> Measurement:
    """Compress every element to the support of ``pi``: ``V^† E V`` for an isometry ``V``."""
    v = projector_support(pi)
    if v.shape[0] != m.dim:
        raise ValueError("projector and measurement dimensions differ")
    if v.shape[1] == 0:
        raise ValueError("projector has empty support")
    return Measurement(np.einsum("ai,kab,bj->kij", v.conj(), m.elements, v))


def gentle_measurement_check(rho: np.ndarray, pi: np.ndarray) -> tuple[float, float]:
    """Return ``(||rho - pi rho pi||_1, 2 sqrt(1 - tr(pi rho pi)))``; the first never exceeds the second."""
    rho = as_density_matrix(rho)
    projector_support(pi)
    squeezed = pi @ rho @ pi
    lhs = trace_norm(rho - squeezed)
    rhs = 2.0 * np.sqrt(max(0.0, 1.0 - np.trace(squeezed).real))
    return lhs, float(rhs)
