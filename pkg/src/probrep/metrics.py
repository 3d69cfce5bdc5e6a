"""Statistical distance, trace distance and the representation metric ``d_M``.

``d_M(rho, sigma) = 1/2 sup_M ||P_M(rho) - P_M(sigma)||_1`` and the norm
``||A||_M = sup_M ||P_M(A)||_1`` are suprema over a measurement family that is
usually infinite. Each :class:`MeasurementFamily` therefore declares how the
supremum is resolved, and every result says what kind of bound it is:

``enumerate``  exact over an explicit finite list.
``analytic``   exact, from a closed-form optimal witness.
``sample``     a lower bound: the best of ``count`` seeded members,
               optionally polished by Nelder-Mead (still a realized member).

Infima over state families (:func:`distance_to_family`) come from projected
subgradient descent and are upper bounds.
"""

from __future__ import annotations

import dataclasses
from typing import Callable, Iterator, Sequence

import numpy as np
from scipy import linalg as sla
from scipy import optimize

from probrep._config import TOL
from probrep.operators import (
    Measurement,
    SeedLike,
    as_density_matrix,
    as_hermitian,
    haar_unitaries,
    haar_unitary,
    partial_trace,
    random_density_matrix,
    random_povm_element,
    rng_from,
    trace_norm,
)

KINDS = ("explicit", "product_rank1_bases", "all_rank1_bases", "damped")
STRATEGIES = ("enumerate", "sample", "analytic")


def statistical_distance(p: Sequence[float], q: Sequence[float]) -> float:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {q.shape}")
    return 0.5 * float(np.abs(p - q).sum())


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    rho = as_density_matrix(rho)
    sigma = as_density_matrix(sigma)
    if rho.shape != sigma.shape:
        raise ValueError(f"dimension mismatch: {rho.shape} vs {sigma.shape}")
    return 0.5 * trace_norm(rho - sigma)


@dataclasses.dataclass(frozen=True)
class SupResult:
    """Value of a supremum over a family with the member attaining it."""

    value: float
    witness: Measurement | None
    bound: str  # "exact" or "lower"


@dataclasses.dataclass(frozen=True)
class MeasurementFamily:
    """A set of measurements together with its sup strategy.

    Use the classmethod constructors rather than the raw fields.
    """

    kind: str
    dims: tuple[int, ...]
    strategy: str
    members: tuple[Measurement, ...] = ()
    count: int = 0
    seed: int = 0
    same_basis: bool = False
    refine: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown family kind {self.kind!r}")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown sup strategy {self.strategy!r}")
        if self.kind == "explicit" and not self.members:
            raise ValueError("explicit measurement family is empty")
        if self.strategy == "sample" and self.count < 1:
            raise ValueError("sampled family needs count >= 1")
        if self.kind == "product_rank1_bases" and self.strategy == "analytic":
            raise ValueError("no analytic witness for product bases; use strategy='sample'")

    @classmethod
    def explicit(cls, members: Sequence[Measurement]) -> "MeasurementFamily":
        members = tuple(members)
        if not members:
            raise ValueError("explicit measurement family is empty")
        dims = {m.dim for m in members}
        if len(dims) != 1:
            raise ValueError("explicit family mixes dimensions")
        return cls("explicit", (dims.pop(),), "enumerate", members=members)

    @classmethod
    def product_rank1_bases(cls, dim_a: int, dim_b: int, count: int = 200, seed: int = 0, *,
                            same_basis: bool = False, refine: bool = False) -> "MeasurementFamily":
        """Local orthonormal bases ``U_A (x) U_B``; ``same_basis`` samples ``M (x) M`` only."""
        if same_basis and dim_a != dim_b:
            raise ValueError("same_basis requires equal local dimensions")
        return cls("product_rank1_bases", (dim_a, dim_b), "sample", count=count, seed=seed,
                   same_basis=same_basis, refine=refine)

    @classmethod
    def all_rank1_bases(cls, dim: int, count: int = 500, seed: int = 0, *, strategy: str = "sample",
                        refine: bool = False) -> "MeasurementFamily":
        return cls("all_rank1_bases", (dim,), strategy, count=count, seed=seed, refine=refine)

    @classmethod
    def damped(cls, dim: int, *, strategy: str = "analytic", count: int = 0, seed: int = 0) -> "MeasurementFamily":
        """``{P E P, 1 - P E P}`` with ``<0|E|0> = 0``, plus ``{1}``, with ``P = sum_n e^{-n} |n><n|``."""
        if dim < 2:
            raise ValueError("damped family needs dim >= 2")
        return cls("damped", (dim,), strategy, count=count, seed=seed)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def damping(self) -> np.ndarray:
        return np.diag(np.exp(-np.arange(self.dim, dtype=float)))

    def members_iter(self) -> Iterator[Measurement]:
        """Explicit members, or the seeded sample sequence."""
        if self.kind == "explicit":
            yield from self.members
            return
        if self.kind == "damped":
            p = self.damping()
            rng = rng_from(self.seed)
            yield Measurement(np.eye(self.dim)[None])
            for _ in range(self.count):
                e = np.zeros((self.dim, self.dim), complex)
                e[1:, 1:] = random_povm_element(self.dim - 1, rng)
                pep = p @ e @ p
                yield Measurement(np.stack([pep, np.eye(self.dim) - pep]))
            return
        for u in self._sample_bases():
            yield Measurement.from_basis(u)

    def _sample_bases(self) -> Iterator[np.ndarray]:
        rng = rng_from(self.seed)
        if self.kind == "all_rank1_bases":
            yield from haar_unitaries(self.dim, self.count, rng)
            return
        da, db = self.dims
        for _ in range(self.count):
            ua = haar_unitary(da, rng)
            ub = ua if self.same_basis else haar_unitary(db, rng)
            yield np.kron(ua, ub)


def _basis_l1(u: np.ndarray, a: np.ndarray) -> float:
    return float(np.abs(np.einsum("ij,ik,kj->j", u.conj(), a, u).real).sum())


def _hermitian_from_params(x: np.ndarray, dim: int) -> np.ndarray:
    h = np.zeros((dim, dim), complex)
    iu = np.triu_indices(dim, 1)
    k = len(iu[0])
    h[np.diag_indices(dim)] = x[:dim]
    h[iu] = x[dim:dim + k] + 1j * x[dim + k:dim + 2 * k]
    return h + np.triu(h, 1).conj().T


def _refine_basis(family: MeasurementFamily, a: np.ndarray, u0: np.ndarray) -> np.ndarray:
    """Nelder-Mead over local unitary rotations of the best sampled basis."""
    if family.kind == "all_rank1_bases":
        blocks = [family.dim]
    elif family.same_basis:
        blocks = [family.dims[0]]
    else:
        blocks = list(family.dims)
    sizes = [d * d for d in blocks]

    def rotation(x):
        rots, start = [], 0
        for d, s in zip(blocks, sizes):
            rots.append(sla.expm(1j * _hermitian_from_params(x[start:start + s], d)))
            start += s
        if family.kind == "product_rank1_bases":
            r = np.kron(rots[0], rots[0]) if family.same_basis else np.kron(rots[0], rots[1])
        else:
            r = rots[0]
        return u0 @ r

    res = optimize.minimize(lambda x: -_basis_l1(rotation(x), a), np.zeros(sum(sizes)),
                            method="Nelder-Mead",
                            options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 4000 * sum(sizes)})
    u = rotation(res.x)
    return u if _basis_l1(u, a) >= _basis_l1(u0, a) else u0


def _damped_sup(family: MeasurementFamily, a: np.ndarray) -> SupResult:
    # With <0|E|0> = 0 and E >= 0, E lives on span{|1>, ...}; tr(PEP A) = tr(F Y).
    p = family.damping()
    y = (p @ a @ p)[1:, 1:]
    vals, vecs = np.linalg.eigh(y)
    c = float(np.trace(a).real)
    t_plus = float(vals[vals > 0].sum())
    t_minus = float(vals[vals < 0].sum())
    candidates = [(abs(c), None)]
    for t, mask in ((t_plus, vals > 0), (t_minus, vals < 0)):
        candidates.append((abs(t) + abs(c - t), mask))
    value, mask = max(candidates, key=lambda item: item[0])
    dim = family.dim
    if mask is None:
        witness = Measurement(np.eye(dim)[None])
    else:
        e = np.zeros((dim, dim), complex)
        v = vecs[:, mask]
        e[1:, 1:] = v @ v.conj().T
        pep = p @ e @ p
        witness = Measurement(np.stack([pep, np.eye(dim) - pep]))
    return SupResult(value, witness, "exact")


def _sup_l1(a: np.ndarray, family: MeasurementFamily) -> SupResult:
    """``sup_M ||P_M(a)||_1`` according to the family's strategy."""
    a = as_hermitian(a, tol=TOL.constraint)
    if a.shape[0] != family.dim:
        raise ValueError(f"operator dim {a.shape[0]} does not match family dim {family.dim}")
    if family.strategy == "analytic":
        if family.kind == "damped":
            return _damped_sup(family, a)
        if family.kind == "all_rank1_bases":
            _, vecs = np.linalg.eigh(a)
            return SupResult(trace_norm(a), Measurement.from_basis(vecs), "exact")
        raise ValueError(f"no analytic strategy for {family.kind}")
    if family.kind in ("all_rank1_bases", "product_rank1_bases"):
        best_u, best = None, -1.0
        for u in family._sample_bases():
            v = _basis_l1(u, a)
            if v > best:
                best, best_u = v, u
        if family.refine:
            best_u = _refine_basis(family, a, best_u)
            best = _basis_l1(best_u, a)
        return SupResult(best, Measurement.from_basis(best_u), "lower")
    best_m, best = None, -1.0
    for m in family.members_iter():
        v = float(np.abs(np.einsum("kij,ji->k", m.elements, a).real).sum())
        if v > best:
            best, best_m = v, m
    return SupResult(best, best_m, "exact" if family.kind == "explicit" else "lower")


def d_m(rho: np.ndarray, sigma: np.ndarray, family: MeasurementFamily) -> SupResult:
    """Representation distance ``d_M`` with the maximizing measurement as certificate."""
    rho = as_density_matrix(rho)
    sigma = as_density_matrix(sigma)
    res = _sup_l1(rho - sigma, family)
    return dataclasses.replace(res, value=0.5 * res.value)


def m_norm(a: np.ndarray, family: MeasurementFamily) -> SupResult:
    """``||A||_M = sup_M ||P_M(A)||_1`` for Hermitian ``A``."""
    return _sup_l1(a, family)


def qubit_basis_grid(count: int) -> list[Measurement]:
    """Projective qubit measurements along ``count`` Fibonacci-sphere Bloch directions."""
    i = np.arange(count) + 0.5
    z = 1 - 2 * i / count
    phi = np.pi * (1 + 5**0.5) * i
    r = np.sqrt(1 - z**2)
    out = []
    for x, y, zz in zip(r * np.cos(phi), r * np.sin(phi), z):
        h = np.array([[zz, x - 1j * y], [x + 1j * y, -zz]])
        _, vecs = np.linalg.eigh(h)
        out.append(Measurement.from_basis(vecs))
    return out


# --- distances to sets of states ---------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class StateFamily:
    """Either an explicit list of states or ``{fixed (x) sigma}`` with ``sigma`` free.

    ``fixed_first`` says whether the fixed factor is the left tensor factor.
    """

    kind: str
    members: tuple[np.ndarray, ...] = ()
    fixed: np.ndarray | None = None
    free_dim: int = 0
    fixed_first: bool = True

    @classmethod
    def explicit(cls, members: Sequence[np.ndarray]) -> "StateFamily":
        members = tuple(as_density_matrix(m) for m in members)
        if not members:
            raise ValueError("empty state family")
        if len({m.shape for m in members}) != 1:
            raise ValueError("state family mixes dimensions")
        return cls("explicit", members=members)

    @classmethod
    def product_with_free_factor(cls, fixed: np.ndarray, free_dim: int, fixed_first: bool = True) -> "StateFamily":
        return cls("product_free_factor", fixed=as_density_matrix(fixed), free_dim=free_dim,
                   fixed_first=fixed_first)

    @classmethod
    def uniform_randomness(cls, n: int) -> "StateFamily":
        """``{uniform on n bits (x) sigma_E}`` with ``dim E = 2^n``."""
        d = 2**n
        return cls.product_with_free_factor(np.eye(d) / d, d)

    @property
    def dim(self) -> int:
        if self.kind == "explicit":
            return self.members[0].shape[0]
        return self.fixed.shape[0] * self.free_dim

    def embed(self, sigma: np.ndarray) -> np.ndarray:
        if self.fixed_first:
            return np.kron(self.fixed, sigma)
        return np.kron(sigma, self.fixed)


@dataclasses.dataclass(frozen=True)
class InfResult:
    value: float
    minimizer: np.ndarray
    bound: str  # "exact" or "upper"
    converged: bool = True
    iterations: int = 0


def project_to_states(sigma: np.ndarray) -> np.ndarray:
    """Clamp negative eigenvalues and renormalize the trace."""
    vals, vecs = np.linalg.eigh((sigma + sigma.conj().T) / 2)
    vals = np.clip(vals, 0, None)
    if vals.sum() <= 0:
        return np.eye(sigma.shape[0]) / sigma.shape[0]
    return (vecs * (vals / vals.sum())) @ vecs.conj().T


def _trace_objective(rho: np.ndarray) -> Callable[[np.ndarray], tuple[float, np.ndarray]]:
    def objective(x):
        vals, vecs = np.linalg.eigh(x - rho)
        grad = (vecs * (0.5 * np.sign(vals))) @ vecs.conj().T
        return 0.5 * float(np.abs(vals).sum()), grad
    return objective


def _dm_objective(rho: np.ndarray, members: Sequence[Measurement]) -> Callable[[np.ndarray], tuple[float, np.ndarray]]:
    stack = [m.elements for m in members]

    def objective(x):
        diff = x - rho
        best, grad = -1.0, None
        for elems in stack:
            w = np.einsum("kij,ji->k", elems, diff).real
            v = 0.5 * np.abs(w).sum()
            if v > best:
                best = v
                grad = 0.5 * np.einsum("k,kij->ij", np.sign(w), elems)
        return float(best), grad
    return objective


def distance_to_family(
    rho: np.ndarray,
    family: StateFamily,
    metric: str | MeasurementFamily = "trace",
    *,
    restarts: int = 20,
    iterations: int = 500,
    step: float = 0.1,
    seed: SeedLike = 0,
    convergence_window: int = 100,
    convergence_tol: float = 1e-6,
) -> InfResult:
    """Infimum of ``metric(rho, sigma)`` over ``sigma`` in ``family``.

    ``metric`` is ``"trace"`` or a :class:`MeasurementFamily`. Sampled measurement
    families are frozen to their ``count`` members, so the optimized quantity is
    ``d`` restricted to that finite subfamily.

    For free-factor families the result is the best iterate of projected
    subgradient descent over ``restarts`` random starting states, an upper bound.
    ``converged`` is False when the best value still moved by more than
    ``convergence_tol`` within the last ``convergence_window`` iterations of the
    winning restart.
    """
    rho = as_density_matrix(rho)
    if rho.shape[0] != family.dim:
        raise ValueError(f"state dim {rho.shape[0]} does not match family dim {family.dim}")
    if metric == "trace":
        objective = _trace_objective(rho)
    elif isinstance(metric, MeasurementFamily):
        if metric.dim != family.dim:
            raise ValueError("measurement family dimension does not match")
        if metric.strategy == "analytic" or metric.kind == "explicit":
            def objective(x):
                res = _sup_l1(x - rho, metric)
                grad = 0.5 * np.einsum("k,kij->ij", np.sign(np.einsum("kij,ji->k", res.witness.elements, x - rho).real),
                                       res.witness.elements)
                return 0.5 * res.value, grad
        else:
            objective = _dm_objective(rho, list(metric.members_iter()))
    else:
        raise ValueError(f"unknown metric {metric!r}")

    if family.kind == "explicit":
        values = [objective(m)[0] for m in family.members]
        i = int(np.argmin(values))
        return InfResult(values[i], family.members[i], "exact")

    rng = rng_from(seed)
    fd = family.free_dim
    dims = (family.fixed.shape[0], fd) if family.fixed_first else (fd, family.fixed.shape[0])
    keep = 1 if family.fixed_first else 0
    fixed_op = np.kron(family.fixed, np.eye(fd)) if family.fixed_first else np.kron(np.eye(fd), family.fixed)

    best_value, best_sigma, best_history = np.inf, None, None
    for _ in range(restarts):
        sigma = random_density_matrix(fd, rng)
        history = np.empty(iterations)
        run_best, run_sigma = np.inf, sigma
        for it in range(iterations):
            value, grad_full = objective(family.embed(sigma))
            if value < run_best:
                run_best, run_sigma = value, sigma
            history[it] = run_best
            grad = partial_trace(fixed_op @ grad_full, dims, keep)
            grad = (grad + grad.conj().T) / 2
            # Tangent to the trace-one plane; renormalizing would otherwise rescale, not descend.
            grad -= np.trace(grad).real / fd * np.eye(fd)
            sigma = project_to_states(sigma - step * grad)
        value, _ = objective(family.embed(sigma))
        if value < run_best:
            run_best, run_sigma = value, sigma
            history[-1] = run_best
        if run_best < best_value:
            best_value, best_sigma, best_history = run_best, run_sigma, history
    window = min(convergence_window, iterations - 1)
    converged = bool(best_history[-window - 1] - best_history[-1] <= convergence_tol)
    return InfResult(float(best_value), best_sigma, "upper", converged, iterations)


# --- stability demonstrations ---------------------------------------------------------------


def hermitian_to_real(a: np.ndarray) -> np.ndarray:
    """Isometric coordinates of a Hermitian matrix in ``R^{d^2}``."""
    a = np.asarray(a)
    iu = np.triu_indices(a.shape[0], 1)
    return np.concatenate([np.diag(a).real, np.sqrt(2) * a[iu].real, np.sqrt(2) * a[iu].imag])


def product_span_check(dim_a: int, dim_b: int, seed: SeedLike = 0, extra: int = 4) -> tuple[int, bool]:
    """Rank of the real span of sampled product POVM elements ``E_A (x) E_B``."""
    rng = rng_from(seed)
    target = dim_a**2 * dim_b**2
    rows = []
    for _ in range(target + extra):
        ea = random_povm_element(dim_a, rng)
        eb = random_povm_element(dim_b, rng)
        rows.append(hermitian_to_real(np.kron(ea, eb)))
    rank = int(np.linalg.matrix_rank(np.array(rows), tol=1e-9))
    return rank, rank == target


def damped_family_demo(dim: int) -> list[tuple[int, float, float]]:
    """Rows ``(n, d_damped(|n><n|, |0><0|), trace distance)`` for ``n < dim``."""
    family = MeasurementFamily.damped(dim)
    basis = np.eye(dim)
    zero = np.outer(basis[0], basis[0])
    rows = []
    for n in range(dim):
        rho = np.outer(basis[n], basis[n])
        rows.append((n, d_m(rho, zero, family).value, trace_distance(rho, zero)))
    return rows
