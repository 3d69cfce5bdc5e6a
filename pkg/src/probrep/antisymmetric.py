"""The antisymmetric two-register state and its closed-form statistics.

``rho_n`` is the normalized projector onto the antisymmetric subspace of
``C^D (x) C^D`` with ``D = 2^n``. Measured in any local basis ``U (x) U`` it
looks almost uniform, yet it stays far in trace distance from every state
whose first register is uniform and uncorrelated.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from probrep.metrics import (
    MeasurementFamily,
    StateFamily,
    d_m,
    distance_to_family,
    statistical_distance,
    trace_distance,
)
from probrep.operators import SeedLike, as_pure_state, haar_unitary, rng_from

MAX_N = 5  # dim 2^{2n} = 1024


def _register_dim(n: int) -> int:
    if not 1 <= n <= MAX_N:
        raise ValueError(f"n must be in 1..{MAX_N}, got {n}")
    return 2**n


def swap_operator(d: int) -> np.ndarray:
    swap = np.zeros((d * d, d * d))
    i, j = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    swap[(i * d + j).ravel(), (j * d + i).ravel()] = 1.0
    return swap


def antisymmetric_state(n: int) -> np.ndarray:
    d = _register_dim(n)
    proj = (np.eye(d * d) - swap_operator(d)) / 2
    return (proj / (d * (d - 1) / 2)).astype(complex)


def product_basis_distribution(n: int, u: np.ndarray) -> np.ndarray:
    """Outcome distribution of ``rho_n`` measured in ``U (x) U``; index ``x * 2^n + y``."""
    d = _register_dim(n)
    u = np.asarray(u, dtype=complex)
    if u.shape != (d, d) or np.max(np.abs(u.conj().T @ u - np.eye(d))) > 1e-10:
        raise ValueError("U must be a unitary of dim 2^n")
    rho = antisymmetric_state(n).reshape(d, d, d, d)
    # p(x, y) = <u_x u_y| rho |u_x u_y>
    p = np.einsum("ax,by,abcd,cx,dy->xy", u.conj(), u.conj(), rho, u, u, optimize=True).real
    return p.ravel()


def uniform_product(n: int) -> np.ndarray:
    d = _register_dim(n)
    return np.full(d * d, 1.0 / (d * d))


def product_representation_gap(n: int, u: np.ndarray | None = None) -> float:
    """Statistical distance between the ``U (x) U`` statistics of ``rho_n`` and uniform noise."""
    d = _register_dim(n)
    u = np.eye(d) if u is None else u
    return statistical_distance(product_basis_distribution(n, u), uniform_product(n))


def product_representation_gap_exact(n: int) -> Fraction:
    """Closed form: ``D`` diagonal cells off by ``1/D^2``, ``D(D-1)`` cells off by ``1/(D^2 (D-1))``."""
    d = _register_dim(n)
    diag = d * Fraction(1, d * d)
    off = d * (d - 1) * (Fraction(1, d * (d - 1)) - Fraction(1, d * d))
    return (diag + off) / 2


def conditional_state(n: int, x: np.ndarray) -> np.ndarray:
    """State of the second register after outcome ``|x>`` on the first."""
    d = _register_dim(n)
    x = as_pure_state(x)
    if x.size != d:
        raise ValueError(f"outcome vector must have dim {d}")
    rho = antisymmetric_state(n).reshape(d, d, d, d)
    cond = np.einsum("a,abcd,c->bd", x.conj(), rho, x)
    return cond / np.trace(cond).real


def robustness_gap_table(n_max: int, seed: SeedLike = 0, *, bases: int = 20, delta_max_n: int = 3,
                         restarts: int = 20, iterations: int = 500) -> list[dict]:
    """Rows ``n, d_product, gap, delta_to_uniform`` for ``n = 1..n_max``.

    ``d_product`` is a sampled lower bound over ``U (x) U`` bases, ``gap`` the
    closed form ``2^-n``, and ``delta_to_uniform`` the optimizer's upper bound
    on the trace distance to ``{uniform (x) sigma}``; it is ``None`` past
    ``delta_max_n``.
    """
    if n_max < 1 or n_max > MAX_N:
        raise ValueError(f"n_max must be in 1..{MAX_N}")
    rng = rng_from(seed)
    rows = []
    for n in range(1, n_max + 1):
        d = 2**n
        rho = antisymmetric_state(n)
        family = MeasurementFamily.product_rank1_bases(d, d, count=bases, seed=int(rng.integers(2**31)),
                                                       same_basis=True)
        product = np.kron(np.eye(d) / d, np.eye(d) / d)
        row = {
            "n": n,
            "d_product": d_m(rho, product, family).value,
            "gap": float(product_representation_gap_exact(n)),
            "delta_to_uniform": None,
            "converged": None,
        }
        if n <= delta_max_n:
            res = distance_to_family(rho, StateFamily.uniform_randomness(n), "trace",
                                     seed=int(rng.integers(2**31)), restarts=restarts, iterations=iterations)
            row["delta_to_uniform"] = res.value
            row["converged"] = res.converged
        rows.append(row)
    return rows


def symmetrized_delta(n: int) -> float:
    """Trace distance from ``rho_n`` to ``I/D (x) I/D``, the minimizer under ``U (x) U`` twirling."""
    d = _register_dim(n)
    return trace_distance(antisymmetric_state(n), np.eye(d * d) / (d * d))


def random_local_basis(n: int, seed: SeedLike = None) -> np.ndarray:
    return haar_unitary(_register_dim(n), seed)
