"""Concentration of ``|<psi|U rho U^dagger|psi> - 1/d|`` over Haar-random unitaries.

A random ``U`` scrambles ``rho`` so that every element of a finite family of
POVM elements sees almost the maximally mixed state. The pieces here are the
deviation functions, their Lipschitz constant, the Haar average bound, the
per-element thresholds and a seeded search for a unitary meeting all of them.
"""

from __future__ import annotations

import dataclasses
from typing import Sequence

import numpy as np
from scipy import linalg as sla

from probrep.operators import (
    SeedLike,
    as_density_matrix,
    as_hermitian,
    as_povm_element,
    as_pure_state,
    haar_state,
    haar_unitaries,
    haar_unitary,
    random_hermitian,
    random_povm_element,
    rng_from,
)
from probrep.spectral import triangular_state


def min_entropy(rho: np.ndarray) -> float:
    top = float(np.linalg.eigvalsh(as_density_matrix(rho))[-1])
    return float(-np.log2(top))


def d_psi(u: np.ndarray, psi: np.ndarray, rho: np.ndarray) -> float:
    d = rho.shape[0]
    if u.shape != (d, d) or psi.shape != (d,):
        raise ValueError("U, psi and rho must share one dimension")
    phi = u.conj().T @ psi
    return abs(float((phi.conj() @ rho @ phi).real) - 1.0 / d)


def d_effect(u: np.ndarray, e: np.ndarray, rho: np.ndarray) -> float:
    """``sum_j p_j d_psi(U, psi_j, rho)`` over the eigendecomposition ``E = sum_j p_j |psi_j><psi_j|``."""
    vals, vecs = np.linalg.eigh(as_hermitian(e, tol=1e-10))
    d = rho.shape[0]
    if vecs.shape[0] != d or u.shape != (d, d):
        raise ValueError("dimension mismatch")
    phis = u.conj().T @ vecs
    overlaps = np.einsum("ij,ik,kj->j", phis.conj(), rho, phis).real
    return float(np.sum(np.clip(vals, 0, None) * np.abs(overlaps - 1.0 / d)))


def lipschitz_constant(rho: np.ndarray) -> float:
    """Frobenius-norm Lipschitz constant ``2^{-H_min + 3/2}`` of ``U -> d_psi(U, psi, rho)``."""
    return float(2 ** (-min_entropy(rho) + 1.5))


def lipschitz_audit(rho: np.ndarray, trials: int, seed: SeedLike = None, *, nearby_fraction: float = 0.5) -> float:
    """Worst observed ``|D(U) - D(U')| / (L ||U - U'||_2)`` over random pairs.

    A ``nearby_fraction`` of the pairs uses ``U' = U exp(i t H)`` with small
    ``t``, where difference quotients are largest; the rest are independent.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rho = as_density_matrix(rho)
    d = rho.shape[0]
    bound = lipschitz_constant(rho)
    rng = rng_from(seed)
    worst = 0.0
    for t in range(trials):
        u = haar_unitary(d, rng)
        if t < nearby_fraction * trials:
            h = random_hermitian(d, rng)
            v = u @ sla.expm(1j * rng.uniform(1e-4, 1e-1) * h / np.linalg.norm(h))
        else:
            v = haar_unitary(d, rng)
        psi = haar_state(d, rng)
        dist = np.linalg.norm(u - v)
        if dist == 0:
            continue
        worst = max(worst, abs(d_psi(u, psi, rho) - d_psi(v, psi, rho)) / (bound * dist))
    return worst


def haar_average_bound(rho: np.ndarray) -> float:
    """``2^{-log2 d - H_min/2} = sqrt(lambda_max) / d``."""
    rho = as_density_matrix(rho)
    return float(np.sqrt(np.linalg.eigvalsh(rho)[-1]) / rho.shape[0])


def haar_average_mc(psi: np.ndarray, rho: np.ndarray, samples: int, seed: SeedLike = None,
                    chunk: int = 2048) -> tuple[float, float]:
    """Monte-Carlo mean and standard error of ``d_psi(U, psi, rho)`` over Haar ``U``."""
    if samples < 100:
        raise ValueError("samples must be >= 100")
    psi = as_pure_state(psi)
    rho = as_density_matrix(rho)
    d = rho.shape[0]
    rng = rng_from(seed)
    values = np.empty(samples)
    for start in range(0, samples, chunk):
        count = min(chunk, samples - start)
        us = haar_unitaries(d, count, rng)
        phis = np.einsum("kji,j->ki", us.conj(), psi)
        values[start:start + count] = np.abs(np.einsum("ki,ij,kj->k", phis.conj(), rho, phis).real - 1.0 / d)
    return float(values.mean()), float(values.std(ddof=1) / np.sqrt(samples))


def delta_n(n: int, net_size: int) -> float:
    if net_size < 1:
        raise ValueError("net_size must be >= 1")
    return float(np.sqrt(768 * (1 + np.log(net_size)) / 2**n))


def scramble_threshold(e: np.ndarray, n: int, net_size: int) -> float:
    """``2^-n tr(E) (2^{(1-n)/2} + delta_n)``."""
    return float(2.0**-n * np.trace(e).real * (2 ** ((1 - n) / 2) + delta_n(n, net_size)))


def default_eta(n: int) -> float:
    return 2.0 ** (-n + 3)


def scramble_distance_bound(n: int, net_size: int, eta: float | None = None) -> float:
    """``3 eta + sqrt(2) 2^{-n/2} + delta_n``."""
    eta = default_eta(n) if eta is None else eta
    return float(3 * eta + np.sqrt(2) * 2 ** (-n / 2) + delta_n(n, net_size))


def compress(e: np.ndarray, dim: int) -> np.ndarray:
    """Top-left ``dim x dim`` block, i.e. ``P E P`` restricted to the first ``dim`` levels."""
    e = np.asarray(e)
    if e.shape[0] < dim:
        raise ValueError(f"element of dim {e.shape[0]} is smaller than {dim}")
    return e[:dim, :dim]


def random_product_elements(n: int, count: int, seed: SeedLike = None) -> list[np.ndarray]:
    """``E_A (x) E_B`` on ``2^{floor(n/2)} x 2^{ceil(n/2)}`` levels."""
    rng = rng_from(seed)
    da, db = 2 ** (n // 2), 2 ** (n - n // 2)
    return [np.kron(random_povm_element(da, rng), random_povm_element(db, rng)) for _ in range(count)]


@dataclasses.dataclass(frozen=True)
class ScrambleReport:
    n: int
    dim: int
    tries: int
    found: bool
    unitary_seed: int
    max_ratio: float
    d_bound: float
    successes: int = 0
    evaluated: int = 0

    def __post_init__(self):
        if self.found and self.max_ratio > 1:
            raise ValueError("a found unitary must meet every threshold")

    @property
    def success_rate(self) -> float:
        return self.successes / self.evaluated if self.evaluated else float("nan")


def try_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def element_ratios(u: np.ndarray, net: Sequence[np.ndarray], rho: np.ndarray, n: int) -> np.ndarray:
    """``D_E(U) / threshold(E)`` for each element; elements with zero trace give 0."""
    ratios = np.zeros(len(net))
    for i, e in enumerate(net):
        thr = scramble_threshold(e, n, len(net))
        ratios[i] = d_effect(u, e, rho) / thr if thr > 0 else 0.0
    return ratios


def scramble_search(n: int, net: Sequence[np.ndarray], max_tries: int, seed: int, *, eta: float | None = None,
                    scan_all: bool = False) -> ScrambleReport:
    """Draw Haar unitaries until one meets every element's threshold against the triangular state.

    Try ``t`` uses the unitary seeded by ``try_seed(seed, t)``. With
    ``scan_all`` every try is evaluated and the empirical success rate recorded.
    """
    if max_tries < 1:
        raise ValueError("max_tries must be >= 1")
    dim = 2**n
    elements = [as_povm_element(compress(e, dim)) for e in net]
    rho = triangular_state(dim)
    bound = scramble_distance_bound(n, max(1, len(elements)), eta)
    first = None
    best_ratio, best_seed = np.inf, try_seed(seed, 0)
    successes = evaluated = 0
    for t in range(max_tries):
        useed = try_seed(seed, t)
        u = haar_unitary(dim, useed)
        ratio = float(element_ratios(u, elements, rho, n).max()) if elements else 0.0
        evaluated += 1
        if ratio <= 1:
            successes += 1
            if first is None:
                first = (t + 1, useed, ratio)
                if not scan_all:
                    break
        if ratio < best_ratio:
            best_ratio, best_seed = ratio, useed
    if first is not None:
        tries, useed, ratio = first
        return ScrambleReport(n, dim, tries, True, useed, ratio, bound, successes, evaluated)
    return ScrambleReport(n, dim, max_tries, False, best_seed, best_ratio, bound, successes, evaluated)
