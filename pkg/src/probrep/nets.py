"""Covering nets of pure states and snap-to-net decoding of measurements.

Two unit vectors are treated as the same ray: the net distance is the
Euclidean distance after the best global phase, ``sqrt(2 - 2|<phi|psi>|)``,
so a probe is covered at radius ``eps`` iff ``|<phi|psi>| >= 1 - eps^2/2``.
"""

from __future__ import annotations

import dataclasses
import io
import math
import os
from pathlib import Path
from typing import Sequence

import numpy as np

from probrep import _kernels
from probrep.operators import (
    Measurement,
    SeedLike,
    as_density_matrix,
    as_povm_element,
    as_pure_state,
    born_rule,
    haar_state,
    trace_norm,
)

MAX_DIM = 64
MIN_EPSILON = 0.05
CERTIFICATE_PROBES = 100_000
MAX_CONSECUTIVE = 10_000


def overlap_threshold(epsilon: float) -> float:
    return 1.0 - epsilon**2 / 2.0


def ray_distance(phi: np.ndarray, psi: np.ndarray) -> float:
    c = min(1.0, abs(np.vdot(phi, psi)))
    return math.sqrt(max(0.0, 2.0 - 2.0 * c))


@dataclasses.dataclass(frozen=True)
class Certificate:
    probes: int
    seed: int
    worst_distance: float
    passed: bool


@dataclasses.dataclass(frozen=True)
class StateNet:
    dim: int
    epsilon: float
    points: np.ndarray  # (count, dim) complex, unit rows
    construction_seed: int
    certificate: Certificate | None = None

    def __post_init__(self):
        pts = np.ascontiguousarray(self.points, dtype=complex)
        if pts.ndim != 2 or pts.shape[1] != self.dim or pts.shape[0] == 0:
            raise ValueError(f"points must have shape (count, {self.dim})")
        if not 0 < self.epsilon <= 2:
            raise ValueError("epsilon must be in (0, 2]")
        if np.max(np.abs(np.linalg.norm(pts, axis=1) - 1)) > 1e-9:
            raise ValueError("net points must be unit vectors")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]

    def nearest(self, vectors: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Index of the nearest point for each row of ``vectors`` and its ray distance."""
        vectors = np.atleast_2d(vectors)
        best, arg = _kernels.max_overlaps(self.points, vectors)
        return arg, np.sqrt(np.clip(2.0 - 2.0 * np.minimum(best, 1.0), 0, None))

    def certify(self, probes: int = CERTIFICATE_PROBES, seed: int = 0) -> Certificate:
        worst = 0.0
        for batch in probe_batches(self.dim, probes, seed):
            _, dist = self.nearest(batch)
            worst = max(worst, float(dist.max()))
        return Certificate(probes, seed, worst, worst <= self.epsilon)

    def to_text(self) -> str:
        out = io.StringIO()
        out.write(f"{self.dim} {float(self.epsilon)!r} {self.construction_seed}\n")
        for p in self.points:
            out.write(" ".join(f"{float(z.real)!r} {float(z.imag)!r}" for z in p))
            out.write("\n")
        return out.getvalue()

    @classmethod
    def from_text(cls, text: str) -> "StateNet":
        lines = text.strip("\n").split("\n")
        dim_s, eps_s, seed_s = lines[0].split()
        dim = int(dim_s)
        rows = []
        for line in lines[1:]:
            vals = [float(v) for v in line.split()]
            if len(vals) != 2 * dim:
                raise ValueError(f"expected {2 * dim} numbers per line, got {len(vals)}")
            rows.append(np.array(vals[0::2]) + 1j * np.array(vals[1::2]))
        return cls(dim, float(eps_s), np.array(rows), int(seed_s))

    def save(self, path: str | os.PathLike) -> None:
        path = Path(path)
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(self.to_text(), encoding="utf-8")
        os.replace(tmp, path)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "StateNet":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))


class _Buffer:
    def __init__(self, dim: int, capacity: int = 1024):
        self.points = np.zeros((capacity, dim), complex)
        self.count = 0

    def grow(self):
        bigger = np.zeros((2 * self.points.shape[0], self.points.shape[1]), complex)
        bigger[: self.count] = self.points[: self.count]
        self.points = bigger

    def extend(self, candidates, threshold, consecutive, max_consecutive):
        while True:
            self.count, consecutive = _kernels.greedy_extend(
                self.points, self.count, candidates, threshold, consecutive, max_consecutive
            )
            if self.count < self.points.shape[0] or consecutive >= max_consecutive:
                return consecutive
            # Full: the kernel stopped early. Re-run on the same batch; accepted
            # candidates are now covered and count as rejections, so reset the streak.
            self.grow()
            consecutive = 0


def build_net(
    dim: int,
    epsilon: float,
    seed: int,
    *,
    max_consecutive: int = MAX_CONSECUTIVE,
    probes: int = CERTIFICATE_PROBES,
    repair_rounds: int = 20,
    densify_factor: int = 10,
    batch: int = 4096,
    max_points: int = 2_000_000,
    seed_points: np.ndarray | None = None,
) -> StateNet:
    """Greedy net: accept Haar-random states farther than ``epsilon`` from every point.

    Growth stops after ``max_consecutive`` rejections in a row. A covering
    certificate over ``probes`` fresh random states follows. When it fails, the
    uncovered probes are added, a pool of ``densify_factor * probes`` states is
    swept for further holes, and a fresh certificate is drawn, up to
    ``repair_rounds`` times.
    ``seed_points`` start the net (used for nested nets).
    """
    if not 1 <= dim <= MAX_DIM:
        raise ValueError(f"dim must be in 1..{MAX_DIM}")
    if not MIN_EPSILON <= epsilon <= 2:
        raise ValueError(f"epsilon must be in [{MIN_EPSILON}, 2]")
    ss = np.random.SeedSequence(seed)
    grow_ss, cert_ss = ss.spawn(2)
    rng = np.random.default_rng(grow_ss)
    threshold = overlap_threshold(epsilon)
    buf = _Buffer(dim)
    if seed_points is not None:
        seed_points = np.atleast_2d(np.asarray(seed_points, complex))
        while buf.points.shape[0] < seed_points.shape[0]:
            buf.grow()
        buf.points[: seed_points.shape[0]] = seed_points
        buf.count = seed_points.shape[0]
    if dim == 1:
        if buf.count == 0:
            buf.points[0] = 1.0
            buf.count = 1
    else:
        consecutive = 0
        while consecutive < max_consecutive:
            consecutive = buf.extend(haar_state(dim, rng, count=batch), threshold, consecutive, max_consecutive)
            if buf.count > max_points:
                raise RuntimeError(f"net exceeded {max_points} points before growth stopped")

    cert_rng = np.random.default_rng(cert_ss)
    for _ in range(repair_rounds + 1):
        cert_seed = int(cert_rng.integers(2**63))
        net = StateNet(dim, epsilon, buf.points[: buf.count].copy(), seed)
        failing = _uncovered_probes(net, probes, cert_seed)
        if failing.shape[0] == 0:
            cert = Certificate(probes, cert_seed, _worst(net, probes, cert_seed), True)
            return dataclasses.replace(net, certificate=cert)
        # Holes exist: patch them, then sweep a larger pool so the next certificate is not a coin flip.
        buf.extend(failing, threshold, 0, failing.shape[0] + 1)
        net = StateNet(dim, epsilon, buf.points[: buf.count].copy(), seed)
        pool = _uncovered_probes(net, densify_factor * probes, int(rng.integers(2**63)))
        buf.extend(pool, threshold, 0, pool.shape[0] + 1)
    raise RuntimeError(f"covering certificate still failing after {repair_rounds} repair rounds")


def probe_batches(dim: int, probes: int, seed: int, chunk: int = 50_000):
    """Seeded Haar-random probe states in fixed-size batches."""
    rng = np.random.default_rng(seed)
    for start in range(0, probes, chunk):
        yield haar_state(dim, rng, count=min(chunk, probes - start))


def _uncovered_probes(net: StateNet, probes: int, seed: int) -> np.ndarray:
    threshold = overlap_threshold(net.epsilon)
    out = []
    for batch in probe_batches(net.dim, probes, seed):
        out.append(batch[~_kernels.covered(net.points, batch, threshold)])
    return np.concatenate(out) if out else np.zeros((0, net.dim), complex)


def _worst(net: StateNet, probes: int, seed: int) -> float:
    return net.certify(probes, seed).worst_distance


def net_size_bound(dim: int, epsilon: float) -> float:
    return (1 + 2 / epsilon) ** (2 * dim)


def log2_net_size_bound(dim: int, epsilon: float) -> float:
    return 2 * dim * math.log2(1 + 2 / epsilon)


def pure_norm_conversion_check(phi: np.ndarray, psi: np.ndarray) -> tuple[float, float]:
    """``(|| |phi><phi| - |psi><psi| ||_1, 2 ||phi - psi||)`` for the given representatives."""
    phi = as_pure_state(phi)
    psi = as_pure_state(psi)
    if phi.shape != psi.shape:
        raise ValueError("dimension mismatch")
    lhs = trace_norm(np.outer(phi, phi.conj()) - np.outer(psi, psi.conj()))
    return lhs, 2.0 * float(np.linalg.norm(phi - psi))


def _snap(e: np.ndarray, net: StateNet) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Eigenvalues, nearest-point indices and the snapped operator."""
    if e.shape[0] != net.dim:
        raise ValueError(f"element dim {e.shape[0]} does not match net dim {net.dim}")
    vals, vecs = np.linalg.eigh(e)
    vals = np.clip(vals, 0, None)
    idx, _ = net.nearest(vecs.T)
    pts = net.points[idx]
    approx = (pts.T * vals) @ pts.conj()
    return vals, idx, approx


def snap_element(e: np.ndarray, net: StateNet) -> tuple[np.ndarray, float]:
    """Replace each eigenvector by its nearest net point; bound ``2 eps tr(E)`` on the trace-norm error."""
    e = as_povm_element(e)
    _, _, approx = _snap(e, net)
    return approx, 2.0 * net.epsilon * float(np.trace(e).real)


def product_snap_element(ea: np.ndarray, eb: np.ndarray, net_a: StateNet, net_b: StateNet) -> tuple[np.ndarray, float]:
    """Snap both factors of ``E_A (x) E_B``; bound ``2 (eps_A + eps_B) tr(E_A) tr(E_B)``."""
    ea = as_povm_element(ea)
    eb = as_povm_element(eb)
    _, _, a = _snap(ea, net_a)
    _, _, b = _snap(eb, net_b)
    bound = 2.0 * (net_a.epsilon + net_b.epsilon) * float(np.trace(ea).real * np.trace(eb).real)
    return np.kron(a, b), bound


@dataclasses.dataclass(frozen=True)
class DecodingOperation:
    """Conic combinations of source-element probabilities, one per outcome.

    ``coefficients[(outcome, index)]`` weights ``tr(source_elements[index] rho)``.
    """

    source_elements: tuple[np.ndarray, ...]
    coefficients: dict
    outcomes: int

    def __post_init__(self):
        for (k, i), w in self.coefficients.items():
            if w < 0:
                raise ValueError("decoding coefficients must be nonnegative")
            if not (0 <= k < self.outcomes and 0 <= i < len(self.source_elements)):
                raise ValueError(f"coefficient key {(k, i)} out of range")

    def apply(self, source_values: Sequence[float]) -> np.ndarray:
        out = np.zeros(self.outcomes)
        for (k, i), w in self.coefficients.items():
            out[k] += w * source_values[i]
        return out

    def source_values(self, rho: np.ndarray) -> np.ndarray:
        return np.array([float(np.trace(e @ rho).real) for e in self.source_elements])


def build_decoder(m: Measurement, net: StateNet) -> DecodingOperation:
    """Decoder over the unit effect and the net projectors ``|p><p|`` that eigenvectors snap to.

    Each element is split as ``lambda_min I + (E - lambda_min I)``; the identity
    part is read off exactly from ``tr(rho) = 1`` and only the rest is snapped,
    which keeps the error within ``2 eps tr(E - lambda_min I) <= 2 eps tr(E)``.
    """
    used: dict[int, int] = {}
    coefficients: dict[tuple[int, int], float] = {}
    for k, e in enumerate(m.elements):
        floor = max(0.0, float(np.linalg.eigvalsh(e)[0]))
        if floor > 0:
            coefficients[(k, 0)] = floor
        vals, idx, _ = _snap(e - floor * np.eye(net.dim), net)
        for lam, i in zip(vals, idx):
            if lam <= 0:
                continue
            j = used.setdefault(int(i), len(used) + 1)
            coefficients[(k, j)] = coefficients.get((k, j), 0.0) + float(lam)
    sources = [np.eye(net.dim, dtype=complex)] + [None] * len(used)
    for i, j in used.items():
        p = net.points[i]
        sources[j] = np.outer(p, p.conj())
    return DecodingOperation(tuple(sources), coefficients, len(m))


def decode_measurement(m: Measurement, net: StateNet, rho: np.ndarray) -> tuple[np.ndarray, float]:
    """Decoded outcome distribution and its largest per-outcome deviation from the Born rule."""
    rho = as_density_matrix(rho)
    decoder = build_decoder(m, net)
    decoded = decoder.apply(decoder.source_values(rho))
    return decoded, float(np.max(np.abs(decoded - born_rule(m, rho))))


def decoding_bounds(m: Measurement, net: StateNet) -> np.ndarray:
    """Per-outcome error bounds ``2 eps tr(E_k)``."""
    return 2.0 * net.epsilon * np.einsum("kii->k", m.elements).real


def entropy_budget(kind: str, n: int) -> float:
    """Decoder input size: ``n 2^{n+3}`` for all measurements, ``(2n+2) 2^{(n+1)/2+2}`` for product ones."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if kind == "all":
        return float(n * 2 ** (n + 3))
    if kind == "product":
        return float((2 * n + 2) * 2 ** ((n + 1) / 2 + 2))
    raise ValueError(f"unknown budget kind {kind!r}")


def product_budget_rate(n: int) -> float:
    """``eps_n = (2n+2) 2^{-(n-1)/2+2}``, so that the product budget is at most ``eps_n 2^n``."""
    return float((2 * n + 2) * 2 ** (-(n - 1) / 2 + 2))
