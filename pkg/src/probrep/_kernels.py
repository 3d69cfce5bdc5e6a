"""Hot inner loops, with a numba path and a pure-numpy path.

The numba path is used when numba imports and ``PROBREP_DISABLE_NUMBA`` is
unset (or ``0``). Both paths are always importable through :data:`NUMBA` and
:data:`NUMPY` so they can be cross-checked and benchmarked against each other.

Kernels
-------
airplane_numerators(n, m_max)
    Exact integer numerators ``N_m`` with
    ``||spectrum(triangular_n) - spectrum(flat_m)||_1 = N_m / (n (n+1) m)``.
max_overlaps(points, probes)
    For every probe, the largest ``|<point|probe>|`` over the points and its index.
covered(points, probes, threshold)
    Whether each probe has overlap ``>= threshold`` with some point (early exit).
greedy_extend(points, count, candidates, threshold, consecutive, max_consecutive)
    Greedy net growth: append each candidate whose overlap with every current
    point is below ``threshold``. Returns ``(count, consecutive)``.
"""

from __future__ import annotations

import os
from types import SimpleNamespace

import numpy as np

# n (n+1) m and the summed numerators must stay inside int64.
AIRPLANE_MAX_N = 2**14


def _airplane_numerators_numpy(n: int, m_max: int) -> np.ndarray:
    out = np.empty(m_max, dtype=np.int64)
    scale = n * (n + 1)
    k = np.arange(max(n, m_max), dtype=np.int64)
    tri = np.zeros(k.size, dtype=np.int64)
    tri[:n] = 2 * (n - k[:n])
    for m in range(1, m_max + 1):
        length = max(n, m)
        flat = np.zeros(length, dtype=np.int64)
        flat[:m] = scale
        out[m - 1] = np.abs(tri[:length] * m - flat).sum()
    return out


def _max_overlaps_numpy(points: np.ndarray, probes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    best = np.zeros(probes.shape[0])
    arg = np.zeros(probes.shape[0], dtype=np.int64)
    chunk = max(1, 2**22 // max(1, points.shape[0]))
    for start in range(0, probes.shape[0], chunk):
        ov = np.abs(probes[start:start + chunk].conj() @ points.T)
        arg[start:start + chunk] = np.argmax(ov, axis=1)
        best[start:start + chunk] = np.take_along_axis(ov, arg[start:start + chunk, None], axis=1)[:, 0]
    return best, arg


def _covered_numpy(points: np.ndarray, probes: np.ndarray, threshold: float) -> np.ndarray:
    best, _ = _max_overlaps_numpy(points, probes)
    return best >= threshold


def _greedy_extend_numpy(points, count, candidates, threshold, consecutive, max_consecutive):
    if count > 0:
        base, _ = _max_overlaps_numpy(points[:count], candidates)
    else:
        base = np.zeros(candidates.shape[0])
    start_count = count
    last = -1
    for j in np.flatnonzero(base < threshold):
        if consecutive + (j - last - 1) >= max_consecutive:
            return count, max_consecutive
        consecutive += j - last - 1
        last = j
        if count > start_count:
            fresh = np.abs(points[start_count:count].conj() @ candidates[j])
            if fresh.max() >= threshold:
                consecutive += 1
                if consecutive >= max_consecutive:
                    return count, consecutive
                continue
        if count == points.shape[0]:
            return count, consecutive
        points[count] = candidates[j]
        count += 1
        consecutive = 0
    consecutive = min(max_consecutive, consecutive + candidates.shape[0] - 1 - last)
    return count, consecutive


NUMPY = SimpleNamespace(
    name="numpy",
    airplane_numerators=_airplane_numerators_numpy,
    max_overlaps=_max_overlaps_numpy,
    covered=_covered_numpy,
    greedy_extend=_greedy_extend_numpy,
)

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

NUMBA = None
if numba is not None:

    @numba.njit(cache=True)
    def _airplane_numerators_numba(n, m_max):
        out = np.empty(m_max, dtype=np.int64)
        scale = n * (n + 1)
        for m in range(1, m_max + 1):
            total = 0
            for k in range(max(n, m)):
                a = 2 * (n - k) * m if k < n else 0
                b = scale if k < m else 0
                total += a - b if a >= b else b - a
            out[m - 1] = total
        return out

    @numba.njit(cache=True)
    def _overlap(p, q):
        re = 0.0
        im = 0.0
        for i in range(p.shape[0]):
            re += p[i].real * q[i].real + p[i].imag * q[i].imag
            im += p[i].real * q[i].imag - p[i].imag * q[i].real
        return np.sqrt(re * re + im * im)

    @numba.njit(cache=True)
    def _max_overlaps_numba(points, probes):
        n, d = points.shape
        pr = np.ascontiguousarray(points.real)
        pi = np.ascontiguousarray(points.imag)
        best = np.zeros(probes.shape[0])
        arg = np.zeros(probes.shape[0], dtype=np.int64)
        for j in range(probes.shape[0]):
            qr = probes[j].real.copy()
            qi = probes[j].imag.copy()
            top = -1.0
            for i in range(n):
                re = 0.0
                im = 0.0
                for k in range(d):
                    re += pr[i, k] * qr[k] + pi[i, k] * qi[k]
                    im += pr[i, k] * qi[k] - pi[i, k] * qr[k]
                sq = re * re + im * im
                if sq > top:
                    top = sq
                    arg[j] = i
            best[j] = np.sqrt(top)
        return best, arg

    @numba.njit(cache=True)
    def _covered_numba(points, probes, threshold):
        n, d = points.shape
        pr = np.ascontiguousarray(points.real)
        pi = np.ascontiguousarray(points.imag)
        t2 = threshold * threshold
        out = np.zeros(probes.shape[0], dtype=np.bool_)
        for j in range(probes.shape[0]):
            qr = probes[j].real.copy()
            qi = probes[j].imag.copy()
            for i in range(n):
                re = 0.0
                im = 0.0
                for k in range(d):
                    re += pr[i, k] * qr[k] + pi[i, k] * qi[k]
                    im += pr[i, k] * qi[k] - pi[i, k] * qr[k]
                if re * re + im * im >= t2:
                    out[j] = True
                    break
        return out

    @numba.njit(cache=True)
    def _greedy_extend_numba(points, count, candidates, threshold, consecutive, max_consecutive):
        for j in range(candidates.shape[0]):
            covered = False
            for i in range(count):
                if _overlap(points[i], candidates[j]) >= threshold:
                    covered = True
                    break
            if covered:
                consecutive += 1
                if consecutive >= max_consecutive:
                    return count, consecutive
            else:
                if count == points.shape[0]:
                    return count, consecutive
                points[count] = candidates[j]
                count += 1
                consecutive = 0
        return count, consecutive

    NUMBA = SimpleNamespace(
        name="numba",
        airplane_numerators=_airplane_numerators_numba,
        max_overlaps=_max_overlaps_numba,
        covered=_covered_numba,
        greedy_extend=_greedy_extend_numba,
    )


def _numba_requested() -> bool:
    return os.environ.get("PROBREP_DISABLE_NUMBA", "").strip().lower() in ("", "0", "false", "no")


ACTIVE = NUMBA if (NUMBA is not None and _numba_requested()) else NUMPY


def airplane_numerators(n: int, m_max: int) -> np.ndarray:
    if not 1 <= n <= AIRPLANE_MAX_N or m_max < 1 or m_max > 8 * AIRPLANE_MAX_N:
        raise ValueError(f"airplane kernel supports 1 <= n <= {AIRPLANE_MAX_N}, got n={n}, m_max={m_max}")
    return ACTIVE.airplane_numerators(int(n), int(m_max))


def max_overlaps(points: np.ndarray, probes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    points = np.ascontiguousarray(points, dtype=np.complex128)
    probes = np.ascontiguousarray(probes, dtype=np.complex128)
    return ACTIVE.max_overlaps(points, probes)


def covered(points: np.ndarray, probes: np.ndarray, threshold: float) -> np.ndarray:
    """Mask of probes whose overlap with some point reaches ``threshold``."""
    points = np.ascontiguousarray(points, dtype=np.complex128)
    probes = np.ascontiguousarray(probes, dtype=np.complex128)
    return ACTIVE.covered(points, probes, float(threshold))


def greedy_extend(points, count, candidates, threshold, consecutive, max_consecutive):
    candidates = np.ascontiguousarray(candidates, dtype=np.complex128)
    count, consecutive = ACTIVE.greedy_extend(
        points, int(count), candidates, float(threshold), int(consecutive), int(max_consecutive)
    )
    return int(count), int(consecutive)
