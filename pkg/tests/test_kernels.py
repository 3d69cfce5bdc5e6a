import os
import subprocess
import sys

import numpy as np
import pytest

from probrep import _kernels
from probrep.operators import haar_state

needs_numba = pytest.mark.skipif(_kernels.NUMBA is None, reason="numba not installed")


def brute_airplane(n, m):
    # Independent integer oracle: |2(n-k) m - n(n+1) [k < m]| summed over every level.
    return sum(abs((2 * (n - k) * m if k < n else 0) - (n * (n + 1) if k < m else 0)) for k in range(max(n, m)))


@pytest.mark.parametrize("impl", ["numpy", "numba"])
def test_airplane_numerators_match_oracle(impl):
    kern = _kernels.NUMPY if impl == "numpy" else _kernels.NUMBA
    if kern is None:
        pytest.skip("numba not installed")
    for n in (1, 2, 5, 16, 33):
        got = kern.airplane_numerators(n, 4 * n)
        assert [int(x) for x in got] == [brute_airplane(n, m) for m in range(1, 4 * n + 1)]


@needs_numba
def test_numba_and_numpy_agree_on_overlaps():
    pts = haar_state(3, 1, count=200)
    probes = haar_state(3, 2, count=3000)
    b1, a1 = _kernels.NUMBA.max_overlaps(pts, probes)
    b2, a2 = _kernels.NUMPY.max_overlaps(pts, probes)
    assert np.allclose(b1, b2, atol=1e-12)
    assert np.mean(a1 == a2) > 0.999
    c1 = _kernels.NUMBA.covered(pts, probes, 0.97)
    c2 = _kernels.NUMPY.covered(pts, probes, 0.97)
    assert np.mean(c1 == c2) > 0.999


@needs_numba
@pytest.mark.parametrize("count", [0, 5])
def test_numba_and_numpy_greedy_agree(count):
    cands = haar_state(2, 9, count=2000)
    out = []
    for kern in (_kernels.NUMBA, _kernels.NUMPY):
        pts = np.zeros((400, 2), complex)
        pts[:count] = haar_state(2, 3, count=count) if count else pts[:0]
        c, cons = kern.greedy_extend(pts, count, cands, 0.95, 0, 300)
        out.append((c, cons, pts[:c].copy()))
    assert out[0][0] == out[1][0] and out[0][1] == out[1][1]
    assert np.allclose(out[0][2], out[1][2])


def test_greedy_stops_at_capacity_and_on_streak():
    cands = haar_state(2, 5, count=500)
    pts = np.zeros((3, 2), complex)
    count, _ = _kernels.greedy_extend(pts, 0, cands, 0.999, 0, 10)
    assert count == 3
    pts = np.zeros((100, 2), complex)
    pts[0] = cands[0]
    count, cons = _kernels.greedy_extend(pts, 1, np.repeat(cands[:1], 20, axis=0), 0.9, 0, 10)
    assert count == 1 and cons == 10


def test_airplane_kernel_limits():
    with pytest.raises(ValueError):
        _kernels.airplane_numerators(0, 4)
    with pytest.raises(ValueError):
        _kernels.airplane_numerators(_kernels.AIRPLANE_MAX_N + 1, 4)


def test_env_flag_selects_numpy_path():
    code = "from probrep import _kernels; print(_kernels.ACTIVE.name)"
    env = dict(os.environ, PROBREP_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
    env["PROBREP_DISABLE_NUMBA"] = "0"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == ("numba" if _kernels.NUMBA is not None else "numpy")
