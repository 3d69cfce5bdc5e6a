from fractions import Fraction

import numpy as np
import pytest

from probrep.antisymmetric import (
    antisymmetric_state,
    conditional_state,
    product_basis_distribution,
    product_representation_gap,
    product_representation_gap_exact,
    random_local_basis,
    robustness_gap_table,
    swap_operator,
    symmetrized_delta,
    uniform_product,
)
from probrep.metrics import StateFamily, distance_to_family, trace_distance
from probrep.operators import haar_state, haar_unitary

HADAMARD = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


def pair_sum_oracle(n):
    # Normalized sum of |uv - vu><uv - vu|/2 over u < v.
    d = 2**n
    acc = np.zeros((d * d, d * d))
    for u in range(d):
        for v in range(u + 1, d):
            w = np.zeros(d * d)
            w[u * d + v], w[v * d + u] = 1, -1
            acc += np.outer(w, w) / 2
    return acc / np.trace(acc)


def brute_gap_oracle(n):
    d = 2**n
    total = Fraction(0)
    for x in range(d):
        for y in range(d):
            p = Fraction(0) if x == y else Fraction(1, d * (d - 1))
            total += abs(p - Fraction(1, d * d))
    return total / 2


@pytest.mark.parametrize("n", [1, 2, 3])
def test_state_matches_pair_sum(n):
    assert np.allclose(antisymmetric_state(n), pair_sum_oracle(n), atol=1e-14)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_state_basics(n):
    rho = antisymmetric_state(n)
    d = 2**n
    assert np.trace(rho).real == pytest.approx(1, abs=1e-12)
    assert np.linalg.matrix_rank(rho, tol=1e-10) == d * (d - 1) // 2
    swap = swap_operator(d)
    assert np.trace(swap @ rho).real == pytest.approx(-1, abs=1e-12)


def test_singlet_and_limits():
    s = np.array([0, 1, -1, 0]) / np.sqrt(2)
    assert np.allclose(antisymmetric_state(1), np.outer(s, s))
    with pytest.raises(ValueError):
        antisymmetric_state(6)
    with pytest.raises(ValueError):
        antisymmetric_state(0)


@pytest.mark.parametrize("u", [np.eye(2), HADAMARD])
def test_distribution_n1_examples(u):
    assert np.allclose(product_basis_distribution(1, u), [0, 0.5, 0.5, 0], atol=1e-15)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_distribution_matches_closed_form_for_random_bases(n):
    d = 2**n
    expected = (1 - np.eye(d)).ravel() / (d * (d - 1))
    rng = np.random.default_rng(n)
    for _ in range(100 if n < 5 else 20):
        p = product_basis_distribution(n, haar_unitary(d, rng))
        assert np.max(np.abs(p - expected)) < 1e-10


def test_distribution_invariant_under_left_multiplication():
    rng = np.random.default_rng(2)
    u = haar_unitary(4, rng)
    base = product_basis_distribution(2, u)
    for _ in range(100):
        assert np.allclose(product_basis_distribution(2, haar_unitary(4, rng) @ u), base, atol=1e-10)


def test_state_commutes_with_local_unitaries():
    rho = antisymmetric_state(2)
    rng = np.random.default_rng(3)
    for _ in range(20):
        u = haar_unitary(4, rng)
        uu = np.kron(u, u)
        assert np.max(np.abs(uu @ rho - rho @ uu)) < 1e-10


def test_distribution_rejects_non_unitary():
    with pytest.raises(ValueError):
        product_basis_distribution(1, np.ones((2, 2)))


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_gap_closed_form(n):
    assert product_representation_gap_exact(n) == brute_gap_oracle(n) == Fraction(1, 2**n)
    assert product_representation_gap(n) == pytest.approx(2.0**-n, abs=1e-12)
    u = random_local_basis(n, n)
    assert product_representation_gap(n, u) == pytest.approx(2.0**-n, abs=1e-12)


def test_uniform_product_is_normalized():
    assert uniform_product(3).sum() == pytest.approx(1)


def test_conditional_state_examples():
    assert np.allclose(conditional_state(1, np.array([1.0, 0])), np.diag([0, 1]))
    assert np.allclose(conditional_state(2, np.eye(4)[0]), np.diag([0, 1 / 3, 1 / 3, 1 / 3]))
    with pytest.raises(ValueError):
        conditional_state(2, np.array([1.0, 0]))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_conditional_state_formula(n):
    d = 2**n
    x = haar_state(d, 10 + n)
    cond = conditional_state(n, x)
    expected = (np.eye(d) - np.outer(x, x.conj())) / (d - 1)
    assert np.allclose(cond, expected, atol=1e-12)
    assert trace_distance(cond, np.eye(d) / d) == pytest.approx(2.0**-n, abs=1e-12)


@pytest.mark.parametrize("n, value", [(1, 0.75), (2, 0.625), (3, 0.5625)])
def test_symmetrized_delta(n, value):
    # Oracle: twirl reduces the minimizer to I/d, leaving trace distance (d+1)/(2d).
    d = 2**n
    assert symmetrized_delta(n) == pytest.approx((d + 1) / (2 * d), abs=1e-12) == value


@pytest.mark.parametrize("n", [1, 2])
def test_delta_floor(n):
    res = distance_to_family(antisymmetric_state(n), StateFamily.uniform_randomness(n), seed=n)
    assert res.value >= 0.25 - 1e-6
    assert res.value == pytest.approx(symmetrized_delta(n), abs=1e-3)


def test_gap_table():
    rows = robustness_gap_table(3, seed=7, restarts=4, iterations=300)
    assert [r["n"] for r in rows] == [1, 2, 3]
    for r in rows:
        assert r["gap"] == 2.0 ** -r["n"]
        assert r["d_product"] == pytest.approx(r["gap"], abs=1e-9)
        assert r["delta_to_uniform"] >= 0.25
    assert rows[0]["delta_to_uniform"] == pytest.approx(0.75, abs=1e-3)
    rows = robustness_gap_table(4, seed=7, delta_max_n=1, restarts=2, iterations=100)
    assert rows[3]["delta_to_uniform"] is None and rows[3]["gap"] == 1 / 16
