import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from probrep._config import TOL, tolerances
from probrep.operators import (
    Measurement,
    as_density_matrix,
    as_hermitian,
    born_rule,
    check_probability_vector,
    gentle_measurement_check,
    haar_state,
    haar_unitary,
    partial_trace,
    pos_neg_parts,
    random_density_matrix,
    random_hermitian,
    random_measurement,
    restrict_measurement,
    spectrum,
    tensor,
    trace_norm,
)

SINGLET = np.array([0, 1, -1, 0]) / np.sqrt(2)
seeds = st.integers(0, 2**32 - 1)


def test_spectrum_examples():
    assert np.allclose(spectrum(np.eye(2)), [1, 1])
    assert np.allclose(spectrum(np.diag([0.1, 0.3, 0.4, 0.2])), [0.4, 0.3, 0.2, 0.1])


def test_spectrum_rejects_bad_input():
    with pytest.raises(ValueError):
        spectrum(np.array([[np.nan, 0], [0, 1]]))
    with pytest.raises(ValueError):
        spectrum(np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValueError):
        spectrum(np.ones((2, 3)))


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(1, 8))
def test_spectrum_unitary_invariance(seed, dim):
    rng = np.random.default_rng(seed)
    a = random_hermitian(dim, rng)
    u = haar_unitary(dim, rng)
    assert np.allclose(spectrum(a), spectrum(u @ a @ u.conj().T), atol=1e-9)


def test_trace_norm_examples():
    assert trace_norm(np.zeros((3, 3))) == 0
    assert trace_norm(np.diag([1.0, -1.0])) == pytest.approx(2)
    singlet = np.outer(SINGLET, SINGLET)
    assert trace_norm(singlet - np.eye(4) / 4) == pytest.approx(1.5, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(1, 6), st.floats(-3, 3))
def test_trace_norm_is_a_norm(seed, dim, c):
    rng = np.random.default_rng(seed)
    a, b = random_hermitian(dim, rng), random_hermitian(dim, rng)
    assert trace_norm(a + b) <= trace_norm(a) + trace_norm(b) + 1e-9
    assert trace_norm(c * a) == pytest.approx(abs(c) * trace_norm(a), abs=1e-9)


def test_pos_neg_parts_examples():
    plus, minus = pos_neg_parts(np.diag([1.0, -2.0]))
    assert np.allclose(plus, np.diag([1, 0])) and np.allclose(minus, np.diag([0, -2]))
    rho = random_density_matrix(3, 0)
    plus, minus = pos_neg_parts(rho)
    assert np.allclose(plus, rho) and np.allclose(minus, 0)


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(1, 8))
def test_pos_neg_parts_properties(seed, dim):
    a = random_hermitian(dim, seed)
    plus, minus = pos_neg_parts(a)
    assert np.allclose(plus + minus, a, atol=1e-10)
    assert np.linalg.eigvalsh(plus)[0] >= -1e-10
    assert np.linalg.eigvalsh(minus)[-1] <= 1e-10
    assert np.max(np.abs(plus @ minus)) < 1e-10
    assert trace_norm(a) == pytest.approx(np.trace(plus).real - np.trace(minus).real, abs=1e-10)


def test_born_rule_examples():
    assert np.allclose(born_rule(Measurement.computational(2), np.diag([1.0, 0])), [1, 0])
    singlet = np.outer(SINGLET, SINGLET)
    assert np.allclose(born_rule(Measurement.computational(4), singlet), [0, 0.5, 0.5, 0], atol=1e-15)
    with pytest.raises(ValueError):
        born_rule(Measurement.computational(2), np.eye(3))


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(1, 6), st.integers(1, 5))
def test_born_rule_sums_to_trace(seed, dim, outcomes):
    rng = np.random.default_rng(seed)
    m = random_measurement(dim, outcomes, rng)
    a = random_hermitian(dim, rng)
    assert born_rule(m, a).sum() == pytest.approx(np.trace(a).real, abs=1e-10)
    traceless = a - np.trace(a).real / dim * np.eye(dim)
    assert abs(born_rule(m, traceless).sum()) < 1e-10
    p = born_rule(m, random_density_matrix(dim, rng))
    check_probability_vector(p)


def test_probability_vector_checks():
    check_probability_vector([0.5, 0.5])
    with pytest.raises(ValueError):
        check_probability_vector([1.5, -0.5])
    with pytest.raises(ValueError):
        check_probability_vector([0.5, 0.4])
    check_probability_vector([1.5, -0.5], signed=True)


def test_measurement_validation():
    with pytest.raises(ValueError):
        Measurement(np.stack([np.eye(2), np.eye(2)]))
    with pytest.raises(ValueError):
        Measurement(np.stack([np.diag([2.0, 0]), np.diag([-1.0, 1])]))
    m = Measurement.computational(3)
    with pytest.raises(ValueError):
        m.elements[0, 0, 0] = 5
    assert len(m) == 3 and m.dim == 3


def test_tensor_examples():
    assert np.allclose(tensor(np.eye(2), np.eye(3)), np.eye(6))
    p = tensor(np.diag([1.0, 0]), np.diag([0, 1.0]))
    expected = np.zeros((4, 4))
    expected[1, 1] = 1
    assert np.allclose(p, expected)


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(1, 4), st.integers(1, 4))
def test_tensor_trace_multiplicative(seed, da, db):
    rng = np.random.default_rng(seed)
    a, b = random_hermitian(da, rng), random_hermitian(db, rng)
    assert np.trace(tensor(a, b)).real == pytest.approx(np.trace(a).real * np.trace(b).real, abs=1e-10)
    prod = tensor(a, b)
    assert np.allclose(partial_trace(prod, (da, db), 0), a * np.trace(b))
    assert np.allclose(partial_trace(prod, (da, db), 1), b * np.trace(a))


def test_haar_unitary_basics():
    u1 = haar_unitary(1, 3)
    assert abs(abs(u1[0, 0]) - 1) < 1e-12
    assert np.array_equal(haar_unitary(5, 11), haar_unitary(5, 11))
    u = haar_unitary(6, 2)
    assert np.allclose(u.conj().T @ u, np.eye(6), atol=1e-10)


@pytest.mark.parametrize("dim", [2, 4, 7])
def test_haar_first_entry_matches_beta(dim):
    # |<0|U|0>|^2 for Haar U is Beta(1, dim-1); the oracle samples Gaussian vectors separately.
    rng = np.random.default_rng(100 + dim)
    x = np.array([abs(haar_unitary(dim, rng)[0, 0]) ** 2 for _ in range(10_000)])
    assert stats.kstest(x, stats.beta(1, dim - 1).cdf).pvalue > 0.01
    g = haar_state(dim, rng, count=10_000)
    assert stats.ks_2samp(x, np.abs(g[:, 0]) ** 2).pvalue > 0.01


def test_haar_left_invariance_statistically():
    rng = np.random.default_rng(7)
    v = haar_unitary(3, 99)
    x = np.array([abs((v @ haar_unitary(3, rng))[0, 0]) ** 2 for _ in range(5000)])
    assert stats.kstest(x, stats.beta(1, 2).cdf).pvalue > 0.01


def test_density_matrix_validation_and_clamp():
    with pytest.raises(ValueError):
        as_density_matrix(np.diag([0.5, 0.6]))
    with pytest.raises(ValueError):
        as_density_matrix(np.diag([1.1, -0.1]))
    rho = as_density_matrix(np.diag([1 + 5e-11, -5e-11]))
    assert np.linalg.eigvalsh(rho)[0] >= 0
    with pytest.raises(ValueError):
        as_hermitian(np.array([[1, 1e-6], [0, 1]]))


def test_tolerance_override_restores():
    before = TOL.constraint
    with tolerances(constraint=1e-3):
        as_density_matrix(np.diag([1 + 1e-4, 0]))
    assert TOL.constraint == before
    with pytest.raises(AttributeError):
        with tolerances(nonsense=1):
            pass


def test_restrict_measurement_examples():
    m = random_measurement(3, 4, 1)
    assert np.allclose(restrict_measurement(m, np.eye(3)).elements, m.elements)
    pi = np.diag([0, 1.0, 0])
    r = restrict_measurement(m, pi)
    assert r.dim == 1 and np.all(r.elements.real >= 0) and r.elements.sum().real == pytest.approx(1)
    with pytest.raises(ValueError):
        restrict_measurement(m, np.diag([0.5, 1, 0]))


def test_restrict_measurement_matches_compressed_state():
    rng = np.random.default_rng(4)
    m = random_measurement(4, 3, rng)
    v = haar_unitary(4, rng)[:, :2]
    pi = v @ v.conj().T
    sub = random_density_matrix(2, rng)
    rho = v @ sub @ v.conj().T
    r = restrict_measurement(m, pi)
    support = np.linalg.eigh(pi)[1][:, 2:]
    restricted_rho = support.conj().T @ rho @ support
    expected = born_rule(m, pi @ rho @ pi / np.trace(pi @ rho @ pi).real)
    assert np.allclose(born_rule(r, restricted_rho), expected, atol=1e-10)


def test_gentle_measurement_examples():
    rho = np.diag([1.0, 0, 0])
    assert gentle_measurement_check(rho, np.diag([1.0, 1, 0])) == pytest.approx((0, 0), abs=1e-12)
    plus = np.full((2, 2), 0.5)
    lhs, rhs = gentle_measurement_check(plus, np.diag([1.0, 0]))
    # ||rho - P rho P||_1 for |+> and P = |0><0| has eigenvalues (1 +- sqrt 5)/4.
    assert lhs == pytest.approx(np.sqrt(5) / 2, abs=1e-12)
    assert rhs == pytest.approx(np.sqrt(2), abs=1e-12)


def test_gentle_measurement_audit():
    rng = np.random.default_rng(8)
    for _ in range(1000):
        dim = int(rng.integers(2, 17))
        rank = int(rng.integers(1, dim))
        v = haar_unitary(dim, rng)[:, :rank]
        lhs, rhs = gentle_measurement_check(random_density_matrix(dim, rng, rank=int(rng.integers(1, dim + 1))),
                                            v @ v.conj().T)
        assert lhs <= rhs + 1e-9
