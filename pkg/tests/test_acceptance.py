"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line.

Every check runs at its stated tolerance and wall-clock budget; the budget is
part of the verdict.
"""

import math
import time
from fractions import Fraction

import numpy as np

from probrep import gpt, nets, scrambling, spectral
from probrep.antisymmetric import antisymmetric_state, product_basis_distribution, product_representation_gap
from probrep.metrics import (
    MeasurementFamily,
    StateFamily,
    d_m,
    damped_family_demo,
    distance_to_family,
    m_norm,
    trace_distance,
)
from probrep.operators import (
    haar_state,
    haar_unitary,
    random_density_matrix,
    random_hermitian,
    random_measurement,
    random_povm_element,
    trace_norm,
)


def test_criterion_1_product_basis_statistics(verdict):
    start = time.perf_counter()
    rng = np.random.default_rng(101)
    worst_dist = worst_gap = 0.0
    for n in range(1, 6):
        d = 2**n
        expected = (1 - np.eye(d)).ravel() / (d * (d - 1))
        for _ in range(100):
            p = product_basis_distribution(n, haar_unitary(d, rng))
            worst_dist = max(worst_dist, float(np.max(np.abs(p - expected))))
        worst_gap = max(worst_gap, abs(product_representation_gap(n) - 2.0**-n))
    elapsed = time.perf_counter() - start
    ok = worst_dist <= 1e-10 and worst_gap <= 1e-12 and elapsed < 60
    verdict(1, ok, f"max |p - closed form| = {worst_dist:.1e}, max |gap - 2^-n| = {worst_gap:.1e}, {elapsed:.1f}s")
    assert ok


def test_criterion_2_delta_floor(verdict):
    start = time.perf_counter()
    values = {}
    for n in (1, 2):
        values[n] = distance_to_family(antisymmetric_state(n), StateFamily.uniform_randomness(n), seed=200 + n).value
    # Twirl oracle: U (x) U invariance forces the optimum to sigma = I/2.
    oracle = trace_distance(antisymmetric_state(1), np.eye(4) / 4)
    elapsed = time.perf_counter() - start
    ok = min(values.values()) >= 0.25 and abs(values[1] - oracle) <= 1e-3 and elapsed < 300
    verdict(2, ok, f"delta(n=1) = {values[1]:.6f} (oracle {oracle:.6f}), delta(n=2) = {values[2]:.6f}, {elapsed:.1f}s")
    assert ok


def test_criterion_3_airplane_floor(verdict):
    start = time.perf_counter()
    floor = Fraction(2, 11)
    minima = {}
    for k in range(4, 13):
        minima[2**k] = spectral.airplane_scan(2**k)
    half = float(minima[4096][0]) / 2
    limit = 2 * (1 - 1 / math.sqrt(2)) ** 2
    elapsed = time.perf_counter() - start
    lowest = min(best for best, _ in minima.values())
    ok = lowest >= floor and abs(half - limit) < 0.01 and elapsed < 120
    verdict(3, ok, f"min over n = {float(lowest):.6f} >= 2/11, half-min at 4096 = {half:.6f} vs {limit:.6f}, "
                   f"{elapsed:.1f}s")
    assert ok


def test_criterion_4_lipschitz_and_average(verdict):
    start = time.perf_counter()
    rng = np.random.default_rng(404)
    worst = 0.0
    dims = [2, 3, 4, 6, 8, 10, 12, 14, 16, 16]
    for d in dims:
        rho = random_density_matrix(d, rng, rank=int(rng.integers(1, d + 1)))
        worst = max(worst, scrambling.lipschitz_audit(rho, 1000, rng))
    violations = 0
    excess = -np.inf
    for i in range(20):
        d = int(rng.integers(2, 17))
        rho = random_density_matrix(d, rng, rank=int(rng.integers(1, d + 1)))
        mean, err = scrambling.haar_average_mc(haar_state(d, rng), rho, 10_000, rng)
        gap = mean - scrambling.haar_average_bound(rho) - 3 * err
        excess = max(excess, gap)
        violations += gap > 0
    elapsed = time.perf_counter() - start
    ok = worst <= 1 + 1e-9 and violations == 0 and elapsed < 600
    verdict(4, ok, f"worst Lipschitz ratio = {worst:.4f} over 10^4 trials, average-bound violations = {violations}/20 "
                   f"(max excess {excess:.2e}), {elapsed:.1f}s")
    assert ok


def test_criterion_5_scrambling_search(verdict):
    start = time.perf_counter()
    found = 0
    tries = []
    for rep in range(10):
        net = scrambling.random_product_elements(4, 50, np.random.SeedSequence([500, rep]))
        report = scrambling.scramble_search(4, net, 100, seed=500 + rep)
        found += report.found
        tries.append(report.tries)
    elapsed = time.perf_counter() - start
    ok = found >= 9 and elapsed < 600
    verdict(5, ok, f"found in {found}/10 repetitions, tries {tries}, {elapsed:.1f}s")
    assert ok


def test_criterion_6_nets_and_decoding(verdict):
    start = time.perf_counter()
    configs = [(2, 0.5), (2, 0.25), (2, 0.1), (3, 0.5), (4, 0.5)]
    rng = np.random.default_rng(606)
    certs_ok = True
    snap_worst = decode_worst = product_worst = 0.0
    built = {}
    for dim, eps in configs:
        net = nets.build_net(dim, eps, seed=600 + dim)
        built[dim, eps] = net
        certs_ok &= net.certificate.passed and net.certificate.probes == 100_000
        for _ in range(1000):
            e = random_povm_element(dim, rng)
            approx, bound = nets.snap_element(e, net)
            snap_worst = max(snap_worst, trace_norm(approx - e) / bound)
            m = random_measurement(dim, 3, rng)
            rho = random_density_matrix(dim, rng)
            decoded, _ = nets.decode_measurement(m, net, rho)
            exact = np.einsum("kij,ji->k", m.elements, rho).real
            decode_worst = max(decode_worst, float(np.max(np.abs(decoded - exact) / nets.decoding_bounds(m, net))))
    net = built[2, 0.25]
    for _ in range(1000):
        ea, eb = random_povm_element(2, rng), random_povm_element(2, rng)
        approx, bound = nets.product_snap_element(ea, eb, net, net)
        product_worst = max(product_worst, trace_norm(approx - np.kron(ea, eb)) / bound)
    elapsed = time.perf_counter() - start
    ok = certs_ok and snap_worst <= 1 and decode_worst <= 1 and product_worst <= 1 and elapsed < 300
    sizes = ", ".join(f"d{d}/e{e}:{len(n)}" for (d, e), n in built.items())
    verdict(6, ok, f"certificates {'all passed' if certs_ok else 'FAILED'} ({sizes}); worst error/bound: "
                   f"snap {snap_worst:.3f}, product snap {product_worst:.3f}, decode {decode_worst:.3f}, "
                   f"{elapsed:.1f}s")
    assert ok


def test_criterion_7_keylock_exact(verdict):
    start = time.perf_counter()
    adaptive_ok = all(gpt.adaptive_distance(n) == 1 for n in range(1, 17))
    product_ok = all(gpt.product_family_distance(n) == Fraction(2, 2**n) for n in range(1, 13))
    reports = [gpt.local_tomography_check(length) for length in range(4)]
    tomography_ok = all(r.passed for r in reports)
    elapsed = time.perf_counter() - start
    ok = adaptive_ok and product_ok and tomography_ok and elapsed < 120
    ranks = ", ".join(f"L{r.max_len}:{r.evaluation_rank}/{r.span_rank}" for r in reports)
    verdict(7, ok, f"adaptive = 1 for n<=16: {adaptive_ok}; product = 2^(1-n) for n<=12: {product_ok}; "
                   f"tomography ranks {ranks}; {elapsed:.1f}s")
    assert ok


def test_criterion_8_witness_pairs(verdict):
    start = time.perf_counter()
    rng = np.random.default_rng(808)
    worst_residual, min_eig, worst_trace = 0.0, np.inf, 0.0
    for _ in range(1000):
        dim = int(rng.integers(2, 17))
        a = spectral.random_traceless_witness(dim, rng)
        rho, sigma = spectral.witness_pair(a, int(rng.integers(dim)))
        worst_residual = max(worst_residual, trace_norm(rho - sigma - a.operator))
        min_eig = min(min_eig, np.linalg.eigvalsh(rho)[0], np.linalg.eigvalsh(sigma)[0])
        worst_trace = max(worst_trace, abs(np.trace(rho).real - 1), abs(np.trace(sigma).real - 1))
    elapsed = time.perf_counter() - start
    ok = worst_residual <= 1e-10 and min_eig >= -1e-12 and worst_trace <= 1e-12 and elapsed < 60
    verdict(8, ok, f"max ||rho - sigma - A||_1 = {worst_residual:.1e}, min eigenvalue = {min_eig:.1e}, "
                   f"{elapsed:.1f}s")
    assert ok


def test_criterion_9_metric_sanity(verdict):
    start = time.perf_counter()
    rng = np.random.default_rng(909)
    makers = {
        "explicit": lambda r: MeasurementFamily.explicit([random_measurement(4, 3, r) for _ in range(4)]),
        "product": lambda r: MeasurementFamily.product_rank1_bases(2, 2, 8, int(r.integers(2**31))),
        "all_rank1": lambda r: MeasurementFamily.all_rank1_bases(4, 8, int(r.integers(2**31))),
        "damped_analytic": lambda r: MeasurementFamily.damped(4),
        "damped_sampled": lambda r: MeasurementFamily.damped(4, strategy="sample", count=8,
                                                             seed=int(r.integers(2**31))),
    }
    violations = {}
    for name, make in makers.items():
        bad = 0
        for i in range(1000):
            fam = make(rng)
            rho, sigma = random_density_matrix(4, rng), random_density_matrix(4, rng)
            bad += d_m(rho, sigma, fam).value > trace_distance(rho, sigma) + 1e-9
            a = random_hermitian(4, rng)
            bad += m_norm(a, fam).value > trace_norm(a) + 1e-9
        violations[name] = bad
    demo_ok = True
    for dim in (2, 8, 16):
        for n, d, delta in damped_family_demo(dim):
            demo_ok &= abs(d - (math.exp(-2 * n) if n else 0.0)) <= 1e-12
            demo_ok &= abs(delta - (1.0 if n else 0.0)) <= 1e-12
    elapsed = time.perf_counter() - start
    ok = not any(violations.values()) and demo_ok and elapsed < 120
    verdict(9, ok, f"violations per family {violations}; damped rows match e^(-2n) and 1: {demo_ok}; {elapsed:.1f}s")
    assert ok
