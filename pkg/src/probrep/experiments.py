"""Experiment registry: one entry per CLI experiment.

Each runner takes a validated parameter dict and returns ``(columns, rows)``
where ``columns`` is a list of ``(name, type)`` with type one of ``int``,
``real``, ``rational``, ``bool``. ``None`` cells serialize as empty.
"""

from __future__ import annotations

import dataclasses
import math
from fractions import Fraction
from typing import Callable

import numpy as np

from probrep import antisymmetric, gpt, metrics, nets, scrambling, spectral
from probrep.operators import random_density_matrix, random_measurement, random_povm_element, trace_norm

PARAMETER_KEYS = ("n", "n_max", "samples", "epsilon", "seed", "max_tries", "tolerance")
INT_KEYS = {"n", "n_max", "samples", "seed", "max_tries"}


@dataclasses.dataclass(frozen=True)
class Experiment:
    name: str
    summary: str
    runner: Callable[[dict], tuple[list, list]]
    defaults: dict
    randomized: bool
    limits: dict  # key -> (min, max)


def _antisym(p):
    rows = antisymmetric.robustness_gap_table(p["n_max"], p["seed"], bases=p["samples"])
    cols = [("n", "int"), ("d_product", "real"), ("gap", "real"), ("delta_to_uniform", "real"), ("converged", "bool")]
    return cols, [(r["n"], r["d_product"], r["gap"], r["delta_to_uniform"], r["converged"]) for r in rows]


def _airplane(p):
    cols = [("n", "int"), ("min_distance", "rational"), ("min_distance_real", "real"), ("argmin", "int"),
            ("half_min", "real"), ("floor_holds", "bool")]
    sizes = [p["n"]] if p.get("n_max") is None else [2**k for k in range(int(math.log2(p["n_max"])) + 1)]
    rows = []
    for n in sizes:
        best, arg = spectral.airplane_scan(n)
        rows.append((n, best, float(best), arg, float(best) / 2, best >= spectral.AIRPLANE_FLOOR))
    return cols, rows


def _scramble(p):
    n = p["n"]
    net = scrambling.random_product_elements(n, p["samples"], np.random.SeedSequence([p["seed"], 1]))
    rep = scrambling.scramble_search(n, net, p["max_tries"], p["seed"], scan_all=True)
    cols = [("n", "int"), ("dim", "int"), ("net_size", "int"), ("tries", "int"), ("found", "bool"),
            ("unitary_seed", "int"), ("max_ratio", "real"), ("d_bound", "real"), ("success_rate", "real")]
    return cols, [(n, rep.dim, len(net), rep.tries, rep.found, rep.unitary_seed, rep.max_ratio, rep.d_bound,
                   rep.success_rate)]


def _nets(p):
    dim, eps, seed = p["n"], p["epsilon"], p["seed"]
    net = nets.build_net(dim, eps, seed)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 2]))
    snap_worst = decode_worst = 0.0
    for _ in range(p["samples"]):
        e = random_povm_element(dim, rng)
        approx, bound = nets.snap_element(e, net)
        snap_worst = max(snap_worst, trace_norm(approx - e) / bound)
        m = random_measurement(dim, 3, rng)
        rho = random_density_matrix(dim, rng)
        decoded, _ = nets.decode_measurement(m, net, rho)
        errs = np.abs(decoded - np.einsum("kij,ji->k", m.elements, rho).real)
        decode_worst = max(decode_worst, float(np.max(errs / nets.decoding_bounds(m, net))))
    bound = nets.net_size_bound(dim, eps)
    cols = [("dim", "int"), ("epsilon", "real"), ("size", "int"), ("size_bound", "real"), ("within_bound", "bool"),
            ("certificate_worst", "real"), ("certificate_passed", "bool"), ("snap_worst_ratio", "real"),
            ("decode_worst_ratio", "real")]
    return cols, [(dim, eps, len(net), bound, len(net) <= bound, net.certificate.worst_distance,
                   net.certificate.passed, snap_worst, decode_worst)]


def _keylock(p):
    n = p["n"]
    product = gpt.product_family_distance(n) if n <= gpt.MAX_PRODUCT_N else None
    cols = [("n", "int"), ("adaptive", "rational"), ("product", "rational")]
    return cols, [(n, gpt.adaptive_distance(n), product)]


def _damped(p):
    tol = p["tolerance"]
    cols = [("n", "int"), ("d_damped", "real"), ("delta", "real"), ("expected_d", "real"), ("matches", "bool")]
    rows = []
    for n, d, delta in metrics.damped_family_demo(p["n"]):
        expected = 0.0 if n == 0 else math.exp(-2 * n)
        expected_delta = 0.0 if n == 0 else 1.0
        rows.append((n, d, delta, expected, abs(d - expected) <= tol and abs(delta - expected_delta) <= tol))
    return cols, rows


def _witness(p):
    rng = np.random.default_rng(p["seed"])
    dim, tol = p["n"], p["tolerance"]
    worst_residual = worst_delta = 0.0
    min_eig = np.inf
    for _ in range(p["samples"]):
        a = spectral.random_traceless_witness(dim, rng)
        pointer = int(rng.integers(dim))
        rho, sigma = spectral.witness_pair(a, pointer)
        worst_residual = max(worst_residual, trace_norm(rho - sigma - a.operator))
        min_eig = min(min_eig, np.linalg.eigvalsh(rho)[0], np.linalg.eigvalsh(sigma)[0])
        worst_delta = max(worst_delta, abs(metrics.trace_distance(rho, sigma) - trace_norm(a.operator) / 2))
    cols = [("dim", "int"), ("samples", "int"), ("max_residual", "real"), ("min_eigenvalue", "real"),
            ("max_delta_error", "real"), ("passed", "bool")]
    passed = worst_residual <= tol and min_eig >= -tol and worst_delta <= tol
    return cols, [(dim, p["samples"], worst_residual, float(min_eig), worst_delta, passed)]


def _tomography(p):
    r = gpt.local_tomography_check(p["n"])
    cols = [("max_len", "int"), ("states", "int"), ("effects", "int"), ("span_rank", "int"),
            ("evaluation_rank", "int"), ("distinct_columns", "bool"), ("passed", "bool")]
    return cols, [(r.max_len, r.states, r.effects, r.span_rank, r.evaluation_rank, r.distinct_columns, r.passed)]


REGISTRY = {
    e.name: e
    for e in [
        Experiment("antisym", "antisymmetric state: product-basis gap vs trace distance to uniform randomness",
                   _antisym, {"n_max": 3, "samples": 20}, True, {"n_max": (1, 5), "samples": (1, 10_000)}),
        Experiment("airplane", "flat vs triangular spectra: exact minimum spectral distance",
                   _airplane, {"n": 256, "n_max": None}, False,
                   {"n": (1, spectral.AIRPLANE_MAX_N), "n_max": (1, spectral.AIRPLANE_MAX_N)}),
        Experiment("scramble", "Haar search for a unitary meeting every threshold of a product net",
                   _scramble, {"n": 4, "samples": 50, "max_tries": 100}, True,
                   {"n": (1, 10), "samples": (0, 10_000), "max_tries": (1, 100_000)}),
        Experiment("nets", "greedy covering net with certificate and snap/decode audits",
                   _nets, {"n": 2, "epsilon": 0.25, "samples": 1000}, True,
                   {"n": (1, nets.MAX_DIM), "epsilon": (nets.MIN_EPSILON, 2.0), "samples": (1, 1_000_000)}),
        Experiment("keylock", "key/lock GPT: adaptive vs product distinguishability, exact",
                   _keylock, {"n": 8}, False, {"n": (0, gpt.MAX_CORRELATED_N)}),
        Experiment("damped", "damped measurement family vs trace distance on basis states",
                   _damped, {"n": 8, "tolerance": 1e-9}, False, {"n": (2, 64), "tolerance": (0.0, 1.0)}),
        Experiment("witness", "state pairs built from random traceless witnesses",
                   _witness, {"n": 8, "samples": 1000, "tolerance": 1e-10}, True,
                   {"n": (2, 64), "samples": (1, 1_000_000), "tolerance": (0.0, 1.0)}),
        Experiment("tomography", "local tomography of truncated key/lock states",
                   _tomography, {"n": 3}, False, {"n": (0, gpt.MAX_TOMOGRAPHY_LEN)}),
    ]
}


def resolve_parameters(name: str, given: dict) -> tuple[dict, list[str]]:
    """Merge defaults with ``given``; return the parameters and a list of problems."""
    problems = []
    exp = REGISTRY.get(name)
    if exp is None:
        return {}, [f"unknown experiment {name!r}; choose from {', '.join(REGISTRY)}"]
    params = dict(exp.defaults)
    if exp.randomized:
        params.setdefault("seed", None)
    for key, value in given.items():
        if key not in PARAMETER_KEYS:
            problems.append(f"unknown parameter {key!r}")
            continue
        if key not in params:
            problems.append(f"parameter {key!r} is not used by {name}")
            continue
        try:
            params[key] = _coerce(key, value)
        except (TypeError, ValueError):
            problems.append(f"parameter {key!r} has invalid value {value!r}")
    if exp.randomized and params.get("seed") is None:
        problems.append(f"experiment {name} is randomized and needs a seed")
    for key, (lo, hi) in exp.limits.items():
        v = params.get(key)
        if v is not None and not isinstance(v, str) and not lo <= v <= hi:
            problems.append(f"parameter {key}={v} outside [{lo}, {hi}]")
    if name == "airplane" and params.get("n_max") is not None and params["n_max"] & (params["n_max"] - 1):
        problems.append("airplane n_max must be a power of two")
    return params, problems


def _coerce(key: str, value):
    if isinstance(value, bool):
        raise TypeError("booleans are not valid parameters")
    if key in INT_KEYS:
        if isinstance(value, float) and not value.is_integer():
            raise ValueError("expected an integer")
        if isinstance(value, str):
            return int(value)
        return int(value)
    if isinstance(value, str) and "/" in value:
        return float(Fraction(value))
    out = float(value)
    if not math.isfinite(out):
        raise ValueError("expected a finite number")
    return out
