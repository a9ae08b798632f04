"""Acceptance suite: one test per criterion, each at its stated tolerance and time limit.

Every test records a PASS/FAIL line through the ``acceptance`` fixture; the
lines are repeated together at the end of the pytest run.  Run just this
suite with ``pytest tests/test_acceptance.py -v``.
"""
from __future__ import annotations

import json
import subprocess
import sys
import time

import numpy as np
import pytest

from finmcmc import (
    Distribution,
    IsingModel,
    RandomStream,
    TransitionKernel,
    UnnormalizedWeights,
    check_irreducible,
    detailed_balance_residual,
    enumerate_expectation,
    gibbs_conditional_kernel,
    gibbs_sweep_kernel,
    ising_site_conditional,
    ising_weights,
    left_eigenvector_sign_check,
    mh_kernel,
    mh_step,
    mixing_time,
    positivity_certificate,
    reducible_gibbs_target,
    run_gibbs,
    run_ising_gibbs,
    run_mh,
    solve_stationary,
)
from finmcmc.convergence import worst_case_tv
from finmcmc.models import TWO_BIT_CODEC, magnetization, spins_of
from finmcmc.samplers import ProductSpaceCodec, gibbs_conditional
from finmcmc.stationary import left_unit_eigenvectors

from oracles import bool_powers, random_aperiodic, random_irreducible, random_stochastic


def _aperiodic_kernels(count: int = 200, k_max: int = 8, seed: int = 2024) -> list[TransitionKernel]:
    rng = np.random.default_rng(seed)
    return [random_aperiodic(rng, int(rng.integers(1, k_max + 1))) for _ in range(count)]


@pytest.fixture(scope="module")
def aperiodic_kernels():
    return _aperiodic_kernels()


def _asymptotic_variance(p: np.ndarray, pi: np.ndarray, f: np.ndarray) -> float:
    """CLT variance of the ergodic average of ``f`` via the fundamental matrix."""
    k = len(pi)
    fc = f - pi @ f
    z = np.linalg.inv(np.eye(k) - p + np.outer(np.ones(k), pi))
    return float(2 * pi @ (fc * (z @ fc)) - pi @ (fc * fc))


def _ulps(a: np.ndarray, b: np.ndarray) -> int:
    return int(np.abs(a.view(np.int64) - b.view(np.int64)).max())


def test_criterion_01_certificate_dominates_distance(acceptance, aperiodic_kernels):
    t0 = time.perf_counter()
    worst = -np.inf
    for kern in aperiodic_kernels:
        n_cert, eps = positivity_certificate(kern)
        pi = solve_stationary(kern).pi.mass
        power = np.eye(kern.k)
        for n in range(1, 201):
            power = power @ kern.rows
            gap = np.abs(power - pi).max()
            worst = max(worst, gap - (1 - eps) ** (n // n_cert))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and elapsed < 10
    acceptance(1, "certificate bound dominates |K^n - pi| for 200 kernels, n <= 200", ok,
               f"max excess {worst:.3e} vs 1e-12, {elapsed:.2f}s vs 10s")
    assert ok


def test_criterion_02_distance_at_mixing_time(acceptance, aperiodic_kernels):
    t0 = time.perf_counter()
    worst = 0.0
    for kern in aperiodic_kernels:
        n = mixing_time(kern, 1e-8)
        pi = solve_stationary(kern).pi.mass
        power = np.linalg.matrix_power(kern.rows, n)
        per_start = 0.5 * np.abs(power - pi).sum(axis=1)
        worst = max(worst, float(per_start.max()))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-8 and elapsed < 10
    acceptance(2, "every start within 1e-8 TV at mixing_time(K, 1e-8)", ok,
               f"max TV {worst:.3e}, {elapsed:.2f}s vs 10s")
    assert ok


def test_criterion_03_unique_stationary_distribution(acceptance):
    rng = np.random.default_rng(7)
    kernels = [random_irreducible(rng, int(rng.integers(1, 7))) for _ in range(1000)]
    t0 = time.perf_counter()
    max_res = max_perm = 0.0
    sign_failures = 0
    for kern in kernels:
        res = solve_stationary(kern)
        max_res = max(max_res, res.residual)
        perm = rng.permutation(kern.k)
        permuted = TransitionKernel.from_matrix(kern.rows[np.ix_(perm, perm)])
        back = np.empty(kern.k)
        back[perm] = solve_stationary(permuted).pi.mass
        max_perm = max(max_perm, float(np.abs(back - res.pi.mass).max()))
        for x in left_unit_eigenvectors(kern).T:
            if not left_eigenvector_sign_check(kern, x):
                sign_failures += 1
    elapsed = time.perf_counter() - t0
    ok = max_res <= 1e-10 and max_perm <= 1e-10 and sign_failures == 0 and elapsed < 30
    acceptance(3, "stationary solve on 1000 irreducible kernels", ok,
               f"residual {max_res:.2e}, permutation drift {max_perm:.2e}, "
               f"sign failures {sign_failures}, {elapsed:.2f}s vs 30s")
    assert ok


def test_criterion_04_gibbs_kernels_keep_target(acceptance):
    rng = np.random.default_rng(11)
    codec = ProductSpaceCodec(3, 2)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        mass = rng.uniform(0.01, 1.0, 8)
        pi = Distribution.from_mass(mass / mass.sum())
        kernels = [gibbs_conditional_kernel(pi, codec, j) for j in range(3)]
        kernels.append(gibbs_sweep_kernel(pi, codec))
        for kern in kernels:
            worst = max(worst, float(np.abs(pi.mass @ kern.rows - pi.mass).max()))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and elapsed < 5
    acceptance(4, "per-coordinate and sweep Gibbs kernels keep pi on {0,1}^3", ok,
               f"max |pi K - pi| {worst:.2e}, {elapsed:.2f}s vs 5s")
    assert ok


def test_criterion_05_reducible_gibbs_sweep(acceptance):
    t0 = time.perf_counter()
    sweep = gibbs_sweep_kernel(reducible_gibbs_target(), TWO_BIT_CODEC)
    reported_reducible = not check_irreducible(sweep)
    src, dst = TWO_BIT_CODEC.encode((1, 0)), TWO_BIT_CODEC.encode((0, 1))
    reach = np.zeros((sweep.k, sweep.k), dtype=bool)
    for _, p in bool_powers(sweep.rows, sweep.k):
        reach |= p > 0
    unreachable = not reach[src, dst]
    elapsed = time.perf_counter() - t0
    ok = reported_reducible and unreachable and elapsed < 1
    acceptance(5, "Gibbs sweep on (0, 1/2, 1/2, 0) is reducible", ok,
               f"reducible={reported_reducible}, (0,1) unreachable from (1,0)={unreachable}, "
               f"{elapsed:.3f}s vs 1s")
    assert ok


def test_criterion_06_mh_balance_and_scale_invariance(acceptance):
    rng = np.random.default_rng(6)
    pairs = []
    for _ in range(200):
        k = int(rng.integers(1, 11))
        w = UnnormalizedWeights.from_weights(rng.random(k) + 1e-3)
        q = TransitionKernel.from_matrix(random_stochastic(rng, k))
        pairs.append((w, q))
    t0 = time.perf_counter()
    max_db = 0.0
    mismatches = 0
    max_ulps = 0
    for w, q in pairs:
        base = mh_kernel(w, q)
        max_db = max(max_db, detailed_balance_residual(w.normalized(), base))
        for c in (1e-6, 1e6):
            scaled = mh_kernel(w.scaled(c), q).rows
            if not np.array_equal(scaled, base.rows):
                mismatches += 1
                max_ulps = max(max_ulps, _ulps(scaled, base.rows))
    elapsed = time.perf_counter() - t0
    ok = max_db <= 1e-14 and mismatches == 0 and elapsed < 5
    acceptance(6, "MH detailed balance and bit-identical rescaling of weights", ok,
               f"balance residual {max_db:.2e} vs 1e-14, {mismatches}/400 rescaled kernels differ "
               f"(max {max_ulps} ulp), {elapsed:.2f}s vs 5s")
    assert ok


def test_criterion_07_mh_step_frequencies(acceptance):
    w = UnnormalizedWeights.from_weights([1, 2, 3])
    q = TransitionKernel.from_matrix(np.full((3, 3), 1 / 3))
    derived = np.array([[1 / 3, 1 / 3, 1 / 3], [1 / 6, 1 / 2, 1 / 3], [1 / 9, 2 / 9, 2 / 3]])
    n = 100_000
    t0 = time.perf_counter()
    freq = np.zeros((3, 3))
    for z in range(3):
        rng = RandomStream(700 + z)
        for _ in range(n):
            freq[z, mh_step(w, q, z, rng)] += 1
    freq /= n
    se = np.sqrt(derived * (1 - derived) / n)
    z_scores = np.abs(freq - derived) / se
    elapsed = time.perf_counter() - t0
    ok = bool(z_scores.max() <= 3) and elapsed < 5
    acceptance(7, "mh_step frequencies match the w=(1,2,3) kernel", ok,
               f"max |freq - K| / SE = {z_scores.max():.2f} vs 3, {elapsed:.2f}s vs 5s")
    assert ok


def test_criterion_08_ergodic_averages(acceptance):
    n = 100_000
    rng = np.random.default_rng(8)
    mh_cases = [
        (UnnormalizedWeights.from_weights([1, 2, 3]), TransitionKernel.from_matrix(np.full((3, 3), 1 / 3))),
        (UnnormalizedWeights.from_weights(rng.uniform(0.5, 2.0, 6)),
         TransitionKernel.from_matrix(random_stochastic(rng, 6))),
    ]
    codec = ProductSpaceCodec(3, 2)
    gibbs_target = UnnormalizedWeights.from_weights(rng.uniform(0.5, 2.0, 8))

    t0 = time.perf_counter()
    worst_err = 0.0
    worst_3sigma = 0.0

    def check(trace_states, target, kernel):
        nonlocal worst_err, worst_3sigma
        pi = target.normalized().mass
        counts = np.bincount(trace_states[1:], minlength=target.k)
        for s in range(target.k):
            indicator = (np.arange(target.k) == s).astype(float)
            exact = enumerate_expectation(target, indicator)
            worst_err = max(worst_err, abs(counts[s] / n - exact))
            var = _asymptotic_variance(kernel.rows, pi, indicator)
            worst_3sigma = max(worst_3sigma, 3 * np.sqrt(var / n))

    for i, (w, q) in enumerate(mh_cases):
        trace = run_mh(w, q, 0, n, RandomStream(80 + i))
        check(trace.states, w, mh_kernel(w, q))
    trace = run_gibbs(gibbs_target, codec, 0, n, RandomStream(90))
    check(trace.states, gibbs_target, gibbs_sweep_kernel(gibbs_target, codec))
    elapsed = time.perf_counter() - t0
    ok = worst_err <= 0.01 and worst_3sigma <= 0.01 and elapsed < 10
    acceptance(8, "MH and Gibbs indicator averages over 1e5 steps", ok,
               f"max error {worst_err:.4f} vs 0.01 (largest 3 sigma {worst_3sigma:.4f}), "
               f"{elapsed:.2f}s vs 10s")
    assert ok


def test_criterion_09_ising_conditionals_and_magnetization(acceptance):
    t0 = time.perf_counter()
    worst = 0.0
    for beta in (-1.0, 0.0, 0.5, 1.0):
        for width in range(1, 4):
            for height in range(1, 4):
                model = IsingModel(width, height, beta)
                w = ising_weights(model)
                for idx in range(2**model.sites):
                    cfg = spins_of(model, idx)
                    for site in range(model.sites):
                        _, probs = gibbs_conditional(w, model.codec, idx, site)
                        worst = max(worst, abs(ising_site_conditional(model, cfg, site) - probs[1]))

    model = IsingModel(2, 2, 0.4)
    mag = magnetization(model)
    exact_abs = enumerate_expectation(ising_weights(model), np.abs(mag))
    exact_signed = enumerate_expectation(ising_weights(model), mag)
    trace = run_ising_gibbs(model, 100_000, RandomStream(2718))
    samples = mag[trace.states[1:]]
    err_abs = abs(np.abs(samples).mean() - exact_abs)
    err_signed = abs(samples.mean() - exact_signed)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and err_abs <= 0.02 and err_signed <= 0.02 and elapsed < 30
    acceptance(9, "Ising site conditionals and 2x2 magnetization", ok,
               f"conditional gap {worst:.2e}, |m| error {err_abs:.4f}, m error {err_signed:.4f}, "
               f"{elapsed:.2f}s vs 30s")
    assert ok


def test_criterion_10_cli_is_deterministic(acceptance, tmp_path):
    (tmp_path / "k.json").write_text(json.dumps({"matrix": [[0.9, 0.1], [0.2, 0.8]]}))
    (tmp_path / "w3.json").write_text(json.dumps({"weights": [1, 2, 3]}))
    (tmp_path / "q3.json").write_text(json.dumps({"matrix": [[1 / 3] * 3] * 3}))
    (tmp_path / "w8.json").write_text(json.dumps({"weights": [1, 2, 3, 4, 5, 6, 7, 8]}))
    invocations = [
        (["analyze", "k.json"], []),
        (["stationary", "k.json"], []),
        (["converge", "k.json", "--n-max", "30", "--out", "curve.csv"], ["curve.csv"]),
        (["mixing", "k.json", "--tol", "1e-6"], []),
        (["mh", "--weights", "w3.json", "--proposal", "q3.json", "--start", "1", "--steps", "20000",
          "--burn-in", "100", "--seed", "42", "--f", "indicator:3", "--trace", "mh.csv",
          "--kernel-out", "mh_kernel.json"], ["mh.csv", "mh_kernel.json"]),
        (["gibbs", "--weights", "w8.json", "--coords", "3", "--values", "2", "--start", "2", "--steps", "5000",
          "--seed", "7", "--trace", "gibbs.csv"], ["gibbs.csv"]),
        (["ising", "--grid", "3x2", "--beta", "0.5", "--steps", "5000", "--seed", "9", "--trace", "ising.csv"],
         ["ising.csv"]),
    ]
    t0 = time.perf_counter()
    differing = []
    for argv, files in invocations:
        snapshots = []
        for _ in range(2):
            proc = subprocess.run([sys.executable, "-m", "finmcmc", *argv], cwd=tmp_path,
                                  capture_output=True, check=True)
            snap = [proc.stdout] + [(tmp_path / f).read_bytes() for f in files]
            for f in files:
                (tmp_path / f).unlink()
            snapshots.append(snap)
        if snapshots[0] != snapshots[1]:
            differing.append(argv[0])
    elapsed = time.perf_counter() - t0
    ok = not differing
    acceptance(10, "repeated CLI runs give byte-identical output", ok,
               f"{len(invocations)} commands run twice, differing: {differing or 'none'}, {elapsed:.2f}s")
    assert ok
