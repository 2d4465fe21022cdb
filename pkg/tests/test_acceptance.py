"""Acceptance criteria, one test each, at the stated tolerances.

Each test records a PASS/FAIL line that is printed in the terminal summary.
"""

import json
import math
import time

import numpy as np
import pytest

from qergodic.cli import main
from qergodic.hilbert import MacroDecomposition, StateVector, UnitaryMatrix, build_projector_overlaps
from qergodic.normality import (
    NormalityParams,
    condition_value,
    deviation_G,
    deviation_G_empirical,
    time_fraction_normal,
    worst_case_G,
)
from qergodic.sampling import SeedSpec, uniform_decomposition, uniform_state
from qergodic.spectra import generate_nonresonant_spectrum, time_horizon
from qergodic.typicality import ExperimentConfig, run_experiment, run_scaling_experiment

from oracles import grid_oracle

pytestmark = pytest.mark.slow


def random_instance(seed: SeedSpec, D: int):
    rng = seed.spawn(9).generator()
    n_blocks = int(rng.integers(2, min(D, 4) + 1))
    cuts = np.sort(rng.choice(np.arange(1, D), size=n_blocks - 1, replace=False))
    dims = [int(x) for x in np.diff(np.concatenate([[0], cuts, [D]]))]
    return (generate_nonresonant_spectrum(D, seed.spawn(0)),
            uniform_decomposition(dims, seed.spawn(1)),
            uniform_state(D, seed.spawn(2)))


def test_criterion_1_subspace_occupation_moments(acceptance_line):
    start = time.perf_counter()
    worst = 0.0
    details = []
    ok = True
    for D, d in [(2, 1), (10, 3), (100, 20)]:
        cfg = ExperimentConfig.from_dict({"variant": "lemma1", "D": D, "dims": [d, D - d],
                                          "trials": 100_000, "seed": {"master_seed": 2024},
                                          "params": {"epsilon": 0.5}})
        dg = run_experiment(cfg).diagnostics
        worst = max(worst, abs(dg["z_mean"]), abs(dg["z_variance"]))
        ok &= abs(dg["mean_mc"] - dg["mean_theory"]) < 5 * dg["se_mean"]
        ok &= abs(dg["variance_mc"] - dg["variance_theory"]) < 5 * dg["se_variance"]
        if (D, d) == (2, 1):
            ok &= dg["variance_theory"] == pytest.approx(1 / 12, abs=1e-15)
        details.append(f"({D},{d}) z=({dg['z_mean']:+.2f},{dg['z_variance']:+.2f})")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 60
    acceptance_line("1 subspace occupation moments", ok, f"{'; '.join(details)}; max|z|={worst:.2f} < 5; {elapsed:.1f}s < 60s")
    assert ok


def test_criterion_2_closed_form_vs_time_integration(acceptance_line):
    start = time.perf_counter()
    rng = np.random.default_rng(12)
    errors = []
    for i in range(50):
        seed = SeedSpec(500, i)
        D = int(rng.integers(2, 51))
        spec, dec, psi = random_instance(seed, D)
        nu = int(rng.integers(dec.N))
        P = build_projector_overlaps(dec, nu)
        _, T = time_horizon(spec, cycles=1000)
        closed = deviation_G(psi, P, spectrum=spec)
        emp = deviation_G_empirical(psi, spec, P, P.dim, D, T, 2 ** 20, seed.spawn(3))
        errors.append(abs(emp - closed) / closed)
    elapsed = time.perf_counter() - start
    worst = max(errors)
    ok = worst < 0.01 and elapsed < 300
    acceptance_line("2 closed-form G", ok,
                    f"max relative disagreement {worst:.2e} < 1e-2 over 50 instances; {elapsed:.1f}s < 300s")
    assert ok


def test_criterion_3_two_level_analytics(acceptance_line):
    W = UnitaryMatrix(np.array([[1, 1], [1, -1]]) / np.sqrt(2))
    dec = MacroDecomposition((1, 1), W)
    from qergodic.hilbert import EnergySpectrum
    spec = EnergySpectrum([0.0, 1.0])
    psi = StateVector.normalized([1, 1])
    P = build_projector_overlaps(dec, 0)
    closed = deviation_G(psi, P, spectrum=spec)
    emp = deviation_G_empirical(psi, spec, P, 1, 2, 1000 * 2 * np.pi, 2 ** 16, SeedSpec(3))
    ok = closed == 0.125 and abs(emp - 0.125) <= 0.002
    parts = [f"G closed={closed!r} empirical={emp:.6f}"]
    for eps in (0.25, 0.5):
        frac, _ = time_fraction_normal(psi, spec, dec, NormalityParams(eps, 0.2, 2, "strong"),
                                       T=1000 * 2 * np.pi, n_samples=2 ** 16, seed=SeedSpec(4))
        target = 2 / np.pi * np.arcsin(eps)
        ok &= abs(frac - target) <= 0.01
        parts.append(f"eps={eps}: {frac:.4f} vs {target:.4f}")
    acceptance_line("3 two-level", ok, "; ".join(parts))
    assert ok


def test_criterion_4_inequality_chain(acceptance_line):
    rng = np.random.default_rng(44)
    chain_ok = 0
    worst_gap = -np.inf
    for i in range(100):
        seed = SeedSpec(600, i)
        D = int(rng.integers(2, 41))
        _, dec, psi = random_instance(seed, D)
        P = build_projector_overlaps(dec, int(rng.integers(dec.N)))
        G = deviation_G(psi, P)
        wc, _ = worst_case_G(P, seed=seed.spawn(4))
        cv = condition_value(P)
        chain_ok += G <= wc and wc <= cv + 1e-10
        worst_gap = max(worst_gap, G - wc, wc - cv)
    grid_err = 0.0
    for i in range(20):
        seed = SeedSpec(700, i)
        D = 2 + i % 4
        dec = uniform_decomposition([1 + i % (D - 1), D - 1 - i % (D - 1)], seed)
        P = build_projector_overlaps(dec, 0)
        wc, _ = worst_case_G(P, seed=seed.spawn(4))
        grid_err = max(grid_err, abs(wc - grid_oracle(P, P.dim, D)))
    ok = chain_ok == 100 and grid_err < 1e-4
    acceptance_line("4 inequality chain", ok,
                    f"chain holds on {chain_ok}/100 (largest violation {worst_gap:.1e}); "
                    f"grid oracle max error {grid_err:.1e} < 1e-4 for D<=5")
    assert ok


def test_criterion_5_max_statistic_bounds(acceptance_line):
    start = time.perf_counter()
    cfg = ExperimentConfig.from_dict({"variant": "lemma_bounds", "D": 300, "dims": [60, 240],
                                      "trials": 100, "seed": {"master_seed": 5}})
    dg = run_experiment(cfg).diagnostics
    elapsed = time.perf_counter() - start
    ok = (dg["offdiag_mean"] < math.log(300) / 300 and dg["diag_mean"] < 9 * 60 * math.log(300) / 300 ** 2
          and abs(dg["offdiag_expectation_bound"] - 0.01901) < 1e-5
          and abs(dg["diag_expectation_bound"] - 0.03423) < 1e-5 and elapsed < 300)
    acceptance_line("5 max-statistic bounds", ok,
                    f"offdiag mean {dg['offdiag_mean']:.5f} < {dg['offdiag_expectation_bound']:.5f}; "
                    f"diag mean {dg['diag_mean']:.5f} < {dg['diag_expectation_bound']:.5f}; {elapsed:.1f}s")
    assert ok


def test_criterion_6_scaling_law(acceptance_line):
    out = run_scaling_experiment([100, 200, 400, 800], fraction=0.25, trials=100, seed=SeedSpec(6))
    slope = out["slope_vs_D_over_log_D"]
    ok = -1.3 <= slope <= -0.7
    acceptance_line("6 scaling law", ok,
                    f"slope vs D/log D = {slope:.3f} in [-1.3, -0.7]; medians "
                    + ", ".join(f"{m:.4g}" for m in out["medians"]))
    assert ok


def test_criterion_7_equilibrium_corollary(acceptance_line):
    cfg = ExperimentConfig.from_dict({"variant": "equilibrium", "D": 300, "dims": [297, 3], "trials": 50,
                                      "params": {"epsilon": 0.01, "delta_prime": 0.1},
                                      "seed": {"master_seed": 7}})
    est = run_experiment(cfg)
    lo, _ = est.confidence_interval
    dg = est.diagnostics
    ok = est.success_fraction >= 0.95 and lo >= 0.85
    acceptance_line("7 equilibrium", ok,
                    f"success {est.success_fraction:.3f} (need >= 0.95), Wilson lo {lo:.3f} (need >= 0.85); "
                    f"eigenstate probes all pass in {dg['eigenstates_all_pass_fraction']:.2f} of trials, "
                    f"mean eigenstate pass {dg['mean_eigenstate_pass_fraction']:.3f}, "
                    f"uniform probes pass {dg['uniform_probes_pass_fraction']:.2f}, "
                    f"worst-case probe pass {dg['worst_case_probe_pass_fraction']:.2f}")
    assert ok


def test_criterion_8_quantifier_contrast(acceptance_line):
    cfg = ExperimentConfig.from_dict({"variant": "quantifier_contrast", "D": 100, "dims": [20, 80],
                                      "trials": 10_000, "worst_case_trials": 100,
                                      "params": {"epsilon": 0.5, "delta_prime": 0.2},
                                      "seed": {"master_seed": 8}})
    rep = run_experiment(cfg)
    av, al, ct = rep.averages, rep.aligned, rep.contrast
    ok = (av["pairs"] == 10_000 and av["average_deviation_ratio"] < av["average_deviation_bound"] == pytest.approx(0.08)
          and av["jensen_holds"] and ct["inclusion_holds"]
          and al["worst_case_G"] >= (20 / 100) ** 2 and al["G_flat_state"] < al["threshold"]
          and al["worst_case_fails"]
          and al["worst_case_G"] == pytest.approx(max(0.8 ** 2, 0.2 ** 2), abs=1e-10))
    acceptance_line("8 quantifier contrast", ok,
                    f"average-deviation ratio {av['average_deviation_ratio']:.5f} < {av['average_deviation_bound']:.2f}; aligned: fixed-state G "
                    f"{al['G_flat_state']:.1e} < bound2 {al['threshold']:.1e}, worst case "
                    f"{al['worst_case_G']:.4f} >= (d/D)^2; fixed/all good "
                    f"{ct['fraction_fixed_state_good']:.2f}/{ct['fraction_all_states_good']:.2f}")
    assert ok


DETERMINISM_CONFIGS = {
    "lemma1": {"variant": "lemma1", "dims": [3, 7], "trials": 500},
    "lemma_bounds": {"variant": "lemma_bounds", "dims": [10, 30], "trials": 40},
    "theorem2": {"variant": "theorem2", "dims": [20, 20], "trials": 30, "record_trials": True},
    "theorem3": {"variant": "theorem3", "dims": [10, 10, 10], "trials": 20, "direct": True,
                 "uniform_probes": 2, "n_samples": 256, "threshold_scale": 5.0},
    "equilibrium": {"variant": "equilibrium", "dims": [58, 2], "trials": 8, "uniform_probes": 2,
                    "n_samples": 256, "params": {"epsilon": 0.1}},
    "quantifier_contrast": {"variant": "quantifier_contrast", "dims": [5, 20], "trials": 60,
                            "worst_case_trials": 10},
}


def test_criterion_9_determinism(acceptance_line, tmp_path):
    same = []
    for name, cfg in DETERMINISM_CONFIGS.items():
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(cfg | {"seed": {"master_seed": 99}}))
        outs = []
        for run, threads in enumerate((1, 8, 1)):
            out = tmp_path / f"{name}-{run}"
            assert main(["run", str(path), "--output-dir", str(out), "--threads", str(threads)]) == 0
            files = sorted(p.name for p in out.iterdir() if p.name != "manifest.json")
            outs.append({f: (out / f).read_bytes() for f in files})
        same.append(outs[0] == outs[1] == outs[2])
    ok = all(same)
    acceptance_line("9 determinism", ok,
                    f"{sum(same)}/{len(same)} variants byte-identical across 1/8/1 threads")
    assert ok
