"""End-to-end acceptance checks at full stated tolerances.

Each test enforces one headline requirement and records a single
pass/fail line (echoed in the terminal summary).  The heavy ensemble
runs are shared through module-scoped fixtures.
"""

import json

import numpy as np
import pytest
from scipy.stats import chi2

from bohm_measure.cli import main
from bohm_measure.dynamics import decoherence_time, projective_validity
from bohm_measure.ensemble import (
    EnsembleSpec,
    equivariance_check,
    packet_overlap,
    packet_overlap_quadrature,
)
from bohm_measure.experiments import (
    ProjectiveLimitError,
    exp_born,
    exp_contextuality,
    exp_coordinate,
    exp_momentum_basic,
    exp_sequential_uncertainty,
)
from bohm_measure.guidance import (
    velocity_fd_oracle,
    velocity_momentum,
)
from bohm_measure.wavefield import (
    ConfigPoint,
    GaussianDevicePacket,
    MomentumSuperposition,
    PhysicalParams,
    eval_density,
)

# chi-square upper 1% point for 6 degrees of freedom, standard tables
CHI2_CRITICAL_6_AT_01 = 16.8119


def make_model(momenta, weights, mass=1.0, coupling=1.0, sigma=1.0):
    return MomentumSuperposition(momenta, np.sqrt(weights),
                                 PhysicalParams(mass, coupling),
                                 GaussianDevicePacket(sigma))


def random_model(rng):
    n = int(rng.integers(1, 8))
    momenta = np.sort(rng.uniform(-3, 3, size=n))
    while n > 1 and np.min(np.diff(momenta)) < 0.05:
        momenta = np.sort(rng.uniform(-3, 3, size=n))
    return make_model(momenta, rng.uniform(0.05, 1.0, size=n),
                      mass=rng.uniform(0.2, 4.0),
                      coupling=rng.uniform(0.3, 2.5),
                      sigma=rng.uniform(0.6, 1.8))


@pytest.fixture(scope="module")
def two_momentum_run():
    # equal-weight two-momentum measurement at survey scale
    return exp_momentum_basic("a", samples=10_000, seed=0)


@pytest.fixture(scope="module")
def born_run():
    return exp_born(samples=10_000, seed=0)


@pytest.fixture(scope="module")
def sequential_run():
    return exp_sequential_uncertainty(samples=3000, seed=0)


def test_guidance_matches_oracle(acceptance_line):
    # velocity field against centered differences of the wave field only
    rng = np.random.default_rng(2024)
    worst = 0.0
    checked = 0
    while checked < 500:
        model = random_model(rng)
        point = ConfigPoint(rng.uniform(-3, 3), rng.uniform(-3, 3),
                            rng.uniform(0.0, 4.0))
        peak = eval_density(model, ConfigPoint(0.0, 0.0, 0.0))
        if eval_density(model, point) < 1e-6 * max(peak, 1.0):
            continue
        got = velocity_momentum(model, point)
        ref = velocity_fd_oracle(model, point)
        scale = max(abs(ref.v_q), abs(ref.v_r), 1e-2)
        dev = max(abs(got.v_q - ref.v_q), abs(got.v_r - ref.v_r)) / scale
        worst = max(worst, dev)
        checked += 1
    acceptance_line(worst <= 1e-6,
                    f"guidance velocities match the derivative oracle on "
                    f"{checked} random points: worst {worst:.3g} <= 1e-06")


def test_single_branch_exact(acceptance_line):
    model = make_model([1.7], [1.0], mass=2.6, coupling=0.9)
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(100):
        t = rng.uniform(0, 5)
        # stay with the moving packet so the density is healthy
        point = ConfigPoint(rng.uniform(-3, 3),
                            0.9 * 1.7 * t + rng.uniform(-2, 2), t)
        v = velocity_momentum(model, point)
        worst = max(worst,
                    abs(v.v_r - 0.9 * 1.7) / (0.9 * 1.7),
                    abs(v.v_q - 1.7 / 2.6) / (1.7 / 2.6))
    acceptance_line(worst <= 1e-13,
                    f"one-branch velocities equal (p/m, lam p) to machine "
                    f"precision: worst rel {worst:.3g}")


def test_separation_formula(acceptance_line):
    t3 = decoherence_time(1.0, 1.0, -1.0, 1.0)
    model = make_model([-1.0, 1.0], [0.5, 0.5], coupling=1.3, sigma=0.9)
    worst = 0.0
    for t in np.linspace(0.0, 6.0, 25):
        closed = packet_overlap(model, 0, 1, t)
        quad = packet_overlap_quadrature(model, 0, 1, t)
        worst = max(worst, abs(closed - quad))
    ok = t3 == 3.0 and worst <= 1e-8
    acceptance_line(ok, f"separation time (1,1,-1,1) = {t3} exactly and "
                        f"overlap closed-vs-quadrature worst {worst:.3g} <= 1e-08")


def test_two_momentum_ensemble_resolves(acceptance_line, two_momentum_run):
    result = two_momentum_run
    counts = result.manifest["counts"]
    kept = counts["samples"] - counts["node_excluded"]
    resolved_fraction = counts["resolved"] / kept
    excluded_fraction = counts["node_excluded"] / counts["samples"]
    hist = result.series["outcomes"]
    freq = hist["count"][hist["momentum"] == 1.0][0] / counts["resolved"]
    sigma3 = 3.0 * np.sqrt(0.25 / counts["resolved"])
    ok = (resolved_fraction >= 0.99 and abs(freq - 0.5) <= sigma3
          and excluded_fraction < 0.05)
    acceptance_line(
        ok,
        f"10^4-sample two-momentum run: resolved {resolved_fraction:.4f} "
        f">= 0.99, split dev {abs(freq - 0.5):.4f} <= {sigma3:.4f}, "
        f"excluded {excluded_fraction:.4f} < 0.05")


def test_born_rule_histogram(acceptance_line, born_run):
    assert chi2.ppf(0.99, 6) == pytest.approx(CHI2_CRITICAL_6_AT_01, abs=1e-4)
    value = born_run.check("chi_square").value
    acceptance_line(value < CHI2_CRITICAL_6_AT_01,
                    f"7-outcome histogram chi-square {value:.3f} < "
                    f"{CHI2_CRITICAL_6_AT_01} (6 dof at 0.01)")


def test_needle_dependent_outcomes(acceptance_line):
    result = exp_contextuality(seed=0)
    sweep = result.series["sweep"]
    resolved = sweep["outcome_index"][sweep["outcome_index"] >= 0]
    distinct = len(np.unique(resolved))
    spread = np.ptp(sweep["classical_v_r"])
    ok = distinct >= 2 and spread == 0.0
    acceptance_line(ok,
                    f"fixed particle start, swept needle start: {distinct} "
                    f"distinct outcomes (>= 2), classical line spread {spread}")


def test_uncertainty_restored(acceptance_line, sequential_run):
    result = sequential_run
    table = result.series["uncertainty"]
    T = result.parameters["T"]
    after = table["t"] >= T
    n_groups = len(np.unique(table["outcome_index"]))
    min_members = int(table["n_members"].min()) if len(table["n_members"]) else 0
    worst = float(table["product"][after].min()) if after.any() else np.nan
    ok = (n_groups >= 1 and min_members >= 30 and after.any()
          and worst >= 0.5)
    acceptance_line(
        ok,
        f"3000-sample comb measurement: {n_groups} outcome groups "
        f"(smallest {min_members} members), min spread product after "
        f"T={T:g} is {worst:.4f} >= 0.5")


def test_equivariance_preserved(acceptance_line):
    model = make_model([-1.0, 1.0], [0.1, 0.9])
    T = decoherence_time(1.0, 1.0, -1.0, 1.0)
    report = equivariance_check(EnsembleSpec(model, 10_000, seed=0),
                                t=2.0 * T)
    ok = report.p_value > 0.01
    acceptance_line(ok,
                    f"sampled pointer marginal at t = 2T matches quadrature "
                    f"marginal: chi-square p = {report.p_value:.4f} > 0.01 "
                    f"({report.n_used} kept)")


def test_coordinate_readout(acceptance_line):
    result = exp_coordinate(seed=0)
    law = result.check("needle_law_error_max").value
    readout = result.check("readout_error_max").value
    with pytest.raises(ProjectiveLimitError) as err:
        exp_coordinate(lam=1.0, T=3.0)
    report = err.value.validity
    ok = (law <= 1e-9 and readout <= 1e-9
          and report.ratio == 3.0 and not report.valid
          and not projective_validity(3.0, 1.0).valid)
    acceptance_line(
        ok,
        f"linear needle law error {law:.2g} <= 1e-09, readout inversion "
        f"error {readout:.2g} <= 1e-09, ratio-3.0 configuration rejected "
        f"with validity report")


def test_light_mass_fluctuates_more(acceptance_line):
    rough = {}
    for variant in ("b", "c"):
        result = exp_momentum_basic(variant, samples=200, seed=0)
        rough[variant] = result.check("pre_lock_mean_abs_dvr_dt").value
    ok = rough["c"] > rough["b"]
    acceptance_line(ok,
                    f"identical seeds, lighter particle fluctuates more: "
                    f"mean |dv_r/dt| {rough['c']:.3f} (m=0.01) > "
                    f"{rough['b']:.3f} (m=1)")


def test_rerun_byte_identical(acceptance_line, tmp_path):
    outs = []
    for name in ("first", "second"):
        out = tmp_path / name
        code = main(["run", "exp_born", "--samples", "100", "--seed", "7",
                     "--out", str(out)])
        assert code in (0, 1)
        outs.append(out)
    a, b = outs
    same = True
    for f in sorted(p.name for p in a.iterdir()):
        if f == "manifest.json":
            continue
        same = same and (a / f).read_bytes() == (b / f).read_bytes()
    drop = ("created_utc", "wall_time_s")
    ma = {k: v for k, v in json.loads((a / "manifest.json").read_text()).items()
          if k not in drop}
    mb = {k: v for k, v in json.loads((b / "manifest.json").read_text()).items()
          if k not in drop}
    same = same and ma == mb
    acceptance_line(same, "rerun with the same seed and configuration is "
                          "byte-identical (stamps aside)")
