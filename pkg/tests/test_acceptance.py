"""Acceptance criteria 1-9; each test records a PASS/FAIL line for the summary."""

import math
import os
import time

import numpy as np
import pytest

from phfcox import cli, cox, simulate, survstats
from phfcox._rng import substream
from phfcox.cubical import persistence_of
from phfcox.fpca import fit_fpca, project_many, reconstruct, select_rank
from phfcox.imaging import Label, LabelVolume, sedt3
from phfcox.simulate import SimConfig
from phfcox.surface import PersistenceSurface, SurfaceGrid

import oracles
from synthetic import write_cli_inputs

pytestmark = pytest.mark.acceptance


def test_criterion_1_edt_oracle(record_criterion):
    rng = np.random.default_rng(101)
    vols = [oracles.random_label_volume(rng, (16, 16, 16)) for _ in range(20)]
    t0 = time.perf_counter()
    fields = [sedt3(LabelVolume(v)).values for v in vols]
    elapsed = time.perf_counter() - t0
    mismatches = 0
    for lab, f in zip(vols, fields):
        for cls in (Label.AT, Label.NON_AT):
            for p, d2 in oracles.brute_sq_edt(lab, cls).items():
                sq = f[p] ** 2
                mismatches += int(round(sq) != d2 or abs(sq - d2) > 1e-9 * max(d2, 1))
    ok = mismatches == 0 and elapsed < 10
    record_criterion(1, ok, f"{mismatches} mismatches over 20 volumes of 16^3, sedt3 time {elapsed:.2f}s")
    assert ok


def test_criterion_2_persistence_oracle(record_criterion):
    rng = np.random.default_rng(202)
    vols = [rng.integers(-5, 6, size=(8, 8, 8)).astype(float) for _ in range(20)]
    t0 = time.perf_counter()
    ours = [persistence_of(v) for v in vols]
    elapsed = time.perf_counter() - t0
    bad = 0
    for v, dg in zip(vols, ours):
        got = {d.dim: sorted(map(tuple, d.pairs.tolist())) for d in dg}
        bad += int(got != oracles.naive_persistence(v, rng))
    ok = bad == 0 and elapsed < 60
    record_criterion(2, ok, f"{bad}/20 diagram sets differ from the naive reduction, time {elapsed:.2f}s")
    assert ok


def test_criterion_3_dim0_essentials(record_criterion):
    rng = np.random.default_rng(303)
    bad = 0
    for _ in range(50):
        lab = oracles.random_label_volume(rng, (7, 6, 5), p=(0.5, 0.25, 0.25))
        d0 = persistence_of(sedt3(LabelVolume(lab)))[0]
        bad += int(np.isinf(d0.deaths).sum() != oracles.union_find_components(lab != Label.NON_TUMOR))
    record_criterion(3, bad == 0, f"{bad}/50 volumes with a component-count mismatch")
    assert bad == 0


def test_criterion_4_fpca(record_criterion):
    rng = np.random.default_rng(404)
    g = SurfaceGrid(-3, 3, 0, 4, 9, 7)
    surf = [PersistenceSurface(g, rng.gamma(2.0, size=g.shape), 0, 1.0) for _ in range(12)]
    m = fit_fpca(surf, 1 - 1e-12)
    S = project_many(surf, m)
    rec_err = max(np.abs(reconstruct(s, m).values - x.values).max() for s, x in zip(S, surf))
    cov = S.T @ S / len(surf)
    diag_err = np.max(np.abs(np.diag(cov) - m.eigenvalues[:m.rank]) / m.eigenvalues[:m.rank])
    off = np.max(np.abs(cov - np.diag(np.diag(cov)))) / m.eigenvalues[0]
    rank = select_rank((8, 1, 1), 0.9)
    ok = rec_err <= 1e-8 and diag_err <= 1e-6 and off <= 1e-6 and rank == 3
    record_criterion(4, ok, f"reconstruction {rec_err:.2e}, diag rel err {diag_err:.2e}, "
                            f"off-diag {off:.2e}, rank(8,1,1;0.9)={rank}")
    assert ok


def test_criterion_5_cox(record_criterion):
    rng = np.random.default_rng(505)
    coef_err, grad_err, nonzero = 0.0, 0.0, 0
    for _ in range(10):
        X = rng.normal(size=(50, 3))
        t = rng.exponential(np.exp(-X @ np.array([0.7, -0.4, 0.2])))
        e = (rng.uniform(size=50) < 0.8).astype(int)
        fit = cox.fit_penalized_cox(X, t, e, 0.0)
        coef_err = max(coef_err, np.abs(fit.coef - oracles.newton_cox(X, t, e)).max())
        b = rng.normal(size=3) * 0.5
        _, g = cox.neg_log_partial_likelihood(b, X, t, e)
        h = 1e-5
        fd = [(-oracles.breslow_loglik(b + h * np.eye(3)[j], X, t, e)
               + oracles.breslow_loglik(b - h * np.eye(3)[j], X, t, e)) / (2 * h * 50) for j in range(3)]
        grad_err = max(grad_err, np.abs(g - fd).max())
        pen = np.array([False, True, True])
        lmax = cox.lambda_max(X, t, e, pen)
        nonzero += int(np.count_nonzero(cox.fit_penalized_cox(X, t, e, lmax, penalized=pen).coef[1:]))
    ok = coef_err <= 1e-6 and grad_err <= 1e-6 and nonzero == 0
    record_criterion(5, ok, f"max |coef - Newton| {coef_err:.2e}, max |grad - FD| {grad_err:.2e}, "
                            f"nonzero penalized at lambda_max: {nonzero}")
    assert ok


def test_criterion_6_survival_stats(record_criterion):
    res = survstats.log_rank_test([1, 3, 5], [1, 1, 0], [2, 4, 6], [1, 0, 1])
    km = survstats.kaplan_meier([1, 3, 5], [1, 1, 0])
    errs = [abs(res.expected[0] - 1.4), abs(res.variance - 0.74), abs(res.statistic - 0.36 / 0.74),
            abs(km.survival[0] - 2 / 3), abs(km.survival[1] - 1 / 3),
            abs(km.variance[1] - (1 / 9) * (1 / 6 + 1 / 2))]
    same = survstats.log_rank_test([1, 3, 5], [1, 1, 0], [1, 3, 5], [1, 1, 0]).p_value
    split = survstats.median_risk_split(np.random.default_rng(6).permutation(133).astype(float))
    ok = max(errs) <= 1e-10 and same == 1.0 and (split.high.size, split.low.size) == (67, 66)
    record_criterion(6, ok, f"max oracle error {max(errs):.1e}, identical-group p={same}, "
                            f"split {split.high.size}/{split.low.size}")
    assert ok


def test_criterion_7_hazard_generation(record_criterion):
    cfg = SimConfig()
    rng = substream(707, "acceptance")
    groups = rng.choice(["A", "B"], size=100_000)
    frontal = (rng.uniform(size=100_000) < cfg.frontal_fraction).astype(int)
    _, e = simulate.simulate_survival_many(groups, frontal, cfg, rng)
    cens = 1 - e.mean()

    sub = SimConfig(n=5000)
    g, f = simulate.assign_groups(sub, rng)
    t, e = simulate.simulate_survival_many(g, f, sub, rng)
    X = np.column_stack([(g == "B") & (f == 1), (g == "B") & (f == 0), (g == "A") & (f == 1)]).astype(float)
    fit = cox.fit_penalized_cox(X, t, e, 0.0)
    se = np.sqrt(np.diag(np.linalg.inv(cox.neg_log_partial_likelihood_hessian(fit.coef, X, t, e) * 5000)))
    truth = np.array([0.8, 0.4, -0.2])
    covered = np.abs(fit.coef - truth) <= 1.959963984540054 * se
    ok = 0.12 <= cens <= 0.18 and covered.all()
    record_criterion(7, ok, f"censoring {cens:.4f}; log-HR {np.round(fit.coef, 3).tolist()} "
                            f"+/- {np.round(1.96 * se, 3).tolist()}")
    assert ok


@pytest.fixture(scope="module")
def simulation_report():
    cfg = SimConfig(n=140, n_datasets=50, sigma=2.0, seed=2024, workers=os.cpu_count() or 1)
    return simulate.run_simulation(cfg)


def _region_means(report):
    avg = report.average_surface(0, "main")
    x = report.common_grid.x_centers
    return float(avg[x <= -15].mean()), float(avg[(x >= -10) & (x <= -3)].mean())


@pytest.mark.slow
def test_criterion_8a_power(simulation_report, record_criterion):
    frac = simulation_report.fraction_significant()
    n_ok = len(simulation_report.ok)
    ok = frac >= 0.70 and n_ok == 50
    record_criterion("8a", ok, f"p<0.05 in {frac:.2f} of {n_ok} datasets (need >= 0.70)")
    assert ok


@pytest.mark.slow
def test_criterion_8b_coefficient_sign_pattern(simulation_report, record_criterion):
    a_body, b_clusters = _region_means(simulation_report)
    ok = a_body * b_clusters < 0
    record_criterion("8b", ok, f"mean beta0 at birth<=-15: {a_body:.3e}; birth in [-10,-3]: {b_clusters:.3e}")
    assert ok


@pytest.mark.slow
def test_criterion_8c_risk_ordering(simulation_report, record_criterion):
    frac = simulation_report.fraction_ordered()
    ok = frac >= 0.70
    record_criterion("8c", ok, f"B-frontal > B-nonfrontal > A-nonfrontal in {frac:.2f} of datasets (need >= 0.70)")
    assert ok


def test_criterion_9_determinism(tmp_path, record_criterion):
    diagrams, clinical = write_cli_inputs(tmp_path, n=20, seed=9)
    fit_args = ["fit", "--diagrams", str(diagrams), "--clinical", str(clinical), "--sigma-grid", "0.5,1.0",
                "--n-folds", "3", "--n-lambda", "6", "--resolution", "10,10", "--dims", "0,1",
                "--seed", "9", "--tuning-csv"]
    sim_args = ["simulate", "--seed", "9", "--n-datasets", "2", "--n", "20", "--n-folds", "3"]
    for run in ("r1", "r2"):
        assert cli.main([*fit_args, "--out", str(tmp_path / run / "fit")]) == 0
        assert cli.main([*sim_args, "--out", str(tmp_path / run / "sim")]) == 0
    files = sorted(p.relative_to(tmp_path / "r1") for p in (tmp_path / "r1").rglob("*") if p.is_file())
    differ = [str(p) for p in files if (tmp_path / "r1" / p).read_bytes() != (tmp_path / "r2" / p).read_bytes()]
    ok = not differ and len(files) >= 9
    record_criterion(9, ok, f"{len(files)} output files compared, {len(differ)} differ {differ}")
    assert ok
