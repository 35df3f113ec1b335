import math

import numpy as np
import pytest

from ng_geometry import verify
from ng_geometry.errors import BadSpec, InfeasibleConstraint
from ng_geometry.verify import VerificationReport


def test_report_pass_logic():
    eq = VerificationReport("x", "equality", np.array([1e-3, -2e-3]), 2e-3, 0, {})
    assert eq.passed and eq.max_abs_residual == 2e-3
    eq.tolerance = 1e-3
    assert not eq.passed
    ineq = VerificationReport("y", "inequality", np.array([0.5, -1e-11]), 1e-10, 0, {})
    assert ineq.passed and ineq.min_slack == -1e-11
    assert "PASS" in ineq.summary()


def test_random_direction_constraints(p4):
    rng = np.random.default_rng(1)
    dp = verify.random_direction(p4, rng, fix_energy=True)
    assert abs(dp.sum()) < 1e-15
    assert abs(np.arange(200) @ dp) < 1e-13
    assert np.all(dp[50:] == 0)
    assert np.all(p4 + 1e-3 * dp > 0)


def test_theorem1_fix_energy():
    report = verify.verify_theorem1(count=20, fix_energy=True)
    assert report.passed
    np.testing.assert_allclose(report.details["dn"], 0, atol=1e-12)


def test_theorem1_zero_scale():
    report = verify.verify_theorem1(count=5, scale=0.0)
    assert report.max_abs_residual == 0
    assert report.config["correction_coefficient"] == pytest.approx(1 / 40, rel=1e-15)


def test_theorem1_rejects_vacuum():
    with pytest.raises(BadSpec):
        verify.verify_theorem1(n_t=0.0, count=1)


def test_reports_reproducible_and_jobs_invariant():
    a = verify.verify_theorem1(count=12, seed=7)
    b = verify.verify_theorem1(count=12, seed=7, jobs=4)
    np.testing.assert_array_equal(a.residuals, b.residuals)
    c = verify.verify_theorem1(count=12, seed=8)
    assert not np.array_equal(a.residuals, c.residuals)


def test_theorem2_zero_scale():
    report = verify.verify_theorem2(count=3, scale=0.0)
    np.testing.assert_allclose(report.residuals, 0, atol=1e-12)


def test_theorem2_small_run():
    report = verify.verify_theorem2(count=10)
    assert report.kind == "inequality"
    assert report.passed
    assert report.min_slack > 0


def test_theorem2_classical_boundary():
    report = verify.verify_theorem2(count=10, scale=1e-4, classical=True)
    assert report.kind == "equality"
    assert report.max_abs_residual <= 1e-10


def test_second_order_report():
    report = verify.verify_second_order(count=10)
    assert report.passed
    assert np.all(report.details["delta_exact"] > 0)


def test_sweep_thermal_zero_row():
    table = verify.sweep_fig1("thermal", eps_list=[0.3, 0.7], n_mu_grid=[3, 4, 5])
    assert table.columns == verify.SWEEP_COLUMNS
    rows = table.select(n_mu=4.0)
    assert len(rows.rows) == 2
    np.testing.assert_allclose(rows.column("delta_exact"), 0, atol=1e-9)
    assert np.all(table.select(n_mu=3.0).column("delta_exact") > 0)


def test_sweep_fock_increasing():
    table = verify.sweep_fig1("fock", eps_list=[0.3], n_mu_grid=range(8))
    assert np.all(np.diff(table.column("delta_exact")) > 0)


def test_sweep_epsilon_panel():
    eps = [0.05, 0.5, 1.0]
    table = verify.sweep_fig1("epsilon", eps_list=eps)
    fock = table.select(panel="epsilon-fock").column("delta_exact")
    poisson = table.select(panel="epsilon-poisson").column("delta_exact")
    assert len(fock) == len(poisson) == 3
    assert np.all(fock > poisson)


def test_sweep_thermal_divergent_second_order_is_inf():
    table = verify.sweep_fig1("thermal", eps_list=[0.3], n_mu_grid=[2, 20])
    second = table.column("delta_2nd")
    assert math.isfinite(second[0]) and math.isinf(second[1])


def test_sweep_guards():
    with pytest.raises(BadSpec, match="Fock target requires integer n_mu"):
        verify.sweep_fig1("fock", n_mu_grid=[2.5])
    with pytest.raises(BadSpec):
        verify.sweep_fig1("wigner")
    with pytest.raises(BadSpec):
        verify.sweep_fig1("poisson", eps_list=[])


def test_search_pinned_point():
    result = verify.search_max_ng(n_t=4.0, eps=0.5, n_mu=1.0, support=2, restarts=2)
    np.testing.assert_allclose(result.target.probs[:2], [0.0, 1.0], atol=1e-12)
    assert result.is_fock and result.support == (1,)


def test_search_infeasible():
    with pytest.raises(InfeasibleConstraint):
        verify.search_max_ng(n_mu=40.0, support=30, restarts=1)


def test_search_feasibility_and_vertices():
    result = verify.search_max_ng(n_mu=3.5, support=12, restarts=4, iterations=100)
    mu = result.target.probs
    assert mu.sum() == pytest.approx(1, abs=1e-12)
    assert np.arange(len(mu)) @ mu == pytest.approx(3.5, abs=1e-10)
    assert len(result.support) <= 2
    assert result.tv_to_fock == math.inf


def test_search_reproducible():
    kwargs = dict(n_mu=4.0, support=10, restarts=3, iterations=50, seed=3)
    a = verify.search_max_ng(**kwargs)
    b = verify.search_max_ng(jobs=3, **kwargs)
    np.testing.assert_array_equal(a.target.probs, b.target.probs)
    assert a.candidates == b.candidates


def test_random_baseline_below_fock():
    values = verify.random_target_baseline(count=20)
    assert np.all(values >= 0)
    assert values.max() < 0.70293499226724858
