import csv
import json

import numpy as np
import pytest

from hsnewton import (FilterFamily, InadmissibleAlpha, ScalingError, SolverConfig, construct_source,
                      make_diagonal_linear, make_noisy, make_quadratic_perturbed, make_scale, make_schedule,
                      newton_step, predicted_stop_index, rescale_to_assumption3b, run)
from hsnewton.problems import NoisyData

TIK = FilterFamily.tikhonov(1)


def _scalar_problem():
    return make_diagonal_linear(1, 0.0, x_truth=np.array([1.0]))


def test_scalar_step_is_half():
    cfg = SolverConfig(TIK, make_schedule("constant", 1, alpha=1.0), np.zeros(1))
    x1 = newton_step(_scalar_problem(), cfg, np.zeros(1), np.array([1.0]))
    assert x1[0] == 0.5


def test_scalar_iteration_halves_the_error():
    prob = _scalar_problem()
    cfg = SolverConfig(TIK, make_schedule("constant", 8, alpha=1.0), np.zeros(1), max_iter=5)
    res = run(prob, cfg, NoisyData(np.array([1.0]), 0.0, 0))
    assert res.stop_reason == "max_iter" and res.n_delta == 5
    np.testing.assert_array_equal(res.residuals, [2.0 ** -n for n in range(6)])


@pytest.mark.parametrize("fam", [FilterFamily.tikhonov(2), FilterFamily.exponential(), FilterFamily.landweber(),
                                 FilterFamily.lardy()], ids=lambda f: f.name)
def test_linear_diagonal_error_is_residual_product(fam):
    # exact data on a linear problem: e_n = prod_k r_{alpha_k}(sigma^2) e_0 componentwise
    prob = make_diagonal_linear(30, 1.0)
    sched = make_schedule("reciprocal_integers", 10, k="linear")
    omega = np.ones(30) / np.sqrt(30)
    src, x0 = construct_source(prob, 0.0, 1.0, omega)
    cfg = SolverConfig(fam, sched, x0, max_iter=6, track_truth=False)
    res = run(prob, cfg, make_noisy(prob, 0.0))
    lam = prob.sigma ** 2
    factor = np.prod([fam.r(a, lam) for a in sched.alphas[:6]], axis=0)
    np.testing.assert_allclose(res.x_final - prob.x_truth, factor * src.e0, rtol=1e-10, atol=1e-16)


def test_hilbert_scale_step_matches_manual_formula():
    prob = make_diagonal_linear(12, 1.0)
    s, alpha = 0.5, 0.5
    x = np.zeros(12)
    y = prob.y_exact
    cfg = SolverConfig(TIK, make_schedule("constant", 2, alpha=alpha), x, s=s)
    got = newton_step(prob, cfg, x, y)
    A = prob.sigma * prob.scale.power(-s)
    manual = x - prob.scale.power(-s) * (A / (alpha + A * A)) * (prob.eval(x) - y)
    np.testing.assert_allclose(got, manual, rtol=1e-14)


def test_spectral_and_iterative_runs_agree():
    prob = make_quadratic_perturbed(40, 1.0, gamma=0.1, rho=1.0)
    prob, _ = rescale_to_assumption3b(prob, 0.0, 1.0)
    _, x0 = construct_source(prob, 0.0, 1.0, np.ones(40) / np.sqrt(40))
    sched = make_schedule("reciprocal_integers", 50, k="linear")
    data = make_noisy(prob, 1e-3, 1)
    for fam in (FilterFamily.tikhonov(2), FilterFamily.lardy()):
        a = run(prob, SolverConfig(fam, sched, x0), data)
        b = run(prob, SolverConfig(fam, sched, x0, filter_mode="iterative"), data)
        assert a.n_delta == b.n_delta and a.stop_reason == "discrepancy"
        np.testing.assert_allclose(a.x_final, b.x_final, rtol=1e-8, atol=1e-12)


def test_discrepancy_stop_is_first_crossing():
    prob = make_diagonal_linear(64, 1.0)
    _, x0 = construct_source(prob, 0.0, 1.0, np.ones(64) / 8)
    cfg = SolverConfig(FilterFamily.exponential(), make_schedule("constant", 10, alpha=1.0), x0, tau=1.5)
    data = make_noisy(prob, 1e-2, 3)
    res = run(prob, cfg, data)
    assert res.stop_reason == "discrepancy"
    r = res.residuals
    assert r[-1] <= 1.5e-2 and np.all(r[:-1] > 1.5e-2)


def test_stopping_index_grows_as_noise_shrinks():
    prob = make_diagonal_linear(64, 1.0)
    _, x0 = construct_source(prob, 0.0, 1.0, np.ones(64) / 8)
    cfg = SolverConfig(TIK, make_schedule("reciprocal_integers", 10, k="linear"), x0)
    n = [run(prob, cfg, make_noisy(prob, d, 0)).n_delta for d in (1e-2, 1e-3, 1e-4, 1e-5)]
    assert n == sorted(n) and n[0] < n[-1]


def test_left_ball_stop():
    prob = make_quadratic_perturbed(10, 1.0, gamma=0.1, rho=0.01)
    x0 = prob.x_truth + 0.5
    cfg = SolverConfig(TIK, make_schedule("constant", 5, alpha=1.0), x0)
    res = run(prob, cfg, make_noisy(prob, 1e-6))
    assert res.stop_reason == "left_ball" and res.n_delta == 0


def test_stagnation_stop():
    # sigma = 1e-9: each step changes the residual by about 1e-18 relative
    prob = make_diagonal_linear(1, 3.0, x_truth=np.array([1.0]), scale=make_scale([1e3]))
    cfg = SolverConfig(FilterFamily.landweber(), make_schedule("constant", 5, alpha=1.0), np.zeros(1))
    res = run(prob, cfg, make_noisy(prob, 1e-12, 0))
    assert res.stop_reason == "stagnation" and res.n_delta == 10


def test_unscaled_problem_rejected():
    prob = make_diagonal_linear(4, 1.0).scaled(2.0)
    cfg = SolverConfig(TIK, make_schedule("constant", 3, alpha=1.0), np.zeros(4))
    with pytest.raises(ScalingError):
        run(prob, cfg, make_noisy(prob, 1e-2))


def test_config_validation():
    sched = make_schedule("constant", 3, alpha=1.0)
    with pytest.raises(ValueError, match="discrepancy principle"):
        SolverConfig(TIK, sched, np.zeros(2), tau=1.0)
    with pytest.raises(InadmissibleAlpha):
        SolverConfig(FilterFamily.landweber(), make_schedule("constant", 3, alpha=0.4), np.zeros(2))
    with pytest.raises(ValueError):
        SolverConfig(TIK, sched, np.zeros(2), filter_mode="magic")
    cfg = SolverConfig(TIK, sched, np.zeros(2), s=-2.0)
    with pytest.raises(ValueError):
        cfg.validate_for(make_diagonal_linear(2, 1.0))


def test_predicted_stop_index_closed_form():
    # s_n = n + 1, exponent 1: smallest n with 1/(n+1) <= (tau-1) delta / (2 c0 ||omega||)
    sched = make_schedule("constant", 10, alpha=1.0)
    assert predicted_stop_index(sched, 1.0, 0.0, 1.0, 1.0, 2.0, 2.0, 1e-3) == 3999
    # a + mu = 2(a + s) with s = 0.5, mu = 2: same exponent
    assert predicted_stop_index(sched, 1.0, 0.5, 2.0, 0.5, 3.0, 2.0, 1e-2) == 99
    with pytest.raises(ValueError):
        predicted_stop_index(sched, 1.0, 0.0, 1.0, 1.0, 2.0, 2.0, 0.0)
    with pytest.raises(ValueError):
        predicted_stop_index(sched.from_alphas(np.ones(5)), 1.0, 0.0, 1.0, 1.0, 2.0, 2.0, 1e-3)


def test_result_serialization(tmp_path):
    prob = make_diagonal_linear(16, 1.0)
    _, x0 = construct_source(prob, 0.0, 1.0, np.ones(16) / 4)
    cfg = SolverConfig(TIK, make_schedule("constant", 4, alpha=1.0), x0, error_norms={"err_0": 0.0})
    res = run(prob, cfg, make_noisy(prob, 1e-2, 0))
    res.to_json(tmp_path / "r.json")
    back = json.loads((tmp_path / "r.json").read_text())
    assert back["n_delta"] == res.n_delta and back["stop_reason"] == "discrepancy"
    res.history_csv(tmp_path / "h.csv")
    rows = list(csv.DictReader(open(tmp_path / "h.csv")))
    assert len(rows) == res.n_delta + 1
    assert rows[0]["err_0"] and rows[0]["err_mu"] == ""
    assert res.error("err_0") == pytest.approx(np.linalg.norm(res.x_final - prob.x_truth))
