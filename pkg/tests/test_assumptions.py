import json
import math

import numpy as np
import pytest
from scipy import integrate

from hsnewton import (AssumptionCheckConfig, FilterFamily, check_assumption1, check_assumption2, contour_arcs,
                      lemma1_probe, make_schedule)
from hsnewton.filters import InadmissibleAlpha


def test_contour_lengths():
    # the |dz| weights integrate 1 to the arc lengths
    alpha, R, phi0 = 0.1, 1.5, math.pi / 6
    arcs = contour_arcs(alpha, R, phi0, nodes=256, order=32)
    lengths = [w.sum() for _, w in arcs]
    expected = [alpha / 2 * (2 * math.pi - 2 * phi0), R * 2 * phi0, R - alpha / 2, R - alpha / 2]
    np.testing.assert_allclose(lengths, expected, rtol=1e-13)


def test_contour_avoids_spectrum():
    for z, _ in contour_arcs(0.01, 1.5, math.pi / 6):
        on_interval = (np.abs(z.imag) < 1e-12) & (z.real >= 0) & (z.real <= 1)
        assert not on_interval.any()


def test_contour_integral_against_adaptive_quadrature():
    fam, alpha = FilterFamily.exponential(), 0.1
    rep = check_assumption1(fam, alpha)
    R, phi0 = fam.contour_R, fam.contour_phi0
    r0 = alpha / 2

    def f(z):
        return abs(fam.phi(alpha, z))

    parts = [
        integrate.quad(lambda t: f(r0 * np.exp(1j * t)) * r0, phi0, 2 * math.pi - phi0, limit=200)[0],
        integrate.quad(lambda t: f(R * np.exp(1j * t)) * R, -phi0, phi0, limit=200)[0],
        integrate.quad(lambda t: f(t * np.exp(1j * phi0)), r0, R, limit=200)[0],
        integrate.quad(lambda t: f(t * np.exp(-1j * phi0)), r0, R, limit=200)[0],
    ]
    assert rep.b1_integral == pytest.approx(sum(parts), rel=1e-8)
    assert rep.refinement_ok


def test_tikhonov_integral_vanishes_and_b0():
    rep = check_assumption1(FilterFamily.tikhonov(1), 0.01)
    assert rep.b1_integral == 0.0
    assert rep.quadrature_refinement_delta == 0.0
    # the worst ratio sits on the rays, bounded by 1/sin(phi0) + 1 type constants
    assert 1.0 < rep.b0_estimate < 10.0
    assert json.loads(json.dumps(rep.to_dict()))["family"] == "tikhonov(N=1)"


def test_assumption1_rejects_inadmissible():
    with pytest.raises(InadmissibleAlpha):
        check_assumption1(FilterFamily.landweber(), 0.3)
    with pytest.raises(ValueError):
        check_assumption1(FilterFamily.exponential(contour_R=1.2), 2.0)


def test_assumption2_direct_oracle_small_grid():
    fam = FilterFamily.tikhonov(2)
    sched = make_schedule("geometric", 6, alpha0=1.0, q=0.5)
    lam = np.linspace(0, 1, 41)
    cfg = AssumptionCheckConfig(nu_grid=[0.0, 0.5, 1.0], lambda_grid=lam, n_max=5)
    rep = check_assumption2(fam, sched, cfg)
    s = sched.s
    best1 = best2 = 0.0
    for j in range(6):
        sp = 0.0 if j == 0 else s[j - 1]
        for n in range(j, 6):
            prod = np.ones_like(lam)
            for k in range(j + 1, n + 1):
                prod *= fam.r(sched.alphas[k], lam)
            for nu in (0.0, 0.5, 1.0):
                w = lam ** nu * (s[n] - sp) ** nu
                best1 = max(best1, float(np.max(w * fam.r(sched.alphas[j], lam) * prod)))
                best2 = max(best2, float(np.max(w * fam.g(sched.alphas[j], lam) * prod * sched.alphas[j])))
    assert rep.max_V1 == pytest.approx(best1, rel=1e-14)
    assert rep.b2_estimate == pytest.approx(best2, rel=1e-14)
    assert rep.passed


def test_tikhonov_b2_equals_order_at_zero():
    # at lam = 0, nu = 0: alpha g_alpha(0) = N
    for N in (1, 2, 3):
        rep = check_assumption2(FilterFamily.tikhonov(N), make_schedule("constant", 11, alpha=1.0),
                                AssumptionCheckConfig(n_max=10))
        assert rep.b2_estimate == pytest.approx(N)
        assert N <= 2 ** N - 1


def test_assumption2_reports_argmax():
    rep = check_assumption2(FilterFamily.exponential(), make_schedule("constant", 11, alpha=1.0),
                            AssumptionCheckConfig(n_max=10))
    assert set(rep.argmax_V1) == {"j", "n", "nu", "lam"}


def test_assumption2_rejects_inadmissible_schedule():
    with pytest.raises(InadmissibleAlpha):
        check_assumption2(FilterFamily.lardy(), make_schedule("geometric", 5, alpha0=1.0, q=0.3))


@pytest.mark.parametrize("kind, params", [("constant", {"alpha": 1.0}),
                                          ("geometric", {"alpha0": 1.0, "q": 0.5}),
                                          ("reciprocal_integers", {"k": "linear"})])
def test_resolvent_product_bound(kind, params):
    # Tikhonov N=1 satisfies the bound with constant 2
    assert lemma1_probe(make_schedule(kind, 31, **params), n_max=30) <= 1.0 + 1e-12


def test_config_validation():
    with pytest.raises(ValueError):
        AssumptionCheckConfig(nu_grid=[1.5])
    with pytest.raises(ValueError):
        AssumptionCheckConfig(quadrature_nodes=100, panel_order=32)
