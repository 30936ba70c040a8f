import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import integrate

from almgren_lab import (
    AngularGrid1D,
    DomainError,
    HalfBallGrid,
    InputError,
    WeightParams,
    integrate_halfball,
    integrate_halfsphere,
)
from almgren_lab.core import graded_breaks, power_rule

ONE = lambda rho, ang: np.ones(np.broadcast(rho, ang).shape)


def test_weight_params_invariants():
    p = WeightParams(s=1.25, N=3, R=2.0)
    assert p.b == 3.0 - 2.0 * p.s
    assert -1.0 < p.b < 1.0
    assert p.alpha == pytest.approx(p.s - 1.0)
    assert p.paper_regime  # 3 > 2.5
    assert not WeightParams(s=1.5, N=1).paper_regime
    q = WeightParams.from_b(-0.5, 4)
    assert q.b == pytest.approx(-0.5)


@pytest.mark.parametrize("bad", [{"s": 0.9, "N": 1}, {"s": 2.0, "N": 1},
                                 {"s": 1.5, "N": 0}, {"s": 1.5, "N": 2, "R": -1.0}])
def test_weight_params_rejects(bad):
    with pytest.raises(DomainError):
        WeightParams(**bad)


def test_power_rule_exact_on_linear():
    breaks = graded_breaks(1.0, 37, grade_start=True)
    for p in (-0.5, 0.0, 0.7, 2.5):
        nodes, weights = power_rule(breaks, p)
        assert np.all(weights >= 0)
        got = weights @ (3.0 + 2.0 * nodes)
        want = 3.0 / (p + 1) + 2.0 / (p + 2)
        assert_allclose(got, want, rtol=1e-13)


def test_power_rule_rejects_nonintegrable():
    with pytest.raises(DomainError):
        power_rule(np.array([0.0, 1.0]), -1.0)


def test_halfball_unweighted_halfdisk_area(params_n1):
    # f = 1, N = 1, b = 0, r = 1: area of the half disk
    got = integrate_halfball(ONE, params_n1, 1.0)
    assert_allclose(got, math.pi / 2, rtol=1e-9)


def test_halfball_measure_homogeneity(params_n1):
    # scaling r^{N+b+1}: r = 2 gives 2 pi
    got = integrate_halfball(ONE, params_n1, 2.0, n_radial=128, n_angular=256)
    assert_allclose(got, 2 * math.pi, rtol=1e-9)


def test_halfball_weighted_against_adaptive_oracle():
    # frozen from scipy.integrate.dblquad over the half disk with weight t^0.5
    p = WeightParams.from_b(0.5, 1)
    got = integrate_halfball(ONE, p, 1.0)
    assert_allclose(got, 0.9585121877884734, rtol=1e-5)
    fine = integrate_halfball(ONE, p, 1.0, n_radial=1024, n_angular=8192)
    assert_allclose(fine, 0.9585121877884734, rtol=1e-7)
    # regenerate the oracle here so the frozen value stays auditable
    val, err = integrate.dblquad(
        lambda t, x: t ** 0.5, -1, 1, 0, lambda x: math.sqrt(1 - x * x),
        epsabs=1e-12, epsrel=1e-12,
    )
    assert_allclose(val, 0.9585121877884734, rtol=1e-10)


def test_halfsphere_halfcircle_length(params_n1):
    got = integrate_halfsphere(lambda a: np.ones_like(a), params_n1, 1.0)
    assert_allclose(got, math.pi, rtol=1e-12)


def test_halfsphere_theta_squared(params_n1):
    # g = theta_2^2 on the unit half circle: int_0^pi sin^2 = pi/2
    got = integrate_halfsphere(lambda a: np.sin(a) ** 2, params_n1, 1.0,
                               n_angular=4096)
    assert_allclose(got, math.pi / 2, rtol=1e-7)


@pytest.mark.parametrize("fixture", ["params_n1", "params_n3", "params_n4"])
def test_euler_homogeneity_of_weighted_measure(fixture, request):
    # int_{S_r^+} t^b dS = (N+b+1) r^{-1} int_{B_r^+} t^b dz
    p = request.getfixturevalue(fixture)
    r = 0.8
    sphere = integrate_halfsphere(lambda a: np.ones_like(a), p, r)
    ball = integrate_halfball(ONE, p, r)
    assert_allclose(sphere, (p.N + p.b + 1) / r * ball, rtol=1e-9)


@pytest.mark.parametrize("fixture", ["params_n1", "params_n3"])
def test_refinement_order_on_smooth_integrand(fixture, request):
    p = request.getfixturevalue(fixture)
    g = lambda a: np.cos(1.7 * a) + 0.3 * a
    ref = integrate_halfsphere(g, p, 1.0, n_angular=65536)
    errs = []
    for n in (256, 512, 1024):
        errs.append(abs(integrate_halfsphere(g, p, 1.0, n_angular=n) - ref))
    # doubling the grid shrinks the error by at least 3.5 (order >= 1.8)
    assert errs[0] / errs[1] >= 3.5
    assert errs[1] / errs[2] >= 3.5


def test_all_quadrature_weights_nonnegative(params_n3, params_n1):
    for p in (params_n1, params_n3):
        g = HalfBallGrid.build(p)
        assert np.all(g.radial_weights >= 0)
        assert np.all(g.angular.weights >= 0)


def test_radius_outside_coverage_raises(params_n1):
    grid = HalfBallGrid.build(params_n1)
    with pytest.raises(DomainError):
        grid.integrate(ONE, 1.5)


def test_nonfinite_sample_raises(params_n1):
    with pytest.raises(InputError):
        integrate_halfball(lambda rho, a: np.full(np.broadcast(rho, a).shape, np.nan),
                           params_n1, 1.0)


def test_normalized_hemisphere_eigenfunction_cross_check(params_n3, modes_n3):
    # the squared full eigenfunction Y = P(psi) Omega integrates to
    # R^{N+b+1}/(N+b+1) over the half ball, i.e. the angular factor is 1
    from almgren_lab.core import unit_sphere_area

    p = params_n3
    mode = next(m for m in modes_n3 if m.k == 0 and m.mu > 1)  # nonconstant k=0
    area = unit_sphere_area(p.N - 1)  # |Omega_0|^2 = 1/area for k = 0
    got = integrate_halfball(
        lambda rho, ang: np.broadcast_to(mode.profile(ang) ** 2 / area,
                                         np.broadcast(rho, ang).shape),
        p, p.R, n_angular=4096,
    )
    want = p.R ** (p.N + p.b + 1) / (p.N + p.b + 1)
    assert_allclose(got, want, rtol=2e-6)
