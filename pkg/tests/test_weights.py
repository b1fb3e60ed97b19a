import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import ndimage

from pstaic import linops
from pstaic.models import pstaic_model
from pstaic.weights import (
    ConstantTau,
    MotionAdaptiveTau,
    WeightCoeffs,
    barrier,
    compute_coeffs,
    solve_weight,
    weight_cost,
    weight_cost_derivative,
)

coef = st.floats(0, 1e3)
taus = st.floats(1e-3, 10)


def textbook(c):
    # the un-rationalised closed form, fine away from mu = 0
    mu = c.mu
    return 0.5 * (1 - math.copysign(1, mu) * (math.sqrt(4 * c.tau**2 / mu**2 + 1) - 2 * c.tau / abs(mu)))


def test_barrier():
    assert barrier(0.5, 1.0) == pytest.approx(-math.log(0.25))
    for a in (0.0, 1.0, -0.1, 1.2):
        assert barrier(a, 1.0) == math.inf
    with pytest.raises(ValueError):
        barrier(0.5, 0.0)


def test_coeff_validation():
    with pytest.raises(ValueError):
        WeightCoeffs(-1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        WeightCoeffs(1.0, 0.0, 0.0)
    assert WeightCoeffs(1.0, 1.0, 1.0).zeta == math.inf
    assert WeightCoeffs(3.0, 1.0, 1.0).zeta == pytest.approx(1.0)


@given(coef, coef, taus)
def test_solution_is_stationary_and_inside(c1, c2, tau):
    c = WeightCoeffs(c1, c2, tau)
    a = solve_weight(c)
    assert 0.0 < a < 1.0
    # scale-aware stationarity: the derivative terms cancel
    scale = abs(c.mu) + tau / a + tau / (1 - a)
    assert abs(weight_cost_derivative(a, c)) <= 1e-9 * scale


@given(coef, coef, taus)
def test_swap_symmetry_and_sign_rule(c1, c2, tau):
    c = WeightCoeffs(c1, c2, tau)
    a = solve_weight(c)
    assert solve_weight(c.swapped()) == pytest.approx(1 - a, abs=1e-12)
    assert np.sign(a - 0.5) == np.sign(-(c1 - c2)) or abs(a - 0.5) < 1e-15


@given(st.floats(0.1, 100), st.floats(0.1, 100), st.floats(0.05, 10))
def test_matches_textbook_formula_when_well_conditioned(c1, c2, tau):
    c = WeightCoeffs(c1, c2, tau)
    if abs(c.mu) > 1e-3:
        assert solve_weight(c) == pytest.approx(textbook(c), abs=1e-9)


def test_limits():
    assert solve_weight(WeightCoeffs(2.0, 2.0, 1.0)) == 0.5
    # a vanishing barrier puts all weight on the cheaper term
    assert solve_weight(WeightCoeffs(10.0, 0.0, 1e-9)) < 1e-9
    assert solve_weight(WeightCoeffs(0.0, 10.0, 1e-9)) > 1 - 1e-9
    # a dominant barrier pins the weight at 1/2
    assert solve_weight(WeightCoeffs(10.0, 0.0, 1e9)) == pytest.approx(0.5, abs=1e-8)


def test_cost_is_lowest_at_solution():
    c = WeightCoeffs(3.0, 1.0, 0.5)
    a = solve_weight(c)
    grid = np.linspace(0.001, 0.999, 999)
    assert weight_cost(a, c) <= min(weight_cost(x, c) for x in grid)
    assert weight_cost(1.0, c) == math.inf


def test_tau_policies():
    f = np.zeros((2, 4, 5, 6))
    assert ConstantTau(2.0)(f, 0.5) == pytest.approx(2.0 * 0.5 * 120)
    assert ConstantTau(2.0, per_pixel=False)(f, 0.5) == 2.0
    with pytest.raises(ValueError):
        ConstantTau(0.0)
    # a static estimate keeps the full strength, motion lowers it
    static = np.ones((2, 5, 6, 6))
    assert MotionAdaptiveTau(3.0)(static, 1.0) == pytest.approx(ConstantTau(3.0)(static, 1.0))
    moving = static.copy()
    moving[0, 2] += 5.0
    assert MotionAdaptiveTau(3.0)(moving, 1.0) < MotionAdaptiveTau(3.0)(static, 1.0)
    short = np.ones((2, 2, 6, 6))
    assert MotionAdaptiveTau(3.0)(short, 1.0) == ConstantTau(3.0)(short, 1.0)


def test_compute_coeffs_against_direct_filters():
    rng = np.random.default_rng(5)
    f = rng.normal(size=(2, 4, 8, 8))
    h = linops.Kernel(np.ones((3, 3)) / 9)
    lam = 0.3
    c = compute_coeffs(f, lam, pstaic_model(h), tau=1.0)

    def conv(x, k):
        return ndimage.convolve(x, k.taps, mode="wrap")

    five = [
        linops.second_derivative("x"),
        linops.mixed_derivative("x", "y"),
        linops.mixed_derivative("y", "x"),
        linops.second_derivative("y"),
        linops.delta(),
    ]
    diff = np.stack([conv(f[0], k) - conv(f[1], k) for k in five])
    nine = [linops.second_derivative(a) for a in "xyt"]
    nine += [linops.mixed_derivative(a, b) for a in "xyt" for b in "xyt" if a != b]
    temporal = np.stack([conv(f[1], k) for k in nine])
    assert c.c1 == pytest.approx(lam * np.sum(np.sqrt(np.sum(diff**2, axis=0))), rel=1e-12)
    assert c.c2 == pytest.approx(lam * np.sum(np.sqrt(np.sum(temporal**2, axis=0))), rel=1e-12)
