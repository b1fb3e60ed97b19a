import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pstaic.linops import A_S, P_S
from pstaic.prox import BoxSet, prox_As, prox_box, prox_data, prox_group_l2, prox_pair_difference

vec = st.floats(-50, 50, allow_nan=False)


def group_objective(z, x, t):
    return 0.5 * np.sum((z - x) ** 2) + t * np.linalg.norm(z)


def test_prox_data_closed_form():
    # stationarity: rho (z - x) + (z - m) = 0
    x, m, rho = np.array([1.0, -2.0]), np.array([3.0, 0.5]), 0.7
    z = prox_data(x, m, rho)
    assert np.allclose(rho * (z - x) + (z - m), 0.0)
    with pytest.raises(ValueError):
        prox_data(x, m, 0.0)


def test_group_l2_zero_inside_threshold():
    x = np.array([[0.3], [0.4]])
    assert np.all(prox_group_l2(x, 0.5) == 0.0)
    assert np.all(prox_group_l2(np.zeros((3, 2)), 1.0) == 0.0)
    assert np.allclose(prox_group_l2(x, 0.25), x * 0.5)
    assert np.array_equal(prox_group_l2(x, 0.0), x)
    with pytest.raises(ValueError):
        prox_group_l2(x, -1.0)


@given(arrays(np.float64, (9,), elements=vec), st.floats(0, 30))
def test_group_l2_beats_perturbations(x, t):
    z = prox_group_l2(x, t)
    best = group_objective(z, x, t)
    rng = np.random.default_rng(0)
    for d in rng.normal(size=(20, 9)) * 1e-3:
        assert best <= group_objective(z + d, x, t) + 1e-12


@given(arrays(np.float64, (10, 3), elements=vec), st.floats(0, 30))
def test_pair_prox_matches_eigenbasis_form(y, t):
    # the explicit P-basis construction: shrink the range coordinates only
    coords = P_S.T @ y
    coords[:5] = prox_group_l2(coords[:5], t)
    assert np.allclose(prox_pair_difference(y, t), P_S @ coords, atol=1e-10)


@given(arrays(np.float64, (10,), elements=vec), st.floats(0.01, 5), st.floats(0.01, 0.99), st.floats(0.1, 5))
def test_prox_As_keeps_pair_mean(y, lam, alpha, rho):
    z = prox_As(y, lam, alpha, rho)
    # the null space of A_s (pair means) passes through unchanged
    assert np.allclose(z[:5] + z[5:], y[:5] + y[5:], atol=1e-10)
    # and the A_s coordinates never grow
    assert np.linalg.norm(A_S @ z) <= np.linalg.norm(A_S @ y) + 1e-10


def test_prox_As_axis_and_validation():
    y = np.random.default_rng(1).normal(size=(3, 10, 2))
    assert np.allclose(prox_As(y, 1.0, 0.5, 1.0, axis=1), np.moveaxis(prox_As(np.moveaxis(y, 1, 0), 1.0, 0.5, 1.0), 0, 1))
    with pytest.raises(ValueError):
        prox_As(np.zeros(9), 1.0, 0.5, 1.0)
    with pytest.raises(ValueError):
        prox_As(np.zeros(10), 1.0, 0.5, 0.0)
    with pytest.raises(ValueError):
        prox_pair_difference(np.zeros(7), 1.0)


def test_box():
    box = BoxSet(0.0, 2.0)
    x = np.array([-1.0, 0.5, 3.0])
    assert np.array_equal(prox_box(x, box), [0.0, 0.5, 2.0])
    assert box.contains(prox_box(x, box)) and not box.contains(x)
    assert BoxSet().contains(np.array([0.0, 1e300]))
    with pytest.raises(ValueError):
        BoxSet(1.0, 0.0)
