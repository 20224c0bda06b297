import math

import numpy as np
import pytest

from mrclc.dynamics import (
    PlantModel, ReferenceModel, ReferenceSignal, eval_basis, get_basis,
    plant_derivative, reference_derivative, rk4_step, signal_value,
)
from mrclc.errors import NonFiniteOutput, NotHurwitz

W_STAR = np.array([1.0, -1.0, 0.5])
BASIS = get_basis("inverted_pendulum")
PLANT = PlantModel(Lam=[[0.0, 1.0], [0.0, 0.0]], W_true=W_STAR, basis=BASIS)
SCHEDULE = ReferenceSignal(segments=((20.0, 25.0, 1.0),), default=0.0)
REF = ReferenceModel(A_r=[[0.0, 1.0], [-1.0, -2.0]], b_r=1.0, signal=SCHEDULE)


@pytest.mark.parametrize(
    "x, expected",
    [
        ([0.0, 0.0], [0.0, 0.0, 1.0]),
        ([math.pi / 2, -2.0], [1.0, -4.0, math.exp(-math.pi)]),
        ([1.0, 1.0], [math.sin(1.0), 1.0, math.e]),
    ],
)
def test_pendulum_basis(x, expected):
    np.testing.assert_allclose(eval_basis(BASIS, np.array(x)), expected, rtol=1e-15, atol=1e-15)


def test_basis_overflow_is_reported():
    with pytest.raises(NonFiniteOutput):
        eval_basis(BASIS, np.array([40.0, 40.0]))


def test_plant_derivative_examples():
    np.testing.assert_allclose(plant_derivative(PLANT, [0.0, 0.0], 0.0), [0.0, 0.5])
    np.testing.assert_allclose(plant_derivative(PLANT, [0.0, 0.0], -0.5), [0.0, 0.0], atol=1e-16)
    expected = [1.0, math.sin(1.0) - 1.0 + 0.5 * math.e]
    np.testing.assert_allclose(plant_derivative(PLANT, [1.0, 1.0], 0.0), expected, rtol=1e-15)


def test_companion_structure_is_exact():
    rng = np.random.default_rng(0)
    for _ in range(50):
        x = rng.normal(size=2)
        assert plant_derivative(PLANT, x, rng.normal())[0] == x[1]


def test_reference_derivative_examples():
    np.testing.assert_allclose(reference_derivative(REF, [1.0, 1.0], 0.0), [1.0, -3.0])
    np.testing.assert_allclose(reference_derivative(REF, [1.0, 1.0], 22.0), [1.0, -2.0])
    np.testing.assert_allclose(reference_derivative(REF, [0.0, 0.0], 3.0), [0.0, 0.0])


def test_reference_model_requires_hurwitz():
    with pytest.raises(NotHurwitz):
        ReferenceModel(A_r=[[0.0, 1.0], [0.0, 0.0]], b_r=1.0)


@pytest.mark.parametrize("t, expected", [(10.0, 0.0), (22.0, 1.0), (25.0, 0.0), (20.0, 1.0), (19.999, 0.0)])
def test_signal_schedule(t, expected):
    assert signal_value(SCHEDULE, t) == expected


def test_signal_rejects_overlap():
    with pytest.raises(ValueError):
        ReferenceSignal(segments=((0.0, 2.0, 1.0), (1.0, 3.0, 2.0)))


def _integrate(deriv, y0, h, t_end):
    y, steps = np.array(y0, dtype=float), int(round(t_end / h))
    for k in range(steps):
        y = rk4_step(deriv, k * h, y, h)
    return y


def test_rk4_exponential_decay():
    y = _integrate(lambda t, s: -s, [1.0], 0.001, 1.0)
    assert abs(y[0] - math.exp(-1.0)) < 1e-9


def test_rk4_zero_field():
    s = np.array([1.0, -2.0, 3.0])
    np.testing.assert_array_equal(rk4_step(lambda t, y: np.zeros_like(y), 0.0, s, 0.1), s)


def test_rk4_harmonic_oscillator():
    y = _integrate(lambda t, s: np.array([s[1], -s[0]]), [1.0, 0.0], 0.001, 1.0)
    np.testing.assert_allclose(y, [math.cos(1.0), -math.sin(1.0)], atol=1e-9)


def test_rk4_fourth_order_convergence():
    f = lambda t, s: np.array([s[1], -s[0]])
    exact = np.array([math.cos(2.0), -math.sin(2.0)])
    e1 = np.linalg.norm(_integrate(f, [1.0, 0.0], 0.1, 2.0) - exact)
    e2 = np.linalg.norm(_integrate(f, [1.0, 0.0], 0.05, 2.0) - exact)
    assert 14.0 < e1 / e2 < 18.0


def test_rk4_detects_blowup():
    with pytest.raises(NonFiniteOutput):
        rk4_step(lambda t, s: s * 1e308, 0.0, np.array([1e10]), 1.0)
