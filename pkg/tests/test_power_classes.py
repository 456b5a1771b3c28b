import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from fibrate.core import solve_t0
from fibrate.errors import BadDegrees
from fibrate.model import CLASS_ONE, CLASS_TWO
from fibrate.power_classes import (
    class_constants,
    lambda_closed,
    lambda_grad_closed,
    lambda_from_values,
    t0_closed,
    t0_from_values,
)
from fibrate.core import lambda_grad
from fibrate.verification import random_field

from conftest import make_problem


def _fiber_extremum(tag, alpha, beta, eta):
    """Critical value of the fiber with N = A = B = 1, by bounded numerical search."""
    s = -1 if tag == CLASS_TWO else 1

    def psi(t):
        return (t**eta / eta - t**beta / beta) / (s * t**alpha / alpha)

    res = minimize_scalar(lambda x: -psi(np.exp(x)), bounds=(-10, 10), method="bounded",
                          options={"xatol": 1e-12})
    return np.exp(res.x), psi(np.exp(res.x))


def test_kappa_values():
    assert class_constants(CLASS_ONE, 1.5, 4, 2).kappa == pytest.approx(0.4, rel=1e-15)
    assert class_constants(CLASS_TWO, 4, 3, 2).kappa == pytest.approx(3.0, rel=1e-15)


@pytest.mark.parametrize("deg", [(1.5, 4, 2), (1.2, 3, 2), (1.5, 5, 3), (1.8, 2.5, 2.2)])
def test_class_one_constant(deg):
    cc = class_constants(CLASS_ONE, *deg)
    t0, c = _fiber_extremum(CLASS_ONE, *deg)
    assert cc.constant == pytest.approx(c, rel=1e-10)
    assert cc.derived_constant == pytest.approx(cc.constant, rel=1e-12)
    assert float(t0_from_values(cc, 1.0, 1.0)) == pytest.approx(t0, rel=1e-5)


def test_class_one_printed_exponent_disagrees():
    cc = class_constants(CLASS_ONE, 1.5, 4, 2)
    assert cc.constant == pytest.approx(0.47716, abs=5e-6)
    assert cc.printed_constant == pytest.approx(0.49953, abs=5e-6)
    assert abs(cc.printed_constant - cc.constant) > 1e-2


@pytest.mark.parametrize("deg", [(4, 3, 2), (4, 2.5, 2), (5, 4, 3), (3.5, 2.5, 1.5)])
def test_class_two_constant(deg):
    cc = class_constants(CLASS_TWO, *deg)
    _, c = _fiber_extremum(CLASS_TWO, *deg)
    assert cc.constant == pytest.approx(c, rel=1e-10)
    assert cc.printed_constant == pytest.approx(cc.constant, rel=1e-12)
    assert cc.derived_constant == pytest.approx(cc.constant, rel=1e-12)


def test_class_two_reference_value():
    assert class_constants(CLASS_TWO, 4, 3, 2).constant == pytest.approx(2 / 9, rel=1e-12)


def test_lambda_monomial_scaling():
    # Lambda is 0-homogeneous in (N, A, B) along the fiber scaling
    for tag, deg in [(CLASS_ONE, (1.5, 4, 2)), (CLASS_TWO, (4, 3, 2))]:
        cc = class_constants(tag, *deg)
        a, b, e = deg
        s = 1.7
        base = lambda_from_values(cc, 2.0, 3.0, 5.0)
        scaled = lambda_from_values(cc, 2.0 * s**e, 3.0 * s**a, 5.0 * s**b)
        assert scaled == pytest.approx(base, rel=1e-13)
    assert np.isnan(lambda_from_values(cc, 1.0, 1.0, -1.0))


@pytest.mark.parametrize("name", ["concave_convex", "kirchhoff", "schrodinger_poisson"])
def test_closed_forms_match_generic(name, rng):
    model = make_problem(name)
    for _ in range(3):
        u = random_field(model.grid, rng)
        d = solve_t0(model, u, method="generic")
        assert t0_closed(model, u) == pytest.approx(d.t0, rel=1e-10)
        assert lambda_closed(model, u) == pytest.approx(d.lam, rel=1e-10)
        assert d.critical_type == "max"
        v = random_field(model.grid, rng)
        assert lambda_grad_closed(model, u, v) == pytest.approx(lambda_grad(model, u, v), rel=1e-8, abs=1e-12 * abs(d.lam))


@pytest.mark.parametrize(
    "tag,deg",
    [(CLASS_ONE, (2, 4, 1.5)), (CLASS_ONE, (0.9, 4, 2)), (CLASS_ONE, (1.5, 2, 3)), (CLASS_TWO, (3, 4, 2)), (CLASS_TWO, (4, 3, 3.5))],
)
def test_bad_degrees(tag, deg):
    with pytest.raises(BadDegrees):
        class_constants(tag, *deg)
