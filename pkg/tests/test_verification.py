import numpy as np
import pytest

from fibrate.core import membership_D, mu0, solve_t0
from fibrate.errors import SamplerOutOfD
from fibrate.functionals import WeightedPower
from fibrate.grid import build_grid
from fibrate.problems import build_problem
from fibrate.verification import (
    bound_check,
    directional_fd_check,
    divergence_trend,
    fiber_scan,
    invariant_suite,
    relabel_degree,
    sample_D,
    skew_gradient,
)

from conftest import make_problem

NAMES = ["concave_convex", "kirchhoff", "semilinear", "pq_laplacian"]
BASE = {
    "homogeneity", "euler_identity", "t0_scaling", "lambda_homogeneity_evenness",
    "natural_constraint", "zero_energy", "nehari_consistency", "fiber_single_sign_change",
}


@pytest.mark.parametrize("name", NAMES)
def test_suite_passes(name):
    reports = invariant_suite(make_problem(name), 20, seed=1)
    names = {r.name for r in reports}
    assert BASE <= names and "t0_fast_path" in names
    assert [r.name for r in reports] == sorted(r.name for r in reports)
    assert all(r.passed for r in reports), [r.to_dict() for r in reports if not r.passed]
    assert all(r.sample_count >= 20 for r in reports if r.name in BASE)


def test_suite_is_reproducible():
    model = make_problem("kirchhoff")
    a = [r.to_dict() for r in invariant_suite(model, 5, seed=4)]
    b = [r.to_dict() for r in invariant_suite(model, 5, seed=4)]
    assert a == b


@pytest.mark.parametrize("name", ["concave_convex", "kirchhoff"])
def test_relabelled_degree_is_caught(name):
    reports = invariant_suite(relabel_degree(make_problem(name), 0.5), 10)
    failed = {r.name for r in reports if not r.passed}
    assert {"homogeneity", "euler_identity"} <= failed


@pytest.mark.parametrize("name", ["concave_convex", "semilinear"])
def test_skewed_gradient_is_caught(name):
    reports = invariant_suite(skew_gradient(make_problem(name), 1.01), 10)
    failed = {r.name for r in reports if not r.passed}
    assert "euler_identity" in failed and "natural_constraint" in failed
    assert "homogeneity" not in failed


def test_fd_check_h_sweep(interval64, rng):
    F = WeightedPower(interval64, 3.5)
    u, v = rng.standard_normal(64), rng.standard_normal(64)
    errs = [directional_fd_check(F, u, v, h=h).worst_error for h in (1e-1, 1e-2, 1e-3)]
    assert errs[0] > errs[1] > errs[2]
    assert directional_fd_check(F, u, v, h=1e-4).passed
    with pytest.raises(ValueError):
        directional_fd_check(F, u, v, h=0)


def test_fiber_scan_values():
    model = make_problem("concave_convex")
    u = np.sin(np.pi * model.grid.nodes)
    table = fiber_scan(model, u, 0.01, 100.0, 41)
    assert table.shape == (41, 4)
    row = table[20]
    assert row[0] == pytest.approx(1.0, rel=1e-14)
    assert row[1] == pytest.approx(mu0(model, u), rel=1e-13)
    # exactly one sign change of psi', located at t0
    t0 = solve_t0(model, u).t0
    s = np.sign(table[:, 2])
    flips = np.nonzero(s[:-1] * s[1:] < 0)[0]
    assert len(flips) == 1 and table[flips[0], 0] <= t0 <= table[flips[0] + 1, 0]


def test_fiber_scan_outside_D():
    g = build_grid("interval", 1.0, 64)
    f = np.where(g.nodes < 0.5, 1.0, -1.0)
    model = build_problem({"kind": "concave_convex", "p": 2, "q": 1.5, "r": 3, "f": f}, g)
    u = np.where(g.nodes > 0.5, np.sin(2 * np.pi * g.nodes) ** 2, 0.0)
    table = fiber_scan(model, u)
    s = np.sign(table[:, 2])
    assert np.sum(s[:-1] * s[1:] < 0) == 0


def test_sample_D(rng):
    model = make_problem("semilinear")
    fields = sample_D(model, 5, seed=2)
    assert len(fields) == 5 and all(membership_D(model, u) for u in fields)
    g = build_grid("interval", 1.0, 32)
    bad = build_problem({"kind": "concave_convex", "p": 2, "q": 1.5, "r": 3, "f": np.r_[1.0, -np.ones(31)]}, g)
    with pytest.raises(SamplerOutOfD):
        sample_D(bad, 3)


def test_bound_checks():
    semi = bound_check(make_problem("semilinear"), 100)
    assert semi.name == "semilinear_lower_bound" and semi.passed
    pos = bound_check(make_problem("concave_convex"), 100)
    assert pos.name == "class_one_positivity" and pos.passed
    with pytest.raises(ValueError):
        bound_check(make_problem("kirchhoff"), 10)


def test_divergence_trend():
    for name in ("concave_convex", "kirchhoff"):
        rep = divergence_trend(make_problem(name))
        assert rep.name == "divergence_trend_heuristic" and rep.passed
