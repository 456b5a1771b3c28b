"""Executable checks: invariant suites, finite-difference oracles, fiber
scans, analytic bounds and negative controls."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .core import (
    lambda_grad,
    membership_D,
    nehari_value,
    scan_sign_changes,
    solve_t0,
)
from .eigen import eigenbasis
from .errors import FibrateError, SamplerOutOfD
from .functionals import Functional
from .model import CLASS_ONE, CLASS_TWO, ModelSpec, Term
from .problems import semilinear_bound

SCALES = (0.5, 2.0, 10.0)
MAX_TRIES = 1000
WINDOW = (1e-4, 1e4)


@dataclass
class CheckReport:
    name: str
    passed: bool
    worst_error: float
    tolerance: float
    sample_count: int
    details: list = field(default_factory=list)

    @classmethod
    def from_errors(cls, name, errors, tolerance, details=None):
        errors = np.asarray(errors, float)
        worst = float(np.max(errors)) if errors.size else 0.0
        if errors.size and not np.all(np.isfinite(errors)):
            worst = float("inf")
        bad = [int(i) for i in np.nonzero(~(errors <= tolerance))[0]]
        info = list(details or []) + [{"sample": i, "error": float(errors[i])} for i in bad[:10]]
        return cls(name, worst <= tolerance, worst, tolerance, int(errors.size), info)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "worst_error": self.worst_error,
            "tolerance": self.tolerance,
            "sample_count": self.sample_count,
            "details": self.details,
        }


def _rel(x, y, scale=None):
    scale = max(abs(y), abs(x)) if scale is None else scale
    return abs(x - y) / scale if scale > 0 else abs(x - y)


def directional_fd_check(handle, u, v, h: float = 1e-4, tol: float = 1e-5) -> CheckReport:
    """Compare ``handle.derivative(u, v)`` with a central difference of ``handle.value``."""
    if not h > 0:
        raise ValueError("h must be positive")
    exact = handle.derivative(u, v)
    fd = (handle.value(u + h * v) - handle.value(u - h * v)) / (2 * h)
    return CheckReport.from_errors("directional_fd", [_rel(fd, exact)], tol, [{"exact": exact, "fd": fd, "h": h}])


# --- samples ------------------------------------------------------------------


def random_field(grid, rng, modes: int = 24) -> np.ndarray:
    """Smooth random field: Gaussian coefficients on the lowest eigenfunctions.

    The amplitude is log-uniform in ``[0.1, 10]`` so scale-dependent
    mistakes surface.
    """
    k = max(1, min(modes, grid.size // 4))
    _, basis = eigenbasis(grid, k)
    u = basis @ rng.standard_normal(k)
    return u / np.max(np.abs(u)) * 10 ** rng.uniform(-1, 1)


def sample_D(model: ModelSpec, count: int, seed: int = 0) -> list:
    """``count`` random members of ``D`` by rejection (at most 1000 tries each).

    Fields whose fiber critical point lies outside ``[1e-4, 1e4]`` are also
    rejected, so rescalings by the suite's factors stay inside the fixed
    fiber scan window.
    """
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        for _ in range(MAX_TRIES):
            u = random_field(model.grid, rng)
            if membership_D(model, u) and _inside_window(model, u):
                out.append(u)
                break
        else:
            raise SamplerOutOfD(f"{model.name}: no member of D in {MAX_TRIES} draws")
    return out


def _inside_window(model, u):
    try:
        t0 = solve_t0(model, u, strict=False).t0
    except FibrateError:
        return False
    return bool(WINDOW[0] <= t0 <= WINDOW[1])


# --- invariant suite ----------------------------------------------------------


def _homogeneity(model, samples):
    errs = []
    for u in samples:
        for F in model.components:
            base = F.value(u)
            for s in SCALES:
                errs.append(_rel(F.value(s * u), s**F.degree * base))
    return CheckReport.from_errors("homogeneity", errs, 1e-12)


def _euler(model, samples):
    errs = []
    for u in samples:
        for F in model.components:
            errs.append(_rel(F.derivative(u, u), F.degree * F.value(u)))
    return CheckReport.from_errors("euler_identity", errs, 1e-10)


def _t0_scaling(model, samples, diags):
    errs = []
    for u, d in zip(samples, diags):
        for s in SCALES:
            errs.append(_rel(solve_t0(model, s * u).t0 * s, d.t0))
    return CheckReport.from_errors("t0_scaling", errs, 1e-10)


def _lambda_symmetry(model, samples, diags):
    errs = []
    for u, d in zip(samples, diags):
        for s in SCALES + (-1.0,):
            errs.append(_rel(solve_t0(model, s * u).lam, d.lam))
    return CheckReport.from_errors("lambda_homogeneity_evenness", errs, 1e-10)


def _term_derivatives(model, lam, v, w):
    t1 = [t.coef * t.functional.derivative(v, w) for t in model.I1]
    t2 = [lam * t.coef * t.functional.derivative(v, w) for t in model.I2]
    return np.abs(t1).sum() + np.abs(t2).sum()


def _natural_constraint(model, samples, diags):
    errs = []
    for u, d in zip(samples, diags):
        v = d.t0 * u
        scale = d.t0 * _term_derivatives(model, d.lam, v, u) / abs(model.I2_value(v))
        errs.append(abs(lambda_grad(model, u, u)) / scale)
    return CheckReport.from_errors("natural_constraint", errs, 1e-10)


def _zero_energy(model, samples, diags):
    errs = []
    for u, d in zip(samples, diags):
        a, b = model.term_values(d.t0 * u)
        scale = np.abs(a).sum() + abs(d.lam) * np.abs(b).sum()
        errs.append(abs(a.sum() - d.lam * b.sum()) / scale)
    return CheckReport.from_errors("zero_energy", errs, 1e-12)


def _nehari_consistency(model, samples, diags):
    """``J'(v)v = I2(v) t0^2 psi''(t0)`` at ``v = t0 u``, value and sign."""
    errs = []
    for u, d in zip(samples, diags):
        v = d.t0 * u
        val, scale = nehari_value(model, d.lam, v)
        other = model.I2_value(v) * d.t0**2 * d.psi_second
        err = abs(val - other) / scale
        errs.append(err if np.sign(val) == np.sign(other) else np.inf)
    return CheckReport.from_errors("nehari_consistency", errs, 1e-8)


def _single_sign_change(model, samples, diags):
    errs = []
    for u, d in zip(samples, diags):
        t, idx = scan_sign_changes(model.fiber(u))
        ok = len(idx) == 1 and t[idx[0]] <= d.t0 <= t[idx[0] + 1]
        errs.append(0.0 if ok else 1.0)
    return CheckReport.from_errors("fiber_single_sign_change", errs, 0.0)


def _fast_path(model, samples, diags):
    errs = []
    for u, d in zip(samples, diags):
        g = solve_t0(model, u, method="generic")
        errs.append(max(_rel(g.t0, d.t0), _rel(g.lam, d.lam)))
    return CheckReport.from_errors("t0_fast_path", errs, 1e-10)


def _fiber_type(model, diags):
    errs = [0.0 if d.critical_type == "max" else 1.0 for d in diags]
    return CheckReport.from_errors("fiber_maximum", errs, 0.0)


def invariant_suite(model: ModelSpec, sample_count: int = 100, seed: int = 0) -> list:
    """Run every structural invariant on ``sample_count`` random members of ``D``.

    A check that raises (e.g. a degenerate fiber) is reported as failed
    rather than propagated.
    """
    samples = sample_D(model, sample_count, seed)
    diags, failures = [], []
    for i, u in enumerate(samples):
        try:
            diags.append(solve_t0(model, u))
        except FibrateError as exc:
            failures.append({"sample": i, "error": repr(exc)})
    if failures:
        return [CheckReport("fiber_solve", False, float("inf"), 0.0, len(samples), failures)]
    checks = [
        ("homogeneity", lambda: _homogeneity(model, samples)),
        ("euler_identity", lambda: _euler(model, samples)),
        ("t0_scaling", lambda: _t0_scaling(model, samples, diags)),
        ("lambda_homogeneity_evenness", lambda: _lambda_symmetry(model, samples, diags)),
        ("natural_constraint", lambda: _natural_constraint(model, samples, diags)),
        ("zero_energy", lambda: _zero_energy(model, samples, diags)),
        ("nehari_consistency", lambda: _nehari_consistency(model, samples, diags)),
        ("fiber_single_sign_change", lambda: _single_sign_change(model, samples, diags)),
    ]
    if model.t0_rule is not None:
        checks.append(("t0_fast_path", lambda: _fast_path(model, samples, diags)))
    if model.class_tag in (CLASS_ONE, CLASS_TWO):
        checks.append(("fiber_maximum", lambda: _fiber_type(model, diags)))
    reports = []
    for name, check in checks:
        try:
            reports.append(check())
        except (FibrateError, FloatingPointError, ZeroDivisionError) as exc:
            reports.append(CheckReport(name, False, float("inf"), 0.0, len(samples), [{"error": repr(exc)}]))
    return sorted(reports, key=lambda r: r.name)


# --- scans and bounds ---------------------------------------------------------


def fiber_scan(model: ModelSpec, u, t_min: float = 1e-6, t_max: float = 1e6, m: int = 200) -> np.ndarray:
    """Rows ``(t, psi, psi', psi'')`` on a geometric grid of ``m`` points."""
    if not 0 < t_min < t_max or m < 2:
        raise ValueError("need 0 < t_min < t_max and m >= 2")
    t = np.geomspace(t_min, t_max, int(m))
    psi, d1, d2, _, _ = model.fiber(np.asarray(u, float)).derivatives(t)
    return np.column_stack([t, psi, d1, d2])


def bound_check(model: ModelSpec, samples: int = 1000, seed: int = 0) -> CheckReport:
    """Sampled lower bound of ``Lambda``.

    Semilinear models: ``min Lambda >= C_Omega - 1e-8`` with the discrete
    first eigenvalue.  Class one: ``min Lambda > 0``.
    """
    fields = sample_D(model, samples, seed)
    lams = np.array([solve_t0(model, model.grid.normalize(u)).lam for u in fields])
    lo = float(lams.min())
    if model.name == "semilinear":
        c = semilinear_bound(model)
        return CheckReport(
            "semilinear_lower_bound", bool(lo >= c - 1e-8), max(0.0, c - lo), 1e-8, samples,
            [{"C_Omega": c, "min_lambda": lo}],
        )
    if model.class_tag == CLASS_ONE:
        return CheckReport("class_one_positivity", bool(lo > 0), max(0.0, -lo), 0.0, samples, [{"min_lambda": lo}])
    raise ValueError("bound_check applies to the semilinear problem and class one")


def divergence_trend(model: ModelSpec, kmax: int = 10) -> CheckReport:
    """Heuristic: ``Lambda`` on eigenfunctions of increasing index.

    Minimised models should show a nondecreasing trend and maximised ones a
    nonincreasing one; the report name marks it as a heuristic.
    """
    _, basis = eigenbasis(model.grid, kmax)
    lams = np.array([solve_t0(model, basis[:, k], strict=False).lam for k in range(kmax)])
    sense = 1.0 if model.direction == "minimize" else -1.0
    steps = sense * np.diff(lams)
    worst = float(max(0.0, -steps.min()))
    return CheckReport("divergence_trend_heuristic", worst == 0.0, worst, 0.0, kmax, [{"lambda": lams.tolist()}])


# --- negative controls --------------------------------------------------------


class _Corrupted(Functional):
    """Delegate to ``inner`` with a misreported degree or a distorted gradient."""

    def __init__(self, inner, degree_shift=0.0, gradient_factor=1.0):
        super().__init__(inner.grid, inner.degree + degree_shift)
        self.inner = inner
        self.factor = gradient_factor

    def values(self, U):
        return self.inner.values(U)

    def gradient(self, u):
        g = self.inner.gradient(u)
        if self.factor == 1.0:
            return g
        # distort along a fixed smooth pattern so the error is not a pure rescaling
        x = np.linspace(0.0, 1.0, g.size)
        return g * (1 + (self.factor - 1) * np.cos(3 * np.pi * x))


def _swap(model, target, new):
    def sub(terms):
        return tuple(Term(t.coef, new if t.functional is target else t.functional) for t in terms)

    kw = {k: (new if getattr(model, k) is target else getattr(model, k)) for k in ("N", "A", "B")}
    return replace(model, I1=sub(model.I1), I2=sub(model.I2), t0_rule=None, **kw)


def relabel_degree(model: ModelSpec, shift: float = 0.5) -> ModelSpec:
    """Copy of ``model`` whose last ``I1`` term claims degree ``d + shift``."""
    target = model.I1[-1].functional
    return _swap(model, target, _Corrupted(target, degree_shift=shift))


def skew_gradient(model: ModelSpec, factor: float = 1.01) -> ModelSpec:
    """Copy of ``model`` whose principal part has a distorted gradient."""
    target = model.I1[0].functional
    return _swap(model, target, _Corrupted(target, gradient_factor=factor))
