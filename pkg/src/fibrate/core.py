"""Fibering-map engine: ``mu0``, ``psi_u``, ``t0``, ``Lambda`` and its derivative,
Nehari labels and certification of zero-energy critical points."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DegenerateFiber, DegenerateNehari, NotInD, ZeroDenominator
from .model import CLASS_ONE, CLASS_TWO, Fiber, ModelSpec

T_MIN, T_MAX, SCAN_POINTS = 1e-6, 1e6, 200
DEGENERACY = 1e-12


@dataclass(frozen=True)
class FiberDiagnostics:
    t0: float
    psi_second: float
    critical_type: str  # "max" or "min"
    lam: float
    in_D: bool = True


@dataclass
class CriticalPointRecord:
    mu: float
    v: np.ndarray
    energy_residual: float
    gradient_residual: float
    nehari_class: str
    iterations: int = 0
    converged: bool = False
    t0: float = 1.0
    critical_type: str = ""
    roundtrip_error: float = 0.0
    nehari_discrepancy: bool = False
    trace: list = field(default_factory=list)
    start: str = ""
    diagnostics: dict = field(default_factory=dict)


def mu0(model: ModelSpec, u) -> float:
    """``I1(u) / I2(u)``."""
    a, b = model.term_values(np.asarray(u, float))
    den = b.sum()
    if abs(den) <= np.finfo(float).tiny or not np.isfinite(den):
        raise ZeroDenominator("I2(u) vanishes")
    return float(a.sum() / den)


def fiber_eval(model: ModelSpec, u, t):
    """``(psi_u(t), psi_u'(t), psi_u''(t))`` from the exact power form."""
    psi, d1, d2, _, _ = model.fiber(np.asarray(u, float)).derivatives(t)
    return psi, d1, d2


def scan_sign_changes(fib, t_min=T_MIN, t_max=T_MAX, points=SCAN_POINTS):
    """Indices ``i`` where ``psi'`` changes sign on ``[t_i, t_{i+1}]`` of a geometric grid."""
    t = np.geomspace(t_min, t_max, points)
    s = np.sign(fib.numerator(t))
    # an exact zero on a grid point counts once, as the interval it opens
    idx = np.nonzero((s[:-1] * s[1:] < 0) | (s[:-1] == 0))[0]
    return t, [int(i) for i in idx]


def generic_t0(fib, t_min=T_MIN, t_max=T_MAX, points=SCAN_POINTS) -> float:
    """Unique zero of ``psi'`` by a bracketed, safeguarded Newton iteration in ``log t``."""
    t, idx = scan_sign_changes(fib, t_min, t_max, points)
    if not idx:
        raise NotInD("psi' has no sign change on the scan window")
    if len(idx) > 1:
        raise DegenerateFiber(f"psi' changes sign {len(idx)} times; critical point not unique")
    i = idx[0]
    lo, hi = np.log(t[i]), np.log(t[i + 1])
    f_lo = np.sign(fib.numerator(t[i]))
    if f_lo == 0:
        return float(t[i])
    x = 0.5 * (lo + hi)
    for _ in range(200):
        tx = np.exp(x)
        _, d1, d2, s1, _ = fib.derivatives(tx)
        if abs(d1) <= 1e-12 * s1:
            # one Newton step from here polishes to rounding level
            dF = tx * d1 + tx * tx * d2
            xn = x - tx * d1 / dF if dF != 0 else x
            return float(np.exp(xn)) if abs(xn - x) <= 1e-10 * max(1.0, abs(x)) else float(tx)
        if np.sign(d1) == f_lo:
            lo = x
        else:
            hi = x
        F, dF = tx * d1, tx * d1 + tx * tx * d2
        xn = x - F / dF if dF != 0 else 0.5 * (lo + hi)
        if not lo < xn < hi:
            xn = 0.5 * (lo + hi)
        if hi - lo <= 4 * np.finfo(float).eps * max(1.0, abs(x)):
            break
        x = xn
    return float(np.exp(x))


def solve_t0(model: ModelSpec, u, method: str = "auto", strict: bool = True) -> FiberDiagnostics:
    """Critical point of the fiber through ``u``.

    ``method="auto"`` uses the model's closed-form rule when it has one,
    ``"generic"`` forces the scan-and-Newton root finder.  With
    ``strict=False`` a field outside ``D`` yields ``in_D=False`` and ``nan``
    entries instead of :class:`NotInD`.
    """
    u = np.asarray(u, float)
    a, b = model.term_values(u)
    fib = Fiber(a, model.d1, b, model.d2)
    try:
        if method == "auto" and model.t0_rule is not None:
            t0 = float(model.t0_rule(a, b))
            if not np.isfinite(t0) or t0 <= 0:
                raise NotInD(f"{model.name}: field outside the admissible set")
        elif method in ("auto", "generic"):
            t0 = generic_t0(fib)
        else:
            raise ValueError(f"unknown method {method!r}")
    except NotInD:
        if strict:
            raise
        return FiberDiagnostics(np.nan, np.nan, "", np.nan, False)
    psi, _, d2, _, s2 = fib.derivatives(t0)
    if abs(d2) <= DEGENERACY * s2:
        raise DegenerateFiber(f"psi''(t0) = {d2:.3e} at scale {s2:.3e}")
    return FiberDiagnostics(t0, float(d2), "max" if d2 < 0 else "min", float(psi), True)


def membership_D(model: ModelSpec, u) -> bool:
    """Whether the fiber through ``u`` has its critical point."""
    u = np.asarray(u, float)
    try:
        if model.class_tag in (CLASS_ONE, CLASS_TWO):
            return bool(model.B.value(u) > 0)
        _, idx = scan_sign_changes(model.fiber(u))
        return len(idx) == 1
    except (ZeroDenominator, FloatingPointError):
        return False


def lambda_value(model: ModelSpec, u) -> float:
    return solve_t0(model, u).lam


def lambda_grad_vector(model: ModelSpec, u, diag: Optional[FiberDiagnostics] = None) -> np.ndarray:
    """Representer of ``Lambda'(u)``: ``t0 Phi'_Lambda(t0 u) / I2(t0 u)``."""
    u = np.asarray(u, float)
    diag = diag or solve_t0(model, u)
    v = diag.t0 * u
    return diag.t0 * model.phi_gradient(diag.lam, v) / model.I2_value(v)


def lambda_grad(model: ModelSpec, u, v) -> float:
    return model.grid.inner(lambda_grad_vector(model, u), v)


def nehari_value(model: ModelSpec, mu, v):
    """``(J'_mu(v) v, scale)`` via second-order Euler identities of each term."""
    a, b = model.term_values(np.asarray(v, float))
    d, e = model.d1, model.d2
    ca, cb = d * (d - 1) * a, e * (e - 1) * b
    return float(ca.sum() - mu * cb.sum()), float(np.abs(ca).sum() + abs(mu) * np.abs(cb).sum())


def nehari_class(model: ModelSpec, mu, v) -> str:
    """``"N_minus"`` or ``"N_plus"`` by the sign of ``J'_mu(v) v``."""
    val, scale = nehari_value(model, mu, v)
    if abs(val) <= DEGENERACY * scale:
        raise DegenerateNehari(f"J'(v)v = {val:.3e} at scale {scale:.3e}")
    return "N_minus" if val < 0 else "N_plus"


def certify_zero_energy(
    model: ModelSpec, u, tol_E: float = 1e-9, tol_G: float = 1e-6, iterations: int = 0, trace=None
) -> CriticalPointRecord:
    """Map ``u`` to ``(Lambda(u), t0(u) u)`` and measure how critical it is."""
    u = np.asarray(u, float)
    grid = model.grid
    diag = solve_t0(model, u)
    mu, v = diag.lam, diag.t0 * u
    energy = abs(model.phi(mu, v)) / (1 + abs(model.N.value(v)))
    gradient = grid.norm(model.phi_gradient(mu, v)) / (1 + grid.norm(v))
    label = nehari_class(model, mu, v)
    # certified pairs must reproduce themselves: t0(v) = 1 and mu0(v) = mu
    back = solve_t0(model, v)
    roundtrip = max(abs(back.t0 - 1), abs(mu0(model, v) - mu) / (1 + abs(mu)))
    return CriticalPointRecord(
        mu=mu,
        v=v,
        energy_residual=float(energy),
        gradient_residual=float(gradient),
        nehari_class=label,
        iterations=iterations,
        converged=bool(energy <= tol_E and gradient <= tol_G),
        t0=diag.t0,
        critical_type=diag.critical_type,
        roundtrip_error=float(roundtrip),
        nehari_discrepancy=model.expected_nehari is not None and label != model.expected_nehari,
        trace=list(trace or []),
    )
