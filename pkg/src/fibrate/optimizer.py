"""Critical points of ``Lambda`` on the unit sphere and subspace estimates of
the min-max levels ``mu_n``.

``Lambda`` is 0-homogeneous, so its critical points on the quadrature-norm
sphere are free critical points.  The iteration is a projected gradient
method: the ``L2`` representer of ``Lambda'(u)`` is mapped through the
``H1`` Riesz operator ``(K + M)^{-1} M``, projected onto the tangent space
at ``u`` and followed by renormalisation.  The preconditioner makes the
contraction rate independent of the mesh width.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .core import CriticalPointRecord, certify_zero_energy, lambda_grad_vector, solve_t0
from .eigen import eigenbasis
from .errors import (
    BadLevel,
    BadParams,
    DegenerateFiber,
    FibrateError,
    LeftD,
    MaxIters,
    MonotonicityViolation,
    NotInD,
    SamplerOutOfD,
    ZeroDenominator,
)
from .model import MAXIMIZE, MINIMIZE, ModelSpec

MAX_D_HALVINGS = 30
MAX_LEVEL = 6
MIN_STEP, MAX_STEP = 1e-14, 1e6
ROUNDOFF = 64 * np.finfo(float).eps
T0_GROWTH = 1e3


@dataclass(frozen=True)
class SolveOptions:
    """Controls for :func:`optimize_lambda` and the drivers built on it.

    ``direction=None`` takes the model's own direction.  Convergence is
    declared when the tangential gradient has quadrature norm at most
    ``tol_grad * |Lambda|``; ``tol_E`` and ``tol_G`` are the
    certification tolerances.
    """

    direction: Optional[str] = None
    max_iters: int = 5000
    tol_grad: float = 1e-8
    armijo_c: float = 1e-4
    backtrack_factor: float = 0.5
    initial_step: float = 1.0
    seed: int = 0
    tol_E: float = 1e-9
    tol_G: float = 1e-6
    starts: int = 8
    samples_per_dim: int = 10_000

    def __post_init__(self):
        if self.direction not in (None, MINIMIZE, MAXIMIZE):
            raise BadParams(f"direction must be minimize or maximize, got {self.direction!r}")
        if min(self.tol_grad, self.tol_E, self.tol_G, self.armijo_c, self.initial_step) <= 0:
            raise BadParams("tolerances and step sizes must be positive")
        if not 0 < self.backtrack_factor < 1:
            raise BadParams("backtrack_factor must lie in (0, 1)")
        if self.max_iters < 0 or self.starts < 1 or self.samples_per_dim < 1:
            raise BadParams("max_iters, starts and samples_per_dim must be positive")

    @classmethod
    def from_dict(cls, d: dict) -> "SolveOptions":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise BadParams(f"unknown solver options: {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True)
class MinMaxEstimate:
    n: int
    bound: str  # "upper" or "lower"
    value: float
    basis_dim: int
    coefficients: np.ndarray = field(default=None, repr=False, compare=False)
    field: np.ndarray = field(default=None, repr=False, compare=False)


def _sign(model, opts) -> float:
    return 1.0 if (opts.direction or model.direction) == MINIMIZE else -1.0


def _evaluate(model, u):
    """``(Lambda, diagnostics)`` or ``(nan, None)`` outside ``D``."""
    try:
        diag = solve_t0(model, u, strict=False)
    except (DegenerateFiber, ZeroDenominator):
        return np.nan, None
    if not diag.in_D:
        return np.nan, None
    return diag.lam, diag


def _h1_direction(grid, u, g):
    z = grid.h1_solver(grid.weights * g)
    return z - grid.inner(z, u) * u


def optimize_lambda(model: ModelSpec, init, opts: SolveOptions = SolveOptions()) -> CriticalPointRecord:
    """Projected-gradient search for a critical point of ``Lambda`` on the sphere.

    Returns the certified record at the final iterate.  ``record.trace`` holds
    ``Lambda`` at every accepted iterate.

    Raises
    ------
    NotInD
        ``init`` is outside the admissible set.
    LeftD
        Every step halving up to the cap left ``D``.
    MaxIters
        No convergence in ``opts.max_iters`` iterations; the last record is
        attached as ``.record``.
    """
    grid = model.grid
    sgn = _sign(model, opts)
    u = grid.normalize(np.asarray(init, float))
    lam, diag = _evaluate(model, u)
    if diag is None:
        raise NotInD("initial field is outside the admissible set")
    trace = [lam]
    t0_first = t0_max = diag.t0
    step = opts.initial_step
    g, gnorm = _tangent_gradient(model, u, diag)
    it = 0
    while gnorm > opts.tol_grad * _scale(lam):
        if it >= opts.max_iters:
            rec = _certify(model, u, opts, it, trace, t0_first, t0_max)
            rec.converged = False
            raise MaxIters(f"{model.name}: |grad| = {gnorm:.3e} after {it} iterations", record=rec)
        d = _h1_direction(grid, u, g)
        slope = grid.inner(g, d)
        halvings = 0
        while step >= MIN_STEP:
            trial = grid.normalize(u - sgn * step * d)
            new_lam, new_diag = _evaluate(model, trial)
            if new_diag is None:
                halvings += 1
                if halvings > MAX_D_HALVINGS:
                    raise LeftD(f"{model.name}: iterate left D after {MAX_D_HALVINGS} halvings")
                step *= 0.5
                continue
            decrease = opts.armijo_c * step * slope
            grow = 2.0
            if decrease > ROUNDOFF * (1 + abs(lam)):
                ok = sgn * (new_lam - lam) <= -decrease
                if ok:
                    new_g, new_gnorm = _tangent_gradient(model, trial, new_diag)
                    # next trial step from the quadratic model through the accepted one
                    ratio = -sgn * (new_lam - lam) / (step * slope)
                    grow = 4.0 if ratio >= 0.875 else min(4.0, max(0.25, 0.5 / (1 - ratio)))
            else:
                # predicted change is below the resolution of Lambda: accept on
                # a reduced tangential gradient instead
                new_g, new_gnorm = _tangent_gradient(model, trial, new_diag)
                ok = new_gnorm < gnorm and sgn * (new_lam - lam) <= ROUNDOFF * (1 + abs(lam))
            if ok:
                break
            step *= opts.backtrack_factor
        it += 1
        if step < MIN_STEP:
            # stalled at the rounding floor; the certificate decides
            return _certify(model, u, opts, it, trace, t0_first, t0_max)
        u, lam, diag, g, gnorm = trial, new_lam, new_diag, new_g, new_gnorm
        trace.append(lam)
        t0_max = max(t0_max, diag.t0)
        step = min(grow * step, MAX_STEP)
    return _certify(model, u, opts, it, trace, t0_first, t0_max)


def _certify(model, u, opts, it, trace, t0_first, t0_max):
    rec = certify_zero_energy(model, u, opts.tol_E, opts.tol_G, it, trace)
    # heuristic for fibers escaping to infinity along the iteration
    rec.diagnostics = {"t0_max": t0_max, "t0_growth_flag": bool(t0_max > T0_GROWTH * t0_first)}
    return rec


def _scale(lam):
    return abs(lam) if lam != 0 and np.isfinite(lam) else 1.0


def _tangent_gradient(model, u, diag):
    grid = model.grid
    g = lambda_grad_vector(model, u, diag)
    g = g - grid.inner(g, u) * u
    return g, grid.norm(g)


def _threads() -> int:
    env = os.environ.get("FIBRATE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise BadParams(f"FIBRATE_THREADS must be an integer, got {env!r}")
    return os.cpu_count() or 1


def _starts(model, count, seed):
    grid = model.grid
    k_eig = min(max(count, 10), grid.size // 2)
    _, basis = eigenbasis(grid, k_eig)
    starts = [(f"eig{i + 1}", basis[:, i]) for i in range(min(count, 10, k_eig))]
    rng = np.random.default_rng(seed)
    j = 0
    while len(starts) < count:
        if j % 2 == 0:
            starts.append((f"gauss{j}", rng.standard_normal(grid.size)))
        else:
            i, k = rng.choice(k_eig, size=2, replace=False)
            c = rng.standard_normal(2)
            starts.append((f"pair{i + 1}-{k + 1}", c[0] * basis[:, i] + c[1] * basis[:, k]))
        j += 1
    return starts


def _aligned_distance(grid, v, w):
    a, b = grid.normalize(v), grid.normalize(w)
    return min(grid.norm(a - b), grid.norm(a + b))


def multistart(model: ModelSpec, count: int, opts: SolveOptions = SolveOptions()) -> list:
    """Run :func:`optimize_lambda` from ``count`` starts and deduplicate.

    Starts are the first ``min(count, 10)`` eigenfunctions, then alternately
    Gaussian node fields and random pairs of eigenfunctions.  Failed starts
    are dropped; non-converged runs keep their record with ``converged=False``.
    Records are sorted by ``mu``.
    """
    if count < 1:
        raise BadParams("count must be at least 1")
    starts = _starts(model, count, opts.seed)

    def run(item):
        name, u0 = item
        try:
            rec = optimize_lambda(model, u0, opts)
        except MaxIters as e:
            rec = e.record
        except FibrateError:
            return None
        if rec is not None:
            rec.start = name
        return rec

    workers = min(_threads(), len(starts))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(run, starts))
    else:
        results = [run(s) for s in starts]
    kept = []
    for rec in results:
        if rec is None:
            continue
        dup = None
        for i, other in enumerate(kept):
            if abs(rec.mu - other.mu) <= 1e-6 * (1 + abs(rec.mu)) and _aligned_distance(model.grid, rec.v, other.v) <= 1e-4:
                dup = i
                break
        if dup is None:
            kept.append(rec)
        elif rec.converged and not kept[dup].converged:
            kept[dup] = rec
    return sorted(kept, key=lambda r: r.mu)


# --- subspace estimates -------------------------------------------------------


def _batch_lambda(model, C, basis):
    """``Lambda`` at the fields ``C @ basis.T`` (``nan`` outside ``D``)."""
    if model.t0_rule is None:
        out = np.empty(len(C))
        for i, c in enumerate(C):
            out[i] = _evaluate(model, basis @ c)[0]
        return out
    a, b = model.term_values_batch(C, basis)
    t0 = model.t0_rule(a, b)
    with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
        num = np.sum(a * t0[:, None] ** model.d1, axis=1)
        den = np.sum(b * t0[:, None] ** model.d2, axis=1)
        lam = num / den
    return np.where(np.isfinite(t0) & (t0 > 0), lam, np.nan)


def _refine(model, c, basis, sense, iters=200):
    """Local projected-gradient search on the coefficient sphere.

    ``sense=+1`` maximises, ``-1`` minimises.  Only improving steps are
    accepted, so the returned value never falls behind the start.
    """
    grid = model.grid
    c = c / np.linalg.norm(c)
    lam, diag = _evaluate(model, basis @ c)
    WB = grid.weights[:, None] * basis
    step = 1.0
    for _ in range(iters):
        g = WB.T @ lambda_grad_vector(model, basis @ c, diag)
        g -= (g @ c) * c
        if np.linalg.norm(g) <= 1e-12 * max(1.0, abs(lam)):
            break
        while step > 1e-12:
            trial = c + sense * step * g
            trial /= np.linalg.norm(trial)
            new_lam, new_diag = _evaluate(model, basis @ trial)
            if new_diag is not None and sense * (new_lam - lam) > 0:
                c, lam, diag = trial, new_lam, new_diag
                step *= 2
                break
            step *= 0.5
        else:
            break
    return c, lam


def _level(model, n, opts, prev, basis):
    """Inner extremum of ``Lambda`` over the unit sphere of ``span(basis[:, :n])``."""
    sense = 1.0 if model.direction == MINIMIZE else -1.0  # inner sup for minimisers
    B = basis[:, :n]
    rng = np.random.default_rng([opts.seed, n])
    m = opts.samples_per_dim * n
    C = rng.standard_normal((m, n))
    C /= np.linalg.norm(C, axis=1, keepdims=True)
    # nested candidates: the previous extremiser and the coordinate axes
    extra = [np.eye(n)]
    if prev is not None:
        extra.append(np.append(prev, 0.0)[None, :])
    C = np.vstack(extra + [C])
    lam = _batch_lambda(model, C, B)
    if not np.any(np.isfinite(lam)):
        raise SamplerOutOfD(f"level {n}: no sampled field lies in D")
    score = np.where(np.isfinite(lam), sense * lam, -np.inf)
    order = np.argsort(-score, kind="stable")[:4]
    best_c, best = C[order[0]], lam[order[0]]
    for i in order:
        c, val = _refine(model, C[i], B, sense)
        if sense * (val - best) > 0:
            best_c, best = c, val
    return best_c, float(best)


def _chain(model, K, opts):
    if not 1 <= K <= MAX_LEVEL:
        raise BadLevel(f"level must be in 1..{MAX_LEVEL}, got {K}")
    bound = "upper" if model.direction == MINIMIZE else "lower"
    _, basis = eigenbasis(model.grid, max(K, 1))
    out = []
    # level one is the extremum of Lambda over the whole sphere
    recs = [r for r in multistart(model, opts.starts, opts) if np.isfinite(r.mu)]
    lam1, _ = _evaluate(model, basis[:, 0])
    cands = [(lam1, basis[:, 0], None)] + [(r.mu, model.grid.normalize(r.v), r) for r in recs]
    pick = min if model.direction == MINIMIZE else max
    v1, u1, r1 = pick(cands, key=lambda x: x[0])
    out.append((MinMaxEstimate(1, bound, float(v1), 1, np.ones(1), u1), r1))
    prev = np.ones(1)
    for n in range(2, K + 1):
        c, val = _level(model, n, opts, prev, basis)
        out.append((MinMaxEstimate(n, bound, val, n, c, basis[:, :n] @ c), None))
        prev = c
    return out


def estimate_mu_n(model: ModelSpec, n: int, opts: SolveOptions = SolveOptions()) -> MinMaxEstimate:
    """One-sided estimate of the ``n``-th min-max level.

    The surrogate family member is the unit sphere of the span of the first
    ``n`` Dirichlet eigenfunctions, which has genus ``n``.  For minimised
    functionals the inner supremum over it bounds ``mu_n`` from above, for
    maximised ones the inner infimum bounds it from below.  Levels are built
    as a nested chain, so the estimates are monotone in ``n``.
    """
    return _chain(model, n, opts)[-1][0]


def mu_sequence(model: ModelSpec, K: int, opts: SolveOptions = SolveOptions()) -> list:
    """Estimates for ``n = 1..K`` with, where available, a certified critical point.

    The record for ``n = 1`` is the multistart extremiser; for ``n >= 2`` it is
    the result of :func:`optimize_lambda` started at the inner extremiser,
    attached only when that run converges.
    """
    chain = _chain(model, K, opts)
    sense = 1.0 if model.direction == MINIMIZE else -1.0
    out = []
    for est, rec in chain:
        if rec is None:
            try:
                rec = optimize_lambda(model, est.field, opts)
            except FibrateError:
                rec = None
        out.append((est, rec if rec is not None and rec.converged else None))
    vals = [e.value for e, _ in out]
    for lo, hi in zip(vals, vals[1:]):
        if sense * (hi - lo) < 0:
            raise MonotonicityViolation(f"{model.name}: estimates not monotone: {vals}")
    return out
