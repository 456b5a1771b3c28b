"""Homogeneous functionals on grid fields.

Each functional exposes its value, the gradient *representer* with respect to
the quadrature pairing ``<u, v>_h = sum_i w_i u_i v_i`` (so that
``derivative(u, v) == grid.inner(gradient(u), v)``), its homogeneity degree,
and a batched evaluator used when many fields in a small subspace are scanned.
"""

from __future__ import annotations

import numpy as np

from .errors import BadParams, GridMismatch


class Functional:
    """Base class; subclasses implement ``values`` and ``gradient``."""

    degree: float
    is_even = True

    def __init__(self, grid, degree):
        self.grid = grid
        self.degree = float(degree)

    def value(self, u) -> float:
        return float(self.values(np.asarray(u)[None, :])[0])

    def values(self, U) -> np.ndarray:
        """Values for each row of the ``(m, size)`` array ``U``."""
        raise NotImplementedError

    def gradient(self, u) -> np.ndarray:
        raise NotImplementedError

    def derivative(self, u, v) -> float:
        return self.grid.inner(self.gradient(u), v)

    def restrict(self, basis):
        """Return ``f(C)`` evaluating the functional at ``C @ basis.T`` row-wise."""
        basis = np.asarray(basis)
        return lambda C: self.values(np.asarray(C) @ basis.T)

    def _check(self, u):
        if u.shape[-1] != self.grid.size:
            raise GridMismatch(f"field has {u.shape[-1]} nodes, grid has {self.grid.size}")


class GradientPower(Functional):
    """``int |grad u|^p`` on the staggered gradient samples of the grid."""

    def __init__(self, grid, p):
        if not p >= 1:
            raise BadParams(f"gradient exponent must be >= 1, got {p}")
        super().__init__(grid, p)
        self.p = float(p)
        self._comps, self._cf = grid.gradient_parts

    def _magnitude2(self, U):
        return sum(np.asarray(G @ U.T) ** 2 for G in self._comps)

    def values(self, U):
        U = np.atleast_2d(U)
        self._check(U)
        return self._cf @ self._magnitude2(U) ** (self.p / 2)

    def gradient(self, u):
        self._check(u)
        gs = [G @ u for G in self._comps]
        mag2 = sum(g**2 for g in gs)
        if self.p == 2:
            factor = 2.0 * self._cf
        else:
            # |g|^(p-2) g is continuous at g = 0 for p > 1, so zero faces contribute 0
            factor = np.zeros_like(mag2)
            nz = mag2 > 0
            factor[nz] = self.p * mag2[nz] ** ((self.p - 2) / 2)
            factor *= self._cf
        flux = sum(G.T @ (factor * g) for G, g in zip(self._comps, gs))
        return flux / self.grid.weights


class WeightedPower(Functional):
    """``int weight |u|^s``."""

    def __init__(self, grid, s, weight=None):
        if not s > 1:
            raise BadParams(f"power exponent must be > 1, got {s}")
        super().__init__(grid, s)
        self.s = float(s)
        weight = np.ones(grid.size) if weight is None else np.broadcast_to(
            np.asarray(weight, dtype=float), (grid.size,)
        ).copy()
        if not np.all(np.isfinite(weight)):
            raise BadParams("weight must be finite")
        self.weight = weight
        self._qw = grid.weights * weight

    def values(self, U):
        U = np.atleast_2d(U)
        self._check(U)
        if self.s == 2:
            return (U * U) @ self._qw
        return np.abs(U) ** self.s @ self._qw

    def gradient(self, u):
        self._check(u)
        if self.s == 2:
            return 2.0 * self.weight * u
        return self.s * self.weight * np.sign(u) * np.abs(u) ** (self.s - 1)


class Combination(Functional):
    """Linear combination of functionals sharing one homogeneity degree."""

    def __init__(self, terms):
        terms = [(float(c), f) for c, f in terms]
        degrees = {f.degree for _, f in terms}
        if len(degrees) != 1:
            raise BadParams(f"combined functionals must share a degree, got {sorted(degrees)}")
        super().__init__(terms[0][1].grid, degrees.pop())
        self.terms = terms

    def values(self, U):
        return sum(c * f.values(U) for c, f in self.terms)

    def gradient(self, u):
        return sum(c * f.gradient(u) for c, f in self.terms)

    def restrict(self, basis):
        parts = [(c, f.restrict(basis)) for c, f in self.terms]
        return lambda C: sum(c * g(C) for c, g in parts)


class PowerOf(Functional):
    """``F(u) ** sigma`` for a nonnegative functional ``F``."""

    def __init__(self, inner, sigma):
        if not sigma > 0:
            raise BadParams("sigma must be positive")
        super().__init__(inner.grid, inner.degree * sigma)
        self.inner = inner
        self.sigma = float(sigma)

    def values(self, U):
        return self.inner.values(U) ** self.sigma

    def gradient(self, u):
        F = self.inner.value(u)
        return self.sigma * F ** (self.sigma - 1) * self.inner.gradient(u)

    def restrict(self, basis):
        g = self.inner.restrict(basis)
        return lambda C: g(C) ** self.sigma


def norm_functional(grid, kind: str, **params) -> Functional:
    """Factory for the norm-type functionals used by the model problems.

    ``grad_p`` takes ``p``; ``weighted_power`` takes ``s`` and optional
    ``weight``; ``grad_p_squared`` takes ``p`` and optional ``sigma``
    (default 2) and returns ``(int |grad u|^p) ** sigma``.
    """
    try:
        if kind == "grad_p":
            return GradientPower(grid, params["p"])
        if kind == "weighted_power":
            return WeightedPower(grid, params["s"], params.get("weight"))
        if kind == "grad_p_squared":
            return PowerOf(GradientPower(grid, params["p"]), params.get("sigma", 2.0))
    except KeyError as exc:
        raise BadParams(f"{kind} requires parameter {exc.args[0]!r}") from exc
    raise BadParams(f"unknown functional kind {kind!r}")
