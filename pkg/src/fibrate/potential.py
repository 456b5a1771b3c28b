"""Radial Bopp-Podolski / Coulomb potentials and their quartic energy.

For a radial density ``rho = u^2`` the potential
``phi = K_a * rho`` with ``K_a(x) = (1 - exp(-|x|/a)) / |x|`` (``K_0 = 1/|x|``)
reduces, after averaging the kernel over spheres, to

    phi(r) = (2 pi / r) int_0^R s rho(s) [k_a(r + s) - k_a(|r - s|)] ds,

with ``k_a(t) = t + a exp(-t/a)`` the antiderivative of ``t K_a(t)``.  On the
grid this is a dense symmetric matrix acting on ``w * rho``.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import BadParams, NotRadial
from .functionals import Functional


def shell_kernel(r, s, a: float) -> np.ndarray:
    """Sphere-averaged kernel between shells of radii ``r`` and ``s``."""
    r = np.asarray(r, dtype=float)[..., :, None]
    s = np.asarray(s, dtype=float)[..., None, :]
    lo = np.minimum(r, s)
    if a == 0:
        num = 2 * lo
    else:
        num = 2 * lo + a * np.exp(-np.abs(r - s) / a) * np.expm1(-2 * lo / a)
    return num / (2 * r * s)


def origin_kernel(s, a: float) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    if a == 0:
        return 1.0 / s
    return -np.expm1(-s / a) / s


@lru_cache(maxsize=16)
def _kernel_matrix(grid, a):
    return shell_kernel(grid.nodes, grid.nodes, a)


def _check(grid, a):
    if grid.kind != "radial":
        raise NotRadial("the potential is only defined on radial grids")
    if not a >= 0:
        raise BadParams(f"a must be nonnegative, got {a}")


def bopp_podolski_potential(grid, u, a: float = 0.0) -> np.ndarray:
    """Potential generated by ``u**2`` at every grid node."""
    _check(grid, a)
    u = np.asarray(u, dtype=float)
    return _kernel_matrix(grid, float(a)) @ (grid.weights * u * u)


def potential_at_origin(grid, u, a: float = 0.0) -> float:
    """``phi(0) = int K_a(|y|) u(y)^2 dy`` by the grid quadrature."""
    _check(grid, a)
    u = np.asarray(u, dtype=float)
    return float(np.sum(grid.weights * origin_kernel(grid.nodes, a) * u * u))


class PoissonEnergy(Functional):
    """``A(u) = int phi_{a,u} u^2``, a 4-homogeneous even functional."""

    def __init__(self, grid, a: float = 0.0):
        _check(grid, a)
        super().__init__(grid, 4)
        self.a = float(a)
        w = grid.weights
        self._S = w[:, None] * _kernel_matrix(grid, self.a) * w[None, :]

    def potential(self, u):
        return bopp_podolski_potential(self.grid, u, self.a)

    def values(self, U):
        R = np.atleast_2d(U) ** 2
        return np.einsum("ij,ij->i", R @ self._S, R)

    def gradient(self, u):
        return 4.0 * self.potential(u) * u

    def restrict(self, basis):
        # quartic form in the coefficients: A(c) = (c x c)^T T (c x c)
        basis = np.asarray(basis)
        k = basis.shape[1]
        P = np.einsum("ik,il->ikl", basis, basis).reshape(basis.shape[0], k * k)
        T = P.T @ self._S @ P

        def f(C):
            C = np.atleast_2d(C)
            CC = np.einsum("mk,ml->mkl", C, C).reshape(C.shape[0], k * k)
            return np.einsum("mi,mi->m", CC @ T, CC)

        return f
