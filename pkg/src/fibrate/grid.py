"""Finite-difference grids with homogeneous Dirichlet boundaries.

Three geometries are supported:

* ``interval``  -- ``[0, L]`` with ``n`` interior vertices, ``h = L / (n + 1)``;
* ``rectangle`` -- ``[0, Lx] x [0, Ly]`` with ``nx * ny`` interior vertices;
* ``radial``    -- radially symmetric fields on the ball of radius ``R`` in
  three dimensions, ``n`` cell-centred nodes ``r_i = (i + 1/2) h``,
  ``h = R / n``; regular at the origin, Dirichlet at ``R``.

A field is a plain 1-D ``numpy`` array of interior node values (row-major
``(nx, ny)`` ordering for rectangles).  Every grid carries quadrature weights
for those nodes and a set of *gradient parts*: sparse difference matrices
whose rows are gradient samples, each paired with a quadrature weight, so
that ``sum_f c_f |grad u|_f^p`` is the discrete ``int |grad u|^p``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import BadSpec

KINDS = ("interval", "rectangle", "radial")


@dataclass(frozen=True, eq=False)
class Grid:
    kind: str
    extents: tuple
    shape: tuple
    h: tuple
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def measure(self) -> float:
        if self.kind == "interval":
            return float(self.extents[0])
        if self.kind == "rectangle":
            return float(self.extents[0] * self.extents[1])
        return 4.0 / 3.0 * np.pi * self.extents[0] ** 3

    @cached_property
    def full_weights(self) -> np.ndarray:
        """Composite trapezoid weights on every vertex, boundary included.

        Boundary vertices carry zero field values, so interior integrals only
        see ``weights``; this array exists to check the rule integrates
        constants exactly.  Radial grids use the midpoint rule and return the
        interior weights unchanged.
        """
        if self.kind == "interval":
            (n,), (h,) = self.shape, self.h
            w = np.full(n + 2, h)
            w[[0, -1]] = h / 2
            return w
        if self.kind == "rectangle":
            (nx, ny), (hx, hy) = self.shape, self.h
            wx = np.full(nx + 2, hx)
            wy = np.full(ny + 2, hy)
            wx[[0, -1]] /= 2
            wy[[0, -1]] /= 2
            return np.outer(wx, wy).ravel()
        return self.weights

    def inner(self, u, v) -> float:
        return float(np.dot(self.weights * u, v))

    def norm(self, u) -> float:
        return float(np.sqrt(np.dot(self.weights * u, u)))

    def normalize(self, u) -> np.ndarray:
        return u / self.norm(u)

    @cached_property
    def gradient_parts(self):
        """``(components, face_weights)`` of the staggered gradient.

        ``components`` is a list of sparse ``(m, size)`` matrices; row ``f`` of
        component ``k`` is the ``k``-th Cartesian gradient component on face
        (or triangle) ``f``.  ``face_weights`` has length ``m``.
        """
        if self.kind == "interval":
            (n,), (h,) = self.shape, self.h
            return [_diff1d(n) / h], np.full(n + 1, h)
        if self.kind == "radial":
            (n,), (h,) = self.shape, self.h
            # faces at r = (i+1) h between node i and i+1; the last face sits on
            # r = R with an antisymmetric ghost node, i.e. a half-cell of width h/2
            main = -np.ones(n)
            upper = np.ones(n - 1)
            D = sp.diags([main, upper], [0, 1], shape=(n, n), format="lil")
            D[n - 1, n - 1] = -2.0
            rf = h * np.arange(1, n + 1)
            cf = 4 * np.pi * rf**2 * h
            cf[-1] *= 0.5
            return [D.tocsr() / h], cf
        return self._triangle_parts()

    def _triangle_parts(self):
        # P1 gradients on the two right triangles of each padded square cell;
        # for p = 2 this reproduces the 5-point stencil quadratic form
        (nx, ny), (hx, hy) = self.shape, self.h
        px, py = nx + 2, ny + 2
        rows = np.arange(nx * ny)
        ii, jj = np.divmod(rows, ny)
        E = sp.csr_matrix(
            (np.ones(nx * ny), ((ii + 1) * py + (jj + 1), rows)), shape=(px * py, nx * ny)
        )
        ci, cj = np.meshgrid(np.arange(nx + 1), np.arange(ny + 1), indexing="ij")
        ci, cj = ci.ravel(), cj.ravel()
        m = ci.size

        def pick(di, dj):
            idx = (ci + di) * py + (cj + dj)
            return sp.csr_matrix((np.ones(m), (np.arange(m), idx)), shape=(m, px * py))

        s00, s10, s01, s11 = pick(0, 0), pick(1, 0), pick(0, 1), pick(1, 1)
        gx = sp.vstack([(s10 - s00) / hx, (s11 - s01) / hx])
        gy = sp.vstack([(s01 - s00) / hy, (s11 - s10) / hy])
        cf = np.full(2 * m, hx * hy / 2)
        return [(gx @ E).tocsr(), (gy @ E).tocsr()], cf

    @cached_property
    def stiffness(self) -> sp.csr_matrix:
        """Sparse ``K`` with ``u @ K @ u`` equal to the discrete ``int |grad u|^2``."""
        comps, cf = self.gradient_parts
        C = sp.diags(cf)
        return sum((G.T @ C @ G for G in comps), sp.csr_matrix((self.size, self.size))).tocsr()

    @cached_property
    def mass(self) -> sp.csr_matrix:
        return sp.diags(self.weights).tocsr()

    @cached_property
    def h1_solver(self):
        """Factorised ``K + M``; returns ``x`` with ``(K + M) x = b``."""
        return spla.factorized((self.stiffness + self.mass).tocsc())


def _diff1d(n):
    # (n+1, n) forward differences with ghost zeros at both ends
    return sp.diags([-np.ones(n), np.ones(n)], [0, -1], shape=(n + 1, n), format="csr")


def build_grid(kind: str, extent, n) -> Grid:
    """Build a grid.

    Parameters
    ----------
    kind : {"interval", "rectangle", "radial"}
    extent : float or (float, float)
        Domain length ``L``, rectangle sides ``(Lx, Ly)``, or ball radius ``R``.
    n : int or (int, int)
        Interior node count(s), each at least 3.
    """
    if kind not in KINDS:
        raise BadSpec(f"unknown grid kind {kind!r}")
    if kind == "rectangle":
        try:
            Lx, Ly = (float(e) for e in extent)
            nx, ny = (int(k) for k in n)
        except (TypeError, ValueError) as exc:
            raise BadSpec("rectangle needs two extents and two node counts") from exc
        if min(Lx, Ly) <= 0 or min(nx, ny) < 3:
            raise BadSpec("extents must be positive and node counts >= 3")
        hx, hy = Lx / (nx + 1), Ly / (ny + 1)
        X, Y = np.meshgrid(hx * np.arange(1, nx + 1), hy * np.arange(1, ny + 1), indexing="ij")
        nodes = np.column_stack([X.ravel(), Y.ravel()])
        return Grid(kind, (Lx, Ly), (nx, ny), (hx, hy), nodes, np.full(nx * ny, hx * hy))

    try:
        L = float(extent[0] if np.ndim(extent) else extent)
        n = int(n[0] if np.ndim(n) else n)
    except (TypeError, ValueError, IndexError) as exc:
        raise BadSpec("extent and n must be scalars") from exc
    if not np.isfinite(L) or L <= 0 or n < 3:
        raise BadSpec("extent must be positive and n >= 3")
    if kind == "interval":
        h = L / (n + 1)
        return Grid(kind, (L,), (n,), (h,), h * np.arange(1, n + 1), np.full(n, h))
    h = L / n
    r = h * (np.arange(n) + 0.5)
    return Grid(kind, (L,), (n,), (h,), r, 4 * np.pi * r**2 * h)


def grid_from_dict(spec: dict) -> Grid:
    """Build a grid from a ``{"kind", "extent", "n"}`` mapping."""
    unknown = set(spec) - {"kind", "extent", "n"}
    if unknown:
        raise BadSpec(f"unknown grid keys: {sorted(unknown)}")
    try:
        return build_grid(spec["kind"], spec["extent"], spec["n"])
    except KeyError as exc:
        raise BadSpec(f"grid spec missing {exc.args[0]!r}") from exc
