"""Parameter-dependent functionals ``Phi_mu = I1 - mu I2`` built from
homogeneous pieces, and the exact power form of their fibering maps.

``I1`` and ``I2`` are sums ``sum_i c_i F_i`` of homogeneous functionals, so
along a ray ``t -> t u`` each is a generalized polynomial in ``t`` whose
coefficients are the term values at ``u``.  Everything about the fiber
``psi_u(t) = I1(t u) / I2(t u)`` is computed from those coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import BadDegrees, ZeroDenominator

CLASS_ONE = "ClassOne"
CLASS_TWO = "ClassTwo"
CUSTOM = "Custom"
MINIMIZE = "minimize"
MAXIMIZE = "maximize"


@dataclass(frozen=True)
class Term:
    coef: float
    functional: object

    @property
    def degree(self) -> float:
        return self.functional.degree


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """A functional pair ``(I1, I2)`` on a grid.

    ``N`` is the coercive principal part and is used to normalise energy
    residuals.  ``A``, ``B`` and the degrees are set for the two power
    classes.  ``t0_rule(a, b)`` maps term values (``a`` for ``I1``, ``b`` for
    ``I2``, any leading batch shape) to the fiber critical point, ``nan``
    outside the admissible set; when present it is the fast path.
    """

    name: str
    grid: object
    I1: tuple
    I2: tuple
    N: object
    class_tag: str = CUSTOM
    A: Optional[object] = None
    B: Optional[object] = None
    eta: Optional[float] = None
    alpha: Optional[float] = None
    beta: Optional[float] = None
    sign_A: Optional[str] = None
    t0_rule: Optional[Callable] = None
    direction: str = MINIMIZE
    expected_nehari: Optional[str] = None
    params: dict = field(default_factory=dict)

    @property
    def d1(self) -> np.ndarray:
        return np.array([t.degree for t in self.I1])

    @property
    def d2(self) -> np.ndarray:
        return np.array([t.degree for t in self.I2])

    @property
    def components(self):
        """Distinct functionals appearing in ``I1`` and ``I2``."""
        seen = []
        for t in self.I1 + self.I2:
            if all(t.functional is not f for f in seen):
                seen.append(t.functional)
        return seen

    def term_values(self, u):
        a = np.array([t.coef * t.functional.value(u) for t in self.I1])
        b = np.array([t.coef * t.functional.value(u) for t in self.I2])
        return a, b

    def term_values_batch(self, C, basis, chunk: int = 4096):
        """Term values for the fields ``C @ basis.T`` (rows of ``C``)."""
        C = np.atleast_2d(C)
        f1 = [(t.coef, t.functional.restrict(basis)) for t in self.I1]
        f2 = [(t.coef, t.functional.restrict(basis)) for t in self.I2]
        a = np.empty((C.shape[0], len(f1)))
        b = np.empty((C.shape[0], len(f2)))
        for s in range(0, C.shape[0], chunk):
            Cs = C[s : s + chunk]
            for i, (c, f) in enumerate(f1):
                a[s : s + chunk, i] = c * f(Cs)
            for k, (c, f) in enumerate(f2):
                b[s : s + chunk, k] = c * f(Cs)
        return a, b

    def fiber(self, u) -> "Fiber":
        a, b = self.term_values(u)
        return Fiber(a, self.d1, b, self.d2)

    def phi(self, mu, v) -> float:
        a, b = self.term_values(v)
        return float(a.sum() - mu * b.sum())

    def phi_gradient(self, mu, v) -> np.ndarray:
        g = sum(t.coef * t.functional.gradient(v) for t in self.I1)
        return g - mu * sum(t.coef * t.functional.gradient(v) for t in self.I2)

    def I2_value(self, v) -> float:
        return float(sum(t.coef * t.functional.value(v) for t in self.I2))


def _powsum(c, x, t, k=0):
    """k-th t-derivative of sum_j c_j t^{x_j}, vectorised over t."""
    t = np.asarray(t, dtype=float)[..., None]
    coef = c.copy()
    ex = x.copy()
    for _ in range(k):
        coef = coef * ex
        ex = ex - 1
    return np.sum(coef * t**ex, axis=-1), np.sum(np.abs(coef) * t**ex, axis=-1)


class Fiber:
    """``psi(t) = sum a_i t^{d_i} / sum b_k t^{e_k}`` and its derivatives.

    The numerator of ``psi'`` is assembled as
    ``sum_{i,k} a_i b_k (d_i - e_k) t^{d_i + e_k - 1}`` so equal-degree pairs
    cancel exactly instead of through rounding.
    """

    def __init__(self, a, d, b, e):
        self.a, self.d = np.asarray(a, float), np.asarray(d, float)
        self.b, self.e = np.asarray(b, float), np.asarray(e, float)
        c = (self.a[:, None] * self.b[None, :] * (self.d[:, None] - self.e[None, :])).ravel()
        x = (self.d[:, None] + self.e[None, :] - 1).ravel()
        keep = c != 0
        self._nc, self._nx = c[keep], x[keep]

    def Q(self, t):
        q = _powsum(self.b, self.e, t)[0]
        if np.any(np.abs(q) <= np.finfo(float).tiny):
            raise ZeroDenominator("I2 vanishes on the ray")
        return q

    def psi(self, t):
        return _powsum(self.a, self.d, t)[0] / self.Q(t)

    def numerator(self, t):
        """``psi'(t) Q(t)^2``; shares the sign of ``psi'``."""
        return _powsum(self._nc, self._nx, t)[0]

    def derivatives(self, t):
        """``(psi, psi', psi'', scale', scale'')``.

        The scales are the same expressions with absolute values, used as
        reference magnitudes for root and degeneracy tolerances.
        """
        P = _powsum(self.a, self.d, t)[0]
        Q, Qa = _powsum(self.b, self.e, t)
        dQ, dQa = _powsum(self.b, self.e, t, 1)
        Nn, Nna = _powsum(self._nc, self._nx, t)
        dNn, dNna = _powsum(self._nc, self._nx, t, 1)
        if np.any(np.abs(Q) <= np.finfo(float).tiny):
            raise ZeroDenominator("I2 vanishes on the ray")
        psi = P / Q
        d1 = Nn / Q**2
        d2 = (dNn * Q - 2 * Nn * dQ) / Q**3
        s1 = Nna / Q**2
        s2 = (dNna * np.abs(Q) + 2 * Nna * dQa) / np.abs(Q) ** 3
        return psi, d1, d2, s1, s2


def check_class_degrees(tag, eta, alpha, beta):
    if tag == CLASS_ONE and not (1 < alpha < eta < beta):
        raise BadDegrees(f"class one needs 1 < alpha < eta < beta, got {alpha}, {eta}, {beta}")
    if tag == CLASS_TWO and not (1 < eta < beta < alpha):
        raise BadDegrees(f"class two needs 1 < eta < beta < alpha, got {eta}, {beta}, {alpha}")
