"""Closed forms for the two power-law classes.

Class one: ``Phi_mu = N/eta - mu A/alpha - B/beta`` with ``1 < alpha < eta < beta``.
Class two: ``Phi_mu = N/eta + mu A/alpha - B/beta`` with ``1 < eta < beta < alpha``.

In both cases ``t0(u)^(beta - eta) = kappa N(u) / B(u)`` on ``{B > 0}`` and
``Lambda`` is a constant times a monomial in ``N, A, B``.  The constant is
obtained by evaluating the fiber at its critical point for ``N = A = B = 1``
rather than from a transcribed formula; both the transcribed and the derived
closed expressions are kept on :class:`ClassConstants` for comparison.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotInD
from .model import (
    CLASS_ONE,
    CLASS_TWO,
    MAXIMIZE,
    MINIMIZE,
    ModelSpec,
    Term,
    check_class_degrees,
)


@dataclass(frozen=True)
class ClassConstants:
    class_tag: str
    eta: float
    alpha: float
    beta: float
    kappa: float
    constant: float
    exponent_NB: tuple
    printed_constant: float
    derived_constant: float


def class_constants(class_tag, alpha, beta, eta) -> ClassConstants:
    check_class_degrees(class_tag, eta, alpha, beta)
    a, b, e = float(alpha), float(beta), float(eta)
    if class_tag == CLASS_ONE:
        kappa = (b / e) * (e - a) / (b - a)
        t0 = kappa ** (1 / (b - e))
        constant = (a / e) * t0 ** (e - a) - (a / b) * t0 ** (b - a)
        printed = (a / e) * (b - e) / (b - a) * kappa ** ((e - a) / (b - a))
        derived = (a / e) * (b - e) / (b - a) * kappa ** ((e - a) / (b - e))
        exps = ((b - a) / (b - e), (e - a) / (b - e))
    else:
        kappa = (b / e) * (a - e) / (a - b)
        t0 = kappa ** (1 / (b - e))
        constant = (a / b) * t0 ** (b - a) - (a / e) * t0 ** (e - a)
        printed = (a / b) * (b - e) / (a - e) * ((e / b) * (a - b) / (a - e)) ** ((a - b) / (b - e))
        derived = (a / e) * (b - e) / (a - b) * kappa ** (-(a - e) / (b - e))
        exps = ((a - e) / (b - e), (a - b) / (b - e))
    return ClassConstants(class_tag, e, a, b, kappa, constant, exps, printed, derived)


def constants_of(model: ModelSpec) -> ClassConstants:
    return class_constants(model.class_tag, model.alpha, model.beta, model.eta)


def t0_from_values(cc: ClassConstants, N, B):
    """Vectorised closed-form ``t0``; ``nan`` where ``B <= 0``."""
    N, B = np.asarray(N, float), np.asarray(B, float)
    with np.errstate(divide="ignore", invalid="ignore"):
        t0 = (cc.kappa * N / B) ** (1 / (cc.beta - cc.eta))
    return np.where(B > 0, t0, np.nan)


def lambda_from_values(cc: ClassConstants, N, A, B):
    N, A, B = (np.asarray(x, float) for x in (N, A, B))
    p, q = cc.exponent_NB
    with np.errstate(divide="ignore", invalid="ignore"):
        if cc.class_tag == CLASS_ONE:
            lam = cc.constant * N**p / (A * B**q)
        else:
            lam = cc.constant * B**p / (A * N**q)
    return np.where(B > 0, lam, np.nan)


def _nab(model, u):
    return model.N.value(u), model.A.value(u), model.B.value(u)


def t0_closed(model: ModelSpec, u) -> float:
    N, _, B = _nab(model, u)
    if not B > 0:
        raise NotInD("B(u) <= 0")
    return float(t0_from_values(constants_of(model), N, B))


def lambda_closed(model: ModelSpec, u) -> float:
    N, A, B = _nab(model, u)
    if not B > 0:
        raise NotInD("B(u) <= 0")
    return float(lambda_from_values(constants_of(model), N, A, B))


def lambda_grad_closed_vector(model: ModelSpec, u) -> np.ndarray:
    """Representer of ``Lambda'(u)`` from the quotient-rule closed form."""
    cc = constants_of(model)
    N, A, B = _nab(model, u)
    if not B > 0:
        raise NotInD("B(u) <= 0")
    gN, gA, gB = model.N.gradient(u), model.A.gradient(u), model.B.gradient(u)
    e, a, b = cc.eta, cc.alpha, cc.beta
    Q = N ** ((e - a) / (b - e)) * B ** ((a - b) / (b - e)) / A**2
    if cc.class_tag == CLASS_ONE:
        bracket = (b - a) / (b - e) * A * B * gN - N * B * gA - (e - a) / (b - e) * N * A * gB
    else:
        bracket = (a - e) / (b - e) * A * N * gB - N * B * gA - (a - b) / (b - e) * B * A * gN
    return cc.constant * Q * bracket


def lambda_grad_closed(model: ModelSpec, u, v) -> float:
    return model.grid.inner(lambda_grad_closed_vector(model, u), v)


def _rule(cc, eta, beta):
    # I1 terms are (N/eta, -B/beta) in both classes
    def rule(a, b):
        a = np.asarray(a, float)
        return t0_from_values(cc, eta * a[..., 0], -beta * a[..., 1])

    return rule


def class_one_model(name, grid, N, A, B, **extra) -> ModelSpec:
    """``Phi_mu = N/eta - mu A/alpha - B/beta``; Lambda is minimised."""
    eta, alpha, beta = N.degree, A.degree, B.degree
    cc = class_constants(CLASS_ONE, alpha, beta, eta)
    return ModelSpec(
        name=name,
        grid=grid,
        I1=(Term(1 / eta, N), Term(-1 / beta, B)),
        I2=(Term(1 / alpha, A),),
        N=N,
        class_tag=CLASS_ONE,
        A=A,
        B=B,
        eta=eta,
        alpha=alpha,
        beta=beta,
        sign_A="minus",
        t0_rule=_rule(cc, eta, beta),
        direction=MINIMIZE,
        expected_nehari="N_minus",
        **extra,
    )


def class_two_model(name, grid, N, A, B, **extra) -> ModelSpec:
    """``Phi_mu = N/eta + mu A/alpha - B/beta``; Lambda is maximised."""
    eta, alpha, beta = N.degree, A.degree, B.degree
    cc = class_constants(CLASS_TWO, alpha, beta, eta)
    return ModelSpec(
        name=name,
        grid=grid,
        I1=(Term(1 / eta, N), Term(-1 / beta, B)),
        I2=(Term(-1 / alpha, A),),
        N=N,
        class_tag=CLASS_TWO,
        A=A,
        B=B,
        eta=eta,
        alpha=alpha,
        beta=beta,
        sign_A="plus",
        t0_rule=_rule(cc, eta, beta),
        direction=MAXIMIZE,
        expected_nehari="N_plus",
        **extra,
    )
