"""Empirical-Bayes adaptation of the two regularization weights with Adam steps."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .model import HyperParams

LAMBDA_FLOOR = 1e-6


@dataclass(frozen=True)
class AdamState:
    """Per-hyperparameter Adam moments; index 1 is the user side, 2 the item side."""

    alpha: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    m1: float = 0.0
    m2: float = 0.0
    v1: float = 0.0
    v2: float = 0.0
    t: int = 0
    frozen: bool = False

    def __post_init__(self):
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise ValueError("beta1 and beta2 must lie in [0, 1)")
        if not self.eps > 0:
            raise ValueError("eps must be positive")

    def corrected(self) -> tuple[float, float, float, float]:
        """Bias-corrected ``(m1_hat, m2_hat, v1_hat, v2_hat)`` at the current step."""
        if self.t == 0:
            return 0.0, 0.0, 0.0, 0.0
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        return self.m1 / c1, self.m2 / c1, self.v1 / c2, self.v2 / c2


def grad_h_lambda1(U, T: float) -> float:
    """``-||U||_F^2 / T``: derivative of the user prior term ``-(lambda1/T)||U||^2``."""
    if not T > 0:
        raise ValueError(f"temperature must be positive, got {T}")
    U = np.asarray(U, dtype=np.float64)
    return -float(np.vdot(U, U)) / T


def grad_h_lambda2(V, T: float) -> float:
    """Item-side mirror of :func:`grad_h_lambda1`."""
    if not T > 0:
        raise ValueError(f"temperature must be positive, got {T}")
    V = np.asarray(V, dtype=np.float64)
    return -float(np.vdot(V, V)) / T


def adam_update(adam: AdamState, hp: HyperParams, h1: float, h2: float) -> tuple[AdamState, HyperParams]:
    """One Adam step on each weight, moving against the signal ``h``.

    A frozen state is returned unchanged together with the same weights.
    """
    if adam.frozen:
        return adam, hp
    b1, b2 = adam.beta1, adam.beta2
    m1 = b1 * adam.m1 + (1.0 - b1) * h1
    m2 = b1 * adam.m2 + (1.0 - b1) * h2
    v1 = b2 * adam.v1 + (1.0 - b2) * h1 * h1
    v2 = b2 * adam.v2 + (1.0 - b2) * h2 * h2
    nxt = replace(adam, m1=m1, m2=m2, v1=v1, v2=v2, t=adam.t + 1)
    m1_hat, m2_hat, v1_hat, v2_hat = nxt.corrected()
    lam1 = hp.lambda1 - adam.alpha * m1_hat / (math.sqrt(v1_hat) + adam.eps)
    lam2 = hp.lambda2 - adam.alpha * m2_hat / (math.sqrt(v2_hat) + adam.eps)
    return nxt, HyperParams(max(lam1, LAMBDA_FLOOR), max(lam2, LAMBDA_FLOOR))


def check_freeze(prev: HyperParams, nxt: HyperParams, tol: float) -> bool:
    """True when both weights moved by less than ``tol``."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    return abs(nxt.lambda1 - prev.lambda1) < tol and abs(nxt.lambda2 - prev.lambda2) < tol


def eb_step(adam: AdamState, hp: HyperParams, U, V, T: float, tol: float) -> tuple[AdamState, HyperParams]:
    """Gradient signals from the sampled factors, one Adam step, then the freeze rule."""
    if adam.frozen:
        return adam, hp
    nxt_adam, nxt_hp = adam_update(adam, hp, grad_h_lambda1(U, T), grad_h_lambda2(V, T))
    if check_freeze(hp, nxt_hp, tol):
        nxt_adam = replace(nxt_adam, frozen=True)
    return nxt_adam, nxt_hp
