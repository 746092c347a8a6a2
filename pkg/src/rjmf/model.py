"""Latent factor state, the regularized loss and the Boltzmann exponent."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import SparseRatings, predictions
from .exceptions import UndefinedMetricError


@dataclass(frozen=True, eq=False)
class FactorState:
    """User factors ``U`` (n x k) and item factors ``V`` (p x k)."""

    U: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        U = np.asarray(self.U, dtype=np.float64)
        V = np.asarray(self.V, dtype=np.float64)
        if U.ndim != 2 or V.ndim != 2:
            raise ValueError("U and V must be 2-d")
        if U.shape[1] != V.shape[1] or U.shape[1] < 1:
            raise ValueError(f"U and V must share k >= 1, got {U.shape[1]} and {V.shape[1]}")
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "V", V)

    @property
    def k(self) -> int:
        return self.U.shape[1]

    @property
    def n(self) -> int:
        return self.U.shape[0]

    @property
    def p(self) -> int:
        return self.V.shape[0]

    def copy(self) -> FactorState:
        return FactorState(self.U.copy(), self.V.copy())

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.U).all() and np.isfinite(self.V).all())


@dataclass(frozen=True)
class HyperParams:
    lambda1: float
    lambda2: float

    def __post_init__(self):
        if not (self.lambda1 >= 0 and self.lambda2 >= 0):
            raise ValueError(f"regularization weights must be non-negative, got {self}")


@dataclass(frozen=True)
class EnergyBreakdown:
    sq_error_sum: float
    frob_u: float
    frob_v: float
    kappa_size: int

    def bracket(self, hp: HyperParams) -> float:
        """``SSE + lambda1 ||U||^2 + lambda2 ||V||^2``."""
        return self.sq_error_sum + hp.lambda1 * self.frob_u + hp.lambda2 * self.frob_v


def init_factors(n: int, p: int, k: int, seed=None, sd: float | None = None) -> FactorState:
    """Random factors whose predicted ratings ``u_i . v_j`` average 3.

    Entries are iid ``Normal(sqrt(3/k), sd)`` with ``sd = 1/sqrt(2k)`` unless
    given; ``sd=0`` gives every prediction exactly 3. ``seed`` may be an int
    or a ``numpy.random.Generator``.
    """
    if min(n, p, k) < 1:
        raise ValueError(f"n, p and k must be >= 1, got {(n, p, k)}")
    if sd is None:
        sd = 1.0 / math.sqrt(2 * k)
    if sd < 0:
        raise ValueError("sd must be non-negative")
    rng = np.random.default_rng(seed)
    mean = math.sqrt(3.0 / k)
    U = mean + sd * rng.standard_normal((n, k))
    V = mean + sd * rng.standard_normal((p, k))
    return FactorState(U, V)


def energy_breakdown(state: FactorState, ratings: SparseRatings) -> EnergyBreakdown:
    if len(ratings) == 0:
        raise UndefinedMetricError("loss over an empty rating set is undefined")
    resid = ratings.ratings - predictions(state.U, state.V, ratings)
    return EnergyBreakdown(
        sq_error_sum=float(resid @ resid),
        frob_u=float(np.vdot(state.U, state.U)),
        frob_v=float(np.vdot(state.V, state.V)),
        kappa_size=len(ratings),
    )


def regularized_loss(state: FactorState, hp: HyperParams, ratings: SparseRatings) -> tuple[float, EnergyBreakdown]:
    """Mean squared error over observed ratings plus unnormalized Frobenius penalties.

    Returns ``(loss, breakdown)``. Only the squared-error sum is divided by
    the number of observed ratings.
    """
    eb = energy_breakdown(state, ratings)
    loss = eb.sq_error_sum / eb.kappa_size + hp.lambda1 * eb.frob_u + hp.lambda2 * eb.frob_v
    return loss, eb


def exponent_from_breakdown(eb: EnergyBreakdown, hp: HyperParams, T: float) -> float:
    if not T > 0:
        raise ValueError(f"temperature must be positive, got {T}")
    return -eb.bracket(hp) / (eb.kappa_size * T)


def boltzmann_exponent(state: FactorState, hp: HyperParams, ratings: SparseRatings, T: float) -> float:
    """Log unnormalized posterior: ``-(SSE + l1|U|^2 + l2|V|^2) / (|kappa| T)``.

    The whole bracket, penalties included, is divided by ``|kappa| T``.
    """
    if not T > 0:
        raise ValueError(f"temperature must be positive, got {T}")
    return exponent_from_breakdown(energy_breakdown(state, ratings), hp, T)


def predict(state: FactorState, i: int, j: int) -> float:
    if not (0 <= i < state.n and 0 <= j < state.p):
        raise IndexError(f"index ({i}, {j}) outside a {state.n} x {state.p} model")
    return float(state.U[i] @ state.V[j])
