"""Simulated annealing with reversible-jump moves over the latent dimension.

Each step draws a target dimension uniformly from ``1..k_max``. A larger
target proposes a birth (pad every row with Gaussian auxiliaries and rotate
by the Helmert map), a smaller one a death (inverse rotation, drop the tail),
and an equal one a random-walk perturbation of all entries. The proposal is
accepted by a Metropolis-Hastings test on the Boltzmann exponent at the
current temperature, the regularization weights take one empirical-Bayes
Adam step, and the temperature is multiplied by the cooling factor.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from . import helmert
from .data import SparseRatings, rmse
from .hyper import AdamState, eb_step
from .model import (
    EnergyBreakdown,
    FactorState,
    HyperParams,
    energy_breakdown,
    exponent_from_breakdown,
    init_factors,
)

_logger = logging.getLogger(__name__)

MoveKind = Literal["birth", "death", "within"]
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class AnnealSchedule:
    t0: float = 1.0
    beta: float = 0.995
    tmin: float = 1e-3

    def __post_init__(self):
        if not self.t0 > 0 or not self.tmin > 0:
            raise ValueError("temperatures must be positive")
        if not 0.0 < self.beta < 1.0:
            raise ValueError("cooling factor must lie in (0, 1)")

    def n_steps(self) -> int:
        """Number of steps taken before the temperature drops to ``tmin``."""
        count, T = 0, self.t0
        while T > self.tmin:
            count += 1
            T *= self.beta
        return count


@dataclass(frozen=True)
class AnnealerConfig:
    k_max: int = 50
    schedule: AnnealSchedule = field(default_factory=AnnealSchedule)
    step_scale: float = 0.05
    lambda1_init: float = 30.0
    lambda2_init: float = 30.0
    alpha: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    freeze_tol: float = 1e-5
    adapt_hyper: bool = True

    def __post_init__(self):
        if self.k_max < 1:
            raise ValueError("k_max must be >= 1")
        if self.step_scale < 0:
            raise ValueError("step_scale must be non-negative")


@dataclass(frozen=True, eq=False)
class MoveProposal:
    kind: MoveKind
    k_from: int
    k_to: int
    log_g: float
    candidate: FactorState


@dataclass(frozen=True)
class ChainTraceRecord:
    iteration: int
    temperature: float
    k: int
    train_loss: float
    test_rmse: float
    lambda1: float
    lambda2: float
    accepted: bool
    move_kind: str


@dataclass(frozen=True, eq=False)
class Chain:
    """Everything one annealing chain carries from step to step."""

    config: AnnealerConfig
    state: FactorState
    hp: HyperParams
    adam: AdamState
    temperature: float
    iteration: int = 0
    energy: EnergyBreakdown | None = None  # cached breakdown of ``state`` on the training set


@dataclass(eq=False)
class ChainResult:
    best_state: FactorState
    best_loss: float
    best_iteration: int
    final_state: FactorState
    hyperparams: HyperParams
    adam: AdamState
    trace: list[ChainTraceRecord]
    k0: int


def _gauss_logpdf_sum(u: np.ndarray, sd: float) -> float:
    u = np.asarray(u)
    return float(-u.size * (_LOG_SQRT_2PI + math.log(sd)) - 0.5 * np.vdot(u, u) / (sd * sd))


def _prior_sds(hp: HyperParams, T: float) -> tuple[float, float]:
    return math.sqrt(T / hp.lambda1), math.sqrt(T / hp.lambda2)


def propose_dimension(rng: np.random.Generator, k_max: int) -> int:
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    return int(rng.integers(1, k_max + 1))


def propose_birth(state: FactorState, k_new: int, hp: HyperParams, T: float,
                  rng: np.random.Generator) -> MoveProposal:
    """Grow every row by ``k_new - k`` Gaussian auxiliaries, then rotate.

    User auxiliaries have sd ``sqrt(T/lambda1)``, item auxiliaries
    ``sqrt(T/lambda2)``; ``log_g`` is their joint log density.
    """
    delta = k_new - state.k
    if delta < 1:
        raise ValueError(f"birth needs k_new > k, got {k_new} <= {state.k}")
    sd_u, sd_v = _prior_sds(hp, T)
    aux_u = sd_u * rng.standard_normal((state.n, delta))
    aux_v = sd_v * rng.standard_normal((state.p, delta))
    return _birth_from_aux(state, aux_u, aux_v, sd_u, sd_v)


def _birth_from_aux(state, aux_u, aux_v, sd_u, sd_v) -> MoveProposal:
    cand = FactorState(helmert.birth_map(state.U, aux_u), helmert.birth_map(state.V, aux_v))
    log_g = _gauss_logpdf_sum(aux_u, sd_u) + _gauss_logpdf_sum(aux_v, sd_v)
    return MoveProposal("birth", state.k, cand.k, log_g, cand)


def propose_death(state: FactorState, k_new: int, hp: HyperParams, T: float) -> MoveProposal:
    """Rotate back and keep the first ``k_new`` coordinates of every row.

    ``log_g`` is the auxiliary density evaluated at the discarded tails.
    """
    if not 1 <= k_new < state.k:
        raise ValueError(f"death needs 1 <= k_new < k, got {k_new} with k = {state.k}")
    sd_u, sd_v = _prior_sds(hp, T)
    U_head, U_tail = helmert.death_map(state.U, k_new)
    V_head, V_tail = helmert.death_map(state.V, k_new)
    log_g = _gauss_logpdf_sum(U_tail, sd_u) + _gauss_logpdf_sum(V_tail, sd_v)
    return MoveProposal("death", state.k, k_new, log_g, FactorState(U_head, V_head))


def propose_within(state: FactorState, hp: HyperParams, T: float, rng: np.random.Generator,
                   step_scale: float) -> MoveProposal:
    """Symmetric random walk: every entry moves by ``step_scale * N(0, 1)``."""
    U = state.U + step_scale * rng.standard_normal(state.U.shape)
    V = state.V + step_scale * rng.standard_normal(state.V.shape)
    return MoveProposal("within", state.k, state.k, 0.0, FactorState(U, V))


def log_move_prob(k_from: int, k_to: int, k_max: int) -> float:
    """Log probability of an up (``(k_max - k_from)/k_max``) or down (``(k_from - 1)/k_max``) move."""
    if k_to > k_from:
        num = k_max - k_from
    elif k_to < k_from:
        num = k_from - 1
    else:
        raise ValueError("move probabilities are defined for dimension changes only")
    return math.log(num / k_max) if num > 0 else -math.inf


def log_ratio_from_exponents(proposal: MoveProposal, cur_exp: float, cand_exp: float, k_max: int) -> float:
    delta = cand_exp - cur_exp
    if proposal.kind == "within":
        return delta
    reverse = log_move_prob(proposal.k_to, proposal.k_from, k_max)
    forward = log_move_prob(proposal.k_from, proposal.k_to, k_max)
    if proposal.kind == "birth":
        return delta + reverse - proposal.log_g - forward
    return delta + proposal.log_g + reverse - forward


def acceptance_log_ratio(current: FactorState, proposal: MoveProposal, hp: HyperParams,
                         ratings: SparseRatings, T: float, k_max: int) -> float:
    """Log of the Metropolis-Hastings ratio before clamping at 0.

    Birth divides by the auxiliary density, death multiplies by it; both
    carry the reverse-over-forward move probability.
    """
    if not T > 0:
        raise ValueError(f"temperature must be positive, got {T}")
    cur = exponent_from_breakdown(energy_breakdown(current, ratings), hp, T)
    cand = exponent_from_breakdown(energy_breakdown(proposal.candidate, ratings), hp, T)
    return log_ratio_from_exponents(proposal, cur, cand, k_max)


def start_chain(config: AnnealerConfig, n: int, p: int, rng: np.random.Generator) -> Chain:
    k0 = propose_dimension(rng, config.k_max)
    return Chain(
        config=config,
        state=init_factors(n, p, k0, rng),
        hp=HyperParams(config.lambda1_init, config.lambda2_init),
        adam=AdamState(alpha=config.alpha, beta1=config.beta1, beta2=config.beta2, eps=config.eps),
        temperature=config.schedule.t0,
    )


def _propose(chain: Chain, rng: np.random.Generator) -> MoveProposal:
    cfg, state, T = chain.config, chain.state, chain.temperature
    k_new = propose_dimension(rng, cfg.k_max)
    if k_new > state.k:
        return propose_birth(state, k_new, chain.hp, T, rng)
    if k_new < state.k:
        return propose_death(state, k_new, chain.hp, T)
    return propose_within(state, chain.hp, T, rng, cfg.step_scale)


def _record(chain: Chain, train: SparseRatings, test: SparseRatings | None,
            eb: EnergyBreakdown, accepted: bool, kind: str, T: float) -> ChainTraceRecord:
    hp = chain.hp
    loss = eb.sq_error_sum / eb.kappa_size + hp.lambda1 * eb.frob_u + hp.lambda2 * eb.frob_v
    test_rmse = rmse(chain.state, test) if test is not None and len(test) else math.nan
    return ChainTraceRecord(chain.iteration, T, chain.state.k, loss, test_rmse,
                            hp.lambda1, hp.lambda2, accepted, kind)


def anneal_step(chain: Chain, train: SparseRatings, test: SparseRatings | None,
                rng: np.random.Generator) -> tuple[Chain, ChainTraceRecord]:
    """Propose, accept or reject, adapt the weights, then cool."""
    T = chain.temperature
    if not T > chain.config.schedule.tmin:
        raise ValueError("chain temperature already at or below tmin")
    cur_eb = chain.energy if chain.energy is not None else energy_breakdown(chain.state, train)
    proposal = _propose(chain, rng)
    cand_eb = energy_breakdown(proposal.candidate, train)
    log_alpha = log_ratio_from_exponents(
        proposal,
        exponent_from_breakdown(cur_eb, chain.hp, T),
        exponent_from_breakdown(cand_eb, chain.hp, T),
        chain.config.k_max,
    )
    accepted = bool(math.log(rng.random()) < min(0.0, log_alpha))
    state, eb = (proposal.candidate, cand_eb) if accepted else (chain.state, cur_eb)

    adam, hp = chain.adam, chain.hp
    if chain.config.adapt_hyper:
        adam, hp = eb_step(adam, hp, state.U, state.V, T, chain.config.freeze_tol)

    nxt = replace(chain, state=state, hp=hp, adam=adam, energy=eb,
                  temperature=T * chain.config.schedule.beta, iteration=chain.iteration + 1)
    return nxt, _record(nxt, train, test, eb, accepted, proposal.kind, T)


def run_chain(config: AnnealerConfig, train: SparseRatings, test: SparseRatings | None,
              seed=None, callback=None) -> ChainResult:
    """Anneal from ``t0`` down to ``tmin`` and keep the lowest-loss state visited.

    The initial dimension is uniform on ``1..k_max``. ``callback``, if
    given, receives each trace record as it is produced.
    """
    rng = np.random.default_rng(seed)
    chain = start_chain(config, train.n, train.p, rng)
    k0 = chain.state.k
    eb = energy_breakdown(chain.state, train)
    chain = replace(chain, energy=eb)
    best_state = chain.state
    best_loss = eb.sq_error_sum / eb.kappa_size + chain.hp.lambda1 * eb.frob_u + chain.hp.lambda2 * eb.frob_v
    best_iter = 0
    trace: list[ChainTraceRecord] = []
    tmin = config.schedule.tmin
    while chain.temperature > tmin:
        chain, rec = anneal_step(chain, train, test, rng)
        trace.append(rec)
        if callback is not None:
            callback(rec)
        if rec.train_loss < best_loss:
            best_state, best_loss, best_iter = chain.state, rec.train_loss, rec.iteration
    _logger.info("chain finished after %d steps: k=%d best loss %.6g at step %d",
                 chain.iteration, chain.state.k, best_loss, best_iter)
    return ChainResult(best_state, best_loss, best_iter, chain.state, chain.hp,
                       chain.adam, trace, k0)
