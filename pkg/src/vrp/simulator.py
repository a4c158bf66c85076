"""Seeded Monte Carlo simulation of the multi-round voting game.

Each replication draws one proposer type per round by inverse-CDF sampling
from a counter-based random stream: replication ``i`` owns the flat positions
``[i*T, (i+1)*T)`` of a Philox stream keyed by the master seed.  Any block of
replications can therefore be regenerated independently, which makes results
bit-identical regardless of chunking or worker count.

Voters can be myopic (prefer the closer alternative today) or sophisticated
(prefer the alternative whose continuation is better).  Under equilibrium
proposals the two differ only in the tail regime where both alternatives sit
beyond a threshold, and there the continuation rule picks the alternative on
the median's side, which is also what the myopic midpoint vote picks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .distributions import TypeDistribution
from .equilibrium import closed_form_probability
from .thresholds import EquilibriumThresholds, solve_thresholds

WIN_TOL = 1e-9
_CHUNK = 65536


class VoterMode(str, Enum):
    SOPHISTICATED = "sophisticated"
    MYOPIC = "myopic"


class ProposerMode(str, Enum):
    EQUILIBRIUM = "equilibrium"
    # every proposer offers its own peak; voting is always myopic in this
    # mode because sophisticated voting is defined against equilibrium play
    OWN_PEAK_NAIVE = "own-peak-naive"


@dataclass(frozen=True)
class GameConfig:
    distribution: TypeDistribution
    rounds: int
    initial_status_quo: float
    voter_mode: VoterMode = VoterMode.SOPHISTICATED
    proposer_mode: ProposerMode = ProposerMode.EQUILIBRIUM
    seed: int = 0
    replications: int = 10_000

    def __post_init__(self):
        if self.rounds < 1:
            raise ValueError(f"rounds must be >= 1, got {self.rounds}")
        if not 0.0 <= self.initial_status_quo <= 1.0:
            raise ValueError(f"initial status quo must lie in [0, 1], got {self.initial_status_quo}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.replications < 1:
            raise ValueError(f"replications must be >= 1, got {self.replications}")


@dataclass(frozen=True)
class RoundRecord:
    t: int
    proposer_type: float
    proposal: float
    status_quo: float
    winner: float


@dataclass(frozen=True)
class Trajectory:
    replication: int
    rounds: tuple[RoundRecord, ...]
    final_winner: float


@dataclass(frozen=True)
class SimulationReport:
    distribution: str
    rounds: int
    initial_status_quo: float
    voter_mode: str
    proposer_mode: str
    seed: int
    replications: int
    p_hat: float
    standard_error: float
    closed_form: float | None
    z_score: float | None
    mean_final_distance_to_median: float


def replication_uniforms(seed: int, first_replication: int, count: int, draws_per_replication: int) -> np.ndarray:
    """Uniforms for replications [first, first+count), shape (count, draws).

    Row ``i`` of the full (replications x draws) table always holds the same
    values for a given seed; the Philox counter is positioned so that any
    contiguous block is generated without producing the rest.
    """
    draws = count * draws_per_replication
    if draws == 0:
        return np.empty((count, draws_per_replication))
    start = first_replication * draws_per_replication
    bit_gen = np.random.Philox(key=np.uint64(seed), counter=[start // 4, 0, 0, 0])
    gen = np.random.Generator(bit_gen)
    skip = start % 4
    if skip:
        gen.random(skip)
    return gen.random(draws).reshape(count, draws_per_replication)


class _Engine:
    """Config plus precomputed analytic inputs, shared across worker threads."""

    def __init__(self, config: GameConfig):
        self.config = config
        self.dist = config.distribution
        self.median = self.dist.median()
        if config.rounds >= 2:
            self.thresholds = solve_thresholds(self.dist, enforce_admissible=False)
        else:
            self.thresholds = None
        self.dist._sampling_table  # build the quantile table before threading

    def lower_upper(self) -> tuple[float, float]:
        if self.thresholds is None:
            return 0.0, 1.0
        return self.thresholds.lower, self.thresholds.upper

    def run_block(self, first: int, count: int, q1: np.ndarray | None = None, record: bool = False):
        cfg = self.config
        rounds = cfg.rounds
        med = self.median
        lower, upper = self.lower_upper()
        uniforms = replication_uniforms(cfg.seed, first, count, rounds)
        types = self.dist.sample_quantiles(uniforms)
        q = np.full(count, cfg.initial_status_quo) if q1 is None else np.asarray(q1, dtype=float)
        naive = cfg.proposer_mode is ProposerMode.OWN_PEAK_NAIVE
        continuation_rule = cfg.voter_mode is VoterMode.SOPHISTICATED and not naive
        history = []
        for t in range(1, rounds + 1):
            ty = types[:, t - 1]
            if naive:
                p = ty
            elif t == rounds:
                edge = np.clip(2.0 * med - q, 0.0, 1.0)
                p = np.where(q <= med, np.minimum(ty, edge), np.maximum(ty, edge))
            else:
                own_side = (np.maximum(q, ty) < lower) | (np.minimum(q, ty) > upper)
                p = np.where(own_side, ty, med)
            w = self._vote(p, q, continuation_rule and t < rounds)
            if record:
                history.append((ty, p, q, w))
            q = w
        return q, history

    def _vote(self, p: np.ndarray, q: np.ndarray, continuation_rule: bool) -> np.ndarray:
        mid = 0.5 * (p + q)
        mass_below = np.asarray(self.dist._cdf(mid), dtype=float)
        share = np.where(p > q, 1.0 - mass_below, mass_below)
        wins = (p == q) | (share >= 0.5)
        w = np.where(wins, p, q)
        if continuation_rule:
            lower, upper = self.lower_upper()
            tail = (np.maximum(p, q) < lower) | (np.minimum(p, q) > upper)
            tail_winner = np.maximum(p, q) if self.median >= 0.5 else np.minimum(p, q)
            w = np.where(tail, tail_winner, w)
        return w


def _block_bounds(replications: int, chunk: int = _CHUNK) -> list[tuple[int, int]]:
    return [(first, min(chunk, replications - first)) for first in range(0, replications, chunk)]


def simulate_final_winners(
    config: GameConfig,
    *,
    threads: int = 1,
    initial_status_quo_per_replication: np.ndarray | None = None,
) -> np.ndarray:
    """Final winners of every replication, in replication order.

    Worker threads fill disjoint slices of one preallocated array, so the
    output (and everything aggregated from it) does not depend on ``threads``.
    """
    engine = _Engine(config)
    reps = config.replications
    q1 = initial_status_quo_per_replication
    if q1 is not None:
        q1 = np.asarray(q1, dtype=float)
        if q1.shape != (reps,):
            raise ValueError(f"need one initial status quo per replication, got shape {q1.shape}")
    out = np.empty(reps)

    def work(bounds):
        first, count = bounds
        block_q1 = None if q1 is None else q1[first : first + count]
        out[first : first + count] = engine.run_block(first, count, block_q1)[0]

    bounds = _block_bounds(reps)
    if threads <= 1 or len(bounds) == 1:
        for b in bounds:
            work(b)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, bounds))
    return out


def run_trajectory(config: GameConfig, replication_index: int) -> Trajectory:
    """Full per-round record of one replication (deterministic in seed/index)."""
    if not 0 <= replication_index < config.replications:
        raise ValueError(f"replication index {replication_index} outside 0..{config.replications - 1}")
    engine = _Engine(config)
    winners, history = engine.run_block(replication_index, 1, record=True)
    records = tuple(
        RoundRecord(
            t=t,
            proposer_type=float(ty[0]),
            proposal=float(p[0]),
            status_quo=float(q[0]),
            winner=float(w[0]),
        )
        for t, (ty, p, q, w) in enumerate(history, start=1)
    )
    return Trajectory(replication=replication_index, rounds=records, final_winner=float(winners[0]))


def run_monte_carlo(config: GameConfig, *, threads: int = 1) -> SimulationReport:
    """Estimate the probability that the final winner is the median.

    The estimate counts replications whose final winner lies within a float
    tolerance of the median; equilibrium play places the median exactly, so
    the tolerance only absorbs rounding.  For two or more rounds the report
    also carries the closed-form equilibrium probability and the z-score of
    the estimate against it.
    """
    engine = _Engine(config)
    winners = simulate_final_winners(config, threads=threads)
    med = engine.median
    successes = int(np.count_nonzero(np.abs(winners - med) <= WIN_TOL))
    reps = config.replications
    p_hat = successes / reps
    stderr = math.sqrt(p_hat * (1.0 - p_hat) / reps)
    closed = None
    z = None
    if config.rounds >= 2:
        closed = closed_form_probability(engine.dist, engine.thresholds, config.rounds)
        if stderr > 0.0:
            z = (p_hat - closed) / stderr
    return SimulationReport(
        distribution=engine.dist.spec,
        rounds=config.rounds,
        initial_status_quo=config.initial_status_quo,
        voter_mode=config.voter_mode.value,
        proposer_mode=config.proposer_mode.value,
        seed=config.seed,
        replications=reps,
        p_hat=p_hat,
        standard_error=stderr,
        closed_form=closed,
        z_score=z,
        mean_final_distance_to_median=float(np.mean(np.abs(winners - med))),
    )


def compare_voter_modes(config: GameConfig, *, threads: int = 1) -> bool:
    """True iff myopic and sophisticated voting end every replication alike.

    Both runs share the seed, hence the same proposer draws; only the voting
    rule differs.
    """
    if config.proposer_mode is not ProposerMode.EQUILIBRIUM:
        raise ValueError("voter-mode comparison is defined for equilibrium proposals only")
    sophisticated = simulate_final_winners(
        replace(config, voter_mode=VoterMode.SOPHISTICATED), threads=threads
    )
    myopic = simulate_final_winners(replace(config, voter_mode=VoterMode.MYOPIC), threads=threads)
    return bool(np.all(np.abs(sophisticated - myopic) <= WIN_TOL))


def write_trajectories_csv(config: GameConfig, path) -> None:
    """Dump every replication's rounds as CSV at full float precision."""
    engine = _Engine(config)
    with open(path, "w", newline="") as fh:
        fh.write("replication,t,proposer_type,proposal,status_quo,winner\n")
        for first, count in _block_bounds(config.replications, chunk=4096):
            _, history = engine.run_block(first, count, record=True)
            for i in range(count):
                for t, (ty, p, q, w) in enumerate(history, start=1):
                    fh.write(
                        f"{first + i},{t},{ty[i]:.17g},{p[i]:.17g},{q[i]:.17g},{w[i]:.17g}\n"
                    )
