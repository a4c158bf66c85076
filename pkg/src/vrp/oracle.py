"""Brute-force verification of the analytic equilibrium on a discretized game.

The continuum game is replaced by a finite grid of alternatives, a finite
panel of quantile-placed voters, and a finite grid of proposer types whose
draw probabilities are exact CDF cell masses.  Backward induction then finds
every proposer's best response against the panel vote by exhaustive search,
with sophisticated panel voters comparing exact continuation values.  Nothing
here reuses the closed-form strategies, so agreement between the two routes
is a genuine check of both.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .distributions import TypeDistribution
from .mechanism import quantile_panel
from .thresholds import EquilibriumThresholds
from .equilibrium import expected_utility_of_winner

DEV_TOL = 1e-9
_VOTE_CHUNK = 64
_VALUE_CHUNK = 16


@dataclass
class DiscreteGame:
    """Gridded game instance: alternatives, voter panel, and type lattice."""

    grid: np.ndarray
    distribution: TypeDistribution
    rounds: int
    panel: np.ndarray
    median_index: int
    type_grid: np.ndarray
    type_mass: np.ndarray

    @property
    def cell(self) -> float:
        return float(self.grid[1] - self.grid[0])

    @property
    def snapped_median(self) -> float:
        return float(self.grid[self.median_index])


def build_discrete_game(
    d: TypeDistribution,
    n_alternatives: int,
    panel_size: int,
    rounds: int,
    type_points: int = 401,
) -> DiscreteGame:
    """Discretize: N equally spaced alternatives, odd quantile panel, K types.

    Type-draw probabilities are CDF differences over the cells around each
    type node, which stay exact even for densities that blow up at the
    support boundary.
    """
    if n_alternatives < 3:
        raise ValueError(f"need at least 3 grid alternatives, got {n_alternatives}")
    if panel_size < 1 or panel_size % 2 == 0:
        raise ValueError(f"panel size must be odd and >= 1, got {panel_size}")
    if rounds < 1:
        raise ValueError(f"rounds must be >= 1, got {rounds}")
    if type_points < 3:
        raise ValueError(f"need at least 3 type nodes, got {type_points}")
    grid = np.linspace(0.0, 1.0, n_alternatives)
    panel = quantile_panel(d, panel_size)
    type_grid = np.linspace(0.0, 1.0, type_points)
    bounds = np.concatenate(([0.0], 0.5 * (type_grid[:-1] + type_grid[1:]), [1.0]))
    type_mass = np.diff(np.asarray(d.cdf(bounds), dtype=float))
    median_index = int(np.argmin(np.abs(grid - d.median())))
    return DiscreteGame(
        grid=grid,
        distribution=d,
        rounds=rounds,
        panel=panel,
        median_index=median_index,
        type_grid=type_grid,
        type_mass=type_mass,
    )


@dataclass
class ValueTable:
    """Backward-induction output, one entry per round (index t-1).

    ``vote_winner[t-1][p, q]`` is the grid index winning the round-t ballot
    between proposal p and status quo q; ``winner_index[t-1][k, q]`` the
    induced winner under type k's best proposal; ``values[t-1][r, q]`` the
    expected final utility of agent row r entering round t at status quo q.
    Agent rows stack the voter panel first, then the proposer type grid.
    """

    rounds: int
    panel_size: int
    vote_winner: list[np.ndarray] = field(default_factory=list)
    proposal_index: list[np.ndarray] = field(default_factory=list)
    winner_index: list[np.ndarray] = field(default_factory=list)
    values: list[np.ndarray] = field(default_factory=list)
    terminal: np.ndarray | None = None

    def post_round_values(self, t: int) -> np.ndarray:
        """Value of (agent, winner) once round t's winner is settled."""
        return self.values[t] if t < self.rounds else self.terminal


def _vote_winner_matrix(scores: np.ndarray) -> np.ndarray:
    """Winner grid index of every (proposal, status quo) ballot.

    ``scores[i, o]`` ranks outcomes for voter i; a voter supports the
    proposal whenever its score is at least the status quo's (indifference
    favors the proposal), and the proposal carries a tied panel.
    """
    m, n = scores.shape
    winner = np.empty((n, n), dtype=np.int32)
    idx = np.arange(n, dtype=np.int32)
    for start in range(0, n, _VOTE_CHUNK):
        cols = slice(start, min(start + _VOTE_CHUNK, n))
        votes = (scores[:, :, None] >= scores[:, None, cols]).sum(axis=0)
        winner[:, cols] = np.where(2 * votes >= m, idx[:, None], idx[None, cols])
    return winner


def _best_response(type_values: np.ndarray, vote_winner: np.ndarray, grid: np.ndarray, type_grid: np.ndarray):
    """Best proposal and induced winner per (type, status quo).

    Maximizes the type's value over induced outcomes; among exact value ties
    prefers the outcome closest to the own peak, then the lowest proposal
    index, making the oracle fully deterministic.
    """
    k, n = type_values.shape
    proposal = np.empty((k, n), dtype=np.int32)
    winner = np.empty((k, n), dtype=np.int32)
    for j in range(n):
        outcome = vote_winner[:, j]
        val = type_values[:, outcome]
        best = val.max(axis=1, keepdims=True)
        tied = val >= best
        dist = np.where(tied, np.abs(grid[outcome][None, :] - type_grid[:, None]), np.inf)
        closest = dist.min(axis=1, keepdims=True)
        choice = (dist <= closest).argmax(axis=1).astype(np.int32)
        proposal[:, j] = choice
        winner[:, j] = outcome[choice]
    return proposal, winner


def backward_induction(game: DiscreteGame) -> ValueTable:
    """Solve the discrete game exactly, last round first.

    The last-round ballot is scored by plain distance to each voter's peak;
    earlier ballots are scored by each voter's expected continuation value,
    i.e. panel voters are sophisticated.  Round values integrate the next
    proposer's type over the exact cell masses.
    """
    grid = game.grid
    m = len(game.panel)
    peaks = np.concatenate([game.panel, game.type_grid])
    terminal = -((peaks[:, None] - grid[None, :]) ** 2)
    table = ValueTable(rounds=game.rounds, panel_size=m)
    table.terminal = terminal
    table.vote_winner = [None] * game.rounds
    table.proposal_index = [None] * game.rounds
    table.winner_index = [None] * game.rounds
    table.values = [None] * game.rounds

    v_next = terminal
    for t in range(game.rounds, 0, -1):
        if t == game.rounds:
            scores = -np.abs(game.panel[:, None] - grid[None, :])
        else:
            scores = v_next[:m]
        vote_winner = _vote_winner_matrix(scores)
        proposal, winner = _best_response(v_next[m:], vote_winner, grid, game.type_grid)
        values = np.empty_like(v_next)
        for j in range(len(grid)):
            values[:, j] = v_next[:, winner[:, j]] @ game.type_mass
        table.vote_winner[t - 1] = vote_winner
        table.proposal_index[t - 1] = proposal
        table.winner_index[t - 1] = winner
        table.values[t - 1] = values
        v_next = values
    return table


@dataclass(frozen=True)
class Violation:
    round: int
    type_index: int
    q_index: int
    analytic: float
    oracle: float
    gap: float

    def line(self) -> str:
        return (
            f"{self.round},{self.type_index},{self.q_index},"
            f"{self.analytic:.17g},{self.oracle:.17g},{self.gap:.17g}"
        )


@dataclass
class EquilibriumCheck:
    violations: list[Violation]
    checked: int
    excluded: int
    max_gap: float

    @property
    def passed(self) -> bool:
        return not self.violations


def verify_equilibrium(game: DiscreteGame, table: ValueTable, th: EquilibriumThresholds) -> EquilibriumCheck:
    """Compare oracle winners against the closed-form strategy, round by round.

    In every round before the last the analytic winner is the own-side
    maximum (both alternatives beyond a threshold) or the median; the oracle
    winner must match within one grid cell.  Types within two cells of a
    threshold are excluded: there the proposer is nearly indifferent and the
    discrete argmax may legitimately land on either branch.
    """
    grid = game.grid
    h = game.cell
    tg = game.type_grid
    band = (np.abs(tg - th.lower) <= 2.0 * h) | (np.abs(tg - th.upper) <= 2.0 * h)
    violations: list[Violation] = []
    checked = 0
    excluded = 0
    max_gap = 0.0
    for t in range(1, game.rounds):
        oracle_w = grid[table.winner_index[t - 1]]
        ty = tg[:, None]
        q = grid[None, :]
        both_low = np.maximum(ty, q) < th.lower
        both_high = np.minimum(ty, q) > th.upper
        analytic = np.where(both_low, np.maximum(ty, q), np.where(both_high, np.minimum(ty, q), th.median))
        gap = np.abs(oracle_w - analytic)
        gap_checked = gap[~band, :]
        checked += gap_checked.size
        excluded += int(band.sum()) * len(grid)
        if gap_checked.size:
            max_gap = max(max_gap, float(gap_checked.max()))
        bad = gap > h + 1e-12
        bad[band, :] = False
        for k, j in zip(*np.nonzero(bad)):
            violations.append(
                Violation(
                    round=t,
                    type_index=int(k),
                    q_index=int(j),
                    analytic=float(analytic[k, j]),
                    oracle=float(oracle_w[k, j]),
                    gap=float(gap[k, j]),
                )
            )
    return EquilibriumCheck(violations=violations, checked=checked, excluded=excluded, max_gap=max_gap)


@dataclass
class DeviationReport:
    max_proposer_gain: float
    max_voter_gain: float
    proposer_violations: int
    voter_violations: int
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.proposer_violations == 0 and self.voter_violations == 0


def verify_strategy_proofness(game: DiscreteGame, table: ValueTable, dev_tol: float = DEV_TOL) -> DeviationReport:
    """Scan every one-shot deviation for a strict improvement.

    Proposers: any grid proposal instead of the chosen one, valued through
    the ballot matrix and continuation values.  Voters: flipping the cast
    vote on any ballot, valued as if pivotal.  Both scans recompute values
    from the stored tables rather than trusting the solver's argmax.
    """
    m = table.panel_size
    max_prop = -np.inf
    max_vote = -np.inf
    prop_viol = 0
    vote_viol = 0
    n = len(game.grid)
    for t in range(1, game.rounds + 1):
        post = table.post_round_values(t)
        vote_winner = table.vote_winner[t - 1]
        type_values = post[m:]
        eq_val = np.take_along_axis(type_values, table.winner_index[t - 1], axis=1)
        for j in range(n):
            dev_best = type_values[:, vote_winner[:, j]].max(axis=1)
            gain = dev_best - eq_val[:, j]
            max_prop = max(max_prop, float(gain.max()))
            prop_viol += int(np.count_nonzero(gain > dev_tol))
        if t == game.rounds:
            scores = -np.abs(game.panel[:, None] - game.grid[None, :])
            stakes = post[:m]
        else:
            scores = table.values[t][:m]
            stakes = scores
        for start in range(0, n, _VALUE_CHUNK):
            cols = slice(start, min(start + _VALUE_CHUNK, n))
            prefer = scores[:, :, None] >= scores[:, None, cols]
            flip_gain = np.where(
                prefer,
                stakes[:, None, cols] - stakes[:, :, None],
                stakes[:, :, None] - stakes[:, None, cols],
            )
            max_vote = max(max_vote, float(flip_gain.max()))
            vote_viol += int(np.count_nonzero(flip_gain > dev_tol))
    return DeviationReport(
        max_proposer_gain=float(max_prop),
        max_voter_gain=float(max_vote),
        proposer_violations=prop_viol,
        voter_violations=vote_viol,
        tolerance=dev_tol,
    )


def verify_threshold_signs(d: TypeDistribution, th: EquilibriumThresholds, points: int = 200) -> bool:
    """Check the sign pattern of own-peak surplus across the type space.

    The expected-utility advantage of the own peak winning (over the median
    winning) must be nonnegative outside the thresholds and nonpositive
    between them, up to quadrature tolerance.
    """
    if points < 10:
        raise ValueError(f"need at least 10 scan points, got {points}")
    tol = 1e-9

    def surplus(theta: float) -> float:
        return expected_utility_of_winner(d, theta, theta) - (-((th.median - theta) ** 2))

    if th.lower > 0.0:
        for theta in np.linspace(0.0, th.lower, points):
            if surplus(float(theta)) < -tol:
                return False
    for theta in np.linspace(th.lower, th.upper, points):
        if surplus(float(theta)) > tol:
            return False
    if th.upper < 1.0:
        for theta in np.linspace(th.upper, 1.0, points):
            if surplus(float(theta)) < -tol:
                return False
    return True


def discrete_final_winner_reference(game: DiscreteGame, proposer_peak: float, q_index: int) -> int:
    """Last-round winner derived from the decisive middle voter, not search.

    The panel's preferences between two alternatives are monotone in the
    peak, so the middle voter decides every ballot; the attainable outcomes
    against status quo q are exactly the grid points the middle voter weakly
    prefers to q, and the proposer lands on the attainable point closest to
    its peak (ties toward the lower index).  Used by tests as an independent
    cross-check of the backward-induction machinery at the final round.
    """
    mid_voter = game.panel[len(game.panel) // 2]
    dq = abs(mid_voter - game.grid[q_index])
    attainable = np.flatnonzero(np.abs(mid_voter - game.grid) <= dq)
    dist = np.abs(game.grid[attainable] - proposer_peak)
    return int(attainable[int(np.argmin(dist))])
