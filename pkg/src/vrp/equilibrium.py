"""Closed-form equilibrium behavior of the multi-round voting game.

Intermediate-round proposers offer their own peak only when both their peak
and the standing status quo sit strictly beyond the relevant threshold;
otherwise they offer the median, which then wins every remaining vote.  The
final-round proposer offers the point of the acceptance interval around the
status quo closest to its peak.  Combining both yields the probability that
the overall winner is the median as an explicit function of the threshold
mass and the number of rounds.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .distributions import TypeDistribution
from .mechanism import reflect, utility
from .numerics import adaptive_simpson
from .thresholds import EquilibriumThresholds

_EU_TIE_TOL = 1e-12


class RoundKind(str, Enum):
    INTERMEDIATE = "intermediate"
    FINAL = "final"


class ProposalRationale(str, Enum):
    OWN_TYPE = "own_type"
    CONDORCET_WINNER = "condorcet_winner"
    CLAMPED_TO_REFLECTION = "clamped_to_reflection"


@dataclass(frozen=True)
class ProposalDecision:
    round_kind: RoundKind
    proposal: float
    rationale: ProposalRationale


def optimal_proposal_intermediate(
    th: EquilibriumThresholds, proposer_type: float, status_quo: float
) -> ProposalDecision:
    """Equilibrium proposal in every round before the last.

    The proposer risks its own peak only when the vote cannot hand the
    median's side a win: both the peak and the status quo must lie strictly
    below the lower threshold (or strictly above the upper one).  Boundary
    types are indifferent and are assigned to the median proposal.
    """
    _check_unit(proposer_type, "proposer_type")
    _check_unit(status_quo, "status_quo")
    own_side = (
        max(status_quo, proposer_type) < th.lower
        or min(status_quo, proposer_type) > th.upper
    )
    if own_side:
        return ProposalDecision(RoundKind.INTERMEDIATE, proposer_type, ProposalRationale.OWN_TYPE)
    return ProposalDecision(RoundKind.INTERMEDIATE, th.median, ProposalRationale.CONDORCET_WINNER)


def optimal_proposal_final(theta_mu: float, proposer_type: float, status_quo: float) -> ProposalDecision:
    """Last-round proposal: own peak clamped into the winnable interval."""
    _check_unit(theta_mu, "theta_mu")
    _check_unit(proposer_type, "proposer_type")
    _check_unit(status_quo, "status_quo")
    edge = reflect(theta_mu, status_quo)
    if status_quo <= theta_mu:
        proposal = min(proposer_type, edge)
    else:
        proposal = max(proposer_type, edge)
    rationale = (
        ProposalRationale.OWN_TYPE if proposal == proposer_type else ProposalRationale.CLAMPED_TO_REFLECTION
    )
    return ProposalDecision(RoundKind.FINAL, proposal, rationale)


def final_round_winner(theta_mu: float, proposer_type: float, status_quo: float) -> float:
    """Winner of the last round under the equilibrium proposal.

    Equals the proposer's peak projected onto the interval between the
    status quo and its reflection through the median, which is exactly what
    a truthful pairwise vote against the optimal proposal produces.
    """
    _check_unit(theta_mu, "theta_mu")
    _check_unit(proposer_type, "proposer_type")
    _check_unit(status_quo, "status_quo")
    edge = reflect(theta_mu, status_quo)
    lo, hi = min(status_quo, edge), max(status_quo, edge)
    return min(max(proposer_type, lo), hi)


def expected_utility_of_winner(d: TypeDistribution, proposer_type: float, winner: float) -> float:
    """Expected final utility for a proposer when ``winner`` takes this round.

    With one round left, the next proposer's draw leads to one of three
    outcomes: the winner survives (draw on its far side), the draw itself
    (inside the acceptance interval), or the reflected edge (beyond it).
    Writing the middle term with the CDF after integration by parts gives

        EU(w) = -(c - s)^2 + 2 * int_w^c (v - s) F(v) dv        (w <= median)

    with ``c`` the reflection of ``w`` and ``s`` the proposer's peak, and the
    mirrored expression when w > median.  At w = median this collapses to the
    plain utility of the median, with no quadrature involved.
    """
    _check_unit(proposer_type, "proposer_type")
    _check_unit(winner, "winner")
    med = d.median()
    edge = reflect(med, winner)

    def weighted_cdf(v: float) -> float:
        return (v - proposer_type) * float(d._cdf(np.float64(v)))

    if winner <= med:
        return -((edge - proposer_type) ** 2) + 2.0 * adaptive_simpson(weighted_cdf, winner, edge)
    return -((winner - proposer_type) ** 2) + 2.0 * adaptive_simpson(weighted_cdf, edge, winner)


def optimal_intermediate_winner(
    d: TypeDistribution, th: EquilibriumThresholds, proposer_type: float
) -> float:
    """Utility-maximizing round winner one round before the last.

    The maximizer is one of at most three candidates: the peak capped at
    twice-median-minus-one, the median itself, and the peak floored at twice
    the median (each candidate only exists while it stays inside [0, 1]).
    Ties within quadrature noise resolve to the median.
    """
    _check_unit(proposer_type, "proposer_type")
    med = th.median
    candidates = [med]
    low_cap = 2.0 * med - 1.0
    if low_cap >= 0.0:
        candidates.append(min(low_cap, proposer_type))
    high_cap = 2.0 * med
    if high_cap <= 1.0:
        candidates.append(max(high_cap, proposer_type))

    best, best_eu = med, expected_utility_of_winner(d, proposer_type, med)
    for w in candidates[1:]:
        eu = expected_utility_of_winner(d, proposer_type, w)
        if eu > best_eu + _EU_TIE_TOL:
            best, best_eu = w, eu
    return best


def closed_form_probability(d: TypeDistribution, th: EquilibriumThresholds, rounds: int) -> float:
    """Probability that the overall winner is the median, given the rounds.

    The median fails only when every proposer before the last round draws
    into the own-peak tail, so the failure probability is the tail mass
    raised to the number of intermediate rounds.
    """
    if rounds < 2:
        raise ValueError(f"the closed form needs at least 2 rounds, got {rounds}")
    if th.median >= 0.5:
        tail = d.cdf(th.lower)
    else:
        tail = 1.0 - d.cdf(th.upper)
    return 1.0 - tail ** (rounds - 1)


def _check_unit(x: float, name: str):
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {x}")
