"""Core voting primitives: quadratic loss, reflection about the median, and
single-round majority votes.

A pairwise vote between two alternatives under single-peaked preferences is
decided by the mass of peaks on each side of the midpoint; ties always go to
the proposal, including voters exactly indifferent between the two options.
``panel_vote`` is the finite-electorate counterpart used by the brute-force
game solver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distributions import TypeDistribution, _validate_unit


def utility(theta: float, x: float) -> float:
    """Quadratic loss -(x - theta)**2: zero at the peak, symmetric around it."""
    _validate_unit(theta, "theta")
    _validate_unit(x, "x")
    return -((x - theta) ** 2)


def reflect(theta_mu: float, x: float) -> float:
    """Mirror ``x`` through the median, clipped to [0, 1].

    This is the farthest alternative that at least half the electorate still
    weakly prefers to ``x``: the midpoint of ``x`` and its reflection sits
    exactly at the median whenever no clipping occurs.
    """
    _validate_unit(theta_mu, "theta_mu")
    _validate_unit(x, "x")
    return min(max(2.0 * theta_mu - x, 0.0), 1.0)


@dataclass(frozen=True)
class VoteOutcome:
    winner: float
    proposal_share: float  # mass of voters weakly preferring the proposal
    tie_broken: bool


def pairwise_vote(d: TypeDistribution, proposal: float, status_quo: float) -> VoteOutcome:
    """Majority vote of the whole peak continuum between two alternatives.

    Voters side with the strictly closer alternative; the indifferent
    midpoint mass counts for the proposal.  An exact half-half split (and
    the degenerate identical-alternatives vote) is resolved for the proposal
    and flagged ``tie_broken``.
    """
    _validate_unit(proposal, "proposal")
    _validate_unit(status_quo, "status_quo")
    if proposal == status_quo:
        return VoteOutcome(winner=proposal, proposal_share=0.5, tie_broken=True)
    mid = 0.5 * (proposal + status_quo)
    mass_below = d.cdf(mid)
    share = 1.0 - mass_below if proposal > status_quo else mass_below
    if share >= 0.5:
        return VoteOutcome(winner=proposal, proposal_share=share, tie_broken=share == 0.5)
    return VoteOutcome(winner=status_quo, proposal_share=share, tie_broken=False)


def panel_vote(panel, proposal: float, status_quo: float) -> VoteOutcome:
    """Majority vote of a finite voter panel (peaks, any order).

    Each voter supports the strictly closer alternative; equidistant voters
    support the proposal.  The proposal also wins an overall tied count.
    ``tie_broken`` reports whether those proposal-favoring conventions were
    decisive, i.e. strict preferences alone would not have carried it.
    """
    peaks = np.asarray(panel, dtype=float)
    if peaks.size == 0:
        raise ValueError("panel must contain at least one voter")
    _validate_unit(peaks, "panel")
    _validate_unit(proposal, "proposal")
    _validate_unit(status_quo, "status_quo")
    d_prop = np.abs(peaks - proposal)
    d_sq = np.abs(peaks - status_quo)
    weak = d_prop <= d_sq
    strict = d_prop < d_sq
    share = weak.sum() / peaks.size
    if share >= 0.5:
        decisive_without_ties = strict.sum() / peaks.size >= 0.5
        return VoteOutcome(winner=proposal, proposal_share=float(share), tie_broken=not decisive_without_ties)
    return VoteOutcome(winner=status_quo, proposal_share=float(share), tie_broken=False)


def quantile_panel(d: TypeDistribution, size: int) -> np.ndarray:
    """Deterministic panel at quantile levels (i - 1/2)/size, i = 1..size.

    Odd sizes place a voter exactly at the median, which makes the panel's
    decisive voter agree with the continuum vote away from knife edges.
    """
    if size < 1:
        raise ValueError(f"panel size must be >= 1, got {size}")
    return np.array([d.quantile((i - 0.5) / size) for i in range(1, size + 1)])
