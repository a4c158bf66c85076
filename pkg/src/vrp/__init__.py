"""Multi-round majority voting with randomly drawn proposers.

Analytic equilibrium thresholds and winning probabilities, a seeded Monte
Carlo simulator of the full game, and a discretized backward-induction
oracle that verifies the closed forms by brute force.
"""

from .distributions import (
    AdmissibilityReport,
    Beta,
    Empirical,
    MedianBranch,
    TruncatedLogistic,
    TruncatedNormal,
    TypeDistribution,
    Uniform,
    check_admissibility,
    load_empirical_samples,
    parse_distribution,
)
from .equilibrium import (
    ProposalDecision,
    ProposalRationale,
    RoundKind,
    closed_form_probability,
    expected_utility_of_winner,
    final_round_winner,
    optimal_intermediate_winner,
    optimal_proposal_final,
    optimal_proposal_intermediate,
)
from .mechanism import VoteOutcome, pairwise_vote, panel_vote, quantile_panel, reflect, utility
from .oracle import (
    DeviationReport,
    DiscreteGame,
    EquilibriumCheck,
    ValueTable,
    backward_induction,
    build_discrete_game,
    discrete_final_winner_reference,
    verify_equilibrium,
    verify_strategy_proofness,
    verify_threshold_signs,
)
from .simulator import (
    GameConfig,
    ProposerMode,
    RoundRecord,
    SimulationReport,
    Trajectory,
    VoterMode,
    compare_voter_modes,
    replication_uniforms,
    run_monte_carlo,
    run_trajectory,
    simulate_final_winners,
    write_trajectories_csv,
)
from .thresholds import (
    EquilibriumThresholds,
    InadmissibleDistributionError,
    TwoRoundCertificate,
    indifference_gap_high,
    indifference_gap_low,
    solve_thresholds,
    two_round_condition,
)

__all__ = [
    "AdmissibilityReport",
    "Beta",
    "DeviationReport",
    "DiscreteGame",
    "Empirical",
    "EquilibriumCheck",
    "EquilibriumThresholds",
    "GameConfig",
    "InadmissibleDistributionError",
    "MedianBranch",
    "ProposalDecision",
    "ProposalRationale",
    "ProposerMode",
    "RoundKind",
    "RoundRecord",
    "SimulationReport",
    "Trajectory",
    "TruncatedLogistic",
    "TruncatedNormal",
    "TwoRoundCertificate",
    "TypeDistribution",
    "Uniform",
    "ValueTable",
    "VoteOutcome",
    "VoterMode",
    "backward_induction",
    "build_discrete_game",
    "check_admissibility",
    "closed_form_probability",
    "compare_voter_modes",
    "discrete_final_winner_reference",
    "expected_utility_of_winner",
    "final_round_winner",
    "indifference_gap_high",
    "indifference_gap_low",
    "load_empirical_samples",
    "optimal_intermediate_winner",
    "optimal_proposal_final",
    "optimal_proposal_intermediate",
    "pairwise_vote",
    "panel_vote",
    "parse_distribution",
    "quantile_panel",
    "reflect",
    "replication_uniforms",
    "run_monte_carlo",
    "run_trajectory",
    "simulate_final_winners",
    "solve_thresholds",
    "two_round_condition",
    "utility",
    "verify_equilibrium",
    "verify_strategy_proofness",
    "verify_threshold_signs",
    "write_trajectories_csv",
]

__version__ = "0.1.0"
