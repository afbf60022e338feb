"""Attention-competition equilibria: finite Bayesian environments, the
value-of-information calculus, structural condition checks, all-or-nothing
equilibrium construction, game simulation, and Gaussian closed forms."""

from .conditions import (
    ConditionReport,
    check_assumption2,
    check_mnat_concave,
    check_substitutes,
)
from .decision import (
    DecisionProblem,
    ValueReport,
    coalition_value,
    expected_conditioned_value,
    expected_residual_value,
    experiment_value,
    full_info_utility,
    full_reveal_value,
    full_reveal_value_given,
    stopping_utility,
)
from .environment import (
    Belief,
    ComponentSpace,
    Experiment,
    JointPrior,
    condition_on_components,
    merge_senders,
    message_distribution,
    no_direct_info,
    update,
)
from .equilibrium import (
    EquilibriumProfile,
    StateGraph,
    StateNode,
    aon_rates,
    marginal_prices,
    merge_environment,
    monopoly_rate,
)
from .errors import (
    AssumptionViolated,
    AttnMarketError,
    BudgetExceeded,
    ConditionNotVerified,
    DegenerateCurve,
    NonAoNPolicy,
    RoundLimitExceeded,
    ScenarioError,
    SubsetSpaceTooLarge,
    UnknownComponent,
    ZeroMassEvent,
    ZeroProbabilityMessage,
)
from .gaussian import (
    BridgeCheck,
    BridgeSchedule,
    CorrelatedScenario,
    GaussianScenario,
    binary_action_rate,
    bridge_mc_check,
    bridge_schedule,
    correlation_threshold,
    discretized_environment,
    gaussian_rates,
    gaussian_receiver_payoff,
    gaussian_residual_values,
    large_n_gaussian,
    payoff_at_alpha,
    symmetry_gap,
)
from .largemarket import (
    CurvePoint,
    ExponentialFit,
    IIDEnvironment,
    decision_error_curve,
    default_environment,
    fit_exponential_rate,
    residual_value_curve,
)
from .simulate import (
    AoNTablePolicy,
    DpOptimal,
    DpSolution,
    EpisodeTrace,
    FixedOrder,
    GreedyMyopic,
    MonteCarloSummary,
    RandomOrder,
    ReceiverPolicy,
    StopAlways,
    episode_rng,
    equilibrium_policies,
    holdup_demo,
    monte_carlo,
    run_episode,
    solve_receiver_dp,
)

__version__ = "0.1.0"
