"""German Tank Problem estimators, exact combinatorial oracles, lattice
counting, Euler-Maclaurin bounds, and a reproducible Monte Carlo harness."""

from .asymptotics import (
    EMResult,
    FallingFactorialBounds,
    PowerSumSpec,
    euler_maclaurin,
    exact_sum_power,
    falling_factorial_bounds,
    main_term_sum_power,
)
from .distributions import (
    MomentReport,
    OrderStatSums,
    closed_covariance_top_two,
    closed_moments_largest,
    closed_moments_lth,
    joint_pmf_top_two,
    oracle_covariance_top_two,
    oracle_moments,
    order_stat_sums,
    pmf_largest,
    pmf_lth_largest,
)
from .errors import (
    BudgetExceeded,
    EnumerationCapExceeded,
    IterationError,
    ResourceLimitError,
)
from .estimators import (
    EstimateResult,
    RecursiveEstimate,
    ScaledVariances,
    est_ball_continuous,
    est_ball_discrete,
    est_d1_cont,
    est_d1_cont_second,
    est_d1_lth,
    est_d1_max,
    est_d1_spread,
    est_square_continuous,
    est_square_discrete,
    est_square_recursive,
    optimal_alpha,
    var_formulas,
    weighted_estimate,
    weighted_variance,
)
from .exactmath import BinomialTable, binomial, check_hockey_stick, check_identity
from .lattice import (
    GaussCircleError,
    attainable_m1,
    ball_lattice_points,
    ball_volume,
    count_ball,
    count_square,
    gauss_circle_error,
)
from .simulate import (
    RNG_ALGORITHM_ID,
    ComparisonReport,
    EstimatorSpec,
    EstimatorStats,
    GeometryDomain,
    ObservationSet,
    RecursiveExperimentReport,
    SimConfig,
    SimulationReport,
    TrialStreams,
    ball_rejection_acceptance,
    compare_1d_2d,
    recursive_convergence_experiment,
    run_trials,
    sample_observation,
    trial_generator,
)

__version__ = "0.1.0"
