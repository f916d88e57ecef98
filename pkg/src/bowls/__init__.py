"""Global optimization by Bayesian-guided multistart local search.

The package pairs a Gaussian-process surrogate with a conjugate-gradient
local solver: instead of modeling the raw objective, the surrogate models
the value of the local minimum reached from each starting point, and the
acquisition function picks where to start the next search.  Plain Bayesian
optimization, uniform multistart, and MLSL drivers share the same local
solver, evaluation accounting, and benchmark harness.
"""

from .acquisition import (
    AcquisitionSpec,
    MaximizerConfig,
    confidence_bound_score,
    expected_improvement,
    maximize_acquisition,
    probability_of_improvement,
    propose_next,
)
from .bench import (
    ExperimentConfig,
    SummaryRow,
    build_problem_context,
    load_config,
    run_experiment,
    run_trial,
    summarize,
    trajectory_table,
)
from .core import (
    BoxDomain,
    CountedObjective,
    EvalCounter,
    GradientUnavailableError,
    ObjectiveEvaluationError,
    combined_evals,
    sample_uniform,
    seeded_rng,
)
from .gp import (
    EvalDataset,
    GPModel,
    KernelConfig,
    ModelFitError,
    build_gp,
    fit_gp,
    gp_posterior,
    kernel_matrix,
    log_marginal_likelihood,
)
from .local_search import (
    LineSearchError,
    LocalSearchConfig,
    LocalSearchError,
    LocalSearchResult,
    line_search,
    minimize_local,
)
from .optimizers import (
    METHODS,
    OptimizerConfig,
    RunTrace,
    TraceEvent,
    local_minimum_from,
    run_bo,
    run_bowls,
    run_method,
    run_mlsl,
    run_multistart,
)
from .problems import (
    PROBLEM_TAGS,
    LabeledDataset,
    LogisticProblem,
    ProblemSpec,
    accuracy,
    load_pima,
    logistic_gradient,
    logistic_loss,
    make_test_problem,
    resolve_test_problem,
    split_train_test,
)

__version__ = "0.1.0"
