"""Discrete active inference in a simulated perception-action loop.

The package runs a finite agent against a finite environment: exact or
mean-field variational posteriors over (parameters, latent states, future
sensors) per candidate action sequence, motivation-scored softmax
policies, and a combined objective that fits inference and action
selection together. Everything is small enough to verify by enumeration,
and the test suite does.
"""

from . import errors
from .errors import (
    ActinfError,
    AgentStepError,
    BlockOptimizationError,
    ConfigError,
    DegenerateNormalizer,
    EmptyInput,
    HorizonTooLarge,
    IndexOutOfAlphabet,
    InvalidDistribution,
    ModelZero,
    NonDecreasingGuard,
    NonFiniteInput,
    NumericalInconsistency,
    ShapeMismatch,
    SupportViolation,
    ZeroEvidence,
)
from .combined import (
    ActiveInferenceOptions,
    ObjectiveBreakdown,
    ThirdPolicyParams,
    active_inference_step,
    combined_objective,
    optimal_third_policy,
)
from .agents import MODES, make_agent
from .config import ExperimentConfig, OptimizerOptions, build_config, load_config, load_model_spec
from .core import Alphabet, Categorical, JointTable, entropy, kl_divergence, log_sum_exp, softmax
from .exact import ActivePosteriorTable, exact_active_posterior, log_evidence, theta_marginal
from .geometry import GeometrySnapshot, export_csv, snapshot
from .kernels import backend_name, select_backend
from .loop import EnvironmentSpec, History, TrajectoryRecord, env_step, run_loop, split_streams
from .model import (
    GenerativeModelSpec,
    Horizon,
    ModelAssignment,
    PosteriorLayout,
    ThetaPoint,
    ThetaSupport,
    format_action_seq,
)
from .motivation import (
    MotivationFunctional,
    RewardStructure,
    entropy_motivation,
    expected_reward,
    negative_expected_entropy,
    reward_motivation,
)
from .policy import PolicyDistribution, greedy_action_sequence, induce_policy, write_policy_csv
from .runner import ExperimentResult, compare_modes, run_experiment
from .variational import (
    FreeEnergyReport,
    MeanFieldBlock,
    VariationalParams,
    cavi_minimize,
    free_energy,
    optimize_all,
    variational_posterior,
    write_trace_csv,
)

__all__ = [name for name in dir() if not name.startswith("_")]
