"""Relative belief inference for two-arm equivalence and noninferiority trials."""

from importlib import resources

from .bias import BiasReport, BiasSpec, bias_report, design_scan, simulate_bias_against, simulate_bias_for
from .checks import ConflictReport, check_means_prior, check_prior, check_variance_prior
from .distributions import RandomStream, ScaledTLaw
from .elicitation import ElicitationSpec, Hyperparameters, elicit
from .errors import (
    ConsistencyError,
    DegenerateInputError,
    DomainError,
    EstimationError,
    InsufficientDataError,
    NoSolutionError,
    NumericError,
    RelBeliefError,
    UnstableError,
)
from .kernels import BACKEND
from .relative_belief import DeltaGrid, analyze, credible_region, difference_laws, lrse, rb_table, strength
from .trial_data import SufficientStats, TwoArmData, check_model, read_csv, sufficient_stats

__version__ = "0.1.0"


def example_path(name="trial.csv"):
    """Path to a file in the bundled example directory."""
    return resources.files(__name__) / "example" / name
