"""Estimate the Bayes-optimal classifier's false positive and false negative
rates from soft, noisy, or binary labels, with a Monte Carlo harness for
checking the estimators against exact ground truth."""

from .core import (
    ClassPrior,
    EstimateResult,
    SoftDataset,
    bayes_decide,
    exact_fnr,
    exact_fpr,
    fnr_known_prior,
    fnr_prior_free,
    fpr_known_prior,
    fpr_prior_free,
    prior_hat,
)
from .denoising import (
    DiscreteMetric,
    EuclideanMetric,
    KernelSpec,
    NoisyDataset,
    TableMetric,
    default_bandwidth,
    dn,
    nw,
    triangular,
)
from .errors import (
    BayesFprError,
    ConfigError,
    DegenerateSampleError,
    DomainError,
    InsufficientDataError,
    InvalidModelError,
    UnsupportedFeatureError,
)
from .harness import EstimatorSpec, ExperimentConfig, ExperimentReport, run_replicates
from .io import load_dataset, read_report, save_dataset, write_report
from .noisy import PartitionSpec, binary_to_noisy, fnr_denoised, fnr_nw, fpr_denoised, fpr_nw, partition
from .synthetic import (
    BernoulliBinary,
    FiniteModel,
    GroundTruth,
    Smooth1DModel,
    SmoothModel,
    TruncGaussSymmetric,
    UniformAdditive,
    exact_prior,
    sample_noisy,
    sample_soft,
)

__version__ = "0.1.0"
