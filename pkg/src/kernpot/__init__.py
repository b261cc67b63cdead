"""Kernel ridge regression over per-atom feature embeddings.

Learns scalar extensive or intensive properties (potential energies) of
atomic configurations with set kernels built from per-atom feature vectors,
including a species-partitioned composite kernel, model selection, transfer
evaluation, and kernel-based spectral clustering of trajectories.
"""

from .backend import backend_name
from .bundle import load_model, save_model
from .cluster import kernel_heatmap_normalize, spectral_bipartition
from .data import (
    Configuration,
    DatasetEntry,
    FeatureSet,
    LabeledDataset,
    SpeciesTable,
    split_dataset,
    validate_configuration,
)
from .descriptor import DescriptorParams, compute_descriptor, featurize_dataset
from .evaluation import (
    CVResult,
    EvalReport,
    cross_validate_alpha,
    cross_validate_lambda,
    evaluate_model,
    mae_per_atom,
    rmse_per_atom,
    transfer_evaluate,
)
from .extxyz import read_extxyz, write_extxyz
from .featio import load_features, write_features
from .kernels import (
    BaseKernel,
    KernelSpec,
    base_kernel_eval,
    composite_kernel,
    cross_kernel_matrix,
    gaussian_kernel,
    gram_matrix,
    linear_kernel,
    mean_embedding_kernel,
    median_heuristic,
)
from .krr import (
    FittedModel,
    MultiWeightModel,
    fit,
    fit_multiweight_explicit,
    predict,
    predict_multiweight,
)
from .labels import (
    LabelTransform,
    SpeciesEnergyTable,
    fit_species_energy_table,
    fit_standardize,
    identity_transform,
    invert_labels,
    species_baseline_transform,
    standardize_transform,
    transform_labels,
)

__version__ = "0.1.0"

__all__ = [
    "BaseKernel",
    "CVResult",
    "Configuration",
    "DatasetEntry",
    "DescriptorParams",
    "EvalReport",
    "FeatureSet",
    "FittedModel",
    "KernelSpec",
    "LabelTransform",
    "LabeledDataset",
    "MultiWeightModel",
    "SpeciesEnergyTable",
    "SpeciesTable",
    "backend_name",
    "base_kernel_eval",
    "composite_kernel",
    "compute_descriptor",
    "cross_kernel_matrix",
    "cross_validate_alpha",
    "cross_validate_lambda",
    "evaluate_model",
    "featurize_dataset",
    "fit",
    "fit_multiweight_explicit",
    "fit_species_energy_table",
    "fit_standardize",
    "gaussian_kernel",
    "gram_matrix",
    "identity_transform",
    "invert_labels",
    "kernel_heatmap_normalize",
    "linear_kernel",
    "load_features",
    "load_model",
    "mae_per_atom",
    "mean_embedding_kernel",
    "median_heuristic",
    "predict",
    "predict_multiweight",
    "read_extxyz",
    "rmse_per_atom",
    "save_model",
    "species_baseline_transform",
    "spectral_bipartition",
    "split_dataset",
    "standardize_transform",
    "transfer_evaluate",
    "transform_labels",
    "validate_configuration",
    "write_extxyz",
    "write_features",
]
