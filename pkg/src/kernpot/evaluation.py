"""Per-atom error metrics, hyperparameter grids, and transfer evaluation.

Validation selects on RMSE/atom with ties broken toward stronger
regularization (larger lambda, then larger alpha), so repeated runs are
deterministic. Components of the kernel matrices are computed once per CV
sweep; only the solve is repeated across the grid, which leaves the reported
score identical to an independent re-fit at the selected value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import LabeledDataset
from .errors import DimensionMismatch, LengthMismatch
from .kernels import EXTENSIVE, KernelSpec, combine_alpha, kernel_components
from .krr import FittedModel, fit, predict, solve_regularized
from .labels import (
    LabelTransform,
    fit_species_energy_table,
    identity_transform,
    invert_labels,
    species_baseline_transform,
    transform_labels,
)

DEFAULT_LAMBDA_GRID = tuple(10.0**-k for k in range(3, 10))
DEFAULT_ALPHA_GRID = (0.0, 1e-4, 1e-3, 1e-2, 1e-1, 1.0)


def _per_atom_residuals_mev(predictions, ds: LabeledDataset) -> np.ndarray:
    predictions = np.asarray(predictions, dtype=np.float64)
    if predictions.shape[0] != len(ds):
        raise LengthMismatch(f"{predictions.shape[0]} predictions for {len(ds)} entries")
    residuals = predictions - ds.energies()
    return 1000.0 * residuals / ds.atom_counts()


def rmse_per_atom(predictions, ds: LabeledDataset) -> float:
    """Root mean square of per-configuration residuals per atom, in meV/atom."""
    r = _per_atom_residuals_mev(predictions, ds)
    return float(np.sqrt(np.mean(r * r)))


def mae_per_atom(predictions, ds: LabeledDataset) -> float:
    """Mean absolute per-configuration residual per atom, in meV/atom."""
    r = _per_atom_residuals_mev(predictions, ds)
    return float(np.mean(np.abs(r)))


@dataclass(frozen=True)
class EvalReport:
    rmse_mev_per_atom: float
    mae_mev_per_atom: float
    n_train: int
    n_eval: int
    lam: float
    alpha: float
    sigma: float | None
    normalization: str
    transform: str
    provenance: str = ""

    def to_json_dict(self) -> dict:
        return {
            "rmse_mev_per_atom": self.rmse_mev_per_atom,
            "mae_mev_per_atom": self.mae_mev_per_atom,
            "n_train": self.n_train,
            "n_eval": self.n_eval,
            "lambda": self.lam,
            "alpha": self.alpha,
            "sigma": self.sigma,
            "normalization": self.normalization,
            "transform": self.transform,
            "provenance": self.provenance,
        }


def evaluate_model(model: FittedModel, ds: LabeledDataset, num_threads: int = 1) -> EvalReport:
    predictions = predict(model, ds, num_threads=num_threads)
    return EvalReport(
        rmse_mev_per_atom=rmse_per_atom(predictions, ds),
        mae_mev_per_atom=mae_per_atom(predictions, ds),
        n_train=model.n_train,
        n_eval=len(ds),
        lam=model.lam,
        alpha=model.spec.alpha,
        sigma=model.sigma,
        normalization=model.spec.mode,
        transform=model.transform.kind,
        provenance=ds.provenance,
    )


@dataclass(frozen=True)
class CVResult:
    param_name: str
    best: float
    best_rmse: float
    best_mae: float
    curve: tuple[tuple[float, float, float], ...]  # (param, rmse, mae) per grid point


def _cv_sweep(
    train: LabeledDataset,
    val: LabeledDataset,
    spec: KernelSpec,
    points: list[tuple[float, float]],  # (lambda, alpha) per grid point
    transform: LabelTransform,
    num_threads: int,
) -> list[tuple[float, float]]:
    labels = transform_labels(transform, train)
    train_sets = train.feature_sets()
    val_sets = val.feature_sets()
    g_whole, g_species = kernel_components(spec, train_sets, None, num_threads)
    v_whole, v_species = kernel_components(spec, val_sets, train_sets, num_threads)

    scores = []
    for lam, alpha in points:
        gram = combine_alpha(g_whole, g_species, alpha)
        coeff, _ = solve_regularized(gram, labels, lam)
        raw = combine_alpha(v_whole, v_species, alpha) @ coeff
        preds = invert_labels(transform, raw, val.entries)
        scores.append((rmse_per_atom(preds, val), mae_per_atom(preds, val)))
    return scores


def _select(grid, scores) -> int:
    """Index of the lowest RMSE; ties go to the larger grid value."""
    best = 0
    for i in range(1, len(grid)):
        if scores[i][0] < scores[best][0] or (
            scores[i][0] == scores[best][0] and grid[i] > grid[best]
        ):
            best = i
    return best


def cross_validate_lambda(
    train: LabeledDataset,
    val: LabeledDataset,
    spec: KernelSpec,
    grid=DEFAULT_LAMBDA_GRID,
    transform: LabelTransform | None = None,
    num_threads: int = 1,
) -> CVResult:
    grid = tuple(float(g) for g in grid)
    if not grid:
        raise ValueError("lambda grid is empty")
    transform = transform or identity_transform()
    scores = _cv_sweep(train, val, spec, [(g, spec.alpha) for g in grid], transform, num_threads)
    i = _select(grid, scores)
    return CVResult(
        "lambda", grid[i], scores[i][0], scores[i][1],
        tuple((g, r, m) for g, (r, m) in zip(grid, scores)),
    )


def cross_validate_alpha(
    train: LabeledDataset,
    val: LabeledDataset,
    spec: KernelSpec,
    lam: float,
    grid=DEFAULT_ALPHA_GRID,
    transform: LabelTransform | None = None,
    num_threads: int = 1,
) -> CVResult:
    grid = tuple(float(g) for g in grid)
    if not grid:
        raise ValueError("alpha grid is empty")
    transform = transform or identity_transform()
    scores = _cv_sweep(train, val, spec, [(lam, g) for g in grid], transform, num_threads)
    i = _select(grid, scores)
    return CVResult(
        "alpha", grid[i], scores[i][0], scores[i][1],
        tuple((g, r, m) for g, (r, m) in zip(grid, scores)),
    )


def transfer_evaluate(
    source_train: LabeledDataset,
    target_test: LabeledDataset,
    spec: KernelSpec,
    lam: float,
    num_threads: int = 1,
) -> EvalReport:
    """Zero-shot transfer protocol: fit on the source, score on the target.

    Labels are residuals against per-species baselines fit on the source, and
    normalization is extensive (C = 1), which is what makes the fitted model
    transfer across system sizes.
    """
    if spec.mode != EXTENSIVE:
        raise ValueError("transfer evaluation requires extensive normalization (C = 1)")
    if source_train.species_table != target_test.species_table:
        raise DimensionMismatch("source and target must share one species table")
    table = fit_species_energy_table(source_train)
    transform = species_baseline_transform(table)
    model = fit(source_train, spec, lam, transform=transform, num_threads=num_threads)
    report = evaluate_model(model, target_test, num_threads=num_threads)
    return report
