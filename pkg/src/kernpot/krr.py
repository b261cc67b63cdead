"""Kernel ridge regression on set-kernel Gram matrices.

``fit``/``predict`` follow the standard train/predict loop: form the Gram
matrix, solve (G + lambda I) c = E through a symmetric positive-definite
factorization, and predict new points as c . v(x) with v the cross-kernel
vector. ``fit_multiweight_explicit`` solves the same problem in explicit
weight space for the finite-dimensional linear base kernel; it exists as an
independent equivalence oracle for the composite kernel and is test-only by
intent.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .data import FeatureSet, LabeledDataset
from .errors import AlphaAtBoundary, DimensionMismatch, EmptyDataset, SingularGram
from .kernels import KernelSpec, cross_kernel_matrix, gram_matrix
from .labels import LabelTransform, identity_transform, invert_labels, transform_labels

MAX_JITTER_ATTEMPTS = 3


@dataclass(frozen=True)
class FittedModel:
    """Immutable result of a KRR fit.

    ``lam`` is the regularization actually used (it may exceed the requested
    value if jitter escalation was needed); ``sigma`` records the gaussian
    length-scale, None for the linear base kernel.
    """

    coefficients: np.ndarray
    train_sets: tuple[FeatureSet, ...]
    spec: KernelSpec
    lam: float
    transform: LabelTransform
    sigma: float | None

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=np.float64).reshape(-1)
        if c.shape[0] != len(self.train_sets):
            raise DimensionMismatch(
                f"{c.shape[0]} coefficients for {len(self.train_sets)} training sets"
            )
        c = c.copy()
        c.flags.writeable = False
        object.__setattr__(self, "coefficients", c)
        object.__setattr__(self, "train_sets", tuple(self.train_sets))

    @property
    def n_train(self) -> int:
        return len(self.train_sets)


def solve_regularized(
    gram: np.ndarray,
    labels: np.ndarray,
    lam: float,
    allow_unregularized: bool = False,
) -> tuple[np.ndarray, float]:
    """Solve (G + lam I) c = labels with jitter escalation on failure.

    Factorization failures escalate lam by x10 up to three times, each with a
    warning; afterwards ``SingularGram`` is raised. Returns the coefficients
    and the lam that actually succeeded.
    """
    if lam < 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    if lam == 0 and not allow_unregularized:
        raise ValueError("lambda = 0 requires allow_unregularized=True")
    t = gram.shape[0]
    attempt_lam = float(lam)
    for attempt in range(MAX_JITTER_ATTEMPTS + 1):
        try:
            chol = scipy.linalg.cho_factor(
                gram + attempt_lam * np.eye(t), lower=True, check_finite=False
            )
            coeff = scipy.linalg.cho_solve(chol, labels, check_finite=False)
            return coeff, attempt_lam
        except scipy.linalg.LinAlgError:
            if attempt == MAX_JITTER_ATTEMPTS or attempt_lam == 0.0:
                break
            attempt_lam = attempt_lam * 10.0
            warnings.warn(
                f"Gram factorization failed; escalating lambda to {attempt_lam:g}",
                RuntimeWarning,
                stacklevel=2,
            )
    raise SingularGram(
        f"(G + lambda I) not positive definite after {MAX_JITTER_ATTEMPTS} jitter escalations"
    )


def fit(
    train: LabeledDataset,
    spec: KernelSpec,
    lam: float,
    transform: LabelTransform | None = None,
    allow_unregularized: bool = False,
    num_threads: int = 1,
) -> FittedModel:
    """Fit KRR coefficients on a featurized, labeled dataset."""
    if len(train) == 0:
        raise EmptyDataset("cannot fit on an empty dataset")
    transform = transform or identity_transform()
    labels = transform_labels(transform, train)
    if not np.all(np.isfinite(labels)):
        raise ValueError("transformed labels contain non-finite values")
    sets = train.feature_sets()
    gram = gram_matrix(spec, sets, num_threads=num_threads)
    coeff, lam_used = solve_regularized(gram, labels, lam, allow_unregularized)
    return FittedModel(
        coefficients=coeff,
        train_sets=tuple(sets),
        spec=spec,
        lam=lam_used,
        transform=transform,
        sigma=spec.base.sigma,
    )


def predict(
    model: FittedModel,
    queries: LabeledDataset | list[FeatureSet],
    num_threads: int = 1,
) -> np.ndarray:
    """Predicted energies for query feature sets (label transform inverted)."""
    if isinstance(queries, LabeledDataset):
        query_sets = queries.feature_sets()
    else:
        query_sets = list(queries)
    cross = cross_kernel_matrix(model.spec, list(model.train_sets), query_sets, num_threads)
    raw = cross @ model.coefficients
    return invert_labels(model.transform, raw, query_sets)


# -- explicit multi-weight formulation (linear base kernel) -------------------


@dataclass(frozen=True)
class MultiWeightModel:
    """Explicit weights: a shared center w0 plus per-species displacements.

    Defined for the linear base kernel in extensive normalization, where the
    set feature map is the plain row sum and lives in R^d.
    """

    w0: np.ndarray
    w_species: np.ndarray
    alpha: float
    lam: float

    @property
    def n_species(self) -> int:
        return self.w_species.shape[0]


def _pooled(fs: FeatureSet, n_species: int) -> tuple[np.ndarray, np.ndarray]:
    """Whole-set and per-species row sums (extensive embedding, C = 1)."""
    whole = fs.features.sum(axis=0)
    per = np.zeros((n_species, fs.dim))
    for s in range(1, n_species + 1):
        rows = fs.features[fs.species == s]
        if rows.shape[0]:
            per[s - 1] = rows.sum(axis=0)
    return whole, per


def fit_multiweight_explicit(
    train: LabeledDataset,
    alpha: float,
    lam: float,
    n_species: int | None = None,
) -> MultiWeightModel:
    """Minimize the multi-weight objective exactly in stacked feature space.

    The change of variables u_s = w_s / sqrt(alpha), u0 = w0 / sqrt(1 - alpha)
    turns the objective into plain ridge regression on the stacked map
    (sqrt(1 - alpha) phi(H), sqrt(alpha) phi(H_1), ..., sqrt(alpha) phi(H_S)).
    At alpha = 0 or 1 the vanished block is dropped, since its weights are
    zero at the optimum.
    """
    if not 0.0 <= alpha <= 1.0:
        raise AlphaAtBoundary(f"alpha must lie in [0, 1], got {alpha}")
    if len(train) == 0:
        raise EmptyDataset("cannot fit on an empty dataset")
    n_species = n_species or train.species_table.n_species
    sets = train.feature_sets()
    labels = train.energies()
    dim = sets[0].dim

    blocks = []
    for fs in sets:
        whole, per = _pooled(fs, n_species)
        parts = []
        if alpha < 1.0:
            parts.append(np.sqrt(1.0 - alpha) * whole)
        if alpha > 0.0:
            parts.extend(np.sqrt(alpha) * per[s] for s in range(n_species))
        blocks.append(np.concatenate(parts))
    design = np.vstack(blocks)

    p = design.shape[1]
    u = np.linalg.solve(design.T @ design + lam * np.eye(p), design.T @ labels)

    w0 = np.zeros(dim)
    w_species = np.zeros((n_species, dim))
    pos = 0
    if alpha < 1.0:
        w0 = np.sqrt(1.0 - alpha) * u[:dim]
        pos = dim
    if alpha > 0.0:
        for s in range(n_species):
            w_species[s] = np.sqrt(alpha) * u[pos : pos + dim]
            pos += dim
    return MultiWeightModel(w0=w0, w_species=w_species, alpha=alpha, lam=lam)


def predict_multiweight(
    model: MultiWeightModel,
    queries: LabeledDataset | list[FeatureSet],
) -> np.ndarray:
    """sum_s <w_s + w0, phi(H_s(x))> per query, with extensive embeddings."""
    if isinstance(queries, LabeledDataset):
        query_sets = queries.feature_sets()
    else:
        query_sets = list(queries)
    out = np.zeros(len(query_sets))
    for i, fs in enumerate(query_sets):
        _, per = _pooled(fs, model.n_species)
        out[i] = sum(
            float((model.w_species[s] + model.w0) @ per[s])
            for s in range(model.n_species)
        )
    return out
