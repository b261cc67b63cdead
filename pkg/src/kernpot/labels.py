"""Energy label transforms: identity, standardization, species baselines.

The species-baseline transform subtracts a per-species energy offset summed
over each configuration's composition, so the model fits a residual that no
longer scales with composition; predictions add the offsets back. Baselines
are fit by composition least squares when no externally computed table is
supplied.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .data import LabeledDataset
from .errors import (
    LengthMismatch,
    MissingSpeciesBaseline,
    RankDeficientComposition,
)

IDENTITY = "identity"
STANDARDIZE = "standardize"
SPECIES_BASELINE = "species_baseline"


@dataclass(frozen=True)
class SpeciesEnergyTable:
    """Per-species baseline energies in eV, keyed by species id."""

    values: dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        clean = {int(k): float(v) for k, v in self.values.items()}
        for k, v in clean.items():
            if not np.isfinite(v):
                raise MissingSpeciesBaseline(f"non-finite baseline for species {k}")
        object.__setattr__(self, "values", clean)

    def baseline_of(self, species: np.ndarray) -> float:
        """Sum of baselines over one configuration's species ids."""
        total = 0.0
        for s in np.asarray(species, dtype=np.int64):
            s = int(s)
            if s not in self.values:
                raise MissingSpeciesBaseline(f"no baseline for species id {s}")
            total += self.values[s]
        return total


@dataclass(frozen=True)
class LabelTransform:
    kind: str
    mean: float = 0.0
    std: float = 1.0
    table: SpeciesEnergyTable | None = None

    def __post_init__(self):
        if self.kind not in (IDENTITY, STANDARDIZE, SPECIES_BASELINE):
            raise ValueError(f"unknown transform {self.kind!r}")
        if self.kind == STANDARDIZE and not (np.isfinite(self.std) and self.std > 0):
            raise ValueError(f"standardize needs std > 0, got {self.std}")
        if self.kind == SPECIES_BASELINE and self.table is None:
            raise MissingSpeciesBaseline("species_baseline transform needs a table")


def identity_transform() -> LabelTransform:
    return LabelTransform(IDENTITY)


def standardize_transform(mean: float, std: float) -> LabelTransform:
    return LabelTransform(STANDARDIZE, mean=float(mean), std=float(std))


def species_baseline_transform(table: SpeciesEnergyTable) -> LabelTransform:
    return LabelTransform(SPECIES_BASELINE, table=table)


def fit_standardize(train: LabeledDataset) -> LabelTransform:
    """Standardization parameters from the training labels."""
    energies = train.energies()
    std = float(np.std(energies))
    if std == 0.0:
        std = 1.0
    return standardize_transform(float(np.mean(energies)), std)


def composition_matrix(ds: LabeledDataset) -> np.ndarray:
    """T x S matrix of per-configuration species counts."""
    s = ds.species_table.n_species
    out = np.zeros((len(ds), s), dtype=np.float64)
    for t, entry in enumerate(ds.entries):
        out[t] = np.bincount(entry.species, minlength=s + 1)[1:]
    return out


def fit_species_energy_table(train: LabeledDataset) -> SpeciesEnergyTable:
    """Least-squares per-species energies from compositions and labels.

    Only species that actually occur get a baseline; the count matrix
    restricted to those species must have full column rank.
    """
    counts = composition_matrix(train)
    energies = train.energies()
    present = np.nonzero(counts.sum(axis=0) > 0)[0]
    if present.size == 0:
        raise RankDeficientComposition("no species present in dataset")
    sub = counts[:, present]
    rank = np.linalg.matrix_rank(sub)
    if rank < present.size:
        raise RankDeficientComposition(
            f"composition matrix rank {rank} < {present.size} represented species; "
            "baselines are not identifiable"
        )
    sol, *_ = np.linalg.lstsq(sub, energies, rcond=None)
    return SpeciesEnergyTable({int(p) + 1: float(v) for p, v in zip(present, sol)})


def _species_of(item) -> np.ndarray:
    species = getattr(item, "species", None)
    if species is None:
        raise MissingSpeciesBaseline(f"cannot read species ids from {type(item).__name__}")
    return np.asarray(species, dtype=np.int64)


def transform_labels(transform: LabelTransform, ds: LabeledDataset) -> np.ndarray:
    energies = ds.energies()
    if transform.kind == IDENTITY:
        return energies
    if transform.kind == STANDARDIZE:
        return (energies - transform.mean) / transform.std
    offsets = np.array([transform.table.baseline_of(e.species) for e in ds.entries])
    return energies - offsets


def invert_labels(
    transform: LabelTransform,
    predictions: np.ndarray,
    references: Sequence | LabeledDataset | None = None,
) -> np.ndarray:
    """Map model outputs back to energies.

    ``references`` supplies species ids per prediction (configurations,
    feature sets, or dataset entries); it is required only for the
    species-baseline transform.
    """
    predictions = np.asarray(predictions, dtype=np.float64)
    if transform.kind == IDENTITY:
        return predictions.copy()
    if transform.kind == STANDARDIZE:
        return predictions * transform.std + transform.mean
    if references is None:
        raise MissingSpeciesBaseline("species_baseline inversion needs per-query species")
    items = references.entries if isinstance(references, LabeledDataset) else list(references)
    if len(items) != predictions.shape[0]:
        raise LengthMismatch(f"{len(items)} references for {predictions.shape[0]} predictions")
    offsets = np.array([transform.table.baseline_of(_species_of(it)) for it in items])
    return predictions + offsets
