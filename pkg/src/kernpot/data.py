"""Canonical data model: configurations, species, feature sets, datasets.

All types are immutable value objects. Arrays are copied on construction and
marked read-only, so instances can be shared freely between threads.

Species are stored as dense integer ids ``1..S`` against an ordered symbol
table; this is equivalent to a one-hot encoding and is all the species
partition of the composite kernel ever needs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    BadRatios,
    EmptyDataset,
    LengthMismatch,
    NonFiniteCoordinate,
    SingularCell,
    UnknownSpecies,
)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class SpeciesTable:
    """Ordered chemical symbols; species id ``s`` maps to ``symbols[s - 1]``."""

    symbols: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.symbols)) != len(self.symbols):
            raise UnknownSpecies(f"duplicate symbols in species table: {self.symbols}")

    @property
    def n_species(self) -> int:
        return len(self.symbols)

    def id_of(self, symbol: str) -> int:
        try:
            return self.symbols.index(symbol) + 1
        except ValueError:
            raise UnknownSpecies(f"symbol {symbol!r} not in species table {self.symbols}") from None

    def symbol_of(self, species_id: int) -> str:
        if not 1 <= species_id <= len(self.symbols):
            raise UnknownSpecies(f"species id {species_id} outside 1..{len(self.symbols)}")
        return self.symbols[species_id - 1]

    @classmethod
    def from_symbols(cls, symbols: Iterable[str]) -> "SpeciesTable":
        """Build a table from symbols in order of first appearance."""
        seen: list[str] = []
        for s in symbols:
            if s not in seen:
                seen.append(s)
        return cls(tuple(seen))


@dataclass(frozen=True)
class Configuration:
    """One atomic snapshot: positions (Angstrom), species ids, periodic cell.

    ``cell`` rows are the lattice vectors; ``pbc`` flags periodicity per axis.
    ``energy`` is the optional scalar label in eV.
    """

    positions: np.ndarray
    species: np.ndarray
    cell: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)))
    pbc: np.ndarray = field(default_factory=lambda: np.zeros(3, dtype=bool))
    energy: float | None = None

    def __post_init__(self):
        pos = _frozen(np.asarray(self.positions, dtype=np.float64).reshape(-1, 3))
        spe = _frozen(np.asarray(self.species, dtype=np.int64).reshape(-1))
        cell = _frozen(np.asarray(self.cell, dtype=np.float64).reshape(3, 3))
        pbc = _frozen(np.asarray(self.pbc, dtype=bool).reshape(3))
        if pos.shape[0] != spe.shape[0]:
            raise UnknownSpecies(
                f"positions ({pos.shape[0]}) and species ({spe.shape[0]}) length differ"
            )
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "species", spe)
        object.__setattr__(self, "cell", cell)
        object.__setattr__(self, "pbc", pbc)

    @property
    def n_atoms(self) -> int:
        return self.positions.shape[0]


def validate_configuration(config: Configuration, table: SpeciesTable) -> None:
    """Check all Configuration invariants against a species table.

    Raises ``UnknownSpecies``, ``NonFiniteCoordinate`` or ``SingularCell``;
    returns normally iff the configuration is valid.
    """
    if config.n_atoms < 1:
        raise EmptyDataset("configuration has no atoms")
    if not np.all(np.isfinite(config.positions)):
        raise NonFiniteCoordinate("non-finite atomic position")
    if not np.all(np.isfinite(config.cell)):
        raise NonFiniteCoordinate("non-finite cell vector")
    low = config.species < 1
    high = config.species > table.n_species
    if np.any(low | high):
        bad = int(config.species[low | high][0])
        raise UnknownSpecies(f"species id {bad} outside 1..{table.n_species}")
    if np.any(config.pbc):
        if abs(np.linalg.det(config.cell)) < 1e-12:
            raise SingularCell("cell rows are linearly dependent but an axis is periodic")


@dataclass(frozen=True)
class FeatureSet:
    """Per-atom feature matrix (n x d) aligned with the atoms' species ids."""

    features: np.ndarray
    species: np.ndarray

    def __post_init__(self):
        feat = np.asarray(self.features, dtype=np.float64)
        if feat.ndim != 2:
            raise UnknownSpecies(f"features must be 2-d, got shape {feat.shape}")
        spe = _frozen(np.asarray(self.species, dtype=np.int64).reshape(-1))
        if feat.shape[0] != spe.shape[0]:
            raise UnknownSpecies(
                f"feature rows ({feat.shape[0]}) and species ({spe.shape[0]}) differ"
            )
        object.__setattr__(self, "features", _frozen(feat))
        object.__setattr__(self, "species", spe)

    @property
    def n_atoms(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class DatasetEntry:
    config: Configuration | None
    features: FeatureSet | None
    energy: float | None

    @property
    def n_atoms(self) -> int:
        if self.config is not None:
            return self.config.n_atoms
        if self.features is not None:
            return self.features.n_atoms
        raise EmptyDataset("entry has neither configuration nor features")

    @property
    def species(self) -> np.ndarray:
        if self.config is not None:
            return self.config.species
        if self.features is not None:
            return self.features.species
        raise EmptyDataset("entry has neither configuration nor features")


@dataclass(frozen=True)
class LabeledDataset:
    """A sequence of (configuration, optional features, optional energy).

    Feature presence is all-or-none and the feature dimension is constant.
    All entries share one species table.
    """

    entries: tuple[DatasetEntry, ...]
    species_table: SpeciesTable
    provenance: str = ""

    def __post_init__(self):
        entries = tuple(self.entries)
        object.__setattr__(self, "entries", entries)
        have = [e.features is not None for e in entries]
        if any(have) and not all(have):
            raise UnknownSpecies("feature presence must be all-or-none across a dataset")
        dims = {e.features.dim for e in entries if e.features is not None}
        if len(dims) > 1:
            raise UnknownSpecies(f"inconsistent feature dimensions {sorted(dims)}")
        for e in entries:
            if e.config is not None:
                validate_configuration(e.config, self.species_table)
            if e.features is not None and e.config is not None:
                if not np.array_equal(e.features.species, e.config.species):
                    raise UnknownSpecies("feature species do not match configuration species")

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def is_featurized(self) -> bool:
        return len(self.entries) > 0 and self.entries[0].features is not None

    @property
    def has_energies(self) -> bool:
        return len(self.entries) > 0 and all(e.energy is not None for e in self.entries)

    def energies(self) -> np.ndarray:
        if not self.has_energies:
            raise EmptyDataset("dataset has missing energy labels")
        return np.array([e.energy for e in self.entries], dtype=np.float64)

    def feature_sets(self) -> list[FeatureSet]:
        if not self.is_featurized:
            raise EmptyDataset("dataset is not featurized")
        return [e.features for e in self.entries]

    def atom_counts(self) -> np.ndarray:
        return np.array([e.n_atoms for e in self.entries], dtype=np.int64)

    def subset(self, indices: Sequence[int], provenance: str | None = None) -> "LabeledDataset":
        sel = tuple(self.entries[i] for i in indices)
        return LabeledDataset(sel, self.species_table, provenance or self.provenance)

    def with_features(self, feature_sets: Sequence[FeatureSet]) -> "LabeledDataset":
        if len(feature_sets) != len(self.entries):
            raise LengthMismatch(
                f"expected {len(self.entries)} feature sets, got {len(feature_sets)}"
            )
        new = tuple(
            DatasetEntry(e.config, fs, e.energy)
            for e, fs in zip(self.entries, feature_sets)
        )
        return LabeledDataset(new, self.species_table, self.provenance)


def split_dataset(
    ds: LabeledDataset,
    ratios: tuple[float, float, float],
    seed: int,
) -> tuple[LabeledDataset, LabeledDataset, LabeledDataset]:
    """Deterministic random train/val/test split.

    Val and test sizes are floor allocations of their ratios; the remainder
    goes to the train split. Identical seed gives identical index assignment.
    """
    n = len(ds)
    if n == 0:
        raise EmptyDataset("cannot split an empty dataset")
    r = np.asarray(ratios, dtype=np.float64)
    if r.shape != (3,) or np.any(r <= 0) or abs(r.sum() - 1.0) > 1e-9:
        raise BadRatios(f"ratios must be three positive numbers summing to 1, got {ratios}")
    n_val = int(np.floor(r[1] * n))
    n_test = int(np.floor(r[2] * n))
    n_train = n - n_val - n_test
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    idx_train = np.sort(perm[:n_train])
    idx_val = np.sort(perm[n_train : n_train + n_val])
    idx_test = np.sort(perm[n_train + n_val :])
    tag = ds.provenance
    return (
        ds.subset(idx_train, f"{tag}[train seed={seed}]"),
        ds.subset(idx_val, f"{tag}[val seed={seed}]"),
        ds.subset(idx_test, f"{tag}[test seed={seed}]"),
    )
