"""Built-in per-atom descriptor: species-resolved radial expansion.

Feature column (s, k) of atom i sums, over neighbours j of species s within
the cutoff, a Gaussian centred at mu_k of the distance r_ij times the smooth
cutoff (cos(pi r / r_c) + 1) / 2. Distances use the minimum-image convention
on periodic axes. Rows are invariant under rigid motions and permute with the
atoms, which is exactly what the set kernels downstream require.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import (
    Configuration,
    DatasetEntry,
    FeatureSet,
    LabeledDataset,
    SpeciesTable,
    validate_configuration,
)
from .errors import CellTooSmall, EmptyDataset


@dataclass(frozen=True)
class DescriptorParams:
    cutoff: float = 6.0
    centers: tuple[float, ...] = tuple(np.linspace(0.5, 6.0, 16, endpoint=False))
    width: float = 0.35

    def __post_init__(self):
        if self.cutoff <= 0:
            raise ValueError(f"cutoff must be positive, got {self.cutoff}")
        if self.width <= 0:
            raise ValueError(f"width must be positive, got {self.width}")
        c = np.asarray(self.centers, dtype=np.float64)
        if c.size == 0 or np.any(np.diff(c) <= 0):
            raise ValueError("centers must be strictly increasing")
        if np.any(c >= self.cutoff):
            raise ValueError("all centers must lie below the cutoff")
        object.__setattr__(self, "centers", tuple(float(v) for v in c))

    @property
    def n_centers(self) -> int:
        return len(self.centers)


def _pair_distances(config: Configuration, cutoff: float) -> np.ndarray:
    """All-pairs distance matrix with minimum image on periodic axes."""
    pos = config.positions
    diff = pos[None, :, :] - pos[:, None, :]
    if np.any(config.pbc):
        lengths = np.linalg.norm(config.cell, axis=1)
        short = config.pbc & (lengths < 2.0 * cutoff)
        if np.any(short):
            axis = int(np.nonzero(short)[0][0])
            raise CellTooSmall(
                f"cell vector {axis} has length {lengths[axis]:.3f} < 2*cutoff"
                f" = {2 * cutoff:.3f}; minimum image breaks down"
            )
        inv = np.linalg.inv(config.cell)
        frac = diff @ inv
        wrap = np.rint(frac)
        wrap[:, :, ~config.pbc] = 0.0
        diff = (frac - wrap) @ config.cell
    return np.linalg.norm(diff, axis=2)


def compute_descriptor(
    config: Configuration,
    table: SpeciesTable,
    params: DescriptorParams | None = None,
) -> FeatureSet:
    """Per-atom feature matrix of shape (n, S * K); column (s, k) maps to
    index (s - 1) * K + k."""
    params = params or DescriptorParams()
    validate_configuration(config, table)
    n = config.n_atoms
    n_s = table.n_species
    k = params.n_centers
    centers = np.asarray(params.centers)

    dist = _pair_distances(config, params.cutoff)
    features = np.zeros((n, n_s * k))
    mask = (dist < params.cutoff) & ~np.eye(n, dtype=bool)
    for s in range(1, n_s + 1):
        pair = mask & (config.species[None, :] == s)
        i_idx, j_idx = np.nonzero(pair)
        if i_idx.size == 0:
            continue
        r = dist[i_idx, j_idx]
        # Accumulate each atom's terms in increasing-distance order. The
        # terms are functions of r alone, so this makes the summation order
        # canonical and row permutation equivariance exact.
        order = np.lexsort((r, i_idx))
        i_idx, r = i_idx[order], r[order]
        envelope = 0.5 * (np.cos(np.pi * r / params.cutoff) + 1.0)
        contrib = np.exp(
            -((r[:, None] - centers[None, :]) ** 2) / (2.0 * params.width**2)
        ) * envelope[:, None]
        block = np.zeros((n, k))
        np.add.at(block, i_idx, contrib)
        features[:, (s - 1) * k : s * k] = block
    return FeatureSet(features, config.species)


def featurize_dataset(ds: LabeledDataset, params: DescriptorParams | None = None) -> LabeledDataset:
    """Map the descriptor over every configuration, preserving labels and order."""
    if len(ds) == 0:
        raise EmptyDataset("cannot featurize an empty dataset")
    params = params or DescriptorParams()
    entries = []
    for entry in ds.entries:
        if entry.config is None:
            raise EmptyDataset("entry has no configuration to featurize")
        fs = compute_descriptor(entry.config, ds.species_table, params)
        entries.append(DatasetEntry(entry.config, fs, entry.energy))
    return LabeledDataset(tuple(entries), ds.species_table, ds.provenance)
