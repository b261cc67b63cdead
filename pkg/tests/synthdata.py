"""Synthetic data for the test and acceptance suites.

A two-species toy potential: per-species self energies plus pairwise Morse
terms smoothly switched off at a finite range, so the total energy is
strictly additive across groups of atoms separated by more than the range.
"""

from __future__ import annotations

import numpy as np

from kernpot import (
    Configuration,
    DatasetEntry,
    FeatureSet,
    LabeledDataset,
    SpeciesTable,
)

SELF_ENERGIES = {1: -3.1, 2: -1.7}  # eV
PAIR_RANGE = 5.0  # Angstrom; interaction strictly zero beyond this

# (depth eV, steepness 1/A, equilibrium A) per unordered species pair
MORSE = {
    (1, 1): (0.30, 1.6, 2.2),
    (1, 2): (0.45, 1.5, 2.0),
    (2, 2): (0.25, 1.7, 2.4),
}


def _switch(r: np.ndarray) -> np.ndarray:
    s = 0.5 * (np.cos(np.pi * r / PAIR_RANGE) + 1.0)
    return np.where(r < PAIR_RANGE, s, 0.0)


def toy_energy(positions: np.ndarray, species: np.ndarray) -> float:
    """Self energies plus switched Morse pair terms; strictly additive."""
    e = sum(SELF_ENERGIES[int(s)] for s in species)
    n = len(species)
    for i in range(n):
        for j in range(i + 1, n):
            r = float(np.linalg.norm(positions[i] - positions[j]))
            if r >= PAIR_RANGE:
                continue
            key = tuple(sorted((int(species[i]), int(species[j]))))
            depth, a, r_eq = MORSE[key]
            morse = depth * ((1.0 - np.exp(-a * (r - r_eq))) ** 2 - 1.0)
            e += morse * float(_switch(np.array(r)))
    return float(e)


def random_cluster(
    rng: np.random.Generator,
    n_atoms: int,
    box: float = 6.0,
    min_sep: float = 1.6,
) -> tuple[np.ndarray, np.ndarray]:
    """Positions with a minimum separation, and random species in {1, 2}."""
    positions = []
    while len(positions) < n_atoms:
        cand = rng.uniform(0.0, box, size=3)
        if all(np.linalg.norm(cand - p) >= min_sep for p in positions):
            positions.append(cand)
    species = rng.integers(1, 3, size=n_atoms)
    # Guarantee both species are represented so compositions vary smoothly.
    if n_atoms >= 2:
        species[0], species[1] = 1, 2
    return np.array(positions), species.astype(np.int64)


def _snap(positions: np.ndarray) -> np.ndarray:
    """Snap coordinates to a 1/64 A grid.

    Grid coordinates survive translation by whole Angstroms without any
    rounding, which keeps far-separated duplicates bit-identical to the
    original in every pair distance.
    """
    return np.round(positions * 64.0) / 64.0

# Fixed site template shared by all toy draws; configurations are site
# subsets plus small displacements, so the family lives on a smooth
# low-dimensional manifold the way trajectory frames do.
_SITE_RNG = np.random.default_rng(20260808)
SITES = _snap(random_cluster(_SITE_RNG, 14, box=7.0, min_sep=2.0)[0])


def _draw_cluster(rng, n, displacement):
    chosen = np.sort(rng.choice(len(SITES), size=n, replace=False))
    pos = _snap(SITES[chosen] + displacement * rng.normal(size=(n, 3)))
    species = rng.integers(1, 3, size=n)
    species[0], species[1] = 1, 2
    return pos, species.astype(np.int64)


def toy_dataset(
    n_configs: int,
    seed: int,
    n_atoms_range: tuple[int, int] = (8, 12),
    displacement: float = 0.12,
    provenance: str = "toy",
) -> LabeledDataset:
    """Vacuum clusters of the two-species toy potential, with energies."""
    rng = np.random.default_rng(seed)
    table = SpeciesTable(("A", "B"))
    entries = []
    for _ in range(n_configs):
        n = int(rng.integers(n_atoms_range[0], n_atoms_range[1] + 1))
        pos, spe = _draw_cluster(rng, n, displacement)
        config = Configuration(pos, spe, energy=toy_energy(pos, spe))
        entries.append(DatasetEntry(config, None, config.energy))
    return LabeledDataset(tuple(entries), table, provenance)


def paired_cluster_dataset(
    n_configs: int,
    seed: int,
    n_atoms_range: tuple[int, int] = (8, 12),
    displacement: float = 0.12,
    gap: float = 40.0,
    provenance: str = "toy-2x",
) -> LabeledDataset:
    """Two independent clusters far beyond every interaction range.

    Energies are strictly additive across the pair, giving a family of
    systems twice as large as ``toy_dataset`` draws.
    """
    rng = np.random.default_rng(seed)
    table = SpeciesTable(("A", "B"))
    entries = []
    for _ in range(n_configs):
        parts = []
        for k in range(2):
            n = int(rng.integers(n_atoms_range[0], n_atoms_range[1] + 1))
            pos, spe = _draw_cluster(rng, n, displacement)
            parts.append((pos + np.array([gap * k, 0.0, 0.0]), spe))
        pos = np.vstack([p for p, _ in parts])
        spe = np.concatenate([s for _, s in parts])
        config = Configuration(pos, spe, energy=toy_energy(pos, spe))
        entries.append(DatasetEntry(config, None, config.energy))
    return LabeledDataset(tuple(entries), table, provenance)


def duplicate_noninteracting(config: Configuration, copies: int, gap: float = 40.0) -> Configuration:
    """k far-separated copies of a configuration (features and energy scale k-fold)."""
    pos = np.vstack([config.positions + np.array([gap * k, 0.0, 0.0]) for k in range(copies)])
    spe = np.concatenate([config.species] * copies)
    energy = None if config.energy is None else copies * config.energy
    return Configuration(pos, spe, energy=energy)


def two_regime_trajectory(
    n_frames: int = 120,
    switch_at: int = 60,
    seed: int = 3,
    n_atoms: int = 4,
    dim: int = 5,
    noise: float = 0.08,
) -> list[FeatureSet]:
    """Per-frame feature sets drawn from two well-separated regimes."""
    rng = np.random.default_rng(seed)
    center_a = rng.normal(size=dim)
    center_b = center_a + 2.5 * np.ones(dim) / np.sqrt(dim)
    species = np.array([1] * (n_atoms // 2) + [2] * (n_atoms - n_atoms // 2), dtype=np.int64)
    frames = []
    for t in range(n_frames):
        center = center_a if t < switch_at else center_b
        rows = center[None, :] + noise * rng.normal(size=(n_atoms, dim))
        frames.append(FeatureSet(rows, species))
    return frames


def feature_dataset(
    rng: np.random.Generator,
    n_configs: int,
    n_atoms: int = 5,
    n_species: int = 2,
    dim: int = 4,
    labels: bool = True,
) -> LabeledDataset:
    """Random featurized dataset with no geometric meaning (kernel tests)."""
    table = SpeciesTable(tuple(chr(ord("A") + i) for i in range(n_species)))
    entries = []
    for _ in range(n_configs):
        feats = rng.normal(size=(n_atoms, dim))
        species = rng.integers(1, n_species + 1, size=n_atoms)
        fs = FeatureSet(feats, species)
        energy = float(rng.normal()) if labels else None
        entries.append(DatasetEntry(None, fs, energy))
    return LabeledDataset(tuple(entries), table, "random")
