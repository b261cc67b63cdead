"""Per-atom representation interface and the mock models that implement it.

A representation is configured from a checkpoint reference and exposes
layered per-atom hidden states: ``forward(symbols, positions, layer)`` must
return one row per atom, in the input atom order, already pooled to
rotation-invariant vectors. Real pretrained checkpoints are optional extras
behind the same interface; the mocks below are deterministic and carry the
whole test surface.
"""

from __future__ import annotations

import numpy as np

from .errors import CheckpointUnavailable, LayerOutOfRange


class OneHotRepresentation:
    """Rows are one-hot species encodings; identical at every layer."""

    depth = 3

    def __init__(self, species_symbols):
        self.species_symbols = tuple(species_symbols)

    def forward(self, symbols, positions, layer: int) -> np.ndarray:
        out = np.zeros((len(symbols), len(self.species_symbols)))
        for i, sym in enumerate(symbols):
            out[i, self.species_symbols.index(sym)] = 1.0
        return out


class TaggedRepresentation:
    """Rows tag (atom index, species id, layer); used to verify row order."""

    depth = 4

    def __init__(self, species_symbols):
        self.species_symbols = tuple(species_symbols)

    def forward(self, symbols, positions, layer: int) -> np.ndarray:
        out = np.zeros((len(symbols), 3))
        for i, sym in enumerate(symbols):
            out[i] = (float(i), float(self.species_symbols.index(sym) + 1), float(layer))
        return out


class RadialMockRepresentation:
    """Smooth geometry-dependent rows: per-layer radial moments of distances."""

    depth = 3

    def __init__(self, species_symbols, cutoff: float = 6.0):
        self.species_symbols = tuple(species_symbols)
        self.cutoff = cutoff

    def forward(self, symbols, positions, layer: int) -> np.ndarray:
        n = len(symbols)
        dist = np.linalg.norm(positions[:, None, :] - positions[None, :, :], axis=2)
        mask = (dist < self.cutoff) & ~np.eye(n, dtype=bool)
        out = np.zeros((n, 2 * layer))
        for power in range(1, layer + 1):
            weighted = np.where(mask, np.exp(-dist / power), 0.0)
            out[:, 2 * (power - 1)] = weighted.sum(axis=1)
            out[:, 2 * (power - 1) + 1] = (weighted * dist).sum(axis=1)
        return out


class TruncatingRepresentation:
    """Deliberately broken: drops the last atom row (error-path testing)."""

    depth = 2

    def __init__(self, species_symbols):
        self.species_symbols = tuple(species_symbols)

    def forward(self, symbols, positions, layer: int) -> np.ndarray:
        return np.zeros((max(len(symbols) - 1, 0), 4))


_REGISTRY = {
    "mock-onehot": OneHotRepresentation,
    "mock-tagged": TaggedRepresentation,
    "mock-radial": RadialMockRepresentation,
    "mock-truncating": TruncatingRepresentation,
}


def load_representation(checkpoint_ref: str, species_symbols):
    """Resolve a checkpoint reference to a configured representation."""
    cls = _REGISTRY.get(checkpoint_ref)
    if cls is None:
        raise CheckpointUnavailable(
            f"checkpoint {checkpoint_ref!r} is not available; "
            f"known references: {sorted(_REGISTRY)}"
        )
    return cls(species_symbols)


def check_layer(rep, layer_index: int) -> None:
    if not 1 <= layer_index <= rep.depth:
        raise LayerOutOfRange(
            f"layer {layer_index} outside 1..{rep.depth} for {type(rep).__name__}"
        )
