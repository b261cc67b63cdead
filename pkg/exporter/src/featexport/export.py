"""Evaluate a per-atom representation over a dataset and write a FEAT1 bundle."""

from __future__ import annotations

from pathlib import Path

from .errors import AtomCountMismatch
from .extxyz import read_extxyz
from .feat1 import write_bundle
from .reps import check_layer, load_representation


def export_features(
    config_path: str | Path,
    checkpoint_ref: str,
    layer_index: int,
    out_path: str | Path,
) -> int:
    """Write per-atom features for every frame of an extended-XYZ file.

    Frames in the bundle align 1:1 with the input, rows with the input atom
    order. The bundle records the checkpoint reference and layer index as
    provenance. Returns the number of exported frames.
    """
    ds = read_extxyz(config_path)
    rep = load_representation(checkpoint_ref, ds.species_symbols)
    check_layer(rep, layer_index)

    matrices = []
    species_ids = []
    energies = []
    for i, frame in enumerate(ds.frames):
        mat = rep.forward(frame.symbols, frame.positions, layer_index)
        if mat.shape[0] != frame.n_atoms:
            raise AtomCountMismatch(
                f"frame {i}: representation returned {mat.shape[0]} rows "
                f"for {frame.n_atoms} atoms"
            )
        matrices.append(mat)
        species_ids.append(ds.species_ids(frame))
        energies.append(frame.energy)

    write_bundle(
        out_path,
        matrices,
        ds.species_symbols,
        species_ids,
        energies,
        provenance={
            "source": str(config_path),
            "checkpoint": checkpoint_ref,
            "layer": layer_index,
        },
    )
    return len(matrices)
