"""FEAT1 bundle writer targeting the feature-exchange contract.

Layout: ``features.bin`` is the magic ``FEAT1\\0`` followed per frame by a
little-endian u32 atom count and n*d little-endian float64 values row-major;
``index.json`` carries the species table, feature dimension, per-frame atom
counts and the sha256 of the blob, plus per-frame species ids, energies and
provenance so consumers can ingest the bundle standalone. Bytes are a pure
function of the inputs.
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"FEAT1\x00"


def write_bundle(
    path: str | Path,
    matrices: list[np.ndarray],
    species_symbols: tuple[str, ...],
    species_ids: list[list[int]],
    energies: list[float | None],
    provenance: dict,
) -> None:
    path = Path(path)
    parts = [MAGIC]
    for mat in matrices:
        mat = np.ascontiguousarray(mat, dtype="<f8")
        parts.append(struct.pack("<I", mat.shape[0]))
        parts.append(mat.tobytes())
    blob = b"".join(parts)

    dims = {m.shape[1] for m in matrices}
    index = {
        "format": "FEAT1",
        "version": 1,
        "species_table": list(species_symbols),
        "d": dims.pop() if dims else 0,
        "counts": [int(m.shape[0]) for m in matrices],
        "sha256": hashlib.sha256(blob).hexdigest(),
        "species": [[int(s) for s in ids] for ids in species_ids],
        "energies": energies,
        "provenance": json.dumps(provenance, sort_keys=True),
    }
    path.mkdir(parents=True, exist_ok=True)
    (path / "features.bin").write_bytes(blob)
    (path / "index.json").write_text(json.dumps(index, sort_keys=True, indent=2) + "\n")
