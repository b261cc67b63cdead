"""FEAT1 feature bundle reading and writing.

A bundle is a directory holding ``index.json`` (species table, feature
dimension, per-frame atom counts, sha256 of the blob) and ``features.bin``
(magic ``FEAT1\\0`` then, per frame, a little-endian u32 atom count followed
by n*d little-endian float64 values, row-major). Exporters in any ecosystem
target this layout; ``index.json`` may carry extra keys (per-frame species
ids, energies, provenance) which this package writes and uses but a minimal
reader can ignore.
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from .data import DatasetEntry, FeatureSet, LabeledDataset, SpeciesTable
from .errors import ChecksumError, DimensionMismatch, FormatError, IoError

MAGIC = b"FEAT1\x00"
INDEX_NAME = "index.json"
BLOB_NAME = "features.bin"


def encode_feature_blob(matrices: list[np.ndarray]) -> bytes:
    """Serialize frame feature matrices into the FEAT1 binary layout."""
    parts = [MAGIC]
    for m in matrices:
        m = np.ascontiguousarray(m, dtype=np.float64)
        parts.append(struct.pack("<I", m.shape[0]))
        parts.append(m.astype("<f8").tobytes())
    return b"".join(parts)


def decode_feature_blob(blob: bytes, counts: list[int], dim: int) -> list[np.ndarray]:
    """Parse a FEAT1 blob, validating the layout against the index."""
    if not blob.startswith(MAGIC):
        raise FormatError("features.bin does not start with the FEAT1 magic")
    pos = len(MAGIC)
    out = []
    for frame, n in enumerate(counts):
        if pos + 4 > len(blob):
            raise FormatError(f"features.bin truncated before frame {frame} header")
        (stored_n,) = struct.unpack_from("<I", blob, pos)
        pos += 4
        if stored_n != n:
            raise FormatError(
                f"frame {frame}: blob atom count {stored_n} != index count {n}"
            )
        nbytes = 8 * n * dim
        if pos + nbytes > len(blob):
            raise FormatError(f"features.bin truncated inside frame {frame}")
        mat = np.frombuffer(blob, dtype="<f8", count=n * dim, offset=pos).reshape(n, dim)
        out.append(mat.astype(np.float64))
        pos += nbytes
    if pos != len(blob):
        raise FormatError(f"{len(blob) - pos} trailing bytes after the last frame")
    return out


def write_features(ds: LabeledDataset, path: str | Path) -> None:
    """Write a featurized dataset as a FEAT1 bundle (deterministic bytes)."""
    if len(ds) > 0 and not ds.is_featurized:
        raise FormatError("dataset is not featurized")
    path = Path(path)
    matrices = [e.features.features for e in ds.entries]
    blob = encode_feature_blob(matrices)
    dims = {m.shape[1] for m in matrices}
    index = {
        "format": "FEAT1",
        "version": 1,
        "species_table": list(ds.species_table.symbols),
        "d": dims.pop() if dims else 0,
        "counts": [int(e.features.n_atoms) for e in ds.entries],
        "sha256": hashlib.sha256(blob).hexdigest(),
        "species": [[int(s) for s in e.features.species] for e in ds.entries],
        "energies": [e.energy for e in ds.entries],
        "provenance": ds.provenance,
    }
    try:
        path.mkdir(parents=True, exist_ok=True)
        (path / BLOB_NAME).write_bytes(blob)
        (path / INDEX_NAME).write_text(
            json.dumps(index, sort_keys=True, indent=2) + "\n"
        )
    except OSError as exc:
        raise IoError(f"cannot write bundle {path}: {exc}") from exc


def _read_index(path: Path) -> dict:
    index_path = path / INDEX_NAME
    if not index_path.is_file():
        raise FormatError(f"{path} has no {INDEX_NAME}; not a FEAT1 bundle")
    try:
        index = json.loads(index_path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot parse {index_path}: {exc}") from exc
    for key in ("species_table", "d", "counts", "sha256"):
        if key not in index:
            raise FormatError(f"{index_path} is missing required key {key!r}")
    return index


def read_feature_bundle(path: str | Path) -> tuple[dict, list[np.ndarray]]:
    """Verify and read a bundle; returns (index dict, per-frame matrices)."""
    path = Path(path)
    index = _read_index(path)
    blob_path = path / BLOB_NAME
    if not blob_path.is_file():
        raise FormatError(f"{path} has no {BLOB_NAME}")
    blob = blob_path.read_bytes()
    digest = hashlib.sha256(blob).hexdigest()
    if digest != index["sha256"]:
        raise ChecksumError(
            f"{blob_path}: sha256 {digest[:12]}... != recorded {str(index['sha256'])[:12]}..."
        )
    matrices = decode_feature_blob(blob, [int(c) for c in index["counts"]], int(index["d"]))
    return index, matrices


def load_features(path: str | Path, data: LabeledDataset | None = None) -> LabeledDataset:
    """Load a FEAT1 bundle into a LabeledDataset.

    With ``data`` given, features are attached to its configurations after
    checking frame count, per-frame atom counts, and species table. Without
    it, the bundle must carry per-frame species ids (bundles written by this
    package and its exporters do); configurations are then absent and only
    kernel-side operations are possible on the result.
    """
    path = Path(path)
    index, matrices = read_feature_bundle(path)
    table = SpeciesTable(tuple(index["species_table"]))

    if data is not None:
        if tuple(table.symbols) != tuple(data.species_table.symbols):
            raise FormatError(
                f"bundle species table {table.symbols} != dataset table"
                f" {data.species_table.symbols}"
            )
        if len(matrices) != len(data):
            raise DimensionMismatch(
                f"bundle has {len(matrices)} frames, dataset has {len(data)}"
            )
        entries = []
        for i, (entry, mat) in enumerate(zip(data.entries, matrices)):
            if entry.config is None:
                raise DimensionMismatch(f"dataset entry {i} has no configuration")
            if entry.config.n_atoms != mat.shape[0]:
                raise DimensionMismatch(
                    f"frame {i}: bundle has {mat.shape[0]} atoms,"
                    f" configuration has {entry.config.n_atoms}"
                )
            fs = FeatureSet(mat, entry.config.species)
            entries.append(DatasetEntry(entry.config, fs, entry.energy))
        return LabeledDataset(tuple(entries), data.species_table, data.provenance)

    species = index.get("species")
    if species is None:
        raise FormatError(
            "bundle lacks per-frame species ids; pass the source dataset via data="
        )
    if len(species) != len(matrices):
        raise FormatError("per-frame species list does not match frame count")
    energies = index.get("energies") or [None] * len(matrices)
    entries = []
    for i, mat in enumerate(matrices):
        ids = np.asarray(species[i], dtype=np.int64)
        if ids.shape[0] != mat.shape[0]:
            raise DimensionMismatch(
                f"frame {i}: {ids.shape[0]} species ids for {mat.shape[0]} feature rows"
            )
        fs = FeatureSet(mat, ids)
        energy = energies[i] if i < len(energies) else None
        entries.append(DatasetEntry(None, fs, None if energy is None else float(energy)))
    return LabeledDataset(tuple(entries), table, str(index.get("provenance", path)))
