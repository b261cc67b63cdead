"""Model bundle persistence.

A fitted model is a directory: ``model.json`` holds the kernel spec, the
regularization, the label transform and a sha256 of the blob; ``model.bin``
holds the magic ``MEKRR1\\0``, the coefficients as little-endian float64 and
the retained training feature sets in the FEAT1 inline frame layout. All
floats that matter numerically travel in binary, so a save/load round trip
reproduces predictions bit-exactly.
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from .data import FeatureSet, SpeciesTable
from .errors import ChecksumError, FormatError, IoError, VersionMismatch
from .kernels import BaseKernel, KernelSpec
from .krr import FittedModel
from .labels import (
    IDENTITY,
    SPECIES_BASELINE,
    STANDARDIZE,
    LabelTransform,
    SpeciesEnergyTable,
)

MAGIC = b"MEKRR1\x00"
VERSION = 1
JSON_NAME = "model.json"
BLOB_NAME = "model.bin"


def _transform_to_dict(t: LabelTransform) -> dict:
    out: dict = {"kind": t.kind}
    if t.kind == STANDARDIZE:
        out["mean"] = t.mean
        out["std"] = t.std
    elif t.kind == SPECIES_BASELINE:
        out["baselines"] = {str(k): v for k, v in t.table.values.items()}
    return out


def _transform_from_dict(d: dict) -> LabelTransform:
    kind = d.get("kind", IDENTITY)
    if kind == STANDARDIZE:
        return LabelTransform(STANDARDIZE, mean=float(d["mean"]), std=float(d["std"]))
    if kind == SPECIES_BASELINE:
        table = SpeciesEnergyTable({int(k): float(v) for k, v in d["baselines"].items()})
        return LabelTransform(SPECIES_BASELINE, table=table)
    return LabelTransform(IDENTITY)


def save_model(
    model: FittedModel,
    path: str | Path,
    species_table: SpeciesTable | None = None,
    provenance: str = "",
) -> None:
    path = Path(path)
    parts = [MAGIC, np.asarray(model.coefficients, dtype="<f8").tobytes()]
    for fs in model.train_sets:
        parts.append(struct.pack("<I", fs.n_atoms))
        parts.append(np.ascontiguousarray(fs.features, dtype="<f8").tobytes())
    blob = b"".join(parts)

    spec = model.spec
    meta = {
        "format": "MEKRR",
        "version": VERSION,
        "kernel": {"kind": spec.base.kind, "sigma": spec.base.sigma},
        "normalization": spec.mode,
        "alpha": spec.alpha,
        "species_norm": spec.species_norm,
        "n_species": spec.n_species,
        "species_table": list(species_table.symbols) if species_table else None,
        "lambda": model.lam,
        "sigma": model.sigma,
        "transform": _transform_to_dict(model.transform),
        "d": model.train_sets[0].dim if model.train_sets else 0,
        "counts": [fs.n_atoms for fs in model.train_sets],
        "species": [[int(s) for s in fs.species] for fs in model.train_sets],
        "provenance": provenance,
        "sha256": hashlib.sha256(blob).hexdigest(),
    }
    try:
        path.mkdir(parents=True, exist_ok=True)
        (path / BLOB_NAME).write_bytes(blob)
        (path / JSON_NAME).write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write model bundle {path}: {exc}") from exc


def read_model_meta(path: str | Path) -> dict:
    path = Path(path)
    meta_path = path / JSON_NAME
    if not meta_path.is_file():
        raise FormatError(f"{path} has no {JSON_NAME}; not a model bundle")
    try:
        meta = json.loads(meta_path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot parse {meta_path}: {exc}") from exc
    if "version" not in meta:
        raise FormatError(f"{meta_path} has no version field")
    if int(meta["version"]) != VERSION:
        raise VersionMismatch(
            f"bundle version {meta['version']} unsupported (this build reads {VERSION})"
        )
    return meta


def load_model(path: str | Path) -> FittedModel:
    path = Path(path)
    meta = read_model_meta(path)
    blob_path = path / BLOB_NAME
    if not blob_path.is_file():
        raise FormatError(f"{path} has no {BLOB_NAME}")
    blob = blob_path.read_bytes()
    digest = hashlib.sha256(blob).hexdigest()
    if digest != meta["sha256"]:
        raise ChecksumError(f"{blob_path}: sha256 mismatch; bundle is corrupted")
    if not blob.startswith(MAGIC):
        raise FormatError(f"{blob_path} does not start with the model magic")

    counts = [int(c) for c in meta["counts"]]
    species = meta["species"]
    dim = int(meta["d"])
    t = len(counts)
    pos = len(MAGIC)
    if pos + 8 * t > len(blob):
        raise FormatError(f"{blob_path} truncated inside coefficients")
    coeff = np.frombuffer(blob, dtype="<f8", count=t, offset=pos).astype(np.float64)
    pos += 8 * t

    train_sets = []
    for frame, n in enumerate(counts):
        if pos + 4 > len(blob):
            raise FormatError(f"{blob_path} truncated before frame {frame}")
        (stored_n,) = struct.unpack_from("<I", blob, pos)
        pos += 4
        if stored_n != n:
            raise FormatError(f"frame {frame}: blob count {stored_n} != index count {n}")
        nbytes = 8 * n * dim
        if pos + nbytes > len(blob):
            raise FormatError(f"{blob_path} truncated inside frame {frame}")
        mat = np.frombuffer(blob, dtype="<f8", count=n * dim, offset=pos).reshape(n, dim)
        train_sets.append(FeatureSet(mat.astype(np.float64), np.asarray(species[frame], dtype=np.int64)))
        pos += nbytes
    if pos != len(blob):
        raise FormatError(f"{len(blob) - pos} trailing bytes in {blob_path}")

    kernel = meta["kernel"]
    sigma = kernel.get("sigma")
    spec = KernelSpec(
        base=BaseKernel(kernel["kind"], None if sigma is None else float(sigma)),
        mode=meta["normalization"],
        alpha=float(meta["alpha"]),
        n_species=int(meta["n_species"]),
        species_norm=meta.get("species_norm", "subset"),
    )
    return FittedModel(
        coefficients=coeff,
        train_sets=tuple(train_sets),
        spec=spec,
        lam=float(meta["lambda"]),
        transform=_transform_from_dict(meta["transform"]),
        sigma=None if meta["sigma"] is None else float(meta["sigma"]),
    )
