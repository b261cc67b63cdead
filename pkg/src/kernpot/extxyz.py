"""Extended-XYZ reading and writing.

Per frame: line 1 is the atom count, line 2 is a key=value comment which may
contain ``Lattice="ax ay az bx by bz cx cy cz"``, ``pbc="T T T"`` and
``energy=<eV>``; the following lines are ``symbol x y z``. Unknown keys and
extra per-atom columns are ignored.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .data import Configuration, DatasetEntry, LabeledDataset, SpeciesTable
from .errors import FormatError, IoError

_KV_RE = re.compile(r'(\S+?)=("[^"]*"|\S+)')


def _parse_comment(comment: str) -> dict[str, str]:
    out = {}
    for key, value in _KV_RE.findall(comment):
        if value.startswith('"') and value.endswith('"'):
            value = value[1:-1]
        out[key.lower()] = value
    return out


def _parse_frame(lines: list[str], lineno: int) -> tuple[np.ndarray, list[str], np.ndarray, np.ndarray, float | None]:
    fields = _parse_comment(lines[1])
    cell = np.zeros((3, 3))
    pbc = np.zeros(3, dtype=bool)
    if "lattice" in fields:
        vals = fields["lattice"].split()
        if len(vals) != 9:
            raise FormatError(f"line {lineno + 2}: Lattice needs 9 numbers, got {len(vals)}")
        cell = np.array([float(v) for v in vals]).reshape(3, 3)
        pbc = np.ones(3, dtype=bool)
    if "pbc" in fields:
        flags = fields["pbc"].split()
        if len(flags) != 3:
            raise FormatError(f"line {lineno + 2}: pbc needs 3 flags, got {fields['pbc']!r}")
        pbc = np.array([f.upper() in ("T", "TRUE", "1") for f in flags])
    energy = None
    if "energy" in fields:
        try:
            energy = float(fields["energy"])
        except ValueError:
            raise FormatError(f"line {lineno + 2}: bad energy value {fields['energy']!r}") from None

    symbols = []
    positions = []
    for k, line in enumerate(lines[2:]):
        parts = line.split()
        if len(parts) < 4:
            raise FormatError(f"line {lineno + 3 + k}: expected 'symbol x y z', got {line!r}")
        symbols.append(parts[0])
        try:
            positions.append([float(parts[1]), float(parts[2]), float(parts[3])])
        except ValueError:
            raise FormatError(f"line {lineno + 3 + k}: bad coordinate in {line!r}") from None
    return np.asarray(positions), symbols, cell, pbc, energy


def read_extxyz(path: str | Path, species_table: SpeciesTable | None = None) -> LabeledDataset:
    """Read all frames of an extended-XYZ file into a LabeledDataset.

    When ``species_table`` is omitted, one is built from the symbols in order
    of first appearance. Passing a table lets several files (e.g. a transfer
    source and target) share one id assignment.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc

    lines = text.splitlines()
    raw_frames = []
    i = 0
    while i < len(lines):
        if not lines[i].strip():
            i += 1
            continue
        try:
            n = int(lines[i].strip())
        except ValueError:
            raise FormatError(f"line {i + 1}: expected atom count, got {lines[i]!r}") from None
        frame_lines = lines[i : i + 2 + n]
        if len(frame_lines) < 2 + n:
            raise FormatError(f"line {i + 1}: frame truncated (needs {n} atom lines)")
        raw_frames.append((frame_lines, i))
        i += 2 + n

    parsed = [_parse_frame(fl, ln) for fl, ln in raw_frames]
    if species_table is None:
        all_symbols = (s for _, symbols, _, _, _ in parsed for s in symbols)
        species_table = SpeciesTable.from_symbols(all_symbols)

    entries = []
    for positions, symbols, cell, pbc, energy in parsed:
        ids = np.array([species_table.id_of(s) for s in symbols], dtype=np.int64)
        config = Configuration(positions, ids, cell, pbc, energy)
        entries.append(DatasetEntry(config, None, energy))
    return LabeledDataset(tuple(entries), species_table, provenance=str(path))


def write_extxyz(ds: LabeledDataset, path: str | Path) -> None:
    path = Path(path)
    out = []
    for entry in ds.entries:
        config = entry.config
        if config is None:
            raise FormatError("cannot write a dataset entry without a configuration")
        fields = []
        if np.any(config.pbc):
            flat = " ".join(repr(float(v)) for v in config.cell.ravel())
            fields.append(f'Lattice="{flat}"')
        flags = " ".join("T" if f else "F" for f in config.pbc)
        fields.append(f'pbc="{flags}"')
        if entry.energy is not None:
            fields.append(f"energy={float(entry.energy)!r}")
        out.append(str(config.n_atoms))
        out.append(" ".join(fields))
        for sid, pos in zip(config.species, config.positions):
            sym = ds.species_table.symbol_of(int(sid))
            out.append(f"{sym} {float(pos[0])!r} {float(pos[1])!r} {float(pos[2])!r}")
    try:
        path.write_text("\n".join(out) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
