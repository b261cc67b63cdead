"""Minimal extended-XYZ reader.

Only what the exporter needs: per frame the atom count, the symbols in file
order, positions, and the optional energy. Species ids are assigned by first
appearance across the whole file, matching the convention of consumers that
read the same file without an explicit species table.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError

_KV_RE = re.compile(r'(\S+?)=("[^"]*"|\S+)')


@dataclass(frozen=True)
class Frame:
    symbols: tuple[str, ...]
    positions: np.ndarray
    energy: float | None

    @property
    def n_atoms(self) -> int:
        return len(self.symbols)


@dataclass(frozen=True)
class Dataset:
    frames: tuple[Frame, ...]
    species_symbols: tuple[str, ...]  # id s maps to species_symbols[s - 1]

    def species_ids(self, frame: Frame) -> list[int]:
        return [self.species_symbols.index(sym) + 1 for sym in frame.symbols]


def _energy_from_comment(comment: str) -> float | None:
    for key, value in _KV_RE.findall(comment):
        if key.lower() == "energy":
            value = value.strip('"')
            try:
                return float(value)
            except ValueError:
                raise FormatError(f"bad energy value {value!r}") from None
    return None


def read_extxyz(path: str | Path) -> Dataset:
    lines = Path(path).read_text().splitlines()
    frames = []
    order: list[str] = []
    i = 0
    while i < len(lines):
        if not lines[i].strip():
            i += 1
            continue
        try:
            n = int(lines[i].strip())
        except ValueError:
            raise FormatError(f"line {i + 1}: expected atom count, got {lines[i]!r}") from None
        if i + 2 + n > len(lines):
            raise FormatError(f"line {i + 1}: frame truncated")
        energy = _energy_from_comment(lines[i + 1])
        symbols = []
        positions = []
        for row in lines[i + 2 : i + 2 + n]:
            parts = row.split()
            if len(parts) < 4:
                raise FormatError(f"bad atom line {row!r}")
            symbols.append(parts[0])
            positions.append([float(parts[1]), float(parts[2]), float(parts[3])])
            if parts[0] not in order:
                order.append(parts[0])
        frames.append(Frame(tuple(symbols), np.asarray(positions), energy))
        i += 2 + n
    return Dataset(tuple(frames), tuple(order))
