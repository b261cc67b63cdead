"""Feature exporter: per-atom representations of extended-XYZ datasets into FEAT1 bundles."""

from .errors import (
    AtomCountMismatch,
    CheckpointUnavailable,
    ExportError,
    FormatError,
    LayerOutOfRange,
)
from .export import export_features
from .reps import load_representation

__version__ = "0.1.0"

__all__ = [
    "AtomCountMismatch",
    "CheckpointUnavailable",
    "ExportError",
    "FormatError",
    "LayerOutOfRange",
    "export_features",
    "load_representation",
]
