class ExportError(Exception):
    """Base class for exporter failures."""


class CheckpointUnavailable(ExportError):
    pass


class LayerOutOfRange(ExportError):
    pass


class AtomCountMismatch(ExportError):
    pass


class FormatError(ExportError):
    pass
