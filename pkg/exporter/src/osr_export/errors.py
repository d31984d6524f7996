from __future__ import annotations


class ExportError(Exception):
    """Base class for exporter failures."""


class JobValidationError(ExportError):
    """Invalid export parameters, raised before any model or data loads."""


class HeadResolutionError(ExportError):
    """The classification-head linear layer could not be located."""


class ConsistencyError(ExportError):
    """Captured features do not reproduce the model logits."""
