"""Feature-pack exporter for fine-tuned transformer text classifiers."""

from .errors import ConsistencyError, ExportError, HeadResolutionError, JobValidationError
from .extract import export_features, locate_head
from .job import ExportJob, map_label, read_known_classes
from .packwriter import write_feature_pack

__version__ = "0.1.0"

__all__ = [
    "ConsistencyError",
    "ExportError",
    "ExportJob",
    "HeadResolutionError",
    "JobValidationError",
    "export_features",
    "locate_head",
    "map_label",
    "read_known_classes",
    "write_feature_pack",
]
