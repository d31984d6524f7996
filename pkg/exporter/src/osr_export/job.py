"""Export job description and label mapping."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .errors import JobValidationError

LABEL_POLICIES = ("first", "drop")
UNKNOWN = -1
DROP = -2


@dataclass(frozen=True)
class ExportJob:
    """Everything needed to turn a checkpoint + dataset into a pack.

    known_classes fixes both the label space and its order: class j in
    the pack is known_classes[j], and the checkpoint head must have
    exactly that many outputs. Samples whose label is not a known class
    are exported with label -1 (out-of-distribution).

    multi_label_policy handles documents whose label field is a list:
    "first" keeps the first listed known class (unknown if none is
    known), "drop" excludes documents listing more than one class unless
    none of them is known (those stay as unknowns).
    """

    model_path: str
    dataset: str
    text_field: str
    label_field: str
    known_classes: tuple[str, ...]
    out_dir: str
    batch_size: int = 16
    max_length: int = 128
    multi_label_policy: str = "first"
    device: str = "cpu"

    def __post_init__(self):
        if not self.known_classes:
            raise JobValidationError("known-class list is empty")
        if len(set(self.known_classes)) != len(self.known_classes):
            raise JobValidationError("known-class list contains duplicates")
        if self.batch_size < 1:
            raise JobValidationError("batch size must be at least 1")
        if self.max_length < 1:
            raise JobValidationError("max sequence length must be at least 1")
        if self.multi_label_policy not in LABEL_POLICIES:
            raise JobValidationError(
                f"unknown multi-label policy: {self.multi_label_policy!r}"
            )

    def class_index(self) -> dict[str, int]:
        return {name: j for j, name in enumerate(self.known_classes)}


def map_label(value, index: dict[str, int], policy: str) -> int:
    """Map a raw label value to a class id, UNKNOWN, or DROP."""
    if isinstance(value, (list, tuple)):
        listed = [str(v) for v in value]
        known_listed = [v for v in listed if v in index]
        if not known_listed:
            return UNKNOWN
        if policy == "first":
            return index[known_listed[0]]
        # policy == "drop": multi-category documents with a known class
        # are ambiguous; exclude them. Single-category lists are fine.
        if len(listed) == 1:
            return index[listed[0]]
        return DROP
    value = str(value)
    return index.get(value, UNKNOWN)


def read_known_classes(path: str | Path) -> tuple[str, ...]:
    lines = Path(path).read_text().splitlines()
    return tuple(line.strip() for line in lines if line.strip())
