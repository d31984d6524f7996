"""Feature-pack container and its on-disk format.

A pack decouples the scoring engine from whatever framework produced the
features: it holds penultimate embeddings, classifier logits, labels,
and the classification-head weights/bias. On disk a pack is a directory:

    manifest.json   {"version":1,"n":..,"d":..,"K":..,"class_names":[..],
                     "has_logits":bool,"endianness":"little"}
    features.f32    n*d float32 little-endian, row-major, no header
    logits.f32      n*K float32 (only when has_logits)
    labels.i32      n int32
    weights.f32     K*d float32, row-major
    bias.f32        K float32

Arrays are stored and kept in memory as float32/int32 exactly as written,
so write -> read round-trips bit-for-bit; all arithmetic elsewhere in the
engine upcasts to float64. Label -1 marks unknown-class samples; every
other label lies in [0, K).

Packs are immutable by convention after construction and safe to share
across threads; writing a directory is single-writer.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    InvariantError,
    MissingFileError,
    NonFiniteDataError,
    PackFormatError,
    SizeMismatchError,
    UnsupportedVersionError,
)

FORMAT_VERSION = 1
UNKNOWN_LABEL = -1

_F32 = np.dtype("<f4")
_I32 = np.dtype("<i4")


def derive_logits(features: np.ndarray, weights: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """logits[i, j] = dot(features[i], weights[j]) + bias[j], in float64."""
    return features.astype(np.float64) @ weights.astype(np.float64).T + bias.astype(np.float64)


@dataclass
class FeaturePack:
    """In-memory feature pack.

    `logits` may be passed as None, in which case it is derived from the
    features and head weights (and `logits_stored` is set False so the
    derived values are not written back to disk).
    """

    features: np.ndarray
    labels: np.ndarray
    weights: np.ndarray
    bias: np.ndarray
    class_names: list[str]
    logits: np.ndarray | None = None
    logits_stored: bool = True
    # Original labels before a class-level split relabeled unknowns to -1.
    # Diagnostics only; never serialized.
    original_labels: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.features = np.ascontiguousarray(self.features, dtype=np.float32)
        self.labels = np.ascontiguousarray(self.labels, dtype=np.int32)
        self.weights = np.ascontiguousarray(self.weights, dtype=np.float32)
        self.bias = np.ascontiguousarray(self.bias, dtype=np.float32)
        self.class_names = [str(name) for name in self.class_names]
        if self.logits is not None:
            self.logits = np.ascontiguousarray(self.logits, dtype=np.float32)
            self.validate()
        else:
            self.validate()  # shapes must hold before logits can be derived
            self.logits = derive_logits(self.features, self.weights, self.bias).astype(np.float32)
            self.logits_stored = False
            self.validate()

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    @property
    def K(self) -> int:
        return self.weights.shape[0]

    def validate(self) -> None:
        """Check every pack invariant; raises a PackError subclass on failure."""
        if self.features.ndim != 2:
            raise InvariantError("features must be a 2-D matrix")
        if self.weights.ndim != 2:
            raise InvariantError("weights must be a 2-D matrix")
        n, d = self.features.shape
        k = self.weights.shape[0]
        if k < 1:
            raise InvariantError("pack needs at least one class")
        if d < 1:
            raise InvariantError("feature dimension must be positive")
        if self.weights.shape[1] != d:
            raise SizeMismatchError(
                f"weights are {self.weights.shape[1]}-dimensional, features are {d}-dimensional"
            )
        if self.bias.shape != (k,):
            raise SizeMismatchError(f"bias has {self.bias.shape[0]} entries, expected {k}")
        if self.labels.shape != (n,):
            raise SizeMismatchError(f"labels has {self.labels.shape[0]} entries, expected {n}")
        if len(self.class_names) != k:
            raise SizeMismatchError(f"{len(self.class_names)} class names for {k} classes")
        if self.logits is not None and self.logits.shape != (n, k):
            raise SizeMismatchError(
                f"logits shaped {self.logits.shape}, expected {(n, k)}"
            )
        for name, array in (
            ("features", self.features),
            ("logits", self.logits),
            ("weights", self.weights),
            ("bias", self.bias),
        ):
            if array is not None and array.size and not np.isfinite(array).all():
                raise NonFiniteDataError(f"non-finite values in {name}")
        if n:
            bad = (self.labels != UNKNOWN_LABEL) & ((self.labels < 0) | (self.labels >= k))
            if bad.any():
                offender = int(self.labels[bad][0])
                raise InvariantError(f"label out of range: {offender} with K={k}")


def write_pack(pack: FeaturePack, directory: str | Path) -> None:
    """Write `pack` to `directory` in the version-1 layout.

    Invariants are re-checked before anything is created. Derived logits
    (logits_stored=False) are not written; readers re-derive them.
    """
    pack.validate()
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = {
        "version": FORMAT_VERSION,
        "n": pack.n,
        "d": pack.d,
        "K": pack.K,
        "class_names": pack.class_names,
        "has_logits": bool(pack.logits_stored),
        "endianness": "little",
    }
    (directory / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    (directory / "features.f32").write_bytes(pack.features.astype(_F32, copy=False).tobytes())
    (directory / "labels.i32").write_bytes(pack.labels.astype(_I32, copy=False).tobytes())
    (directory / "weights.f32").write_bytes(pack.weights.astype(_F32, copy=False).tobytes())
    (directory / "bias.f32").write_bytes(pack.bias.astype(_F32, copy=False).tobytes())
    if pack.logits_stored:
        (directory / "logits.f32").write_bytes(pack.logits.astype(_F32, copy=False).tobytes())


def _read_array(directory: Path, name: str, dtype: np.dtype, count: int, shape: tuple) -> np.ndarray:
    path = directory / name
    if not path.is_file():
        raise MissingFileError(f"missing file: {path}")
    raw = path.read_bytes()
    if len(raw) != count * dtype.itemsize:
        raise SizeMismatchError(
            f"{name} holds {len(raw)} bytes, manifest implies {count * dtype.itemsize}"
        )
    data = np.frombuffer(raw, dtype=dtype)
    return data.reshape(shape).astype(dtype.newbyteorder("="), copy=True)


def read_pack(directory: str | Path) -> FeaturePack:
    """Read and validate a pack directory.

    When logits.f32 is absent (has_logits false) the logits are derived
    as dot(features, weights.T) + bias.
    """
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    if not manifest_path.is_file():
        raise MissingFileError(f"missing file: {manifest_path}")
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise PackFormatError(f"unparseable manifest: {exc}") from exc
    if not isinstance(manifest, dict):
        raise PackFormatError("manifest is not a JSON object")
    version = manifest.get("version")
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(f"unsupported format version: {version!r}")
    try:
        n = int(manifest["n"])
        d = int(manifest["d"])
        k = int(manifest["K"])
        class_names = list(manifest["class_names"])
        has_logits = bool(manifest["has_logits"])
        endianness = manifest["endianness"]
    except (KeyError, TypeError, ValueError) as exc:
        raise PackFormatError(f"malformed manifest: {exc}") from exc
    if endianness != "little":
        raise PackFormatError(f"unsupported endianness: {endianness!r}")
    if n < 0 or d < 1 or k < 1:
        raise PackFormatError(f"implausible manifest dimensions n={n} d={d} K={k}")

    features = _read_array(directory, "features.f32", _F32, n * d, (n, d))
    labels = _read_array(directory, "labels.i32", _I32, n, (n,))
    weights = _read_array(directory, "weights.f32", _F32, k * d, (k, d))
    bias = _read_array(directory, "bias.f32", _F32, k, (k,))
    logits = _read_array(directory, "logits.f32", _F32, n * k, (n, k)) if has_logits else None
    return FeaturePack(
        features=features,
        labels=labels,
        weights=weights,
        bias=bias,
        class_names=class_names,
        logits=logits,
        logits_stored=has_logits,
    )


def apply_class_split(pack: FeaturePack, known_ids) -> FeaturePack:
    """Restrict a pack to the given known classes.

    Samples of the remaining classes are relabeled -1 (their original
    labels are kept on the returned pack's `original_labels` for
    reporting), head weights/bias/logits are subset to the known columns,
    and known labels are remapped onto [0, len(known_ids)).
    """
    known = sorted(int(c) for c in set(known_ids))
    if not known:
        raise InvariantError("known class set is empty")
    for c in known:
        if not 0 <= c < pack.K:
            raise InvariantError(f"known class id {c} out of range for K={pack.K}")
    remap = {old: new for new, old in enumerate(known)}
    new_labels = np.full(pack.n, UNKNOWN_LABEL, dtype=np.int32)
    for old, new in remap.items():
        new_labels[pack.labels == old] = new
    return FeaturePack(
        features=pack.features,
        labels=new_labels,
        weights=pack.weights[known],
        bias=pack.bias[known],
        class_names=[pack.class_names[c] for c in known],
        logits=pack.logits[:, known] if pack.logits_stored else None,
        logits_stored=pack.logits_stored,
        original_labels=pack.labels.copy(),
    )
