"""Writer for the version-1 feature-pack directory layout.

The layout is the contract between this exporter and the scoring
engine, so it is reproduced here rather than imported from it:

    manifest.json   {"version":1,"n":..,"d":..,"K":..,"class_names":[..],
                     "has_logits":bool,"endianness":"little"}
    features.f32    n*d float32 little-endian, row-major, no header
    logits.f32      n*K float32
    labels.i32      n int32 (-1 = unknown)
    weights.f32     K*d float32
    bias.f32        K float32
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ExportError


def write_feature_pack(
    out_dir: str | Path,
    features: np.ndarray,
    logits: np.ndarray,
    labels: np.ndarray,
    weights: np.ndarray,
    bias: np.ndarray,
    class_names: list[str],
) -> Path:
    features = np.ascontiguousarray(features, dtype="<f4")
    logits = np.ascontiguousarray(logits, dtype="<f4")
    labels = np.ascontiguousarray(labels, dtype="<i4")
    weights = np.ascontiguousarray(weights, dtype="<f4")
    bias = np.ascontiguousarray(bias, dtype="<f4")

    n, d = features.shape
    k = weights.shape[0]
    if logits.shape != (n, k):
        raise ExportError(f"logits shaped {logits.shape}, expected {(n, k)}")
    if labels.shape != (n,):
        raise ExportError(f"labels shaped {labels.shape}, expected {(n,)}")
    if weights.shape != (k, d):
        raise ExportError(
            f"dimension mismatch between embedding (d={d}) and head {weights.shape}"
        )
    if bias.shape != (k,):
        raise ExportError(f"bias shaped {bias.shape}, expected {(k,)}")
    if len(class_names) != k:
        raise ExportError(f"{len(class_names)} class names for {k} classes")
    for name, array in (
        ("features", features),
        ("logits", logits),
        ("weights", weights),
        ("bias", bias),
    ):
        if array.size and not np.isfinite(array).all():
            raise ExportError(f"non-finite values in exported {name}")

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "version": 1,
        "n": int(n),
        "d": int(d),
        "K": int(k),
        "class_names": list(class_names),
        "has_logits": True,
        "endianness": "little",
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    (out / "features.f32").write_bytes(features.tobytes())
    (out / "logits.f32").write_bytes(logits.tobytes())
    (out / "labels.i32").write_bytes(labels.tobytes())
    (out / "weights.f32").write_bytes(weights.tobytes())
    (out / "bias.f32").write_bytes(bias.tobytes())
    return out
