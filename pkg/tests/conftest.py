from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from osr_bench import FeaturePack, ScoredSet, ScoreMethod


def random_pack(
    rng: np.random.Generator,
    n: int = 16,
    d: int = 4,
    k: int = 3,
    with_logits: bool = True,
    unknown_share: float = 0.0,
) -> FeaturePack:
    """Random pack with modest magnitudes; labels in [0,K) plus optional -1s."""
    features = rng.normal(size=(n, d)).astype(np.float32)
    weights = rng.normal(size=(k, d)).astype(np.float32)
    bias = rng.normal(size=k).astype(np.float32)
    labels = rng.integers(0, k, size=n).astype(np.int32)
    if unknown_share > 0 and n:
        flip = rng.random(n) < unknown_share
        labels[flip] = -1
    logits = None
    if with_logits:
        logits = (
            features.astype(np.float64) @ weights.astype(np.float64).T
            + bias.astype(np.float64)
        ).astype(np.float32)
    return FeaturePack(
        features=features,
        labels=labels,
        weights=weights,
        bias=bias,
        class_names=[f"c{j}" for j in range(k)],
        logits=logits,
        logits_stored=with_logits,
    )


def random_scored(
    rng: np.random.Generator,
    n: int,
    k: int = 4,
    method: ScoreMethod = ScoreMethod("msp"),
    normalized: bool = True,
) -> ScoredSet:
    """Random scored set with a mix of known/unknown and right/wrong predictions."""
    true_labels = rng.integers(-1, k, size=n).astype(np.int64)
    pred = rng.integers(0, k, size=n).astype(np.int64)
    # Force at least one known and one unknown.
    true_labels[0] = 0
    if n > 1:
        true_labels[1] = -1
    raw = rng.normal(size=n)
    # Duplicate some scores to exercise tie handling.
    if n >= 6:
        raw[3] = raw[2]
        raw[5] = raw[4]
    scored = ScoredSet(
        method=method,
        sample_ids=np.arange(n, dtype=np.int64),
        true_labels=true_labels,
        pred_classes=pred,
        raw_scores=raw.astype(np.float64),
    )
    if normalized:
        span = raw.max() - raw.min()
        norm = (raw - raw.min()) / span if span else np.full(n, 0.5)
        scored.norm_scores = norm
    return scored


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
