"""Class-level and sample-level splits.

Both splits are pure functions of their inputs and a 64-bit seed; class
selection uses RNG stream 0 and sample selection stream 1 so the two
never share draws. Counts use round-half-up on fractions, with at least
one sample granted to any split whose source pool is non-empty.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, EmptySplitError
from .pack import UNKNOWN_LABEL, FeaturePack
from .rng import PortableRng


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class SplitSpec:
    """Fractions and seed controlling both split stages.

    known_fraction: share of classes kept as known (class-level split).
    test_fraction: share of all documents reserved for testing.
    val_fraction: share of the post-test remainder moved to validation,
        applied to known-class samples and, proportionally, to held-out
        unknown-class samples so threshold calibration sees unknowns.
    """

    known_fraction: float = 0.75
    test_fraction: float = 0.10
    val_fraction: float = 0.10
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.known_fraction <= 1.0:
            raise ConfigError("known_fraction must lie in (0, 1]")
        if not 0.0 < self.test_fraction < 1.0:
            raise ConfigError("test_fraction must lie in (0, 1)")
        if not 0.0 < self.val_fraction < 1.0:
            raise ConfigError("val_fraction must lie in (0, 1)")
        if not 0 <= self.seed < 1 << 64:
            raise ConfigError("seed must fit in an unsigned 64-bit integer")


def split_classes(class_count: int, spec: SplitSpec) -> tuple[set[int], set[int]]:
    """Partition class ids [0, class_count) into (known, unknown) sets.

    |known| = round_half_up(known_fraction * class_count); membership is
    a seeded permutation prefix, identical across runs for one seed.
    """
    if class_count < 2:
        raise ConfigError("need at least 2 classes to split")
    n_known = round_half_up(spec.known_fraction * class_count)
    n_known = min(n_known, class_count)
    if n_known < 2:
        raise ConfigError(
            f"known_fraction={spec.known_fraction} leaves {n_known} known classes; need at least 2"
        )
    order = PortableRng(spec.seed, stream=0).permutation(class_count)
    known = set(int(c) for c in order[:n_known])
    unknown = set(range(class_count)) - known
    return known, unknown


def _take(count: int, pool_size: int, fraction: float) -> int:
    """Round-half-up count, bumped to 1 when the pool is non-empty."""
    if pool_size == 0 or fraction <= 0.0:
        return 0
    return max(1, min(count, pool_size))


def split_samples(
    pack: FeaturePack,
    known_ids,
    spec: SplitSpec,
    stratified: bool = False,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Partition sample indices into (train, val, test), sorted arrays.

    test takes test_fraction of all documents (stratified per label when
    requested, plain random otherwise). train is the known-class
    remainder minus validation; unknown-labelled samples never enter it.
    val takes val_fraction of the known-class remainder plus the same
    fraction of the remaining unknown-class samples. Unknown samples
    outside test and val are left unused, since nothing may train on them.
    """
    n = pack.n
    if n == 0:
        raise EmptySplitError("cannot split an empty pack")
    known_set = set(int(c) for c in known_ids)
    labels = pack.labels
    is_known = np.isin(labels, sorted(known_set)) & (labels != UNKNOWN_LABEL)

    rng = PortableRng(spec.seed, stream=1)
    if stratified:
        test_idx = _stratified_test(labels, spec.test_fraction, rng)
    else:
        order = rng.permutation(n)
        n_test = _take(round_half_up(spec.test_fraction * n), n, spec.test_fraction)
        test_idx = np.sort(order[:n_test])

    in_test = np.zeros(n, dtype=bool)
    in_test[test_idx] = True
    known_rem = np.flatnonzero(is_known & ~in_test)
    unknown_rem = np.flatnonzero(~is_known & ~in_test)

    if known_rem.size == 0:
        raise EmptySplitError("empty training split: no known-class samples left")
    n_val_known = _take(
        round_half_up(spec.val_fraction * known_rem.size), known_rem.size, spec.val_fraction
    )
    if n_val_known >= known_rem.size:
        raise EmptySplitError("empty training split: validation consumed every known sample")
    known_order = rng.permutation(known_rem.size)
    val_known = known_rem[known_order[:n_val_known]]
    train_idx = np.sort(known_rem[known_order[n_val_known:]])

    n_val_unknown = _take(
        round_half_up(spec.val_fraction * unknown_rem.size), unknown_rem.size, spec.val_fraction
    )
    if n_val_unknown:
        unknown_order = rng.permutation(unknown_rem.size)
        val_unknown = unknown_rem[unknown_order[:n_val_unknown]]
    else:
        val_unknown = np.empty(0, dtype=np.int64)
    val_idx = np.sort(np.concatenate([val_known, val_unknown]))
    if val_idx.size == 0:
        raise EmptySplitError("empty validation split")
    return train_idx.astype(np.int64), val_idx.astype(np.int64), test_idx.astype(np.int64)


def _stratified_test(labels: np.ndarray, fraction: float, rng: PortableRng) -> np.ndarray:
    """Per-label test reserve; strata processed in sorted label order."""
    chosen: list[np.ndarray] = []
    for value in np.unique(labels):
        stratum = np.flatnonzero(labels == value)
        order = rng.permutation(stratum.size)
        take = round_half_up(fraction * stratum.size)
        if take:
            chosen.append(stratum[order[:take]])
    if not chosen:
        # Tiny strata all rounded to zero; fall back to one global sample.
        order = rng.permutation(labels.size)
        return np.sort(order[:1])
    return np.sort(np.concatenate(chosen))
