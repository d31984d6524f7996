"""Synthetic known/unknown feature packs with controllable separation.

Class centroids are distinct sign patterns in {-1, +1}^d, scaled by
class_sep / 2: the patterns are unit-norm directions (after 1/sqrt(d))
scaled so that the closest possible pair, differing in a single
coordinate, sits exactly class_sep apart; a pair differing in h
coordinates sits class_sep * sqrt(h) apart. Samples are the centroid
plus isotropic Gaussian noise. The head weights are the known-class
centroids with zero bias, so logits track class membership and every
score in the engine has signal to work with.

Generation is deterministic per seed (single PortableRng stream,
patterns first, then noise) and single-threaded per pack; distinct packs
may be generated concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .pack import FeaturePack
from .rng import PortableRng


@dataclass(frozen=True)
class SynthSpec:
    k_known: int
    k_unknown: int
    d: int
    samples_per_class: int
    class_sep: float
    noise_sigma: float
    seed: int = 0

    def __post_init__(self):
        if self.k_known < 1 or self.k_unknown < 1:
            raise ConfigError("need at least one known and one unknown class")
        if self.d < 1:
            raise ConfigError("feature dimension must be positive")
        if self.samples_per_class < 1:
            raise ConfigError("samples_per_class must be positive")
        if self.class_sep < 0:
            raise ConfigError("class_sep must be non-negative")
        if not self.noise_sigma > 0:
            raise ConfigError("noise_sigma must be positive")
        if not 0 <= self.seed < 1 << 64:
            raise ConfigError("seed must fit in an unsigned 64-bit integer")


def _sign_patterns(rng: PortableRng, count: int, d: int) -> np.ndarray:
    """`count` distinct sign patterns in {-1, +1}^d, drawn by rejection."""
    if count > 2**d:
        raise ConfigError(
            f"feature dimension d={d} is too small to place {count} centroids "
            f"at the requested separation (only {2**d} distinct directions)"
        )
    patterns: list[tuple[int, ...]] = []
    seen: set[tuple[int, ...]] = set()
    attempts = 0
    budget = 1000 * count + 1000
    while len(patterns) < count:
        attempts += 1
        if attempts > budget:
            raise ConfigError("could not place distinct centroids; increase d")
        candidate = tuple(1 if u >= 0.5 else -1 for u in rng.uniforms(d))
        if candidate not in seen:
            seen.add(candidate)
            patterns.append(candidate)
    return np.asarray(patterns, dtype=np.float64)


def generate(spec: SynthSpec) -> FeaturePack:
    """Generate a pack: k_known labeled classes plus k_unknown labeled -1."""
    k_total = spec.k_known + spec.k_unknown
    rng = PortableRng(spec.seed, stream=0)
    if spec.class_sep == 0.0:
        centroids = np.zeros((k_total, spec.d))
    else:
        centroids = _sign_patterns(rng, k_total, spec.d) * (spec.class_sep / 2.0)

    n = k_total * spec.samples_per_class
    class_of_sample = np.repeat(np.arange(k_total), spec.samples_per_class)
    noise = rng.normals(n * spec.d).reshape(n, spec.d)
    features = centroids[class_of_sample] + spec.noise_sigma * noise

    labels = np.where(class_of_sample < spec.k_known, class_of_sample, -1)
    return FeaturePack(
        features=features.astype(np.float32),
        labels=labels.astype(np.int32),
        weights=centroids[: spec.k_known].astype(np.float32),
        bias=np.zeros(spec.k_known, dtype=np.float32),
        class_names=[f"class_{j:03d}" for j in range(spec.k_known)],
        logits=None,
    )
