"""Post-hoc confidence scores over a feature pack.

Four scoring rules share one contract: higher means more in-distribution,
and the predicted class is always the argmax of the head logits (ties
broken toward the lowest class index, everywhere).

  msp       largest softmax probability
  maxlogit  largest raw logit (or largest penultimate feature coordinate
            when source="penultimate-max")
  energy    temperature-scaled negative free energy,
            T * log(sum_k exp(l_k / T))
  costarr   GNL(max logit) times the rescaled cosine similarity between
            the sample's concatenated pre/post-attenuation features and
            the predicted class's training mean

All kernels compute in float64 with max-shifted exponentials. Scoring is
pure: nothing here mutates the pack, and a fitted CalibrationModel is
immutable, so batches may be partitioned across threads freely.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, EmptySplitError, InvariantError
from .pack import FeaturePack

VALID_METHODS = ("costarr", "msp", "maxlogit", "energy")


@dataclass(frozen=True)
class ScoreMethod:
    """Tagged choice of scoring rule; temperature applies to energy only."""

    name: str
    temperature: float = 1.0

    def __post_init__(self):
        if self.name not in VALID_METHODS:
            raise ConfigError(f"unknown score method: {self.name!r}")
        if not self.temperature > 0:
            raise ConfigError("temperature must be positive")


COSTARR = ScoreMethod("costarr")
MSP = ScoreMethod("msp")
MAXLOGIT = ScoreMethod("maxlogit")
ENERGY = ScoreMethod("energy")


@dataclass
class CalibrationModel:
    """Training-split statistics needed by the costarr score.

    mu[j] is the mean concatenated feature vector of class j's training
    samples (all-zero when the class has none); logit_min/logit_max are
    the global extrema over every logit of every training sample and
    back the GNL min-max normalization.
    """

    mu: np.ndarray
    logit_min: float
    logit_max: float
    class_counts: np.ndarray

    def __post_init__(self):
        if self.logit_min > self.logit_max:
            raise InvariantError("logit_min exceeds logit_max")
        # Empty classes must carry a zero mean row. (The converse can fail
        # only for all-zero embeddings, which the cosine zero-norm guard
        # handles downstream.)
        empty = self.class_counts == 0
        if (empty & self.mu.any(axis=1)).any():
            raise InvariantError("non-zero mean row for a class with no training samples")


@dataclass
class ScoredSet:
    """Per-sample scoring results for one method.

    norm_scores stays None until metrics.normalize_scores fills it from
    validation extrema; serialization and OOSA require it.
    """

    method: ScoreMethod
    sample_ids: np.ndarray
    true_labels: np.ndarray
    pred_classes: np.ndarray
    raw_scores: np.ndarray
    norm_scores: np.ndarray | None = None
    flags: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.flags is None:
            self.flags = np.zeros(len(self.sample_ids), dtype=bool)

    def __len__(self) -> int:
        return len(self.sample_ids)

    @property
    def known_mask(self) -> np.ndarray:
        return self.true_labels >= 0

    def write_csv(self, path: str | Path) -> None:
        """CSV with header sample_id,true_label,pred_class,raw_score,norm_score,flag."""
        if self.norm_scores is None:
            raise ValueError("normalize scores before serializing")
        lines = ["sample_id,true_label,pred_class,raw_score,norm_score,flag"]
        for i in range(len(self)):
            lines.append(
                f"{int(self.sample_ids[i])},{int(self.true_labels[i])},"
                f"{int(self.pred_classes[i])},{self.raw_scores[i]:.9g},"
                f"{self.norm_scores[i]:.9g},{int(self.flags[i])}"
            )
        Path(path).write_text("\n".join(lines) + "\n")


def hadamard_features(f: np.ndarray, w_row: np.ndarray) -> np.ndarray:
    """Elementwise product of a feature vector with one weight row."""
    f = np.asarray(f, dtype=np.float64)
    w_row = np.asarray(w_row, dtype=np.float64)
    if f.shape != w_row.shape:
        raise ValueError(f"length mismatch: {f.shape} vs {w_row.shape}")
    return f * w_row


def concat_features(f: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Feature vector followed by its attenuated counterpart, length 2d."""
    f = np.asarray(f, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    if f.shape != h.shape:
        raise ValueError(f"length mismatch: {f.shape} vs {h.shape}")
    return np.concatenate([f, h])


def fit_calibration(pack: FeaturePack, train_indices) -> CalibrationModel:
    """Fit per-class concatenated-feature means and global logit extrema.

    Uses training samples only; classes absent from the training split
    get a zero mean row and count 0.
    """
    idx = np.asarray(train_indices, dtype=np.int64)
    if idx.size == 0:
        raise EmptySplitError("empty training set")
    labels = pack.labels[idx]
    if (labels < 0).any() or (labels >= pack.K).any():
        raise InvariantError("training indices must carry known-class labels")

    feats = pack.features[idx].astype(np.float64)
    mu = np.zeros((pack.K, 2 * pack.d), dtype=np.float64)
    counts = np.zeros(pack.K, dtype=np.int64)
    for j in range(pack.K):
        mask = labels == j
        counts[j] = int(mask.sum())
        if counts[j]:
            class_feats = feats[mask]
            hadamard = class_feats * pack.weights[j].astype(np.float64)
            mu[j, : pack.d] = class_feats.mean(axis=0)
            mu[j, pack.d :] = hadamard.mean(axis=0)

    train_logits = pack.logits[idx].astype(np.float64)
    return CalibrationModel(
        mu=mu,
        logit_min=float(train_logits.min()),
        logit_max=float(train_logits.max()),
        class_counts=counts,
    )


def gnl(logit: float, model: CalibrationModel) -> float:
    """Global min-max normalization of a logit, clamped to [0, 1].

    Degenerate calibration (min == max) maps everything to 0.5.
    """
    return float(_gnl_array(np.asarray([logit], dtype=np.float64), model)[0])


def _gnl_array(logits: np.ndarray, model: CalibrationModel) -> np.ndarray:
    span = model.logit_max - model.logit_min
    if span == 0.0:
        return np.full(logits.shape, 0.5)
    return np.clip((logits - model.logit_min) / span, 0.0, 1.0)


def softmax(logits: np.ndarray) -> np.ndarray:
    """Numerically stable softmax of a 1-D logit vector."""
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max()
    e = np.exp(z)
    return e / e.sum()


# Batch kernels. The single-sample entry points delegate to these with a
# one-row selection, so per-sample and batched results agree bit-for-bit.


def _select_logits(pack: FeaturePack, idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    logits = pack.logits[idx].astype(np.float64)
    return logits, logits.argmax(axis=1)


def _msp_batch(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e.max(axis=1) / e.sum(axis=1)


def _energy_batch(logits: np.ndarray, temperature: float) -> np.ndarray:
    top = logits.max(axis=1)
    rest = np.exp((logits - top[:, None]) / temperature).sum(axis=1)
    return top + temperature * np.log(rest)


def _costarr_batch(
    pack: FeaturePack, idx: np.ndarray, model: CalibrationModel
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Returns (pred, lambda, sim, flagged) arrays for the given rows."""
    logits, pred = _select_logits(pack, idx)
    lam = _gnl_array(logits, model).max(axis=1)

    feats = pack.features[idx].astype(np.float64)
    weights = pack.weights[pred].astype(np.float64)
    concat = np.hstack([feats, feats * weights])
    mu_sel = model.mu[pred]

    dot = (concat * mu_sel).sum(axis=1)
    norms = np.sqrt((concat * concat).sum(axis=1)) * np.sqrt((mu_sel * mu_sel).sum(axis=1))
    cos = np.divide(dot, norms, out=np.zeros_like(dot), where=norms != 0.0)
    sim = 0.5 * (1.0 + cos)

    flagged = model.class_counts[pred] == 0
    sim[flagged] = 0.5  # no training mean for the predicted class
    return pred, lam, sim, flagged


def score_msp(index: int, pack: FeaturePack) -> tuple[int, float]:
    """Largest softmax probability; lies in (0, 1]."""
    logits, pred = _select_logits(pack, np.asarray([index]))
    return int(pred[0]), float(_msp_batch(logits)[0])


def score_maxlogit(index: int, pack: FeaturePack, source: str = "head") -> tuple[int, float]:
    """Largest raw logit; source="penultimate-max" scores max feature instead.

    The predicted class comes from the head logits in both modes.
    """
    logits, pred = _select_logits(pack, np.asarray([index]))
    if source == "head":
        score = float(logits.max(axis=1)[0])
    elif source == "penultimate-max":
        score = float(pack.features[index].astype(np.float64).max())
    else:
        raise ConfigError(f"unknown maxlogit source: {source!r}")
    return int(pred[0]), score


def score_energy(index: int, pack: FeaturePack, temperature: float = 1.0) -> tuple[int, float]:
    """Negative free energy, T * log sum_k exp(l_k / T), max-shifted."""
    if not temperature > 0:
        raise ConfigError("temperature must be positive")
    logits, pred = _select_logits(pack, np.asarray([index]))
    return int(pred[0]), float(_energy_batch(logits, temperature)[0])


def score_costarr(
    index: int, pack: FeaturePack, model: CalibrationModel
) -> tuple[int, float]:
    """Attenuation-aware score in [0, 1]: GNL(max logit) * rescaled cosine."""
    m, lam, sim, _ = costarr_components(index, pack, model)
    return m, lam * sim


def costarr_components(
    index: int, pack: FeaturePack, model: CalibrationModel
) -> tuple[int, float, float, bool]:
    """(pred, lambda, sim, flagged) for one sample; score = lambda * sim."""
    pred, lam, sim, flagged = _costarr_batch(pack, np.asarray([index]), model)
    return int(pred[0]), float(lam[0]), float(sim[0]), bool(flagged[0])


def score_all(
    pack: FeaturePack,
    indices,
    method: ScoreMethod,
    model: CalibrationModel | None = None,
    maxlogit_source: str = "head",
) -> ScoredSet:
    """Score a batch of sample indices with one method.

    Records follow the order of `indices`; raw scores are filled here and
    normalized scores later, from validation extrema (metrics module).
    """
    idx = np.asarray(indices, dtype=np.int64)
    flags = None
    if method.name == "costarr":
        if model is None:
            raise ConfigError("costarr requires a fitted calibration model")
        pred, lam, sim, flags = _costarr_batch(pack, idx, model)
        raw = lam * sim
    else:
        logits, pred = _select_logits(pack, idx)
        if method.name == "msp":
            raw = _msp_batch(logits)
        elif method.name == "maxlogit":
            if maxlogit_source == "head":
                raw = logits.max(axis=1) if logits.size else np.zeros(len(idx))
            elif maxlogit_source == "penultimate-max":
                feats = pack.features[idx].astype(np.float64)
                raw = feats.max(axis=1) if feats.size else np.zeros(len(idx))
            else:
                raise ConfigError(f"unknown maxlogit source: {maxlogit_source!r}")
        else:
            raw = _energy_batch(logits, method.temperature)

    return ScoredSet(
        method=method,
        sample_ids=idx.copy(),
        true_labels=pack.labels[idx].astype(np.int64),
        pred_classes=pred.astype(np.int64),
        raw_scores=np.asarray(raw, dtype=np.float64),
        flags=flags,
    )
