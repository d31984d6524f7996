"""Open-set evaluation: OOSA over a threshold grid and the OSCR curve.

OOSA (operational open-set accuracy) counts a sample as handled
correctly when it is a known-class sample accepted (normalized score
>= tau) with the right predicted label, or an unknown-class sample
rejected (score < tau); the reported value is that count over the set
size. Acceptance is score >= tau throughout, rejection strictly below.

The OSCR curve sweeps the distinct raw score values in descending order
and plots, per implied threshold, the fraction of unknowns accepted
(FPR) against the fraction of knowns accepted with a correct label
(CCR). Its area is taken with the trapezoidal rule over FPR in [0, 1].

Every function here computes integer counts first and divides once, so
the streaming implementations agree exactly with naive per-threshold
recounts. All functions are pure over immutable ScoredSets.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, EmptySplitError
from .scoring import ScoredSet

# Eleven thresholds, 0.0 through 1.0 in steps of 0.1.
DEFAULT_GRID: tuple[float, ...] = tuple(i / 10 for i in range(11))


@dataclass
class OosaTable:
    """OOSA per grid threshold, on test and validation, plus the
    validation-optimal operating threshold tau_star."""

    thresholds: np.ndarray
    oosa: np.ndarray
    oosa_val: np.ndarray
    tau_star: float
    oosa_at_tau_star: float


@dataclass
class OscrCurve:
    """(fpr, ccr) points ordered by descending threshold, with area."""

    fpr: np.ndarray
    ccr: np.ndarray
    auoscr: float

    @property
    def points(self) -> list[tuple[float, float]]:
        return [(float(f), float(c)) for f, c in zip(self.fpr, self.ccr)]


def _require_normalized(scored: ScoredSet) -> np.ndarray:
    if scored.norm_scores is None:
        raise ValueError("scores are not normalized; run normalize_scores first")
    return scored.norm_scores


def oosa_at(scored: ScoredSet, tau: float) -> float:
    """OOSA of one scored set at a single threshold."""
    if len(scored) == 0:
        raise EmptySplitError("cannot evaluate OOSA on an empty set")
    scores = _require_normalized(scored)
    known = scored.known_mask
    accepted = scores >= tau
    correct_known = int((known & accepted & (scored.pred_classes == scored.true_labels)).sum())
    rejected_unknown = int((~known & ~accepted).sum())
    return (correct_known + rejected_unknown) / len(scored)


def validate_grid(grid) -> np.ndarray:
    grid = np.asarray(list(grid), dtype=np.float64)
    if grid.size == 0:
        raise ConfigError("threshold grid is empty")
    if (np.diff(grid) < 0).any():
        raise ConfigError("threshold grid must be ascending")
    if grid.min() < 0.0 or grid.max() > 1.0:
        raise ConfigError("threshold grid must lie within [0, 1]")
    return grid


def oosa_table(val: ScoredSet, test: ScoredSet, grid=DEFAULT_GRID) -> OosaTable:
    """Evaluate OOSA over the grid, picking tau_star on validation.

    tau_star is the grid threshold maximizing validation OOSA (ties go
    to the smallest threshold); the headline number is test OOSA there.
    """
    grid = validate_grid(grid)
    if len(val) == 0 or len(test) == 0:
        raise EmptySplitError("OOSA needs non-empty validation and test sets")
    oosa_val = np.asarray([oosa_at(val, float(tau)) for tau in grid])
    oosa_test = np.asarray([oosa_at(test, float(tau)) for tau in grid])
    best = 0
    for i in range(1, grid.size):
        if oosa_val[i] > oosa_val[best]:
            best = i
    return OosaTable(
        thresholds=grid,
        oosa=oosa_test,
        oosa_val=oosa_val,
        tau_star=float(grid[best]),
        oosa_at_tau_star=float(oosa_test[best]),
    )


def oscr_curve(scored: ScoredSet) -> OscrCurve:
    """OSCR curve over the distinct raw score values, descending.

    Needs at least one known and one unknown sample. The curve is
    prefixed with (0, 0) for the above-maximum threshold and ends at
    (1, closed-set accuracy) where everything is accepted.
    """
    known = scored.known_mask
    n_known = int(known.sum())
    n_unknown = len(scored) - n_known
    if n_known == 0 or n_unknown == 0:
        raise EmptySplitError("OSCR needs both known and unknown samples")

    scores = scored.raw_scores
    correct = known & (scored.pred_classes == scored.true_labels)

    # Descending sort; cumulative counts at the last occurrence of each
    # distinct value give the >= tau counts for tau at that value.
    order = np.argsort(-scores, kind="stable")
    s_sorted = scores[order]
    unknown_cum = np.cumsum(~known[order])
    correct_cum = np.cumsum(correct[order])
    last_of_value = np.flatnonzero(
        np.concatenate([s_sorted[1:] != s_sorted[:-1], [True]])
    )

    fpr = [0.0]
    ccr = [0.0]
    for pos in last_of_value:
        fpr.append(int(unknown_cum[pos]) / n_unknown)
        ccr.append(int(correct_cum[pos]) / n_known)
    # tau -> -inf accepts everything: FPR 1, CCR = closed-set accuracy.
    fpr.append(1.0)
    ccr.append(int(correct_cum[-1]) / n_known)

    area = 0.0
    for i in range(1, len(fpr)):
        area += (fpr[i] - fpr[i - 1]) * (ccr[i] + ccr[i - 1]) * 0.5
    return OscrCurve(
        fpr=np.asarray(fpr), ccr=np.asarray(ccr), auoscr=area
    )


def normalize_scores(val: ScoredSet, test: ScoredSet) -> tuple[ScoredSet, ScoredSet]:
    """Min-max normalize raw scores using validation extrema.

    Validation lands in [0, 1] by construction; test is clamped there.
    A degenerate validation set (max == min) maps every score to 0.5.
    """
    if len(val) == 0:
        raise EmptySplitError("cannot normalize against an empty validation set")
    lo = float(val.raw_scores.min())
    hi = float(val.raw_scores.max())

    def _norm(scores: np.ndarray) -> np.ndarray:
        if hi == lo:
            return np.full(scores.shape, 0.5)
        return np.clip((scores - lo) / (hi - lo), 0.0, 1.0)

    return (
        replace(val, norm_scores=_norm(val.raw_scores)),
        replace(test, norm_scores=_norm(test.raw_scores)),
    )
