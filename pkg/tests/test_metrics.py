import numpy as np
import pytest

from osr_bench import (
    DEFAULT_GRID,
    ConfigError,
    EmptySplitError,
    ScoredSet,
    ScoreMethod,
    normalize_scores,
    oosa_at,
    oosa_table,
    oscr_curve,
)
from conftest import random_scored
import oracles


def make_scored(true_labels, preds, scores, normalized=True):
    scores = np.asarray(scores, dtype=np.float64)
    return ScoredSet(
        method=ScoreMethod("msp"),
        sample_ids=np.arange(len(scores), dtype=np.int64),
        true_labels=np.asarray(true_labels, dtype=np.int64),
        pred_classes=np.asarray(preds, dtype=np.int64),
        raw_scores=scores,
        norm_scores=scores.copy() if normalized else None,
    )


# --- oosa_at ---


def test_oosa_four_case_hand_example():
    # known-correct 0.9, known-wrong 0.8, unknown 0.3, unknown 0.7
    scored = make_scored([1, 2, -1, -1], [1, 0, 0, 0], [0.9, 0.8, 0.3, 0.7])
    assert oosa_at(scored, 0.5) == 0.5


def test_oosa_accept_all_endpoint():
    scored = make_scored([0, 1, -1], [0, 0, 1], [0.2, 0.9, 0.4])
    # tau = 0 accepts everything: only correctly classified knowns count.
    assert oosa_at(scored, 0.0) == pytest.approx(1 / 3)


def test_oosa_reject_all_endpoint():
    scored = make_scored([0, 1, -1, -1], [0, 1, 0, 0], [0.2, 0.9, 0.4, 0.1])
    # tau above every score rejects everything: only unknowns count.
    assert oosa_at(scored, 1.5) == 0.5


def test_oosa_empty_set_rejected():
    scored = make_scored([], [], [])
    with pytest.raises(EmptySplitError):
        oosa_at(scored, 0.5)


def test_oosa_requires_normalized():
    scored = make_scored([0], [0], [0.5], normalized=False)
    with pytest.raises(ValueError):
        oosa_at(scored, 0.5)


def test_oosa_boundary_is_accept(rng):
    # score exactly at tau is accepted (>= tau).
    scored = make_scored([0], [0], [0.7])
    assert oosa_at(scored, 0.7) == 1.0


def test_oosa_matches_recount(rng):
    for _ in range(50):
        scored = random_scored(rng, int(rng.integers(2, 60)))
        tau = float(rng.random())
        expected = oracles.oosa_oracle(
            scored.true_labels, scored.pred_classes, scored.norm_scores, tau
        )
        assert oosa_at(scored, tau) == expected


def test_oosa_piecewise_constant_between_scores(rng):
    scored = random_scored(rng, 30)
    scores = np.unique(scored.norm_scores)
    gaps = (scores[:-1] + scores[1:]) / 2
    for low, mid, high in zip(scores[:-1], gaps, scores[1:]):
        inside = low + 0.25 * (high - low), mid, low + 0.75 * (high - low)
        values = {oosa_at(scored, t) for t in inside}
        assert len(values) == 1


# --- oosa_table ---


def test_default_grid_is_eleven_tenths():
    assert list(DEFAULT_GRID) == [i / 10 for i in range(11)]
    assert len(DEFAULT_GRID) == 11
    assert DEFAULT_GRID[0] == 0.0
    assert DEFAULT_GRID[-1] == 1.0


def test_tau_star_tie_breaks_low(rng):
    # Validation OOSA identical at every threshold in (0.3, 0.4]; the tie
    # must resolve to the smaller grid value.
    val = make_scored([0, -1], [0, 0], [0.35, 0.34])
    test = make_scored([0, -1], [0, 0], [0.9, 0.1])
    table = oosa_table(val, test, [0.3, 0.4])
    v30 = oosa_at(val, 0.3)
    v40 = oosa_at(val, 0.4)
    assert v30 == v40  # genuine tie by construction
    assert table.tau_star == 0.3


def test_oosa_table_matches_recount(rng):
    for _ in range(20):
        val = random_scored(rng, int(rng.integers(5, 50)))
        test = random_scored(rng, int(rng.integers(5, 50)))
        table = oosa_table(val, test, DEFAULT_GRID)
        for tau, o_test, o_val in zip(table.thresholds, table.oosa, table.oosa_val):
            assert o_test == oracles.oosa_oracle(
                test.true_labels, test.pred_classes, test.norm_scores, float(tau)
            )
            assert o_val == oracles.oosa_oracle(
                val.true_labels, val.pred_classes, val.norm_scores, float(tau)
            )
        assert table.tau_star in table.thresholds
        best = table.oosa_val.max()
        assert oosa_at(val, table.tau_star) == best


def test_oosa_table_validates_grid(rng):
    val = random_scored(rng, 10)
    test = random_scored(rng, 10)
    with pytest.raises(ConfigError):
        oosa_table(val, test, [])
    with pytest.raises(ConfigError):
        oosa_table(val, test, [0.5, 0.1])
    with pytest.raises(ConfigError):
        oosa_table(val, test, [0.0, 1.5])


# --- oscr_curve ---


def test_oscr_perfect_separation():
    scored = make_scored(
        [0, 1, 2, -1, -1], [0, 1, 2, 0, 0], [0.9, 0.8, 0.7, 0.2, 0.1]
    )
    curve = oscr_curve(scored)
    assert curve.auoscr == pytest.approx(1.0, abs=1e-12)


def test_oscr_all_knowns_wrong():
    scored = make_scored([0, 1, -1], [1, 0, 0], [0.9, 0.8, 0.1])
    curve = oscr_curve(scored)
    assert curve.ccr.max() == 0.0
    assert curve.auoscr == 0.0


def test_oscr_needs_both_populations():
    with pytest.raises(EmptySplitError):
        oscr_curve(make_scored([0, 1], [0, 1], [0.5, 0.6]))
    with pytest.raises(EmptySplitError):
        oscr_curve(make_scored([-1, -1], [0, 1], [0.5, 0.6]))


def test_oscr_six_sample_hand_case_matches_naive():
    scored = make_scored(
        [0, 0, 1, -1, -1, 1],
        [0, 1, 1, 0, 1, 1],
        [0.9, 0.6, 0.6, 0.5, 0.3, 0.2],
    )
    curve = oscr_curve(scored)
    fpr, ccr, area = oracles.oscr_oracle(
        scored.true_labels, scored.pred_classes, scored.raw_scores
    )
    assert curve.fpr.tolist() == fpr
    assert curve.ccr.tolist() == ccr
    assert curve.auoscr == area


def test_oscr_matches_naive_random(rng):
    for _ in range(25):
        scored = random_scored(rng, int(rng.integers(4, 40)))
        curve = oscr_curve(scored)
        fpr, ccr, area = oracles.oscr_oracle(
            scored.true_labels, scored.pred_classes, scored.raw_scores
        )
        assert curve.fpr.tolist() == fpr
        assert curve.ccr.tolist() == ccr
        assert curve.auoscr == area


def test_oscr_fpr_monotone_and_ccr_bounded(rng):
    for _ in range(25):
        scored = random_scored(rng, 50)
        curve = oscr_curve(scored)
        assert (np.diff(curve.fpr) >= 0).all()
        known = scored.true_labels >= 0
        closed_set = (
            (scored.pred_classes[known] == scored.true_labels[known]).sum()
            / known.sum()
        )
        assert curve.ccr.max() <= closed_set + 1e-15
        assert curve.fpr[0] == 0.0 and curve.ccr[0] == 0.0
        assert curve.fpr[-1] == 1.0
        assert curve.ccr[-1] == pytest.approx(closed_set)


def test_auoscr_recomputable_from_points(rng):
    scored = random_scored(rng, 60)
    curve = oscr_curve(scored)
    area = 0.0
    for i in range(1, len(curve.fpr)):
        area += (curve.fpr[i] - curve.fpr[i - 1]) * (curve.ccr[i] + curve.ccr[i - 1]) / 2
    assert curve.auoscr == pytest.approx(area, abs=1e-15)


def test_auoscr_invariant_under_monotone_transforms(rng):
    for _ in range(30):
        scored = random_scored(rng, 40)
        base = oscr_curve(scored).auoscr
        import dataclasses

        affine = dataclasses.replace(scored, raw_scores=2.0 * scored.raw_scores + 1.0)
        squashed = dataclasses.replace(scored, raw_scores=np.tanh(scored.raw_scores))
        assert abs(oscr_curve(affine).auoscr - base) <= 1e-12
        assert abs(oscr_curve(squashed).auoscr - base) <= 1e-12


def test_metrics_permutation_invariant(rng):
    scored = random_scored(rng, 40)
    perm = rng.permutation(40)
    import dataclasses

    shuffled = dataclasses.replace(
        scored,
        sample_ids=scored.sample_ids[perm],
        true_labels=scored.true_labels[perm],
        pred_classes=scored.pred_classes[perm],
        raw_scores=scored.raw_scores[perm],
        norm_scores=scored.norm_scores[perm],
        flags=scored.flags[perm],
    )
    assert oosa_at(shuffled, 0.4) == oosa_at(scored, 0.4)
    assert oscr_curve(shuffled).auoscr == oscr_curve(scored).auoscr


# --- normalize_scores ---


def norm_pair(val_raw, test_raw):
    val = make_scored([0] * len(val_raw), [0] * len(val_raw), val_raw, normalized=False)
    test = make_scored([0] * len(test_raw), [0] * len(test_raw), test_raw, normalized=False)
    return normalize_scores(val, test)


def test_normalize_linear_interpolation():
    _, test = norm_pair([1.0, 3.0], [2.0])
    assert test.norm_scores[0] == 0.5


def test_normalize_clamps_test():
    _, test = norm_pair([1.0, 3.0], [10.0, -5.0])
    assert test.norm_scores.tolist() == [1.0, 0.0]


def test_normalize_degenerate_val():
    val, test = norm_pair([2.0, 2.0], [1.0, 2.0, 3.0])
    assert val.norm_scores.tolist() == [0.5, 0.5]
    assert test.norm_scores.tolist() == [0.5, 0.5, 0.5]


def test_normalize_val_spans_unit_interval(rng):
    raw = rng.normal(size=20)
    val, _ = norm_pair(raw, raw)
    assert val.norm_scores.min() == 0.0
    assert val.norm_scores.max() == 1.0


def test_normalize_preserves_ranks(rng):
    raw_val = rng.random(15)
    raw_test = rng.random(25)
    val, test = norm_pair(raw_val, raw_test)
    # Clamping can tie extremes, but cannot reorder.
    order_raw = np.argsort(raw_test, kind="stable")
    assert (np.diff(test.norm_scores[order_raw]) >= 0).all()
    assert np.array_equal(
        np.argsort(val.norm_scores, kind="stable"), np.argsort(raw_val, kind="stable")
    )


def test_normalize_empty_val_rejected():
    with pytest.raises(EmptySplitError):
        norm_pair([], [1.0])


def test_normalize_leaves_raw_untouched(rng):
    raw = rng.normal(size=10)
    val, test = norm_pair(raw, raw * 2)
    assert np.array_equal(test.raw_scores, raw * 2)
