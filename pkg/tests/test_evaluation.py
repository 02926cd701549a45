import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from foenet.evaluation import (
    ACCEPT_RULE,
    SystemScores,
    compare_systems,
    det_curve,
    eer,
    evaluate_by_scenario,
    far,
    frr,
    frr_at_far,
    relative_reduction,
)
from foenet.exceptions import (
    DegenerateClasses,
    InvalidParameter,
    MismatchedTrialSets,
    NoImposterTrials,
    NoTargetTrials,
)
from foenet.numerics import seeded_rng

from eer_oracle import brute_force_eer


def test_far_examples():
    s, y = [0.2, 0.7, 0.9], [0, 0, 1]
    assert far(s, y, 0.5) == 0.5
    assert far(s, y, 0.95) == 0.0
    assert far(s, y, 0.2) == 1.0


def test_frr_examples():
    s, y = [0.9, 0.4, 0.1], [1, 1, 0]
    assert frr(s, y, 0.5) == 0.5
    assert frr(s, y, 0.0) == 0.0
    assert frr(s, y, 0.95) == 1.0


def test_missing_class_errors():
    with pytest.raises(NoImposterTrials):
        far([0.5], [1], 0.1)
    with pytest.raises(NoTargetTrials):
        frr([0.5], [0], 0.1)
    with pytest.raises(DegenerateClasses):
        eer([0.1, 0.2], [1, 1])
    with pytest.raises(InvalidParameter):
        eer([0.1, np.nan], [1, 0])


def test_eer_examples():
    rate, _ = eer([0.9, 0.8, 0.3, 0.7, 0.2, 0.1], [1, 1, 1, 0, 0, 0])
    assert rate == pytest.approx(1 / 3, abs=1e-12)
    assert eer([0.6, 0.9, 0.1, 0.4], [1, 1, 0, 0])[0] == 0.0
    assert eer([0.3, 0.5, 0.3, 0.5], [1, 1, 0, 0])[0] == 0.5


def test_eer_threshold_lies_between_classes():
    rate, thr = eer([0.6, 0.9, 0.1, 0.4], [1, 1, 0, 0])
    assert rate == 0 and 0.4 <= thr <= 0.6


def test_eer_matches_brute_force():
    rng = seeded_rng(0)
    for _ in range(200):
        n = int(rng.integers(2, 51))
        labels = rng.integers(0, 2, n)
        labels[:2] = [0, 1]
        # coarse grid forces ties
        scores = np.round(rng.random(n), int(rng.integers(1, 4)))
        assert abs(eer(scores, labels)[0] - float(brute_force_eer(scores.tolist(), labels.tolist()))) <= 1e-9


@given(st.lists(st.tuples(st.floats(0, 1), st.integers(0, 1)), min_size=2, max_size=50))
def test_det_sweep_is_monotone(pairs):
    scores, labels = map(np.array, zip(*pairs))
    if len(set(labels)) < 2:
        return
    c = det_curve(scores, labels)
    assert np.all(np.diff(c.far) <= 0) and np.all(np.diff(c.frr) >= 0)
    assert (c.far[0], c.frr[0], c.far[-1], c.frr[-1]) == (1, 0, 0, 1)
    for t, a, r in zip(c.thresholds, c.far, c.frr):
        assert a == far(scores, labels, t) and r == frr(scores, labels, t)


def test_ties_move_together():
    c = det_curve([0.5, 0.5, 0.5, 0.2], [1, 0, 0, 0])
    # no threshold splits the three tied trials
    assert set(zip(c.far.tolist(), c.frr.tolist())) == {(1, 0), (2 / 3, 0), (0, 1)}


def test_frr_at_far_hand_made():
    imposters = [0.05, 0.1, 0.2, 0.3, 0.45, 0.5, 0.65, 0.8]
    targets = [0.4, 0.5, 0.55, 0.6, 0.7, 0.75, 0.85, 0.95]
    scores = imposters + targets
    labels = [0] * 8 + [1] * 8
    r, t, achieved = frr_at_far(scores, labels, 0.125)
    assert sum(s >= t for s in imposters) == 1 and achieved == 0.125
    assert t == 0.7 and r == 4 / 8


def test_frr_at_far_boundaries():
    rng = seeded_rng(1)
    s = rng.random(40)
    y = np.repeat([0, 1], 20)
    r, t, achieved = frr_at_far(s, y, 0.999)
    # FAR is 1 at the lowest imposter score, so tau is the next distinct score
    assert t == s[s > s[y == 0].min()].min()
    assert r == np.mean(s[y == 1] < t) and r <= 0.05
    sep = np.concatenate([rng.random(20) * 0.4, 0.6 + rng.random(20) * 0.4])
    for f in (0.008, 0.05, 0.5):
        assert frr_at_far(sep, y, f)[0] == 0.0
    with pytest.raises(InvalidParameter):
        frr_at_far(s, y, 0.0)


@given(st.lists(st.tuples(st.floats(0, 1), st.integers(0, 1)), min_size=2, max_size=50),
       st.floats(0.001, 0.999))
def test_frr_at_far_is_conservative_and_optimal(pairs, target):
    scores, labels = map(np.array, zip(*pairs))
    if len(set(labels)) < 2:
        return
    r, t, achieved = frr_at_far(scores, labels, target)
    assert achieved <= target and achieved == far(scores, labels, t)
    c = det_curve(scores, labels)
    admissible = c.far <= target
    assert r == c.frr[admissible].min()


def test_relative_reduction():
    assert relative_reduction(0.2, 0.1) == pytest.approx(0.5)
    assert relative_reduction(0.2, 0.2) == 0.0
    assert relative_reduction(0.0, 0.0) == 0.0
    assert relative_reduction(0.0, 0.1) is None


def _system(seed, trials=60, applicable=("both_present", "td_absent", "ti_absent")):
    rng = seeded_rng(seed)
    labels = np.tile([0, 1], trials // 2)
    scenarios = np.repeat(["both_present", "td_absent", "ti_absent"], trials // 3)
    scores = np.clip(0.5 + 0.3 * (labels - 0.5) + rng.normal(0, 0.2, trials), 0, 1)
    return SystemScores(scores, labels, scenarios, [f"t{i}" for i in range(trials)], applicable)


def test_compare_identical_systems_is_zero():
    a = _system(0)
    report = compare_systems({"foenet": a, "af": a}, ["af"])
    for cells in report.reductions["af"].values():
        assert all(v == 0.0 for v in cells.values())


def test_compare_marks_inapplicable_scenarios():
    report = compare_systems({"foenet": _system(0),
                              "cosine": _system(1, applicable=("both_present", "td_absent"))},
                             ["cosine"])
    assert set(report.reductions["cosine"]["ti_absent"].values()) == {"n/a"}
    assert "ti_absent" not in report.systems["cosine"]
    csv_rows = report.to_csv().splitlines()
    assert csv_rows[0] == "scenario,comparison,0.8%,2%,5%,12.5%"
    assert "ti_absent,foenet vs cosine,n/a,n/a,n/a,n/a" in csv_rows


def test_compare_rejects_different_trials():
    b = _system(1)
    b.trial_ids[0] = "other"
    with pytest.raises(MismatchedTrialSets):
        compare_systems({"foenet": _system(0), "af": b}, ["af"])


def test_report_json_layout():
    report = compare_systems({"foenet": _system(0), "sf": _system(2)}, ["sf"], with_det=True)
    doc = json.loads(report.to_json())
    assert doc["accept_rule"] == ACCEPT_RULE
    cell = doc["systems"]["foenet"]["both_present"]["frr_at_far"]["0.05"]
    assert set(cell) == {"frr", "threshold", "achieved_far"}
    assert doc["systems"]["foenet"]["td_absent"]["det"][0]["threshold"] == "-inf"
    assert set(doc["relative_frr_reduction"]["sf"]) == {"both_present", "td_absent", "ti_absent"}


def test_scenario_sections_follow_the_data():
    s = _system(0)
    keep = s.scenarios == "both_present"
    out = evaluate_by_scenario(s.scores[keep], s.labels[keep], s.scenarios[keep])
    assert list(out) == ["both_present"]
    assert len(out["both_present"].frr_at_far) == 4
