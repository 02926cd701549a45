import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from foenet.baselines import (
    AF_ANCHOR_FARS,
    PLACEHOLDER,
    EsfRegressors,
    PiecewiseMap,
    SfConfig,
    SubsystemScore,
    af_score,
    af_scores,
    build_af_calibration,
    calibration_from_scores,
    esf_fill,
    esf_fit_regressors,
    esf_score,
    fit_tanh_regressor,
    sf_forward,
    sf_gradients,
    sf_init,
    sf_inputs,
    sf_score,
    sf_train,
    subsystem_score,
    subsystem_scores,
)
from foenet.evaluation import eer
from foenet.exceptions import (
    DegenerateCalibration,
    InvalidParameter,
    MissingCalibration,
    ZeroVector,
)
from foenet.numerics import seeded_rng

unit = st.floats(0, 1)


@pytest.mark.parametrize("a, b, expected", [
    ([1, 2, 3], [1, 2, 3], 1.0), ([1, 0], [0, 5], 0.5), ([1, -2], [-1, 2], 0.0),
])
def test_subsystem_score_examples(a, b, expected):
    s = subsystem_score(a, b)
    assert s.value == pytest.approx(expected, abs=1e-15) and s.present


def test_subsystem_score_zero_vector():
    with pytest.raises(ZeroVector):
        subsystem_score([0, 0], [1, 1])


def test_batch_subsystem_scores_match_single(small_arrays):
    test = small_arrays[2]
    s_td, s_ti = subsystem_scores(test)
    assert np.all(np.isnan(s_td) == ~test.td_ok) and np.all(np.isnan(s_ti) == ~test.ti_ok)
    i = int(np.flatnonzero(test.td_ok)[0])
    assert s_td[i] == pytest.approx(subsystem_score(test.spk_td[i], test.u_td[i]).value, abs=1e-15)
    ok = ~np.isnan(s_ti)
    assert np.all((s_ti[ok] >= 0) & (s_ti[ok] <= 1))


def test_af_examples():
    assert af_score((0.4, True), (0.6, True)) == pytest.approx(0.5)
    identity = PiecewiseMap([0, 1], [0, 1])
    assert af_score((0.7, True), (0.0, False), identity) == pytest.approx(0.7)
    m = PiecewiseMap([0.2, 0.8], [0.1, 0.9])
    assert af_score((0.5, True), (0.0, False), m) == pytest.approx(0.5)
    with pytest.raises(MissingCalibration):
        af_score((0.5, True), (0.0, False))
    with pytest.raises(InvalidParameter):
        af_score((0.5, False), (0.0, False), identity)


@given(unit, unit)
def test_af_is_symmetric(a, b):
    assert af_score(SubsystemScore(a), SubsystemScore(b)) == af_score(SubsystemScore(b), SubsystemScore(a))


def test_piecewise_map_clamps_and_validates():
    m = PiecewiseMap([0.2, 0.8], [-0.5, 1.5])
    assert m(0.0) == 0.0 and m(1.0) == 1.0
    np.testing.assert_allclose(m(np.array([0.2, 0.5])), [0.0, 0.5], atol=1e-15)
    with pytest.raises(InvalidParameter):
        PiecewiseMap([0.5, 0.5], [0, 1])
    with pytest.raises(InvalidParameter):
        PiecewiseMap([0.1], [0.1, 0.2])


@given(st.lists(unit, min_size=2, max_size=8, unique=True), st.lists(unit, min_size=8, max_size=8))
def test_piecewise_map_monotone_for_monotone_anchors(xs, ys):
    xs, ys = sorted(xs), sorted(ys[:len(xs)])
    grid = np.linspace(-0.5, 1.5, 101)
    assert np.all(np.diff(PiecewiseMap(xs, ys)(grid)) >= 0)


def test_self_calibration_is_identity():
    rng = seeded_rng(0)
    labels = np.repeat([0, 1], 200)
    single = np.concatenate([rng.beta(2, 5, 200), rng.beta(5, 2, 200)])
    m = calibration_from_scores(single, single, labels)
    np.testing.assert_array_equal(m.x, m.y)
    assert len(m.x) == len(AF_ANCHOR_FARS)


def test_single_anchor_on_hand_made_set():
    single = np.array([0.1, 0.2, 0.3, 0.4, 0.5, 0.5, 0.6, 0.7, 0.8, 0.9])
    labels = np.array([0] * 5 + [1] * 5)
    fused = 0.5 * single + 0.25
    # brute force: smallest candidate threshold admitting at most half the imposters
    cands = np.unique(single)
    tau = min(t for t in cands if np.mean(single[labels == 0] >= t) <= 0.5)
    m = calibration_from_scores(single, fused, labels, target_fars=(0.5,))
    assert m.x.tolist() == [tau] and m.y.tolist() == [0.5 * tau + 0.25]
    assert m(0.0) == m(1.0) == 0.5 * tau + 0.25


def test_default_anchor_count(small_arrays):
    m = build_af_calibration(small_arrays[0], "td")
    assert 1 <= len(m.x) <= 6
    big = small_arrays[2].subset(np.flatnonzero(small_arrays[2].scenarios == "both_present"))
    assert len(build_af_calibration(big, "ti").x) == 6


def test_calibration_degenerate_cases(small_arrays):
    with pytest.raises(DegenerateCalibration):
        calibration_from_scores(np.ones(4), np.arange(4.0), np.array([0, 1, 0, 1]))
    test = small_arrays[2]
    only_td_absent = test.subset(np.flatnonzero(test.scenarios == "td_absent"))
    with pytest.raises(DegenerateCalibration):
        build_af_calibration(only_td_absent, "ti")


def test_af_scores_use_maps_only_for_single_side(small_arrays):
    tr, _, test = small_arrays
    m_td, m_ti = build_af_calibration(tr, "td"), build_af_calibration(tr, "ti")
    s = af_scores(test, m_td, m_ti)
    s_td, s_ti = subsystem_scores(test)
    both = test.scenarios == "both_present"
    np.testing.assert_array_equal(s[both], (s_td[both] + s_ti[both]) / 2)
    ti_only = test.scenarios == "td_absent"
    np.testing.assert_array_equal(s[ti_only], m_ti(s_ti[ti_only]))
    assert np.all((s >= 0) & (s <= 1))


def test_sf_placeholder_input():
    x = sf_inputs(np.array([0.7, np.nan]), np.array([np.nan, 0.2]))
    assert x.tolist() == [[0.7, PLACEHOLDER], [PLACEHOLDER, 0.2]]


def test_sf_zero_network_scores_half():
    p = {k: np.zeros_like(v) for k, v in sf_init(8, seeded_rng(0)).items()}
    assert sf_score(p, 0.9, None) == 0.5
    assert sf_score(p, None, None) == 0.5


def test_sf_both_placeholders_is_valid():
    s = sf_score(sf_init(8, seeded_rng(1)), None, None)
    assert 0 < s < 1


def test_sf_gradients_match_finite_differences():
    rng = seeded_rng(2)
    p = sf_init(4, rng)
    p["b1"] = rng.normal(size=4)
    x = rng.uniform(-1, 1, (10, 2))
    labels = rng.integers(0, 2, 10).astype(float)

    def loss(q):
        y = sf_forward(q, x)[0]
        return -np.mean(labels * np.log(y) + (1 - labels) * np.log(1 - y))

    y, cache = sf_forward(p, x)
    g = sf_gradients(p, cache, y, labels)
    h = 1e-6
    for name, value in p.items():
        for idx in np.ndindex(np.shape(value)):
            up = {k: np.array(v, dtype=float) for k, v in p.items()}
            down = {k: np.array(v, dtype=float) for k, v in p.items()}
            up[name][idx] += h
            down[name][idx] -= h
            assert g[name][idx] == pytest.approx((loss(up) - loss(down)) / (2 * h), abs=1e-7)


def test_sf_training_improves_eer():
    rng = seeded_rng(3)
    labels = np.repeat([0.0, 1.0], 300)
    s_td = np.clip(0.4 + 0.2 * labels + rng.normal(0, 0.08, 600), 0, 1)
    s_ti = np.clip(0.4 + 0.2 * labels + rng.normal(0, 0.08, 600), 0, 1)
    cfg = SfConfig(epochs=40, batch_size=64, seed=0)
    before = sf_forward(sf_init(cfg.hidden, seeded_rng(cfg.seed)), sf_inputs(s_td, s_ti))[0]
    after = sf_forward(sf_train(s_td, s_ti, labels, cfg), sf_inputs(s_td, s_ti))[0]
    assert eer(after, labels)[0] < eer(before, labels)[0]


def test_sf_init_rejects_zero_width():
    with pytest.raises(InvalidParameter):
        sf_init(0, seeded_rng(0))


def test_regressor_on_correlated_scores():
    x = seeded_rng(0).uniform(0.05, 0.95, 500)
    w, b = fit_tanh_regressor(x, x)
    pred = (np.tanh(w * x + b) + 1) / 2
    assert np.mean((pred - x) ** 2) < 1e-3


def test_zero_regressor_estimates_half():
    r = EsfRegressors(0.0, 0.0, 0.0, 0.0)
    assert r.estimate_td(0.9) == 0.5 and r.estimate_ti(0.1) == 0.5


def test_regressor_rejects_constant_inputs():
    with pytest.raises(DegenerateCalibration):
        fit_tanh_regressor(np.ones(10), np.linspace(0, 1, 10))


def test_esf_equals_sf_when_nothing_is_missing():
    p = sf_init(8, seeded_rng(4))
    r = EsfRegressors(1.3, -0.2, 0.7, 0.1)
    for a, b in [(0.1, 0.9), (0.5, 0.5), (1.0, 0.0)]:
        assert esf_score(r, p, a, b) == sf_score(p, a, b)


def test_esf_fills_missing_scores(small_arrays):
    s_td, s_ti = subsystem_scores(small_arrays[0])
    r = esf_fit_regressors(s_td, s_ti)
    a, b = esf_fill(r, np.array([np.nan, 0.4]), np.array([0.8, np.nan]))
    assert a[0] == r.estimate_td(0.8) and b[1] == r.estimate_ti(0.4)
    assert a[1] == 0.4 and b[0] == 0.8
