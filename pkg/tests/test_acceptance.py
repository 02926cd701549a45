"""Acceptance criteria, one ``test_criterion_<n>_*`` family per criterion.

The terminal summary prints one PASS/FAIL line per criterion number. The
learning criteria (6 to 8) run on the default synthetic dataset for data
seeds 0, 1 and 2 and compare medians over those seeds.
"""

import dataclasses
import time

import numpy as np
import pytest

from foenet import model
from foenet.comparison import fit_and_score
from foenet.data import (SynthConfig, apply_scenario_mask, make_datasets, pack, save_trials,
                         to_arrays)
from foenet.estimators import FoenetClassifier, load_system
from foenet.evaluation import compare_systems, det_curve, eer, evaluate_scores
from foenet.model import forward_trial, load_checkpoint, save_checkpoint, score
from foenet.numerics import seeded_rng
from foenet.training import grad_check_suite

from eer_oracle import brute_force_eer

SEEDS = (0, 1, 2)
TREND_FARS = (0.02, 0.05, 0.125)


# ---------------------------------------------------------------------------
# 1-5: exactness properties
# ---------------------------------------------------------------------------


def test_criterion_1_gradients_match_finite_differences():
    t0 = time.perf_counter()
    reports = grad_check_suite(seeds=range(10), td_dim=8, ti_dim=8, k=8, h=1e-5, tol=1e-4)
    elapsed = time.perf_counter() - t0
    worst = max(r.max_rel_error for r in reports.values())
    print(f"max relative error {worst:.2e} over {len(reports)} seeds in {elapsed:.2f}s")
    assert all(r.ok for r in reports.values()), {s: r.violations[:3] for s, r in reports.items()}
    assert elapsed < 10


def test_criterion_2_forward_matches_reference(fixture_model, fixture_trials, fixture_expected):
    assert len(fixture_trials) == 100
    assert {t.scenario for t in fixture_trials} >= {"both_present", "td_absent", "ti_absent"}
    t0 = time.perf_counter()
    got = np.array([forward_trial(fixture_model, t) for t in fixture_trials])
    elapsed = time.perf_counter() - t0
    want = np.array([fixture_expected[t.trial_id] for t in fixture_trials])
    assert np.max(np.abs(got - want)) <= 1e-9
    assert elapsed < 1


def test_criterion_3_eer_matches_brute_force():
    rng = seeded_rng(2024)
    t0 = time.perf_counter()
    for _ in range(200):
        n = int(rng.integers(2, 51))
        labels = np.zeros(n, dtype=int)
        labels[rng.choice(n, size=int(rng.integers(1, n)), replace=False)] = 1
        # coarse grids make ties common
        scores = np.round(rng.random(n), int(rng.integers(1, 4)))
        want = float(brute_force_eer(scores.tolist(), labels.tolist()))
        assert abs(eer(scores, labels)[0] - want) <= 1e-9
    assert time.perf_counter() - t0 < 5


@pytest.mark.parametrize("scenario", ["td_absent", "td_profile_absent", "ti_absent"])
def test_criterion_4_masked_side_is_ignored(fixture_model, scenario):
    cfg = SynthConfig(n_speakers=40, n_test_speakers=0, td_dim=8, ti_dim=8,
                      utterances_per_speaker=14, test_per_speaker=4)
    train, _, _ = make_datasets(cfg, seed=5)
    rng = seeded_rng(9)
    picked = [train[i] for i in rng.choice(len(train), size=100, replace=False)]
    t0 = time.perf_counter()
    batch = to_arrays([apply_scenario_mask(t, scenario) for t in picked])
    ref = score(fixture_model, batch)
    side = "td" if scenario.startswith("td") else "ti"
    shape = getattr(batch, f"spk_{side}").shape
    noisy = dataclasses.replace(batch, **{f"spk_{side}": rng.normal(0, 100, shape),
                                          f"u_{side}": rng.normal(0, 100, shape)})
    assert np.array_equal(score(fixture_model, noisy), ref)
    assert time.perf_counter() - t0 < 1


def test_criterion_5_substitution_exclusivity(fixture_model, fixture_trials):
    # the check runs inside every forward pass of the suite; make sure it is live
    assert model.CHECK_SUBSTITUTION
    before = model.substitution_checks
    score(fixture_model, to_arrays(fixture_trials))
    assert model.substitution_checks > before


# ---------------------------------------------------------------------------
# 6-8: learning behaviour on the default synthetic dataset
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def default_runs():
    """Per data seed: fitted systems and their test scores."""
    runs = {}
    t0 = time.perf_counter()
    for seed in SEEDS:
        train, valid, test = make_datasets(SynthConfig(), seed)
        scores, fitted = fit_and_score(["foenet", "cosine", "af", "sf", "esf"],
                                       train, valid, test, seed)
        runs[seed] = dict(train=train, valid=valid, test=test, scores=scores, fitted=fitted)
    runs["elapsed"] = time.perf_counter() - t0
    return runs


def _cosine_valid_eer(fitted, valid):
    va = to_arrays(valid)
    s = fitted["cosine"].decision_function(pack(va))
    keep = np.isfinite(s)
    return eer(s[keep], va.labels[keep])[0]


def test_criterion_6_foenet_beats_cosine_on_validation(default_runs):
    ours, ref = [], []
    for seed in SEEDS:
        run = default_runs[seed]
        ours.append(run["fitted"]["foenet"].report_.best_eer)
        ref.append(_cosine_valid_eer(run["fitted"], run["valid"]))
    print(f"foenet valid EER {ours}  cosine valid EER {ref}")
    assert all(len(default_runs[s]["fitted"]["foenet"].report_.epochs) <= 50 for s in SEEDS)
    assert np.median(ours) < np.median(ref)


def _frr_table(default_runs, systems, scenarios, fars):
    """{(system, scenario, far): median FRR over seeds}."""
    table = {}
    per_seed = [compare_systems(default_runs[s]["scores"], [], "foenet", fars)
                for s in SEEDS]
    for name in systems:
        for tag in scenarios:
            for f in fars:
                vals = [rep.systems[name][tag].frr_at_far[f]["frr"] for rep in per_seed]
                table[name, tag, f] = float(np.median(vals))
    return table


def test_criterion_7_foenet_beats_af_and_sf(default_runs):
    table = _frr_table(default_runs, ("foenet", "af", "sf"), ("both_present", "td_absent"),
                       TREND_FARS)
    losses = [(tag, f, base, table["foenet", tag, f], table[base, tag, f])
              for tag in ("both_present", "td_absent") for f in TREND_FARS
              for base in ("af", "sf") if not table["foenet", tag, f] < table[base, tag, f]]
    print(f"cells where foenet FRR is not lower: {losses}")
    assert not losses
    assert default_runs["elapsed"] < 15 * 60


def _relative_gap(a, b):
    hi = max(a, b)
    return 0.0 if hi == 0 else abs(a - b) / hi


def test_criterion_7_esf_tracks_sf(default_runs):
    gaps = []
    for tag in ("both_present", "td_absent"):
        for f in TREND_FARS:
            per_seed = []
            for s in SEEDS:
                rep = compare_systems(default_runs[s]["scores"], [], "esf", (f,))
                per_seed.append(_relative_gap(rep.systems["esf"][tag].frr_at_far[f]["frr"],
                                              rep.systems["sf"][tag].frr_at_far[f]["frr"]))
            gaps.append(float(np.median(per_seed)))
    print(f"median |E-SF vs SF| relative FRR gaps {np.round(gaps, 3).tolist()}")
    assert np.median(gaps) < 0.10


def test_criterion_8_same_gender_negatives_do_not_hurt(default_runs):
    same, rand = [], []
    for seed in SEEDS:
        run = default_runs[seed]
        test = [t for t in run["test"] if t.scenario == "both_present"]
        te = to_arrays(test)
        same_est = run["fitted"]["foenet"]
        r_train, r_valid, _ = make_datasets(SynthConfig(negative_strategy="random"), seed)
        tr, va = to_arrays(r_train), to_arrays(r_valid)
        rand_est = FoenetClassifier(td_dim=tr.td_dim, random_state=seed).fit(
            pack(tr), tr.labels, eval_set=(pack(va), va.labels))
        for est, out in ((same_est, same), (rand_est, rand)):
            res = evaluate_scores(est.decision_function(pack(te)), te.labels, (0.05,), False)
            out.append(res.frr_at_far[0.05]["frr"])
    print(f"FRR@5% same-gender {same}  random-gender {rand}")
    assert np.median(same) <= np.median(rand)


# ---------------------------------------------------------------------------
# 9-10: reproducibility and evaluation invariants
# ---------------------------------------------------------------------------


def test_criterion_9_datasets_checkpoints_reports_are_reproducible(tmp_path, small_cfg):
    blobs = []
    for run in ("a", "b"):
        d = tmp_path / run
        d.mkdir()
        train, valid, test = make_datasets(small_cfg, seed=21)
        for name, trials in (("train", train), ("valid", valid), ("test", test)):
            save_trials(d / f"{name}.jsonl", trials)
        scores, fitted = fit_and_score(["foenet", "af", "sf", "esf"], train, valid, test, 21,
                                       None)
        fitted["foenet"].save(d / "model.json")
        report = compare_systems(scores, ["af", "sf", "esf"])
        (d / "report.json").write_text(report.to_json())
        (d / "report.csv").write_text(report.to_csv())
        blobs.append({p.name: p.read_bytes() for p in sorted(d.iterdir())})
    assert blobs[0] == blobs[1]


def test_criterion_9_checkpoint_round_trip_is_exact(tmp_path, fixture_model, fixture_trials,
                                                    fixture_expected):
    save_checkpoint(fixture_model, tmp_path / "m.json")
    loaded = load_checkpoint(tmp_path / "m.json")
    before = [forward_trial(fixture_model, t) for t in fixture_trials]
    after = [forward_trial(loaded, t) for t in fixture_trials]
    assert before == after
    est = load_system(tmp_path / "m.json")
    assert np.array_equal(score(est.params_, to_arrays(fixture_trials)),
                          score(fixture_model, to_arrays(fixture_trials)))
    assert max(abs(a - fixture_expected[t.trial_id]) for a, t in zip(after, fixture_trials)) <= 1e-9


def test_criterion_10_sweeps_are_monotone_and_fars_respected(default_runs):
    for seed in SEEDS:
        scores = default_runs[seed]["scores"]
        report = compare_systems(scores, [n for n in scores if n != "foenet"],
                                 target_fars=(0.008, 0.02, 0.05, 0.125))
        for name, per in report.systems.items():
            r = scores[name]
            for tag, res in per.items():
                keep = (r.scenarios == tag)
                curve = det_curve(r.scores[keep], r.labels[keep])
                assert np.all(np.diff(curve.far) <= 0) and np.all(np.diff(curve.frr) >= 0)
                assert np.all(np.diff(curve.thresholds) > 0)
                for f, cell in res.frr_at_far.items():
                    assert cell["achieved_far"] <= f, (name, tag, f, cell)
