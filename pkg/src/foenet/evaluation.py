"""Verification error rates and comparison reports.

A trial is accepted iff ``score >= threshold``. FAR is the accepted fraction of
imposter (label 0) trials, FRR the rejected fraction of target (label 1)
trials. Trials with tied scores always cross a threshold together.
"""

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    DegenerateClasses,
    InvalidParameter,
    MismatchedTrialSets,
    NoImposterTrials,
    NoTargetTrials,
)

ACCEPT_RULE = "accept iff score >= threshold"
DEFAULT_TARGET_FARS = (0.008, 0.02, 0.05, 0.125)


def _split(scores, labels):
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise InvalidParameter("scores and labels must be 1-D and the same length")
    if not np.all(np.isfinite(scores)):
        raise InvalidParameter("scores must be finite")
    return scores[labels == 1], scores[labels == 0]


def far(scores, labels, threshold):
    _, imp = _split(scores, labels)
    if imp.size == 0:
        raise NoImposterTrials("FAR needs at least one imposter trial")
    return float(np.count_nonzero(imp >= threshold)) / imp.size


def frr(scores, labels, threshold):
    tar, _ = _split(scores, labels)
    if tar.size == 0:
        raise NoTargetTrials("FRR needs at least one target trial")
    return float(np.count_nonzero(tar < threshold)) / tar.size


@dataclass
class DetCurve:
    """FAR/FRR at every distinct threshold, in increasing threshold order.

    The first threshold is -inf (everything accepted), the last +inf.
    """

    thresholds: np.ndarray
    far: np.ndarray
    frr: np.ndarray

    def points(self):
        return [
            {"threshold": float(t), "far": float(a), "frr": float(r)}
            for t, a, r in zip(self.thresholds, self.far, self.frr)
        ]


def det_curve(scores, labels):
    tar, imp = _split(scores, labels)
    if tar.size == 0 or imp.size == 0:
        raise DegenerateClasses("need both target and imposter trials")
    uniq = np.unique(np.concatenate([tar, imp]))
    thresholds = np.concatenate([[-np.inf], uniq, [np.inf]])
    tar_sorted = np.sort(tar)
    imp_sorted = np.sort(imp)
    # count of scores strictly below each threshold
    n_tar_below = np.searchsorted(tar_sorted, thresholds, side="left")
    n_imp_below = np.searchsorted(imp_sorted, thresholds, side="left")
    far_ = (imp.size - n_imp_below) / imp.size
    frr_ = n_tar_below / tar.size
    return DetCurve(thresholds, far_, frr_)


def eer(scores, labels):
    """Equal error rate and the threshold where FAR and FRR cross.

    FAR and FRR are step functions of the threshold. The crossing is located
    between the last sweep point with FRR < FAR and the first with
    FRR >= FAR, and both rates are linearly interpolated between those two
    points.
    """
    curve = det_curve(scores, labels)
    diff = curve.frr - curve.far          # non-decreasing, -1 at -inf, +1 at +inf
    i = int(np.argmax(diff >= 0))
    if diff[i] == 0:
        return float(curve.far[i]), _finite(curve.thresholds, i)
    d0, d1 = diff[i - 1], diff[i]
    t = d0 / (d0 - d1)
    rate = curve.far[i - 1] + t * (curve.far[i] - curve.far[i - 1])
    lo, hi = curve.thresholds[i - 1], curve.thresholds[i]
    if np.isfinite(lo) and np.isfinite(hi):
        thr = lo + t * (hi - lo)
    else:
        thr = lo if np.isfinite(lo) else hi
    return float(rate), float(thr)


def _finite(thresholds, i):
    t = thresholds[i]
    if np.isfinite(t):
        return float(t)
    return float(thresholds[1] if t < 0 else thresholds[-2])


def frr_at_far(scores, labels, target_far):
    """FRR at the smallest threshold whose FAR does not exceed ``target_far``.

    Returns ``(frr, threshold, achieved_far)``.
    """
    if not 0 < target_far < 1:
        raise InvalidParameter(f"target FAR must be in (0, 1), got {target_far}")
    curve = det_curve(scores, labels)
    # FAR is non-increasing, so the admissible thresholds form a suffix
    i = int(np.argmax(curve.far <= target_far))
    return float(curve.frr[i]), float(curve.thresholds[i]), float(curve.far[i])


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


@dataclass
class ScenarioResult:
    n_target: int
    n_imposter: int
    eer: float
    eer_threshold: float
    frr_at_far: dict          # target FAR -> {"frr", "threshold", "achieved_far"}
    det: list = field(default_factory=list)

    def to_dict(self):
        return {
            "n_target": self.n_target,
            "n_imposter": self.n_imposter,
            "eer": self.eer,
            "eer_threshold": self.eer_threshold,
            "frr_at_far": {_far_key(k): v for k, v in self.frr_at_far.items()},
            "det": self.det,
        }


def _far_key(f):
    return repr(float(f))


def evaluate_scores(scores, labels, target_fars=DEFAULT_TARGET_FARS, with_det=True):
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    e, thr = eer(scores, labels)
    cells = {}
    for f in target_fars:
        r, t, achieved = frr_at_far(scores, labels, f)
        cells[float(f)] = {"frr": r, "threshold": _json_float(t), "achieved_far": achieved}
    det = det_curve(scores, labels).points() if with_det else []
    for p in det:
        p["threshold"] = _json_float(p["threshold"])
    return ScenarioResult(int((labels == 1).sum()), int((labels == 0).sum()), e, thr, cells, det)


def _json_float(x):
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def evaluate_by_scenario(scores, labels, scenarios, target_fars=DEFAULT_TARGET_FARS, with_det=True):
    """One :class:`ScenarioResult` per scenario tag present in ``scenarios``."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    scenarios = np.asarray(scenarios, dtype=object)
    out = {}
    for tag in sorted(set(scenarios.tolist())):
        sel = scenarios == tag
        out[tag] = evaluate_scores(scores[sel], labels[sel], target_fars, with_det)
    return out


def relative_reduction(frr_base, frr_sys):
    """(FRR_base - FRR_sys) / FRR_base; None when the baseline FRR is zero."""
    if frr_base == 0:
        return 0.0 if frr_sys == 0 else None
    return (frr_base - frr_sys) / frr_base


@dataclass
class SystemScores:
    """Scores of one system on a shared trial list.

    Scenarios a system cannot handle are left out of ``applicable``.
    """

    scores: np.ndarray
    labels: np.ndarray
    scenarios: np.ndarray
    trial_ids: list
    applicable: tuple = ("both_present", "td_absent", "ti_absent")


@dataclass
class EvalReport:
    target_fars: tuple
    systems: dict             # system -> scenario -> ScenarioResult
    reductions: dict          # baseline -> scenario -> target FAR -> reduction | None | "n/a"
    reference: str = "foenet"
    accept_rule: str = ACCEPT_RULE

    def to_dict(self):
        return {
            "accept_rule": self.accept_rule,
            "reference": self.reference,
            "target_fars": [float(f) for f in self.target_fars],
            "systems": {
                name: {tag: res.to_dict() for tag, res in per.items()}
                for name, per in self.systems.items()
            },
            "relative_frr_reduction": {
                base: {tag: {_far_key(f): v for f, v in cells.items()} for tag, cells in per.items()}
                for base, per in self.reductions.items()
            },
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False)

    def to_csv(self):
        """Rows: scenario x baseline; columns: targeted FARs (reductions in %)."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["scenario", "comparison"] + [f"{100 * f:g}%" for f in self.target_fars])
        for tag in ("both_present", "td_absent", "ti_absent"):
            for base, per in self.reductions.items():
                if tag not in per:
                    continue
                row = [tag, f"{self.reference} vs {base}"]
                for f in self.target_fars:
                    v = per[tag][float(f)]
                    row.append(v if isinstance(v, str) else ("" if v is None else f"{100 * v:.1f}"))
                w.writerow(row)
        return buf.getvalue()


def compare_systems(results, baselines, reference="foenet", target_fars=DEFAULT_TARGET_FARS,
                    with_det=False):
    """Relative FRR reduction of ``reference`` over every system in ``baselines``.

    ``results`` maps a system name to its :class:`SystemScores`. All systems
    must have scored the same trials with the same labels.
    """
    ref = results[reference]
    for name, r in results.items():
        if list(r.trial_ids) != list(ref.trial_ids) or not np.array_equal(r.labels, ref.labels):
            raise MismatchedTrialSets(f"{name} was not scored on the same trials as {reference}")

    per_system = {}
    for name, r in results.items():
        keep = np.isin(r.scenarios, list(r.applicable))
        per_system[name] = evaluate_by_scenario(
            r.scores[keep], r.labels[keep], r.scenarios[keep], target_fars, with_det)

    reductions = {}
    for base in baselines:
        per = {}
        for tag, ref_res in per_system[reference].items():
            base_res = per_system[base].get(tag)
            cells = {}
            for f in target_fars:
                f = float(f)
                if base_res is None:
                    cells[f] = "n/a"
                else:
                    cells[f] = relative_reduction(
                        base_res.frr_at_far[f]["frr"], ref_res.frr_at_far[f]["frr"])
            per[tag] = cells
        reductions[base] = per
    return EvalReport(tuple(float(f) for f in target_fars), per_system, reductions, reference)
