"""Score-level comparison systems.

All of them consume one score per subsystem, ``(cos(e_spk, e_u) + 1) / 2``:

* cosine      -- the TI score alone (single-system reference)
* AF          -- average of the TD and TI scores; with one score missing, the
                 present score is mapped through a piecewise linear map that
                 aligns operating points of equal FAR
* SF          -- a small network over ``[s_td, s_ti]`` with -1 standing in for
                 a missing score
* E-SF        -- SF, with a missing score replaced by a regression
                 ``(tanh(w * s_other + b) + 1) / 2`` on the present one
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .evaluation import frr_at_far
from .exceptions import (
    DegenerateCalibration,
    DimensionMismatch,
    InvalidParameter,
    MissingCalibration,
    ZeroVector,
)
from .numerics import elu, elu_derivative, fan_uniform, seeded_rng, sigmoid

PLACEHOLDER = -1.0
AF_ANCHOR_FARS = (0.008, 0.02, 0.05, 0.125, 0.25, 0.5)


class SubsystemScore(NamedTuple):
    value: float
    present: bool = True


def subsystem_score(e_spk, e_u):
    """Cosine similarity rescaled to [0, 1]."""
    e_spk = np.asarray(e_spk, dtype=np.float64)
    e_u = np.asarray(e_u, dtype=np.float64)
    if e_spk.shape != e_u.shape:
        raise DimensionMismatch(f"{e_spk.shape} vs {e_u.shape}")
    na, nb = np.linalg.norm(e_spk), np.linalg.norm(e_u)
    if na == 0 or nb == 0:
        raise ZeroVector("cosine score of a zero vector")
    c = float(e_spk @ e_u) / (na * nb)
    return SubsystemScore(min(max((c + 1) / 2, 0.0), 1.0), True)


def _cosine_rows(a, b, ok):
    out = np.full(a.shape[0], np.nan)
    if ok.any():
        a, b = a[ok], b[ok]
        na = np.linalg.norm(a, axis=1)
        nb = np.linalg.norm(b, axis=1)
        if np.any(na == 0) or np.any(nb == 0):
            raise ZeroVector("cosine score of a zero vector")
        out[ok] = np.clip((np.sum(a * b, axis=1) / (na * nb) + 1) / 2, 0.0, 1.0)
    return out


def subsystem_scores(batch):
    """Per-trial TD and TI scores of a TrialArrays batch; NaN where a side is incomplete."""
    return (_cosine_rows(batch.spk_td, batch.u_td, batch.td_ok),
            _cosine_rows(batch.spk_ti, batch.u_ti, batch.ti_ok))


# ---------------------------------------------------------------------------
# average fusion
# ---------------------------------------------------------------------------


@dataclass
class PiecewiseMap:
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.float64)
        if self.x.ndim != 1 or self.x.shape != self.y.shape or self.x.size == 0:
            raise InvalidParameter("anchors must be two equal-length 1-D sequences")
        if np.any(np.diff(self.x) <= 0):
            raise InvalidParameter("anchor x values must be strictly increasing")

    def __call__(self, s):
        # np.interp holds the end values constant outside the anchor range
        out = np.clip(np.interp(s, self.x, self.y), 0.0, 1.0)
        return out if np.ndim(out) else float(out)

    def to_dict(self):
        return {"x": self.x.tolist(), "y": self.y.tolist()}


def af_score(s_td, s_ti, calibration=None):
    """Average of two present scores, or the calibrated single present score."""
    s_td, s_ti = SubsystemScore(*s_td), SubsystemScore(*s_ti)
    if s_td.present and s_ti.present:
        return (s_td.value + s_ti.value) / 2
    if not (s_td.present or s_ti.present):
        raise InvalidParameter("AF needs at least one present score")
    if calibration is None:
        raise MissingCalibration("one score is missing and no calibration map was given")
    return calibration(s_td.value if s_td.present else s_ti.value)


def calibration_from_scores(single, fused, labels, target_fars=AF_ANCHOR_FARS):
    """Map single-system thresholds to AF thresholds at equal FAR."""
    if np.ptp(single) == 0 or np.ptp(fused) == 0:
        raise DegenerateCalibration("calibration scores are constant")
    anchors = []
    for f in target_fars:
        _, t_single, _ = frr_at_far(single, labels, f)
        _, t_fused, _ = frr_at_far(fused, labels, f)
        if not (np.isfinite(t_single) and np.isfinite(t_fused)):
            raise DegenerateCalibration(f"FAR {f} cannot be reached on the calibration trials")
        anchors.append((t_single, t_fused))
    anchors.sort()
    xs, ys = [], []
    for x, y in anchors:
        if xs and x == xs[-1]:
            continue
        xs.append(x)
        ys.append(y)
    return PiecewiseMap(xs, ys)


def build_af_calibration(calib, side, target_fars=AF_ANCHOR_FARS):
    """Calibration map for ``side`` ("td" or "ti") from trials with both sides present."""
    full = calib.td_ok & calib.ti_ok
    if not full.any():
        raise DegenerateCalibration("no calibration trial has both subsystems present")
    s_td, s_ti = subsystem_scores(calib.subset(np.flatnonzero(full)))
    labels = calib.labels[full]
    if len(np.unique(labels)) < 2:
        raise DegenerateCalibration("calibration trials need both classes")
    single = s_td if side == "td" else s_ti
    return calibration_from_scores(single, (s_td + s_ti) / 2, labels, target_fars)


def af_scores(batch, map_td, map_ti):
    s_td, s_ti = subsystem_scores(batch)
    out = (s_td + s_ti) / 2
    only_td = batch.td_ok & ~batch.ti_ok
    only_ti = ~batch.td_ok & batch.ti_ok
    if only_td.any():
        out[only_td] = map_td(s_td[only_td])
    if only_ti.any():
        out[only_ti] = map_ti(s_ti[only_ti])
    return out


# ---------------------------------------------------------------------------
# score fusion network
# ---------------------------------------------------------------------------


@dataclass
class SfConfig:
    hidden: int = 8
    eta: float = 1e-2
    epochs: int = 50
    batch_size: int = 256
    p_td_absent: float = 0.2
    p_ti_absent: float = 0.1
    seed: int = 0


def sf_init(hidden, rng):
    if hidden < 1:
        raise InvalidParameter("hidden width must be >= 1")
    rng = seeded_rng(rng)
    return {
        "W1": fan_uniform(rng, 2, hidden), "b1": np.zeros(hidden),
        "W2": fan_uniform(rng, hidden, 1), "b2": np.array(0.0),
    }


def sf_inputs(s_td, s_ti, placeholder=PLACEHOLDER):
    s_td = np.where(np.isnan(s_td), placeholder, s_td)
    s_ti = np.where(np.isnan(s_ti), placeholder, s_ti)
    return np.column_stack([s_td, s_ti])


def sf_forward(params, inputs):
    inputs = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
    pre = inputs @ params["W1"] + params["b1"]
    h = elu(pre)
    y = np.atleast_1d(sigmoid(h @ params["W2"][:, 0] + params["b2"]))
    return y, (inputs, pre, h)


def sf_score(params, s_td, s_ti):
    """SF score of one trial; ``None`` or NaN marks a missing score."""
    s_td = np.nan if s_td is None else s_td
    s_ti = np.nan if s_ti is None else s_ti
    return float(sf_forward(params, sf_inputs(np.array([s_td]), np.array([s_ti])))[0][0])


def sf_gradients(params, cache, y, labels):
    inputs, pre, h = cache
    g_a = (y - labels) / len(labels)
    g_h = np.outer(g_a, params["W2"][:, 0]) * elu_derivative(pre)
    return {
        "W1": inputs.T @ g_h, "b1": g_h.sum(axis=0),
        "W2": (h.T @ g_a)[:, None], "b2": np.array(g_a.sum()),
    }


def _mask_scores(s_td, s_ti, p_td, p_ti, rng):
    u = rng.random(len(s_td))
    full = ~np.isnan(s_td) & ~np.isnan(s_ti)
    s_td = np.where(full & (u < p_td), np.nan, s_td)
    s_ti = np.where(full & (u >= p_td) & (u < p_td + p_ti), np.nan, s_ti)
    return s_td, s_ti


def sf_train(s_td, s_ti, labels, cfg=None):
    """Train the fusion network with cross-entropy and Adam.

    Missing scores (NaN) become the -1 placeholder; complete trials are
    additionally hidden at random, per epoch, so the placeholder is seen
    during training.
    """
    from .training import AdamState, adam_step

    cfg = cfg or SfConfig()
    labels = np.asarray(labels, dtype=np.float64)
    rng = seeded_rng(cfg.seed)
    params = sf_init(cfg.hidden, rng)
    state = AdamState.zeros_like(params)
    n = len(labels)
    k = min(cfg.batch_size, n)
    for _ in range(cfg.epochs):
        perm = rng.permutation(n)
        a, b = _mask_scores(s_td[perm], s_ti[perm], cfg.p_td_absent, cfg.p_ti_absent, rng)
        x = sf_inputs(a, b)
        t = labels[perm]
        for start in range(0, n - k + 1, k):
            sl = slice(start, start + k)
            y, cache = sf_forward(params, x[sl])
            grads = sf_gradients(params, cache, y, t[sl])
            params, state = adam_step(params, grads, state, cfg.eta)
    return params


# ---------------------------------------------------------------------------
# enhanced score fusion
# ---------------------------------------------------------------------------


@dataclass
class EsfRegressors:
    w_td_from_ti: float = 0.0
    b_td_from_ti: float = 0.0
    w_ti_from_td: float = 0.0
    b_ti_from_td: float = 0.0

    def estimate_td(self, s_ti):
        return (np.tanh(self.w_td_from_ti * np.asarray(s_ti) + self.b_td_from_ti) + 1) / 2

    def estimate_ti(self, s_td):
        return (np.tanh(self.w_ti_from_td * np.asarray(s_td) + self.b_ti_from_td) + 1) / 2


def fit_tanh_regressor(x, target, steps=3000, eta=0.05):
    """Least-squares fit of ``target ~ (tanh(w * x + b) + 1) / 2`` by Adam."""
    from .training import AdamState, adam_step

    x = np.asarray(x, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if np.ptp(x) == 0 or np.ptp(target) == 0:
        raise DegenerateCalibration("regression inputs or targets are constant")
    wb = {"w": np.array(1.0), "b": np.array(0.0)}
    state = AdamState.zeros_like(wb)
    for _ in range(steps):
        th = np.tanh(wb["w"] * x + wb["b"])
        resid = (th + 1) / 2 - target
        g = resid * (1 - th ** 2)        # d/d(pre) of mean squared error, up to 1/n
        grads = {"w": np.array(np.mean(g * x)), "b": np.array(np.mean(g))}
        wb, state = adam_step(wb, grads, state, eta)
    return float(wb["w"]), float(wb["b"])


def esf_fit_regressors(s_td, s_ti):
    """Fit both directions on trials where both scores are present."""
    full = ~np.isnan(s_td) & ~np.isnan(s_ti)
    a, b = s_td[full], s_ti[full]
    w1, b1 = fit_tanh_regressor(b, a)
    w2, b2 = fit_tanh_regressor(a, b)
    return EsfRegressors(w1, b1, w2, b2)


def esf_fill(regressors, s_td, s_ti):
    s_td = np.asarray(s_td, dtype=np.float64)
    s_ti = np.asarray(s_ti, dtype=np.float64)
    miss_td, miss_ti = np.isnan(s_td), np.isnan(s_ti)
    s_td = np.where(miss_td & ~miss_ti, regressors.estimate_td(np.nan_to_num(s_ti)), s_td)
    s_ti = np.where(miss_ti & ~miss_td, regressors.estimate_ti(np.nan_to_num(s_td)), s_ti)
    return s_td, s_ti


def esf_score(regressors, sf_params, s_td, s_ti):
    s_td = np.nan if s_td is None else s_td
    s_ti = np.nan if s_ti is None else s_ti
    a, b = esf_fill(regressors, np.array([s_td]), np.array([s_ti]))
    return float(sf_forward(sf_params, sf_inputs(a, b))[0][0])
