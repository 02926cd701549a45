"""Loss, hand-written backpropagation, Adam and the epoch loop.

The objective for a mini-batch of ``k`` trials is

    mean cross-entropy + alpha * (sum of squared entries of W_td2ti, W_ti2td, W_pred)

Biases and the batch-norm affine parameters are not regularised.
"""

import dataclasses
import json
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .data import SCENARIOS, TrialArrays
from .evaluation import eer
from .exceptions import (
    BatchTooSmall,
    CacheMismatch,
    DegenerateValidation,
    DimensionMismatch,
    EmptyDataset,
    InvalidParameter,
)
from .model import WEIGHT_MATRICES, forward, init_params
from .numerics import elu_derivative, seeded_rng

logger = logging.getLogger(__name__)

LOG_EPS = 1e-12


@dataclass
class TrainConfig:
    eta: float = 1e-3
    itr_max: int = 50
    k: int = 256
    alpha: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    # per-instance probability of hiding the TD (resp. TI) utterance embedding
    p_td_absent: float = 0.2
    p_ti_absent: float = 0.1
    seed: int = 0
    # None: score the validation set with its own availability flags
    valid_scenario: Optional[str] = None
    bn_momentum: float = 0.9
    bn_epsilon: float = 1e-5

    def validate(self):
        if not self.eta > 0:
            raise InvalidParameter("eta must be > 0")
        if self.itr_max < 1:
            raise InvalidParameter("itr_max must be >= 1")
        if self.k < 2:
            raise InvalidParameter("batch size k must be >= 2 (batch normalisation)")
        if self.alpha < 0:
            raise InvalidParameter("alpha must be >= 0")
        if not (0 <= self.p_td_absent < 1 and 0 <= self.p_ti_absent < 1
                and self.p_td_absent + self.p_ti_absent < 1):
            raise InvalidParameter("mask probabilities must lie in [0, 1) and sum below 1")
        if self.valid_scenario is not None and self.valid_scenario not in SCENARIOS:
            raise InvalidParameter(f"unknown scenario {self.valid_scenario!r}")
        return self

    def to_dict(self):
        return dataclasses.asdict(self)


# ---------------------------------------------------------------------------
# loss and gradients
# ---------------------------------------------------------------------------


def instance_loss(y_pred, y):
    p = np.clip(np.asarray(y_pred, dtype=np.float64), LOG_EPS, 1 - LOG_EPS)
    out = -(y * np.log(p) + (1 - y) * np.log(1 - p))
    return out if np.ndim(out) else float(out)


def l2_penalty(params):
    return float(sum(np.sum(getattr(params, name) ** 2) for name in WEIGHT_MATRICES))


def batch_loss(params, batch, alpha, update_stats=True):
    """Training-mode loss of one mini-batch; returns ``(loss, cache)``."""
    if len(batch) < 2:
        raise BatchTooSmall("a training batch needs at least 2 trials")
    y, cache = forward(params, batch, training=True, update_stats=update_stats)
    loss = float(np.mean(instance_loss(y, batch.labels))) + alpha * l2_penalty(params)
    return loss, cache


def backward(params, cache, labels, alpha):
    """Exact gradient of :func:`batch_loss` with respect to every learnable."""
    labels = np.asarray(labels, dtype=np.float64)
    if not cache.training:
        raise CacheMismatch("cache comes from an inference-mode pass")
    if labels.shape != cache.y.shape:
        raise CacheMismatch(f"{labels.shape[0]} labels for a cache of {cache.y.shape[0]} trials")
    k = labels.shape[0]
    bn = params.bn

    # sigmoid + cross-entropy
    g_a = (cache.y - labels) / k
    g_gamma = float(np.sum(g_a * cache.z_hat))
    g_beta = float(np.sum(g_a))

    # batch norm over the scalar pre-activations (biased batch variance)
    g_zhat = g_a * bn.gamma
    inv_std = 1.0 / np.sqrt(cache.batch_var + bn.epsilon)
    g_z = inv_std * (g_zhat - g_zhat.mean() - cache.z_hat * np.mean(g_zhat * cache.z_hat))

    g_W_pred = cache.e_hat.T @ g_z
    g_b_pred = float(np.sum(g_z))
    g_ehat = np.outer(g_z, params.W_pred[:, 0])
    td = params.td_dim
    g_ehat_td, g_ehat_ti = g_ehat[:, :td], g_ehat[:, td:]

    # the inferred differentials exist only on masked sides; elsewhere they are
    # constant zeros and pass no gradient
    g_pre_td = np.where(cache.miss_td[:, None], g_ehat_td * elu_derivative(cache.pre_td), 0.0)
    g_pre_ti = np.where(cache.miss_ti[:, None], g_ehat_ti * elu_derivative(cache.pre_ti), 0.0)

    return {
        "W_td2ti": cache.d_ti.T @ g_pre_td + 2 * alpha * params.W_td2ti,
        "b_td2ti": g_pre_td.sum(axis=0),
        "W_ti2td": cache.d_td.T @ g_pre_ti + 2 * alpha * params.W_ti2td,
        "b_ti2td": g_pre_ti.sum(axis=0),
        "W_pred": g_W_pred[:, None] + 2 * alpha * params.W_pred,
        "b_pred": np.array(g_b_pred),
        "gamma": np.array(g_gamma),
        "beta": np.array(g_beta),
    }


# ---------------------------------------------------------------------------
# Adam
# ---------------------------------------------------------------------------


@dataclass
class AdamState:
    m: dict
    v: dict
    t: int = 0

    @classmethod
    def zeros_like(cls, values):
        values = _values(values)
        return cls({k: np.zeros_like(v, dtype=np.float64) for k, v in values.items()},
                   {k: np.zeros_like(v, dtype=np.float64) for k, v in values.items()})


def _values(obj):
    return obj.learnables() if hasattr(obj, "learnables") else obj


def adam_step(params, grads, state, eta, beta1=0.9, beta2=0.999, eps=1e-8):
    """One bias-corrected Adam update.

    ``params`` is either a dict of arrays or an object exposing
    ``learnables()`` / ``with_learnables()``; the same kind is returned,
    together with the advanced state.
    """
    if eta <= 0:
        raise InvalidParameter("eta must be > 0")
    values = _values(params)
    if set(values) != set(grads) or set(values) != set(state.m):
        raise DimensionMismatch("parameter, gradient and state keys differ")
    t = state.t + 1
    m, v, new = {}, {}, {}
    for name, theta in values.items():
        g = np.asarray(grads[name], dtype=np.float64)
        if g.shape != np.shape(theta) or state.m[name].shape != g.shape:
            raise DimensionMismatch(f"{name}: gradient {g.shape} vs parameter {np.shape(theta)}")
        m[name] = beta1 * state.m[name] + (1 - beta1) * g
        v[name] = beta2 * state.v[name] + (1 - beta2) * g * g
        m_hat = m[name] / (1 - beta1 ** t)
        v_hat = v[name] / (1 - beta2 ** t)
        new[name] = theta - eta * m_hat / (np.sqrt(v_hat) + eps)
    new_state = AdamState(m, v, t)
    if hasattr(params, "with_learnables"):
        return params.with_learnables(new), new_state
    return new, new_state


# ---------------------------------------------------------------------------
# training loop
# ---------------------------------------------------------------------------


def augment_masks(batch, p_td, p_ti, rng):
    """Hide the TD utterance with prob ``p_td`` or the TI utterance with prob
    ``p_ti`` (one draw per trial, mutually exclusive). Trials that already miss
    an input are left as they are."""
    if p_td == 0 and p_ti == 0:
        return batch
    u = rng.random(len(batch))
    full = batch.td_ok & batch.ti_ok
    avail = batch.avail.copy()
    avail[full & (u < p_td), 1] = False
    avail[full & (u >= p_td) & (u < p_td + p_ti), 3] = False
    return batch.with_avail(avail)


@dataclass
class TrainReport:
    epochs: list = field(default_factory=list)    # [{"epoch", "train_loss", "valid_eer"}]
    best_epoch: int = 0
    best_eer: float = float("inf")
    config: dict = field(default_factory=dict)

    def to_dict(self):
        return dataclasses.asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _check_sets(train_set, valid_set, cfg):
    if len(train_set) == 0 or len(valid_set) == 0:
        raise EmptyDataset("training and validation sets must be non-empty")
    if len(train_set) < cfg.k:
        raise EmptyDataset(f"{len(train_set)} training trials cannot fill a batch of {cfg.k}")
    if len(np.unique(valid_set.labels)) < 2:
        raise DegenerateValidation("validation set needs both target and imposter trials")


def train(train_set, valid_set, cfg=None, params=None):
    """Mini-batch Adam training with model selection on validation EER.

    Each epoch shuffles the training trials, walks through full batches of
    ``cfg.k`` (the remainder is dropped), randomly hides inputs per
    ``cfg.p_td_absent`` / ``cfg.p_ti_absent``, and takes one Adam step per
    batch. After the epoch the validation EER is measured in inference mode
    and the parameters are kept whenever it is ``<=`` the best so far.

    Returns ``(best_params, TrainReport)``.
    """
    cfg = (cfg or TrainConfig()).validate()
    _check_sets(train_set, valid_set, cfg)
    if cfg.valid_scenario is not None:
        a = SCENARIOS[cfg.valid_scenario]
        valid_set = valid_set.with_avail(
            np.tile([a.spk_td, a.u_td, a.spk_ti, a.u_ti], (len(valid_set), 1)))

    rng = seeded_rng(cfg.seed)
    if params is None:
        params = init_params(train_set.td_dim, train_set.ti_dim, rng,
                             momentum=cfg.bn_momentum, epsilon=cfg.bn_epsilon)
    else:
        params = params.copy()
    state = AdamState.zeros_like(params)
    report = TrainReport(config=cfg.to_dict())
    best = None
    n_batches = len(train_set) // cfg.k

    for epoch in range(1, cfg.itr_max + 1):
        perm = rng.permutation(len(train_set))
        losses = []
        for b in range(n_batches):
            batch = train_set.subset(perm[b * cfg.k:(b + 1) * cfg.k])
            batch = augment_masks(batch, cfg.p_td_absent, cfg.p_ti_absent, rng)
            loss, cache = batch_loss(params, batch, cfg.alpha)
            grads = backward(params, cache, batch.labels, cfg.alpha)
            params, state = adam_step(params, grads, state, cfg.eta,
                                      cfg.beta1, cfg.beta2, cfg.adam_eps)
            losses.append(loss)

        scores, _ = forward(params, valid_set, training=False)
        valid_eer, _ = eer(scores, valid_set.labels)
        report.epochs.append({"epoch": epoch, "train_loss": float(np.mean(losses)),
                              "valid_eer": valid_eer})
        logger.info("epoch %d  loss %.5f  valid EER %.4f", epoch, np.mean(losses), valid_eer)
        if valid_eer <= report.best_eer:
            report.best_eer, report.best_epoch = valid_eer, epoch
            best = params.copy()

    best.metadata = {"best_eer": report.best_eer, "best_epoch": report.best_epoch}
    return best, report


# ---------------------------------------------------------------------------
# finite-difference check
# ---------------------------------------------------------------------------


@dataclass
class GradCheckReport:
    max_rel_error: float
    n_checked: int
    violations: list        # (name, index, analytic, numeric, rel_error)

    @property
    def ok(self):
        return not self.violations


def relative_error(a, n, floor=1e-6):
    """|a - n| / max(|a|, |n|, floor); the floor keeps zero gradients comparable."""
    return abs(a - n) / max(abs(a), abs(n), floor)


def grad_check(params, batch, h=1e-5, tol=1e-4, alpha=0.0, grads=None, floor=1e-6):
    """Compare analytic gradients with central differences, coordinate by coordinate.

    ``grads`` may be supplied to audit a gradient computed elsewhere. The
    batch-norm running statistics are not modified.
    """
    if h <= 0:
        raise InvalidParameter("h must be > 0")
    if grads is None:
        _, cache = batch_loss(params, batch, alpha, update_stats=False)
        grads = backward(params, cache, batch.labels, alpha)
    base = params.learnables()
    violations = []
    worst, count = 0.0, 0
    for name, theta in base.items():
        for idx in np.ndindex(theta.shape):
            bumped = {k: v.copy() for k, v in base.items()}
            bumped[name][idx] = theta[idx] + h
            plus, _ = batch_loss(params.with_learnables(bumped), batch, alpha, update_stats=False)
            bumped[name][idx] = theta[idx] - h
            minus, _ = batch_loss(params.with_learnables(bumped), batch, alpha, update_stats=False)
            numeric = (plus - minus) / (2 * h)
            analytic = float(np.asarray(grads[name])[idx])
            err = relative_error(analytic, numeric, floor)
            worst = max(worst, err)
            count += 1
            if err >= tol:
                violations.append((name, idx, analytic, numeric, err))
    return GradCheckReport(worst, count, violations)


def random_check_case(seed, td_dim=8, ti_dim=8, k=8):
    """A perturbed parameter set and a batch mixing all three scenarios.

    Biases and batch-norm affine terms are moved off their initial values so
    that every gradient path is exercised.
    """
    rng = seeded_rng(seed)
    params = init_params(td_dim, ti_dim, rng)
    params.b_td2ti = rng.normal(0, 0.5, td_dim)
    params.b_ti2td = rng.normal(0, 0.5, ti_dim)
    params.b_pred = float(rng.normal())
    params.bn = dataclasses.replace(params.bn, gamma=float(1 + rng.normal(0, 0.3)),
                                    beta=float(rng.normal(0, 0.3)))
    tags = np.resize(["both_present", "td_absent", "ti_absent"], k)
    rng.shuffle(tags)
    avail = np.array([[SCENARIOS[t].spk_td, SCENARIOS[t].u_td,
                       SCENARIOS[t].spk_ti, SCENARIOS[t].u_ti] for t in tags])
    labels = rng.permutation(np.resize([0, 1], k))
    batch = TrialArrays(rng.normal(size=(k, td_dim)), rng.normal(size=(k, td_dim)),
                        rng.normal(size=(k, ti_dim)), rng.normal(size=(k, ti_dim)),
                        avail, labels)
    return params, batch


def grad_check_suite(seeds=range(10), td_dim=8, ti_dim=8, k=8, h=1e-5, tol=1e-4, alpha=1e-2):
    """Run :func:`grad_check` on one :func:`random_check_case` per seed."""
    reports = {}
    for seed in seeds:
        params, batch = random_check_case(seed, td_dim, ti_dim, k)
        reports[seed] = grad_check(params, batch, h=h, tol=tol, alpha=alpha)
    return reports
