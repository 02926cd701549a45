"""Fit several systems on one training set and compare them on one test set."""

import logging

from .data import pack, to_arrays
from .estimators import SYSTEMS
from .evaluation import DEFAULT_TARGET_FARS, SystemScores, compare_systems
from .exceptions import InvalidParameter

logger = logging.getLogger(__name__)


def parse_systems(names):
    """Split ``"foenet,af"`` into a list, rejecting unknown names."""
    if isinstance(names, str):
        names = [n.strip() for n in names.split(",") if n.strip()]
    unknown = [n for n in names if n not in SYSTEMS]
    if unknown or not names:
        raise InvalidParameter(
            f"unknown system(s) {unknown}; valid names: {', '.join(SYSTEMS)}")
    return list(dict.fromkeys(names))


def make_system(name, td_dim, seed, train_cfg=None):
    """Estimator for ``name``; the fusion network takes its settings from ``train_cfg``."""
    cls = SYSTEMS[name]
    if name == "foenet":
        est = cls(td_dim=td_dim, random_state=seed)
        if train_cfg is not None:
            est.set_params(
                learning_rate=train_cfg.eta, max_epochs=train_cfg.itr_max,
                batch_size=train_cfg.k, alpha=train_cfg.alpha,
                p_td_absent=train_cfg.p_td_absent, p_ti_absent=train_cfg.p_ti_absent,
                valid_scenario=train_cfg.valid_scenario)
        return est
    if "random_state" in cls().get_params():
        return cls(td_dim=td_dim, random_state=seed)
    return cls(td_dim=td_dim)


def score_system(est, test):
    """Score a TrialArrays test set and wrap the result for comparison."""
    return SystemScores(est.decision_function(pack(test)), test.labels, test.scenarios,
                        list(test.trial_ids), tuple(est.applicable))


def fit_and_score(names, train, valid, test, seed=0, train_cfg=None):
    """Fit every system in ``names`` and score ``test``.

    ``train``, ``valid`` and ``test`` are trial lists. The baselines are fitted
    on ``train`` alone; the fusion network also uses ``valid`` for model
    selection. Returns ``({name: SystemScores}, {name: estimator})``.
    """
    tr = to_arrays(train)
    va = to_arrays(valid, tr.td_dim, tr.ti_dim)
    te = to_arrays(test, tr.td_dim, tr.ti_dim)
    X, X_va = pack(tr), pack(va)
    scores, fitted = {}, {}
    for name in names:
        est = make_system(name, tr.td_dim, seed, train_cfg)
        logger.info("fitting %s", name)
        if name == "foenet":
            est.fit(X, tr.labels, eval_set=(X_va, va.labels))
        else:
            est.fit(X, tr.labels)
        fitted[name] = est
        scores[name] = score_system(est, te)
    return scores, fitted


def run_comparison(names, train, valid, test, seed=0, target_fars=DEFAULT_TARGET_FARS,
                   train_cfg=None, reference="foenet"):
    """Relative FRR reductions of ``reference`` over the other listed systems.

    When ``reference`` is not among ``names`` the first listed system takes
    its place.
    """
    names = parse_systems(names)
    if reference not in names:
        reference = names[0]
    scores, _ = fit_and_score(names, train, valid, test, seed, train_cfg)
    others = [n for n in names if n != reference]
    return compare_systems(scores, others, reference, target_fars)
