"""scikit-learn style front ends for the fusion network and the baselines.

Every estimator takes ``X`` in the packed layout of :func:`foenet.data.pack`
(embeddings followed by four 0/1 availability flags) and a binary ``y``.
``decision_function`` returns verification scores in [0, 1]; higher means
"same speaker". ``td_dim`` tells the estimators where the TD columns end; it
defaults to an even TD/TI split.
"""

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from . import baselines, checkpoint
from .data import split_indices, unpack
from .exceptions import SchemaError
from .model import load_checkpoint, params_from_envelope, save_checkpoint, score
from .numerics import seeded_rng
from .training import TrainConfig, train


def check_trials(X, y=None, td_dim=None):
    """Validate a packed trial matrix and unpack it into a TrialArrays batch."""
    if y is None:
        X = check_array(X, dtype=np.float64)
    else:
        X, y = check_X_y(X, y, dtype=np.float64)
        if not np.all(np.isin(y, (0, 1))):
            raise ValueError(f"labels must be 0/1, got {np.unique(y)}")
    return unpack(X, td_dim, y).validate()


class _TrialScorer(ClassifierMixin, BaseEstimator):
    system = None
    applicable = ("both_present", "td_absent", "ti_absent")

    def _batch(self, X, y=None):
        return check_trials(X, y, self.td_dim)

    def _fitted(self, X, y=None):
        batch = self._batch(X, y)
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = np.shape(X)[1]
        return batch

    def predict_proba(self, X):
        s = self.decision_function(X)
        return np.column_stack([1 - s, s])

    def predict(self, X):
        return (self.decision_function(X) >= 0.5).astype(np.int64)

    def save(self, path):
        check_is_fitted(self, "classes_")
        checkpoint.write_envelope(path, self.system, {"td_dim": self.td_dim},
                                  self._weights(), self._state(),
                                  {"params": self.get_params()})

    def _weights(self):
        return {}

    def _state(self):
        return {}


class FoenetClassifier(_TrialScorer):
    """Embedding-level fusion network trained with mini-batch Adam.

    The best epoch is chosen by EER on a validation set: ``eval_set`` when
    given to :meth:`fit`, otherwise a label-balanced random
    ``validation_fraction`` of the training trials.
    """

    system = "foenet"

    def __init__(self, td_dim=None, learning_rate=1e-3, max_epochs=50, batch_size=256,
                 alpha=1e-4, p_td_absent=0.2, p_ti_absent=0.1, validation_fraction=0.15,
                 valid_scenario=None, random_state=0):
        self.td_dim = td_dim
        self.learning_rate = learning_rate
        self.max_epochs = max_epochs
        self.batch_size = batch_size
        self.alpha = alpha
        self.p_td_absent = p_td_absent
        self.p_ti_absent = p_ti_absent
        self.validation_fraction = validation_fraction
        self.valid_scenario = valid_scenario
        self.random_state = random_state

    def train_config(self):
        return TrainConfig(
            eta=self.learning_rate, itr_max=self.max_epochs, k=self.batch_size,
            alpha=self.alpha, p_td_absent=self.p_td_absent, p_ti_absent=self.p_ti_absent,
            seed=self.random_state, valid_scenario=self.valid_scenario,
        ).validate()

    def fit(self, X, y, eval_set=None):
        cfg = self.train_config()
        batch = self._fitted(X, y)
        if eval_set is not None:
            tr, valid = batch, self._batch(*eval_set)
        else:
            idx_tr, idx_va = split_indices(batch.labels, 1 - self.validation_fraction,
                                           seeded_rng(self.random_state))
            tr, valid = batch.subset(idx_tr), batch.subset(idx_va)
        self.params_, self.report_ = train(tr, valid, cfg)
        return self

    def decision_function(self, X):
        check_is_fitted(self, "params_")
        return score(self.params_, self._batch(X))

    def save(self, path):
        check_is_fitted(self, "params_")
        save_checkpoint(self.params_, path)

    @classmethod
    def from_params(cls, params):
        est = cls(td_dim=params.td_dim)
        est.params_ = params
        est.classes_ = np.array([0, 1])
        return est


class CosineScorer(_TrialScorer):
    """Single-system reference: cosine score of the TI embeddings alone.

    Trials without a complete TI side get NaN.
    """

    system = "cosine"
    applicable = ("both_present", "td_absent")

    def __init__(self, td_dim=None):
        self.td_dim = td_dim

    def fit(self, X, y=None):
        self._fitted(X, y)
        return self

    def decision_function(self, X):
        check_is_fitted(self, "classes_")
        return baselines.subsystem_scores(self._batch(X))[1]


class AverageFusion(_TrialScorer):
    """Mean of the TD and TI cosine scores, FAR-aligned when one is missing."""

    system = "af"

    def __init__(self, td_dim=None, anchor_fars=baselines.AF_ANCHOR_FARS):
        self.td_dim = td_dim
        self.anchor_fars = anchor_fars

    def fit(self, X, y):
        batch = self._fitted(X, y)
        self.map_td_ = baselines.build_af_calibration(batch, "td", self.anchor_fars)
        self.map_ti_ = baselines.build_af_calibration(batch, "ti", self.anchor_fars)
        return self

    def decision_function(self, X):
        check_is_fitted(self, "map_td_")
        return baselines.af_scores(self._batch(X), self.map_td_, self.map_ti_)

    def _weights(self):
        return {"map_td_x": self.map_td_.x, "map_td_y": self.map_td_.y,
                "map_ti_x": self.map_ti_.x, "map_ti_y": self.map_ti_.y}


class ScoreFusion(_TrialScorer):
    """Small ELU network over the two cosine scores; -1 marks a missing one."""

    system = "sf"

    def __init__(self, td_dim=None, hidden=8, learning_rate=1e-2, max_epochs=50,
                 batch_size=256, p_td_absent=0.2, p_ti_absent=0.1, random_state=0):
        self.td_dim = td_dim
        self.hidden = hidden
        self.learning_rate = learning_rate
        self.max_epochs = max_epochs
        self.batch_size = batch_size
        self.p_td_absent = p_td_absent
        self.p_ti_absent = p_ti_absent
        self.random_state = random_state

    def _sf_config(self):
        return baselines.SfConfig(self.hidden, self.learning_rate, self.max_epochs,
                                  self.batch_size, self.p_td_absent, self.p_ti_absent,
                                  self.random_state)

    def fit(self, X, y):
        batch = self._fitted(X, y)
        s_td, s_ti = baselines.subsystem_scores(batch)
        self.sf_params_ = baselines.sf_train(s_td, s_ti, batch.labels, self._sf_config())
        return self

    def _inputs(self, batch):
        return baselines.subsystem_scores(batch)

    def decision_function(self, X):
        check_is_fitted(self, "sf_params_")
        s_td, s_ti = self._inputs(self._batch(X))
        return baselines.sf_forward(self.sf_params_, baselines.sf_inputs(s_td, s_ti))[0]

    def _weights(self):
        return dict(self.sf_params_)


class EnhancedScoreFusion(ScoreFusion):
    """:class:`ScoreFusion` whose missing inputs are regressed from the present score."""

    system = "esf"

    def fit(self, X, y):
        super().fit(X, y)
        s_td, s_ti = baselines.subsystem_scores(self._batch(X))
        self.regressors_ = baselines.esf_fit_regressors(s_td, s_ti)
        return self

    def _inputs(self, batch):
        s_td, s_ti = baselines.subsystem_scores(batch)
        return baselines.esf_fill(self.regressors_, s_td, s_ti)

    def _state(self):
        r = self.regressors_
        return {"w_td_from_ti": r.w_td_from_ti, "b_td_from_ti": r.b_td_from_ti,
                "w_ti_from_td": r.w_ti_from_td, "b_ti_from_td": r.b_ti_from_td}


SYSTEMS = {
    "foenet": FoenetClassifier,
    "cosine": CosineScorer,
    "af": AverageFusion,
    "sf": ScoreFusion,
    "esf": EnhancedScoreFusion,
}


def load_system(path):
    """Rebuild any fitted estimator from its saved envelope."""
    doc = checkpoint.read_envelope(path)
    name = doc["system"]
    if name not in SYSTEMS:
        raise SchemaError(f"{path}: unknown system {name!r}")
    if name == "foenet":
        return FoenetClassifier.from_params(params_from_envelope(doc))
    est = SYSTEMS[name](**doc["metadata"].get("params", {}))
    est.classes_ = np.array([0, 1])
    w = doc["weights"]
    try:
        if name == "af":
            est.map_td_ = baselines.PiecewiseMap(w["map_td_x"], w["map_td_y"])
            est.map_ti_ = baselines.PiecewiseMap(w["map_ti_x"], w["map_ti_y"])
        elif name in ("sf", "esf"):
            est.sf_params_ = {k: w[k] for k in ("W1", "b1", "W2", "b2")}
            if name == "esf":
                est.regressors_ = baselines.EsfRegressors(**doc["state"])
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"{path}: malformed {name} checkpoint ({exc!r})") from None
    return est


def load_foenet(path):
    return FoenetClassifier.from_params(load_checkpoint(path))
