"""Fusion-of-embeddings scoring network.

For each subsystem (TD, TI) the network forms the differential
``E_spk - E_u``. When a side is incomplete its differential is the zero vector
and a substitute is inferred from the other side's differential through
``elu(E_diff_other @ W + b)``. The two (direct or inferred) differentials are
concatenated and scored by a single linear unit followed by scalar batch
normalisation and a sigmoid.

Weight names follow the original notation, which reads backwards:
``W_td2ti`` consumes the TI differential and produces the inferred *TD*
differential, ``W_ti2td`` consumes the TD differential and produces the
inferred *TI* differential.
"""

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from . import checkpoint
from .exceptions import (
    BatchTooSmall,
    DimensionMismatch,
    InvalidParameter,
    NonFiniteError,
    SchemaError,
)
from .numerics import elu, fan_uniform, seeded_rng, sigmoid

SYSTEM = "foenet"
LEARNABLES = ("W_td2ti", "b_td2ti", "W_ti2td", "b_ti2td", "W_pred", "b_pred", "gamma", "beta")
WEIGHT_MATRICES = ("W_td2ti", "W_ti2td", "W_pred")

# Set by the test-suite to assert, on every forward pass, that per side at most
# one of the direct and inferred differentials is non-zero.
CHECK_SUBSTITUTION = False
substitution_checks = 0


@dataclass
class BatchNormState:
    gamma: float = 1.0
    beta: float = 0.0
    running_mean: float = 0.0
    running_var: float = 1.0
    momentum: float = 0.9
    epsilon: float = 1e-5

    def validate(self):
        if self.running_var < 0:
            raise InvalidParameter("running_var must be >= 0")
        if self.epsilon <= 0:
            raise InvalidParameter("epsilon must be > 0")
        if not 0 < self.momentum < 1:
            raise InvalidParameter("momentum must be in (0, 1)")
        return self


@dataclass
class FoenetParams:
    W_td2ti: np.ndarray     # (ti_dim, td_dim)
    b_td2ti: np.ndarray     # (td_dim,)
    W_ti2td: np.ndarray     # (td_dim, ti_dim)
    b_ti2td: np.ndarray     # (ti_dim,)
    W_pred: np.ndarray      # (td_dim + ti_dim, 1)
    b_pred: float
    bn: BatchNormState = field(default_factory=BatchNormState)
    metadata: dict = field(default_factory=dict)

    @property
    def td_dim(self):
        return self.W_td2ti.shape[1]

    @property
    def ti_dim(self):
        return self.W_ti2td.shape[1]

    def learnables(self):
        """Copies of every trainable tensor; scalars come back as 0-d arrays."""
        return {
            "W_td2ti": self.W_td2ti.copy(), "b_td2ti": self.b_td2ti.copy(),
            "W_ti2td": self.W_ti2td.copy(), "b_ti2td": self.b_ti2td.copy(),
            "W_pred": self.W_pred.copy(), "b_pred": np.array(self.b_pred),
            "gamma": np.array(self.bn.gamma), "beta": np.array(self.bn.beta),
        }

    def with_learnables(self, values):
        bn = dataclasses.replace(self.bn, gamma=float(values["gamma"]), beta=float(values["beta"]))
        return FoenetParams(
            np.array(values["W_td2ti"], dtype=np.float64), np.array(values["b_td2ti"], dtype=np.float64),
            np.array(values["W_ti2td"], dtype=np.float64), np.array(values["b_ti2td"], dtype=np.float64),
            np.array(values["W_pred"], dtype=np.float64), float(values["b_pred"]),
            bn, dict(self.metadata),
        )

    def copy(self):
        return self.with_learnables(self.learnables())

    def validate(self):
        td, ti = self.td_dim, self.ti_dim
        shapes = {
            "W_td2ti": (ti, td), "b_td2ti": (td,), "W_ti2td": (td, ti),
            "b_ti2td": (ti,), "W_pred": (td + ti, 1),
        }
        for name, shape in shapes.items():
            if getattr(self, name).shape != shape:
                raise DimensionMismatch(f"{name} has shape {getattr(self, name).shape}, expected {shape}")
        for name, v in self.learnables().items():
            if not np.all(np.isfinite(v)):
                raise NonFiniteError(f"{name} is not finite")
        self.bn.validate()
        return self


def init_params(td_dim, ti_dim, rng, momentum=0.9, epsilon=1e-5):
    """Fan-scaled uniform weights, zero biases, identity batch norm."""
    if td_dim <= 0 or ti_dim <= 0:
        raise InvalidParameter("embedding dims must be positive")
    rng = seeded_rng(rng)
    return FoenetParams(
        W_td2ti=fan_uniform(rng, ti_dim, td_dim),
        b_td2ti=np.zeros(td_dim),
        W_ti2td=fan_uniform(rng, td_dim, ti_dim),
        b_ti2td=np.zeros(ti_dim),
        W_pred=fan_uniform(rng, td_dim + ti_dim, 1),
        b_pred=0.0,
        bn=BatchNormState(momentum=momentum, epsilon=epsilon).validate(),
    )


# ---------------------------------------------------------------------------
# single-trial building blocks
# ---------------------------------------------------------------------------


def differential(e_spk, e_u, side_available, dim=None):
    """``e_spk - e_u`` when the side is available, a zero vector otherwise."""
    if not side_available:
        if dim is None:
            ref = e_spk if e_spk is not None else e_u
            if ref is None:
                raise DimensionMismatch("dimension unknown for an absent side")
            dim = len(ref)
        return np.zeros(dim)
    e_spk = np.asarray(e_spk, dtype=np.float64)
    e_u = np.asarray(e_u, dtype=np.float64)
    if e_spk.shape != e_u.shape:
        raise DimensionMismatch(f"profile {e_spk.shape} vs utterance {e_u.shape}")
    return e_spk - e_u


def infer_missing(e_diff_other, W, b, this_side_available):
    """Substitute differential for a side, zero when the side is available."""
    W = np.asarray(W, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    e_diff_other = np.asarray(e_diff_other, dtype=np.float64)
    if W.shape[0] != e_diff_other.shape[-1] or W.shape[1] != b.shape[0]:
        raise DimensionMismatch(f"cannot map {e_diff_other.shape} through {W.shape} + {b.shape}")
    if this_side_available:
        return np.zeros(W.shape[1])
    return elu(e_diff_other @ W + b)


def fuse(e_diff_td, e_infer_td, e_diff_ti, e_infer_ti):
    """Concatenate the per-side sums ``E_diff + E_infer`` (TD first)."""
    if np.shape(e_diff_td) != np.shape(e_infer_td) or np.shape(e_diff_ti) != np.shape(e_infer_ti):
        raise DimensionMismatch("direct and inferred differentials differ in shape")
    return np.concatenate([np.add(e_diff_td, e_infer_td), np.add(e_diff_ti, e_infer_ti)], axis=-1)


@dataclass
class ForwardCache:
    d_td: np.ndarray
    d_ti: np.ndarray
    miss_td: np.ndarray
    miss_ti: np.ndarray
    pre_td: np.ndarray
    pre_ti: np.ndarray
    infer_td: np.ndarray
    infer_ti: np.ndarray
    e_hat: np.ndarray
    z: np.ndarray
    z_hat: np.ndarray
    y: np.ndarray
    batch_mean: float = 0.0
    batch_var: float = 1.0
    training: bool = False


def predict(params, e_hat, training=False, update_stats=True):
    """Linear unit, scalar batch norm, sigmoid.

    ``e_hat`` is one fused vector or a ``(n, td_dim + ti_dim)`` batch. In
    training mode the batch statistics normalise the pre-activations and the
    running statistics move towards them; otherwise the running statistics
    are used. Returns ``(scores, z, z_hat, mean, var)``.
    """
    e_hat = np.asarray(e_hat, dtype=np.float64)
    single = e_hat.ndim == 1
    e_hat = np.atleast_2d(e_hat)
    if e_hat.shape[1] != params.W_pred.shape[0]:
        raise DimensionMismatch(f"fused vector has {e_hat.shape[1]} entries, expected {params.W_pred.shape[0]}")
    bn = params.bn
    z = e_hat @ params.W_pred[:, 0] + params.b_pred
    if not np.all(np.isfinite(z)):
        raise NonFiniteError("non-finite pre-activation")
    if training:
        if z.shape[0] < 2:
            raise BatchTooSmall("batch normalisation needs at least 2 trials in training mode")
        mean = float(z.mean())
        var = float(np.mean((z - mean) ** 2))
        if update_stats:
            bn.running_mean = bn.momentum * bn.running_mean + (1 - bn.momentum) * mean
            bn.running_var = bn.momentum * bn.running_var + (1 - bn.momentum) * var
    else:
        mean, var = bn.running_mean, bn.running_var
    z_hat = (z - mean) / np.sqrt(var + bn.epsilon)
    y = sigmoid(bn.gamma * z_hat + bn.beta)
    y = np.atleast_1d(y)
    if single:
        return y[0], z[0], z_hat[0], mean, var
    return y, z, z_hat, mean, var


def forward(params, batch, training=False, update_stats=True):
    """Score every trial of a :class:`~foenet.data.TrialArrays` batch.

    Returns ``(scores, cache)``.
    """
    if batch.td_dim != params.td_dim or batch.ti_dim != params.ti_dim:
        raise DimensionMismatch(
            f"batch dims ({batch.td_dim}, {batch.ti_dim}) vs model ({params.td_dim}, {params.ti_dim})")
    batch.validate()
    td_ok = batch.td_ok[:, None]
    ti_ok = batch.ti_ok[:, None]
    # np.where rather than a multiply: masked inputs may hold anything, inf included
    d_td = np.where(td_ok, batch.spk_td - batch.u_td, 0.0)
    d_ti = np.where(ti_ok, batch.spk_ti - batch.u_ti, 0.0)

    pre_td = d_ti @ params.W_td2ti + params.b_td2ti
    pre_ti = d_td @ params.W_ti2td + params.b_ti2td
    infer_td = np.where(td_ok, 0.0, elu(pre_td))
    infer_ti = np.where(ti_ok, 0.0, elu(pre_ti))

    e_hat = np.concatenate([d_td + infer_td, d_ti + infer_ti], axis=1)
    y, z, z_hat, mean, var = predict(params, e_hat, training, update_stats)
    cache = ForwardCache(d_td, d_ti, ~batch.td_ok, ~batch.ti_ok, pre_td, pre_ti,
                         infer_td, infer_ti, e_hat, z, z_hat, y, mean, var, training)
    if CHECK_SUBSTITUTION:
        check_substitution(cache)
    return y, cache


def check_substitution(cache):
    """Assert that each side uses either its direct or its inferred differential.

    Rows with a complete side must have an all-zero inferred vector; rows
    missing it must have an all-zero direct vector.
    """
    global substitution_checks
    for side, direct, inferred, missing in (
            ("TD", cache.d_td, cache.infer_td, cache.miss_td),
            ("TI", cache.d_ti, cache.infer_ti, cache.miss_ti)):
        leaked = np.where(missing, np.any(direct != 0, axis=1), np.any(inferred != 0, axis=1))
        if leaked.any():
            raise AssertionError(f"{side}: {int(leaked.sum())} trial(s) mix direct and inferred differentials")
    substitution_checks += 1


def score(params, batch):
    """Inference-mode scores; never touches the batch-norm running statistics."""
    return forward(params, batch, training=False)[0]


def forward_trial(params, trial):
    from .data import to_arrays

    batch = to_arrays([trial], params.td_dim, params.ti_dim)
    return float(score(params, batch)[0])


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------


def save_checkpoint(params, path, metadata=None):
    meta = dict(params.metadata)
    meta.update(metadata or {})
    bn = params.bn
    checkpoint.write_envelope(
        path, SYSTEM,
        dims={"td_dim": params.td_dim, "ti_dim": params.ti_dim},
        weights={
            "W_td2ti": params.W_td2ti, "b_td2ti": params.b_td2ti,
            "W_ti2td": params.W_ti2td, "b_ti2td": params.b_ti2td,
            "W_pred": params.W_pred,
        },
        state={
            "b_pred": float(params.b_pred),
            "bn": dataclasses.asdict(bn),
        },
        metadata=meta,
    )


def params_from_envelope(doc):
    w = doc["weights"]
    try:
        bn = BatchNormState(**doc["state"]["bn"])
        params = FoenetParams(
            w["W_td2ti"], w["b_td2ti"], w["W_ti2td"], w["b_ti2td"], w["W_pred"],
            float(doc["state"]["b_pred"]), bn, dict(doc["metadata"]),
        )
        dims = doc["dims"]
        if (params.td_dim, params.ti_dim) != (dims["td_dim"], dims["ti_dim"]):
            raise SchemaError("dims do not match weight shapes")
        return params.validate()
    except (KeyError, TypeError, IndexError, AttributeError) as exc:
        raise SchemaError(f"malformed checkpoint: {exc!r}") from None
    except (DimensionMismatch, InvalidParameter, NonFiniteError) as exc:
        raise SchemaError(f"inconsistent checkpoint: {exc}") from None


def load_checkpoint(path):
    return params_from_envelope(checkpoint.read_envelope(path, SYSTEM))
