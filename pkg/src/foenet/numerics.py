"""Small numeric kernels shared by the model, the baselines and the data generator.

Vectors and matrices are plain float64 numpy arrays. Embeddings are treated as
row vectors, so a layer is ``x @ W`` with ``W`` stored as ``(in_dim, out_dim)``.

Randomness always goes through :func:`seeded_rng`, which pins numpy's PCG64
bit generator explicitly instead of relying on whatever ``default_rng`` maps to.
"""

import numpy as np

from .exceptions import DimensionMismatch, InvalidParameter

RNG_ALGORITHM = "PCG64"

# closest float64 values to 0 and 1 that keep a probability strictly inside (0, 1)
_P_MIN = np.finfo(np.float64).tiny
_P_MAX = 1.0 - 2.0**-53


def elu(x):
    """x for x >= 0, exp(x) - 1 otherwise. Works on scalars and arrays."""
    x = np.asarray(x, dtype=np.float64)
    # expm1 on the clipped value avoids overflow warnings in the unused branch
    out = np.where(x >= 0, x, np.expm1(np.minimum(x, 0.0)))
    return out if out.ndim else float(out)


def elu_derivative(x):
    """1 for x >= 0 (right limit at 0), exp(x) otherwise."""
    x = np.asarray(x, dtype=np.float64)
    out = np.where(x >= 0, 1.0, np.exp(np.minimum(x, 0.0)))
    return out if out.ndim else float(out)


def sigmoid(x):
    """Logistic function, evaluated without overflow for large |x|.

    The result is clamped to the open unit interval, so ``sigmoid(800.0) < 1``.
    """
    x = np.asarray(x, dtype=np.float64)
    pos = x >= 0
    # exp of a non-positive number only
    e = np.exp(np.where(pos, -x, x))
    out = np.where(pos, 1.0 / (1.0 + e), e / (1.0 + e))
    out = np.clip(out, _P_MIN, _P_MAX)
    return out if out.ndim else float(out)


def matvec(W, x):
    W = np.asarray(W, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if W.ndim != 2 or x.ndim != 1 or W.shape[1] != x.shape[0]:
        raise DimensionMismatch(f"cannot multiply {W.shape} by {x.shape}")
    return W @ x


def seeded_rng(seed):
    """Reproducible generator: the same seed gives the same stream everywhere."""
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None or int(seed) < 0:
        raise InvalidParameter(f"seed must be a non-negative integer, got {seed!r}")
    return np.random.Generator(np.random.PCG64(int(seed)))


def gaussian_sample(rng, mean, std, n):
    if std < 0:
        raise InvalidParameter(f"std must be >= 0, got {std}")
    if n < 0:
        raise InvalidParameter(f"n must be >= 0, got {n}")
    draws = rng.standard_normal(int(n))
    return mean + std * draws


def fan_uniform(rng, fan_in, fan_out, shape=None):
    """Uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out))."""
    if fan_in <= 0 or fan_out <= 0:
        raise InvalidParameter("fan_in and fan_out must be positive")
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape or (fan_in, fan_out))


def cosine(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shape {a.shape} != {b.shape}")
    return float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))
