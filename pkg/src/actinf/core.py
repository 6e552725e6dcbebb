"""Finite categorical distributions and the numeric primitives built on them.

Everything downstream trades in these types: probability vectors over a
finite alphabet, dense joint tables over product spaces, and the log-space
helpers (KL divergence, softmax, log-sum-exp) that keep products of small
kernel probabilities from underflowing.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .constants import NORM_ATOL, NORM_REPAIR
from .errors import (
    EmptyInput,
    InvalidDistribution,
    NonFiniteInput,
    ShapeMismatch,
    SupportViolation,
)


@dataclass(frozen=True)
class Alphabet:
    """Finite symbol set; symbols are the indices 0..size-1."""

    size: int

    def __post_init__(self):
        if not isinstance(self.size, int) or self.size < 1:
            raise InvalidDistribution(f"alphabet size must be a positive integer, got {self.size!r}")

    def __contains__(self, symbol):
        return isinstance(symbol, (int, np.integer)) and 0 <= symbol < self.size

    def __iter__(self):
        return iter(range(self.size))


def _clean_probs(values, what):
    arr = np.array(values, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InvalidDistribution(f"{what} contains non-finite entries")
    if np.any(arr < 0):
        if np.any(arr < -1e-15):
            raise InvalidDistribution(f"{what} contains negative entries")
        arr = np.clip(arr, 0.0, None)
    total = float(arr.sum())
    deviation = abs(total - 1.0)
    if deviation > NORM_REPAIR:
        raise InvalidDistribution(f"{what} sums to {total!r}, too far from 1 to renormalize")
    if deviation > NORM_ATOL:
        arr = arr / total
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Categorical:
    """Probability vector over an alphabet; immutable after construction.

    Entry sums within 1e-9 of 1 are silently renormalized; anything worse
    is rejected as malformed rather than absorbed.
    """

    probs: np.ndarray

    def __post_init__(self):
        arr = _clean_probs(self.probs, "categorical")
        if arr.ndim != 1 or arr.size < 1:
            raise InvalidDistribution("categorical needs a non-empty 1-d vector")
        object.__setattr__(self, "probs", arr)

    @classmethod
    def uniform(cls, size):
        return cls(np.full(size, 1.0 / size))

    @classmethod
    def point_mass(cls, index, size):
        p = np.zeros(size)
        p[index] = 1.0
        return cls(p)

    @property
    def size(self):
        return self.probs.shape[0]

    def __len__(self):
        return self.size


@dataclass(frozen=True, eq=False)
class JointTable:
    """Dense non-negative table over a product of alphabets.

    ``normalized`` tables carry total mass 1 (same repair/reject rule as
    ``Categorical``); unnormalized tables only require non-negativity.
    """

    values: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        if self.normalized:
            arr = _clean_probs(self.values, "joint table")
        else:
            arr = np.array(self.values, dtype=float)
            if not np.all(np.isfinite(arr)):
                raise InvalidDistribution("joint table contains non-finite entries")
            if np.any(arr < 0):
                raise InvalidDistribution("joint table contains negative entries")
            arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def dims(self):
        return self.values.shape

    def marginal(self, axes):
        """Marginal over the given axes (kept in their original order)."""
        keep = tuple(axes)
        drop = tuple(ax for ax in range(self.values.ndim) if ax not in keep)
        return self.values.sum(axis=drop) if drop else self.values


def _as_array(dist):
    if isinstance(dist, Categorical):
        return dist.probs
    if isinstance(dist, JointTable):
        return dist.values
    return np.asarray(dist, dtype=float)


def kl_divergence(p, q):
    """KL(p || q) over same-shape tables; terms with p(x)=0 contribute 0.

    Raises SupportViolation where p has mass and q none: a silent +inf
    would mask modeling bugs.
    """
    pa = _as_array(p)
    qa = _as_array(q)
    if pa.shape != qa.shape:
        raise ShapeMismatch(f"KL shapes differ: {pa.shape} vs {qa.shape}")
    value, bad = kernels.active.kl_flat(np.ascontiguousarray(pa.reshape(-1)),
                                        np.ascontiguousarray(qa.reshape(-1)))
    if bad >= 0:
        raise SupportViolation(f"p has mass at flat index {bad} where q is zero")
    return value


def softmax(values, gamma):
    """Softmax with inverse temperature: p_i ∝ exp(gamma * values_i).

    Max-subtraction keeps the exponentials in range; gamma=0 yields the
    uniform distribution for any values.
    """
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise EmptyInput("softmax over an empty vector")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteInput("softmax values must be finite")
    if not math.isfinite(gamma) or gamma < 0:
        raise NonFiniteInput(f"gamma must be a finite non-negative real, got {gamma!r}")
    z = gamma * arr
    z = z - z.max()
    e = np.exp(z)
    return Categorical(e / e.sum())


def log_sum_exp(values):
    """log(sum(exp(values))) with max-subtraction; -inf entries are allowed."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise EmptyInput("log_sum_exp over an empty vector")
    if np.any(np.isnan(arr)) or np.any(np.isposinf(arr)):
        raise NonFiniteInput("log_sum_exp values must be finite or -inf")
    m = float(arr.max())
    if m == -math.inf:
        return -math.inf
    return m + float(np.log(np.sum(np.exp(arr - m))))


def entropy(dist):
    """Shannon entropy in nats, with 0 log 0 = 0."""
    arr = _as_array(dist).reshape(-1)
    pos = arr > 0
    return float(-np.sum(arr[pos] * np.log(arr[pos])))


def clean_stochastic(table, what, shape):
    """Validate a row-stochastic table (last axis sums to 1) and freeze it."""
    arr = np.array(table, dtype=float)
    if arr.shape != shape:
        raise ShapeMismatch(f"{what} must have shape {shape}, got {arr.shape}")
    flat = arr.reshape(-1, arr.shape[-1])
    cleaned = np.stack([_clean_probs(row, f"{what} row {i}") for i, row in enumerate(flat)])
    cleaned = cleaned.reshape(arr.shape)
    cleaned.setflags(write=False)
    return cleaned
