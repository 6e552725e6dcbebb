"""Motivation functionals: score an action sequence by its posterior.

A functional maps (posterior table for one action sequence, the sequence
itself) to a real number. Two built-ins are provided; both look only at
the joint marginal over the free sensor variables, but they receive the
full table so extensions can reach the latent and parameter axes too.
"""

from dataclasses import dataclass

import numpy as np

from .core import JointTable, entropy
from .errors import ShapeMismatch


@dataclass(frozen=True, eq=False)
class RewardStructure:
    """Reward attached to each sensor symbol (a total mapping)."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=float)
        if arr.ndim != 1 or arr.size < 1:
            raise ShapeMismatch("reward structure must be a non-empty vector over sensor symbols")
        if not np.all(np.isfinite(arr)):
            raise ShapeMismatch("reward values must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @classmethod
    def from_mapping(cls, mapping, sensor_size):
        vals = np.zeros(sensor_size)
        seen = set()
        for sym, value in mapping.items():
            sym = int(sym)
            if not 0 <= sym < sensor_size:
                raise ShapeMismatch(f"reward symbol {sym} outside sensor alphabet of size {sensor_size}")
            vals[sym] = float(value)
            seen.add(sym)
        if len(seen) != sensor_size:
            missing = sorted(set(range(sensor_size)) - seen)
            raise ShapeMismatch(f"reward mapping must cover every sensor symbol; missing {missing}")
        return cls(vals)

    @property
    def sensor_size(self):
        return self.values.shape[0]


def _check_table(table, layout):
    arr = table.values if isinstance(table, JointTable) else np.asarray(table, dtype=float)
    if arr.shape != layout.shape:
        raise ShapeMismatch(f"posterior shape {arr.shape} does not match layout {layout.shape}")
    return arr


def expected_reward(table, layout, action_seq, rewards):
    """Expected total reward over the free future sensors.

    Linearity in the table means the per-step sensor marginals suffice:
    sum over future steps of (step marginal . reward vector).
    """
    arr = _check_table(table, layout)
    if rewards.sensor_size != layout.sensor_size:
        raise ShapeMismatch(f"rewards cover {rewards.sensor_size} symbols, "
                            f"alphabet has {layout.sensor_size}")
    total = 0.0
    for axis in layout.sensor_axes:
        other = tuple(ax for ax in range(arr.ndim) if ax != axis)
        marginal = arr.sum(axis=other)
        total += float(marginal @ rewards.values)
    return total


def negative_expected_entropy(table, layout, action_seq):
    """Negative entropy of the joint marginal over the free sensors.

    Higher is better: a motivation for agents that want predictable
    observations.
    """
    arr = _check_table(table, layout)
    other = tuple(ax for ax in range(arr.ndim) if ax not in layout.sensor_axes)
    marginal = arr.sum(axis=other) if other else arr
    return -entropy(marginal)


class MotivationFunctional:
    """Named wrapper making a scoring function pluggable and loggable."""

    def __init__(self, name, fn):
        self.name = name
        self._fn = fn

    def __call__(self, table, layout, action_seq):
        return float(self._fn(table, layout, action_seq))

    def __repr__(self):
        return f"MotivationFunctional({self.name!r})"


def reward_motivation(rewards):
    return MotivationFunctional(
        "expected-reward",
        lambda table, layout, seq: expected_reward(table, layout, seq, rewards))


def entropy_motivation():
    return MotivationFunctional("negative-entropy", negative_expected_entropy)
