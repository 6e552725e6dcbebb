"""The agent's generative model and its dense joint representation.

The model mirrors the loop from the agent's side: a finite family of
parameter points (each a sensor kernel, a transition kernel, and an
initial-state law over the model's own state alphabet), a prior over that
family, and a planning horizon. For a given history and candidate action
sequence, the joint over (parameter, latent states, future sensors) is a
finite product of kernel entries; we materialize its log as one dense
tensor per action sequence, which is what every inference routine here
consumes.

Axis layout of that tensor, fixed everywhere: axis 0 is the parameter
point, axes 1..T+1 are the latent states for steps 0..T, and the
remaining axes are the free sensor variables for steps t..T. Past sensors
are clamped to the history, so they contribute constants, not axes. The
action variable for step 0 appears in no factor: the initial-state law
already absorbs the first transition.
"""

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import kernels
from .constants import NEG_CLAMP
from .core import Alphabet, Categorical, clean_stochastic
from .errors import (
    HorizonTooLarge,
    IndexOutOfAlphabet,
    InvalidDistribution,
    ShapeMismatch,
)


def format_action_seq(seq):
    """Canonical text form of an action sequence, e.g. (1, 0) -> "1:0"."""
    return ":".join(str(int(a)) for a in seq)


def parse_action_seq(text):
    return tuple(int(tok) for tok in text.split(":")) if text else ()


@dataclass(frozen=True, eq=False)
class ThetaPoint:
    """One parameter point: the three kernels the model is made of.

    sensor[e, s]        = q(sensor s | state e)
    transition[a, e, e'] = q(next state e' | action a, state e)
    initial[e]          = q(state at step 0 is e)
    """

    sensor: np.ndarray
    transition: np.ndarray
    initial: np.ndarray

    def __post_init__(self):
        init = np.asarray(self.initial, dtype=float)
        ne = init.shape[0]
        ns = np.asarray(self.sensor).shape[-1]
        na = np.asarray(self.transition).shape[0]
        object.__setattr__(self, "initial", Categorical(init).probs)
        object.__setattr__(self, "sensor", clean_stochastic(self.sensor, "sensor kernel", (ne, ns)))
        object.__setattr__(self, "transition",
                           clean_stochastic(self.transition, "transition kernel", (na, ne, ne)))

    @property
    def env_size(self):
        return self.initial.shape[0]

    @property
    def sensor_size(self):
        return self.sensor.shape[1]

    @property
    def action_size(self):
        return self.transition.shape[0]


@dataclass(frozen=True, eq=False)
class ThetaSupport:
    """Finite parameter family with its prior."""

    points: tuple
    prior: Categorical

    def __post_init__(self):
        pts = tuple(self.points)
        if not pts:
            raise InvalidDistribution("parameter support must be non-empty")
        first = pts[0]
        for p in pts[1:]:
            if (p.env_size, p.sensor_size, p.action_size) != (first.env_size, first.sensor_size, first.action_size):
                raise ShapeMismatch("all parameter points must share alphabet sizes")
        if self.prior.size != len(pts):
            raise ShapeMismatch(f"prior has {self.prior.size} entries for {len(pts)} parameter points")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class Horizon:
    """Planning horizon: ``fixed`` ends every plan at step ``value``;
    ``rolling`` looks ``value`` steps past the current one."""

    mode: str
    value: int

    def __post_init__(self):
        if self.mode not in ("fixed", "rolling"):
            raise InvalidDistribution(f"horizon mode must be fixed|rolling, got {self.mode!r}")
        if self.value < 0:
            raise InvalidDistribution(f"horizon value must be non-negative, got {self.value}")

    def final_step(self, t):
        if self.mode == "fixed":
            if t > self.value:
                raise HorizonTooLarge(f"step {t} lies past the fixed horizon {self.value}")
            return self.value
        return t + self.value


@dataclass(frozen=True)
class PosteriorLayout:
    """Shape bookkeeping for the dense joint tensor at one step."""

    t: int
    horizon_end: int
    theta_size: int
    env_size: int
    sensor_size: int

    @property
    def n_env(self):
        return self.horizon_end + 1

    @property
    def n_future(self):
        # free sensor variables, one per step t..T; always >= 1
        return self.horizon_end - self.t + 1

    @property
    def shape(self):
        return (self.theta_size,) + (self.env_size,) * self.n_env + (self.sensor_size,) * self.n_future

    @property
    def n_cells(self):
        n = 1
        for d in self.shape:
            n *= d
        return n

    @property
    def ndim(self):
        return 1 + self.n_env + self.n_future

    @property
    def theta_axis(self):
        return 0

    def env_axis(self, step):
        if not 0 <= step <= self.horizon_end:
            raise IndexOutOfAlphabet(f"no latent state axis for step {step}")
        return 1 + step

    def sensor_axis(self, step):
        if not self.t <= step <= self.horizon_end:
            raise IndexOutOfAlphabet(f"no free sensor axis for step {step}")
        return 1 + self.n_env + (step - self.t)

    @property
    def sensor_axes(self):
        return tuple(range(1 + self.n_env, self.ndim))

    def dims(self):
        return np.asarray(self.shape, dtype=np.int64)


@dataclass(frozen=True)
class ModelAssignment:
    """One full assignment of the model's variables at history length t.

    ``sensors`` and ``actions`` run over steps 0..T (past entries clamped
    to the history); ``env_states`` runs over 0..T as well.
    """

    t: int
    theta_index: int
    env_states: tuple
    sensors: tuple
    actions: tuple


@dataclass(frozen=True, eq=False)
class GenerativeModelSpec:
    """Model family, prior, and horizon, plus the dense-tensor machinery.

    ``enum_cap`` bounds both the number of candidate action sequences and
    the number of cells per joint tensor; crossing it raises
    HorizonTooLarge instead of silently allocating gigabytes.
    """

    env_alphabet: Alphabet
    sensor_alphabet: Alphabet
    action_alphabet: Alphabet
    theta: ThetaSupport
    horizon: Horizon
    enum_cap: int = 1_000_000

    def __post_init__(self):
        first = self.theta.points[0]
        if first.env_size != self.env_alphabet.size:
            raise ShapeMismatch(f"parameter points use {first.env_size} states, alphabet has {self.env_alphabet.size}")
        if first.sensor_size != self.sensor_alphabet.size:
            raise ShapeMismatch(f"parameter points use {first.sensor_size} sensor symbols, "
                                f"alphabet has {self.sensor_alphabet.size}")
        if first.action_size != self.action_alphabet.size:
            raise ShapeMismatch(f"parameter points use {first.action_size} actions, "
                                f"alphabet has {self.action_alphabet.size}")
        if self.enum_cap < 1:
            raise InvalidDistribution(f"enum_cap must be positive, got {self.enum_cap}")

    @cached_property
    def _log_tables(self):
        """Stacked per-point kernels in log space, zeros clamped."""
        def logged(a):
            return np.where(a > 0.0, np.log(np.where(a > 0.0, a, 1.0)), NEG_CLAMP)

        prior = logged(self.theta.prior.probs)
        init = logged(np.stack([p.initial for p in self.theta.points]))
        trans = logged(np.stack([p.transition for p in self.theta.points]))
        sens = logged(np.stack([p.sensor for p in self.theta.points]))
        for a in (prior, init, trans, sens):
            a.setflags(write=False)
        return prior, init, trans, sens

    def layout_for(self, t):
        if t < 0:
            raise IndexOutOfAlphabet(f"history length must be non-negative, got {t}")
        end = self.horizon.final_step(t)
        layout = PosteriorLayout(t=t, horizon_end=end, theta_size=len(self.theta),
                                 env_size=self.env_alphabet.size,
                                 sensor_size=self.sensor_alphabet.size)
        if layout.n_cells > self.enum_cap:
            raise HorizonTooLarge(f"joint tensor needs {layout.n_cells} cells, cap is {self.enum_cap}")
        return layout

    def action_sequences(self, t):
        """All candidate plans for steps t..T, lexicographic."""
        layout = self.layout_for(t)
        count = self.action_alphabet.size ** layout.n_future
        if count > self.enum_cap:
            raise HorizonTooLarge(f"{count} candidate action sequences, cap is {self.enum_cap}")
        return tuple(itertools.product(range(self.action_alphabet.size), repeat=layout.n_future))

    def _check_history(self, history):
        for i, s in enumerate(history.sensors):
            if s not in self.sensor_alphabet:
                raise IndexOutOfAlphabet(f"history sensor {s!r} at step {i} outside alphabet")
        for i, a in enumerate(history.actions):
            if a not in self.action_alphabet:
                raise IndexOutOfAlphabet(f"history action {a!r} at step {i} outside alphabet")

    def _full_actions(self, history, action_seq, layout):
        seq = tuple(int(a) for a in action_seq)
        if len(seq) != layout.n_future:
            raise ShapeMismatch(f"action sequence length {len(seq)}, expected {layout.n_future}")
        for a in seq:
            if a not in self.action_alphabet:
                raise IndexOutOfAlphabet(f"action {a!r} outside alphabet of size {self.action_alphabet.size}")
        return history.actions + seq

    def build_log_tensor(self, history, action_seq):
        """Flat log-probability tensor for one candidate plan.

        Impossible cells sit at a large negative clamp rather than -inf so
        the jitted kernels never mix infinities.
        """
        t = len(history)
        layout = self.layout_for(t)
        self._check_history(history)
        full_actions = self._full_actions(history, action_seq, layout)
        prior, init, trans, sens = self._log_tables
        flat = kernels.active.build_joint_log_tensor(
            prior, init, trans, sens,
            np.asarray(full_actions, dtype=np.int64),
            np.asarray(history.sensors, dtype=np.int64),
            t, layout.dims())
        return flat, layout

    def joint_log_prob(self, assignment):
        """Reference per-assignment log probability, factor by factor.

        Deliberately independent of the tensor builder (plain Python,
        early -inf exit on any zero factor) so the two paths can be
        cross-checked.
        """
        layout = self.layout_for(assignment.t)
        n = layout.n_env
        if not (len(assignment.env_states) == len(assignment.sensors) == len(assignment.actions) == n):
            raise ShapeMismatch(f"assignment needs {n} entries per variable track")
        k = assignment.theta_index
        if not 0 <= k < len(self.theta):
            raise IndexOutOfAlphabet(f"parameter index {k} outside support of size {len(self.theta)}")
        for e in assignment.env_states:
            if e not in self.env_alphabet:
                raise IndexOutOfAlphabet(f"latent state {e!r} outside alphabet")
        for s in assignment.sensors:
            if s not in self.sensor_alphabet:
                raise IndexOutOfAlphabet(f"sensor {s!r} outside alphabet")
        for a in assignment.actions:
            if a not in self.action_alphabet:
                raise IndexOutOfAlphabet(f"action {a!r} outside alphabet")

        point = self.theta.points[k]
        factors = [self.theta.prior.probs[k], point.initial[assignment.env_states[0]]]
        for tau in range(1, n):
            factors.append(point.transition[assignment.actions[tau],
                                            assignment.env_states[tau - 1],
                                            assignment.env_states[tau]])
        for tau in range(n):
            factors.append(point.sensor[assignment.env_states[tau], assignment.sensors[tau]])
        total = 0.0
        for f in factors:
            if f <= 0.0:
                return -math.inf
            total += math.log(f)
        return total

    def enumerate_assignments(self, history, action_seq):
        """Yield every free-cell assignment in the tensor's flat C order."""
        t = len(history)
        layout = self.layout_for(t)
        self._check_history(history)
        full_actions = self._full_actions(history, action_seq, layout)
        past_sensors = history.sensors
        n_env = layout.n_env
        for idx in np.ndindex(layout.shape):
            yield ModelAssignment(
                t=t,
                theta_index=idx[0],
                env_states=tuple(int(v) for v in idx[1:1 + n_env]),
                sensors=past_sensors + tuple(int(v) for v in idx[1 + n_env:]),
                actions=full_actions,
            )
