"""Discrete-time perception-action loop between an environment and an agent.

The environment holds a hidden state; each step the agent picks an action
from the shared history, the environment transitions on that action and
emits a sensor value, and the (sensor, action) pair is appended to the
history. The agent never sees the hidden state, only the history.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .core import Alphabet, Categorical, clean_stochastic
from .errors import AgentStepError, IndexOutOfAlphabet, InvalidDistribution, ShapeMismatch


@dataclass(frozen=True, eq=False)
class EnvironmentSpec:
    """True dynamics: initial state law, action-conditioned transitions,
    and a sensor kernel. ``reward_values`` optionally tags each sensor
    symbol with the reward it carries.

    transition[a, e, e'] = P(next state e' | action a, state e)
    sensor[e, s]         = P(sensor s | state e)
    """

    env_alphabet: Alphabet
    sensor_alphabet: Alphabet
    action_alphabet: Alphabet
    initial: Categorical
    transition: np.ndarray
    sensor: np.ndarray
    reward_values: tuple = None

    def __post_init__(self):
        ne, ns, na = self.env_alphabet.size, self.sensor_alphabet.size, self.action_alphabet.size
        if self.initial.size != ne:
            raise ShapeMismatch(f"initial law has {self.initial.size} entries for {ne} states")
        object.__setattr__(self, "transition", clean_stochastic(self.transition, "transition", (na, ne, ne)))
        object.__setattr__(self, "sensor", clean_stochastic(self.sensor, "sensor", (ne, ns)))
        if self.reward_values is not None:
            rv = tuple(float(v) for v in self.reward_values)
            if len(rv) != ns:
                raise ShapeMismatch(f"reward_values has {len(rv)} entries for {ns} sensor symbols")
            object.__setattr__(self, "reward_values", rv)


@dataclass(frozen=True)
class History:
    """Immutable record of past (sensor, action) pairs, oldest first."""

    pairs: tuple = ()

    @classmethod
    def empty(cls):
        return cls(())

    def extended(self, sensor, action):
        return History(self.pairs + ((int(sensor), int(action)),))

    @property
    def sensors(self):
        return tuple(p[0] for p in self.pairs)

    @property
    def actions(self):
        return tuple(p[1] for p in self.pairs)

    def __len__(self):
        return len(self.pairs)


def env_step(spec, state, action, rng):
    """One environment tick: transition on the action, then emit a sensor.

    Draw order (transition first, sensor second) is part of the contract;
    reordering would silently change every seeded trajectory.
    """
    if state not in spec.env_alphabet:
        raise IndexOutOfAlphabet(f"environment state {state!r} outside alphabet of size {spec.env_alphabet.size}")
    if action not in spec.action_alphabet:
        raise IndexOutOfAlphabet(f"action {action!r} outside alphabet of size {spec.action_alphabet.size}")
    nxt = int(rng.choice(spec.env_alphabet.size, p=spec.transition[action, state]))
    sensor = int(rng.choice(spec.sensor_alphabet.size, p=spec.sensor[nxt]))
    return nxt, sensor


@dataclass(frozen=True)
class TrajectoryRecord:
    """Full log of one run: hidden states, sensors, actions, and whatever
    per-step diagnostics the agent reported."""

    env_states: tuple
    sensors: tuple
    actions: tuple
    diagnostics: tuple = field(default=())

    @property
    def steps(self):
        return len(self.actions)

    def to_lines(self):
        lines = []
        for t in range(self.steps):
            diag = self.diagnostics[t] if t < len(self.diagnostics) else {}
            row = {
                "step": t,
                "env_state": self.env_states[t],
                "sensor": self.sensors[t],
                "action": self.actions[t],
                "diagnostics": diag,
            }
            lines.append(json.dumps(row, sort_keys=True))
        return lines

    def write_jsonl(self, path):
        with open(path, "w") as fh:
            for line in self.to_lines():
                fh.write(line + "\n")

    @classmethod
    def read_jsonl(cls, path):
        env_states, sensors, actions, diags = [], [], [], []
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                row = json.loads(line)
                env_states.append(row["env_state"])
                sensors.append(row["sensor"])
                actions.append(row["action"])
                diags.append(row.get("diagnostics", {}))
        return cls(tuple(env_states), tuple(sensors), tuple(actions), tuple(diags))


def split_streams(seed):
    """Derive independent environment and agent RNG streams from one seed.

    Keeping the streams separate means the agent's internal sampling can
    never perturb the environment's randomness (and vice versa), so runs
    with different agents stay comparable.
    """
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    env_ss, agent_ss = root.spawn(2)
    return np.random.default_rng(env_ss), np.random.default_rng(agent_ss)


def run_loop(env, agent, steps, seed):
    """Run the loop for ``steps`` steps and return the trajectory.

    ``agent`` is a callable (history, rng) -> (action, diagnostics dict).
    The first history the agent sees is empty. Agent exceptions are
    wrapped in AgentStepError carrying the failing step index.
    """
    if steps < 1:
        raise InvalidDistribution(f"steps must be at least 1, got {steps}")
    env_rng, agent_rng = split_streams(seed)
    state = int(env_rng.choice(env.env_alphabet.size, p=env.initial.probs))

    history = History.empty()
    env_states, sensors, actions, diags = [], [], [], []
    for t in range(steps):
        try:
            action, diag = agent(history, agent_rng)
        except Exception as exc:
            raise AgentStepError(t, exc) from exc
        action = int(action)
        if action not in env.action_alphabet:
            raise AgentStepError(t, IndexOutOfAlphabet(
                f"agent chose action {action} outside alphabet of size {env.action_alphabet.size}"))
        state, sensor = env_step(env, state, action, env_rng)
        history = history.extended(sensor, action)
        env_states.append(state)
        sensors.append(sensor)
        actions.append(action)
        diags.append(diag if diag is not None else {})
    return TrajectoryRecord(tuple(env_states), tuple(sensors), tuple(actions), tuple(diags))
