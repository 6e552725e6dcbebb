"""Experiment configuration: one YAML file, five sections, strict checks.

Sections: ``environment`` (true dynamics), ``model`` (the agent's
generative model, inline or a path to a separate model file), ``agent``
(mode, motivation, gamma, optimizer knobs), ``run`` (steps, seed, oracle
switch), ``output`` (directory). Kernel tables are row-major lists; every
row must be a distribution.

Every declared invariant is checked at load time, and every complaint
carries the dotted field path plus the source line when the YAML parser
saw one. The fully resolved mapping (after CLI overrides) is what the
manifest echoes, and feeding a manifest back in reproduces the run.
"""

import os
from dataclasses import dataclass

import numpy as np
import yaml

from .core import Alphabet, Categorical
from .errors import ActinfError, ConfigError
from .loop import EnvironmentSpec
from .model import GenerativeModelSpec, Horizon, ThetaPoint, ThetaSupport
from .motivation import RewardStructure, entropy_motivation, reward_motivation

_LINES_KEY = "__lines__"
_MISSING = object()

MOTIVATIONS = ("expected-reward", "negative-entropy")


class _LineLoader(yaml.SafeLoader):
    """SafeLoader that stashes each mapping key's source line."""


def _construct_mapping(loader, node):
    loader.flatten_mapping(node)
    pairs = loader.construct_pairs(node, deep=True)
    data = {}
    lines = {}
    for (key, value), (key_node, _) in zip(pairs, node.value):
        data[key] = value
        lines[key] = key_node.start_mark.line + 1
    data[_LINES_KEY] = lines
    return data


_LineLoader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_mapping)


def load_mapping(path):
    """Parse a YAML file into (mapping, same mapping with line info kept)."""
    try:
        with open(path) as fh:
            data = yaml.load(fh, Loader=_LineLoader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ConfigError(str(path), f"not valid YAML: {exc}", line=line) from exc
    if not isinstance(data, dict):
        raise ConfigError(str(path), "top level must be a mapping of sections")
    return data


class _Section:
    """A mapping plus its dotted path, for error messages with line numbers."""

    def __init__(self, data, path):
        if not isinstance(data, dict):
            raise ConfigError(path, "must be a mapping")
        self.data = data
        self.path = path

    def _line(self, key):
        return self.data.get(_LINES_KEY, {}).get(key)

    def fail(self, key, message):
        raise ConfigError(f"{self.path}.{key}", message, line=self._line(key))

    def keys(self):
        return [k for k in self.data if k != _LINES_KEY]

    def has(self, key):
        return key in self.data

    def get(self, key, default=_MISSING):
        if key not in self.data:
            if default is _MISSING:
                self.fail(key, "is required")
            return default
        return self.data[key]

    def child(self, key, default=_MISSING):
        value = self.get(key, default)
        if value is default and default is not _MISSING:
            return None
        return _Section(value, f"{self.path}.{key}") if isinstance(value, dict) \
            else self.fail(key, "must be a mapping")

    def number(self, key, default=_MISSING, kind=float, minimum=None):
        value = self.get(key, default)
        if value is default and default is not _MISSING:
            return default
        try:
            value = kind(value)
        except (TypeError, ValueError):
            self.fail(key, f"must be a {kind.__name__}, got {value!r}")
        if minimum is not None and value < minimum:
            self.fail(key, f"must be at least {minimum}, got {value}")
        return value

    def flag(self, key, default):
        value = self.get(key, default)
        if isinstance(value, bool):
            return value
        if isinstance(value, str) and value.lower() in ("true", "false"):
            return value.lower() == "true"
        self.fail(key, f"must be a boolean, got {value!r}")

    def check_known(self, known):
        for key in self.keys():
            if key not in known:
                self.fail(key, f"unknown field (expected one of {sorted(known)})")


def _build(section, key, builder):
    """Run a spec constructor, relabeling its complaints with the config path."""
    try:
        return builder()
    except ActinfError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{section.path}.{key}", str(exc), line=section._line(key)) from exc


@dataclass(frozen=True)
class OptimizerOptions:
    """Inner CAVI and outer alternation tolerances, all overridable."""

    tol: float = 1e-10
    max_iters: int = 500
    outer_tol: float = 1e-8
    outer_iters: int = 50
    sweeps: int = 1


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    environment: EnvironmentSpec
    model: GenerativeModelSpec
    mode: str
    motivation_name: str
    rewards: object
    gamma: float
    steps: int
    seed: int
    enable_exact_oracle: bool
    out_dir: str
    optimizer: OptimizerOptions
    resolved: dict

    def motivation(self):
        if self.motivation_name == "expected-reward":
            return reward_motivation(self.rewards)
        return entropy_motivation()


def _environment_from(section):
    section.check_known({"env_size", "sensor_size", "action_size", "initial",
                         "transition", "sensor", "reward_values"})
    ne = section.number("env_size", kind=int, minimum=1)
    ns = section.number("sensor_size", kind=int, minimum=1)
    na = section.number("action_size", kind=int, minimum=1)
    initial = _build(section, "initial", lambda: Categorical(np.asarray(section.get("initial"), dtype=float)))
    rewards = section.get("reward_values", None)
    return _build(section, "transition", lambda: EnvironmentSpec(
        env_alphabet=Alphabet(ne), sensor_alphabet=Alphabet(ns), action_alphabet=Alphabet(na),
        initial=initial, transition=np.asarray(section.get("transition"), dtype=float),
        sensor=np.asarray(section.get("sensor"), dtype=float),
        reward_values=tuple(rewards) if rewards is not None else None))


def _horizon_from(section):
    section.check_known({"mode", "n", "final_step"})
    mode = section.get("mode")
    if mode == "rolling":
        return _build(section, "n", lambda: Horizon("rolling", section.number("n", kind=int, minimum=0)))
    if mode == "fixed":
        return _build(section, "final_step",
                      lambda: Horizon("fixed", section.number("final_step", kind=int, minimum=0)))
    section.fail("mode", f"must be rolling or fixed, got {mode!r}")


def _theta_point_from(section, ne, ns, na):
    section.check_known({"sensor", "transition", "initial"})
    return _build(section, "sensor", lambda: ThetaPoint(
        sensor=np.asarray(section.get("sensor"), dtype=float),
        transition=np.asarray(section.get("transition"), dtype=float),
        initial=np.asarray(section.get("initial"), dtype=float)))


def model_from_mapping(data, path, environment=None, enum_cap_override=None):
    """Build the generative model from a mapping (inline section or file)."""
    section = _Section(data, path)
    section.check_known({"env_size", "sensor_size", "action_size", "horizon", "theta", "enum_cap"})
    ne = section.number("env_size", kind=int, minimum=1)
    ns = section.number("sensor_size", default=None, kind=int, minimum=1)
    na = section.number("action_size", default=None, kind=int, minimum=1)
    if environment is not None:
        if ns is not None and ns != environment.sensor_alphabet.size:
            section.fail("sensor_size",
                         f"{path}.sensor_size ({ns}) must equal environment.sensor_size "
                         f"({environment.sensor_alphabet.size})")
        if na is not None and na != environment.action_alphabet.size:
            section.fail("action_size",
                         f"{path}.action_size ({na}) must equal environment.action_size "
                         f"({environment.action_alphabet.size})")
        ns = environment.sensor_alphabet.size
        na = environment.action_alphabet.size
    if ns is None:
        section.fail("sensor_size", "is required when no environment fixes it")
    if na is None:
        section.fail("action_size", "is required when no environment fixes it")

    horizon = _horizon_from(section.child("horizon"))
    theta_sec = section.child("theta")
    theta_sec.check_known({"prior", "points"})
    points_raw = theta_sec.get("points")
    if not isinstance(points_raw, list) or not points_raw:
        theta_sec.fail("points", "must be a non-empty list of parameter points")
    points = tuple(_theta_point_from(_Section(p, f"{theta_sec.path}.points[{i}]"), ne, ns, na)
                   for i, p in enumerate(points_raw))
    prior = _build(theta_sec, "prior",
                   lambda: Categorical(np.asarray(theta_sec.get("prior"), dtype=float)))
    support = _build(theta_sec, "points", lambda: ThetaSupport(points=points, prior=prior))
    cap = section.number("enum_cap", default=1_000_000, kind=int, minimum=1)
    if enum_cap_override is not None:
        cap = int(enum_cap_override)
    return _build(section, "theta", lambda: GenerativeModelSpec(
        env_alphabet=Alphabet(ne), sensor_alphabet=Alphabet(ns), action_alphabet=Alphabet(na),
        theta=support, horizon=horizon, enum_cap=cap))


def load_model_spec(path, environment=None, enum_cap_override=None):
    """Load a standalone model file."""
    data = load_mapping(path)
    return model_from_mapping(data, "model", environment=environment,
                              enum_cap_override=enum_cap_override)


def _listify(arr):
    return np.asarray(arr, dtype=float).tolist()


def _resolved_mapping(config):
    """Canonical mapping of every runtime-relevant setting; this is what
    the manifest stores, and it parses straight back into the same config."""
    env = config.environment
    env_map = {
        "env_size": env.env_alphabet.size,
        "sensor_size": env.sensor_alphabet.size,
        "action_size": env.action_alphabet.size,
        "initial": _listify(env.initial.probs),
        "transition": _listify(env.transition),
        "sensor": _listify(env.sensor),
    }
    if env.reward_values is not None:
        env_map["reward_values"] = list(env.reward_values)

    model = config.model
    horizon = {"mode": model.horizon.mode}
    if model.horizon.mode == "rolling":
        horizon["n"] = model.horizon.value
    else:
        horizon["final_step"] = model.horizon.value
    model_map = {
        "env_size": model.env_alphabet.size,
        "sensor_size": model.sensor_alphabet.size,
        "action_size": model.action_alphabet.size,
        "horizon": horizon,
        "enum_cap": model.enum_cap,
        "theta": {
            "prior": _listify(model.theta.prior.probs),
            "points": [{"initial": _listify(p.initial),
                        "transition": _listify(p.transition),
                        "sensor": _listify(p.sensor)} for p in model.theta.points],
        },
    }

    agent_map = {
        "mode": config.mode,
        "gamma": config.gamma,
        "motivation": config.motivation_name,
        "optimizer": {
            "tol": config.optimizer.tol,
            "max_iters": config.optimizer.max_iters,
            "outer_tol": config.optimizer.outer_tol,
            "outer_iters": config.optimizer.outer_iters,
            "sweeps": config.optimizer.sweeps,
        },
    }
    if config.rewards is not None:
        agent_map["rewards"] = {int(i): float(v) for i, v in enumerate(config.rewards.values)}

    return {
        "environment": env_map,
        "model": model_map,
        "agent": agent_map,
        "run": {"steps": config.steps, "seed": config.seed,
                "enable_exact_oracle": config.enable_exact_oracle},
        "output": {"directory": config.out_dir},
    }


def build_config(data, base_dir=".", overrides=None):
    """Validate a raw mapping into an ExperimentConfig.

    ``overrides`` maps {seed, steps, mode, gamma, out, enable_exact_oracle,
    enum_cap} to replacement values (None entries ignored); the resolved
    mapping records the final values after overrides.
    """
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}

    root = _Section(data, "config")
    root.check_known({"environment", "model", "agent", "run", "output", "package_version"})
    environment = _environment_from(root.child("environment"))

    model_value = root.get("model")
    run = root.child("run")
    run.check_known({"steps", "seed", "enable_exact_oracle", "enum_cap"})
    enum_cap_override = overrides.get("enum_cap", run.number("enum_cap", default=None, kind=int, minimum=1))
    if isinstance(model_value, str):
        model_path = model_value if os.path.isabs(model_value) else os.path.join(base_dir, model_value)
        model = load_model_spec(model_path, environment=environment,
                                enum_cap_override=enum_cap_override)
    else:
        model = model_from_mapping(model_value, "model", environment=environment,
                                   enum_cap_override=enum_cap_override)

    agent = root.child("agent")
    agent.check_known({"mode", "gamma", "motivation", "rewards", "optimizer"})
    mode = overrides.get("mode", agent.get("mode"))
    from .agents import MODES
    if mode not in MODES:
        agent.fail("mode", f"must be one of {list(MODES)}, got {mode!r}")
    gamma = float(overrides.get("gamma", agent.number("gamma", default=1.0)))
    if not gamma >= 0:
        agent.fail("gamma", f"must be non-negative, got {gamma}")
    motivation_name = agent.get("motivation", "expected-reward")
    if motivation_name not in MOTIVATIONS:
        agent.fail("motivation", f"must be one of {list(MOTIVATIONS)}, got {motivation_name!r}")
    rewards = None
    if motivation_name == "expected-reward":
        mapping = agent.get("rewards", None)
        if mapping is None:
            if environment.reward_values is not None:
                rewards = RewardStructure(np.asarray(environment.reward_values))
            else:
                agent.fail("rewards", "is required for the expected-reward motivation "
                                      "(or set environment.reward_values)")
        else:
            if not isinstance(mapping, dict):
                agent.fail("rewards", "must be a mapping of sensor symbol to value")
            clean = {k: v for k, v in mapping.items() if k != _LINES_KEY}
            rewards = _build(agent, "rewards", lambda: RewardStructure.from_mapping(
                clean, environment.sensor_alphabet.size))

    opt_sec = agent.child("optimizer", None)
    if opt_sec is None:
        optimizer = OptimizerOptions()
    else:
        opt_sec.check_known({"tol", "max_iters", "outer_tol", "outer_iters", "sweeps"})
        optimizer = OptimizerOptions(
            tol=opt_sec.number("tol", default=1e-10, minimum=0.0),
            max_iters=opt_sec.number("max_iters", default=500, kind=int, minimum=1),
            outer_tol=opt_sec.number("outer_tol", default=1e-8, minimum=0.0),
            outer_iters=opt_sec.number("outer_iters", default=50, kind=int, minimum=1),
            sweeps=opt_sec.number("sweeps", default=1, kind=int, minimum=1))

    steps = int(overrides.get("steps", run.number("steps", kind=int, minimum=1)))
    seed = int(overrides.get("seed", run.number("seed", default=0, kind=int)))
    oracle = overrides.get("enable_exact_oracle", run.flag("enable_exact_oracle", False))
    if isinstance(oracle, str):
        oracle = oracle.lower() == "true"

    output = root.child("output", None)
    out_dir = "out"
    if output is not None:
        output.check_known({"directory"})
        out_dir = output.get("directory", "out")
    out_dir = str(overrides.get("out", out_dir))

    if model.horizon.mode == "fixed" and steps - 1 > model.horizon.value:
        run.fail("steps", f"run.steps ({steps}) exceeds model.horizon.final_step "
                          f"({model.horizon.value}) + 1")

    config = ExperimentConfig(environment=environment, model=model, mode=mode,
                              motivation_name=motivation_name, rewards=rewards,
                              gamma=gamma, steps=steps, seed=seed,
                              enable_exact_oracle=bool(oracle), out_dir=out_dir,
                              optimizer=optimizer, resolved={})
    object.__setattr__(config, "resolved", _resolved_mapping(config))
    return config


def load_config(path, overrides=None):
    data = load_mapping(path)
    return build_config(data, base_dir=os.path.dirname(os.path.abspath(path)),
                        overrides=overrides)
