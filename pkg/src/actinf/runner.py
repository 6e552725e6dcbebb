"""Experiment orchestration: run the loop, write every output file.

Outputs land in the config's directory: ``trajectory.jsonl`` (one line
per step, environment state included), ``diagnostics.jsonl`` (the agent's
per-step reports), ``manifest.json`` (the fully resolved settings; feed
it back as a config to reproduce the run byte for byte), and, when the
exact oracle is enabled and the agent has a variational side,
``geometry.csv`` with the posterior- and policy-space divergences.
"""

import csv
import json
import logging
import os
from dataclasses import dataclass

from . import geometry
from .agents import make_agent
from .exact import exact_active_posterior
from .loop import run_loop
from .model import format_action_seq
from .policy import greedy_action_sequence, induce_policy
from .variational import variational_posterior

log = logging.getLogger("actinf")

TRAJECTORY_FILE = "trajectory.jsonl"
DIAGNOSTICS_FILE = "diagnostics.jsonl"
MANIFEST_FILE = "manifest.json"
GEOMETRY_FILE = "geometry.csv"
COMPARISON_FILE = "comparison.csv"


@dataclass(frozen=True)
class ExperimentResult:
    record: object
    snapshots: tuple
    paths: dict


class _GeometryRecorder:
    """Wraps an agent so each step also measures the divergence geometry.

    Needs the exact posterior, so it is only armed when the oracle flag is
    on; for the exact-induced mode there is no variational object to
    measure, and the geometry file stays header-only.
    """

    def __init__(self, agent, config):
        self.agent = agent
        self.config = config
        self.snapshots = []

    def __call__(self, history, rng):
        action, diag = self.agent(history, rng)
        params = getattr(self.agent, "last_params", None)
        if params is not None:
            exact = exact_active_posterior(self.config.model, history)
            rho = getattr(self.agent, "last_rho", None)
            if rho is not None:
                s = rho.policy
            else:
                # two-stage mode: s is the sampled-from induced policy itself
                s = self.agent.last_policy
            snap = geometry.snapshot(exact, params, s, self.config.motivation(),
                                     self.config.gamma, step=len(history))
            self.snapshots.append(snap)
        return action, diag


def _write_diagnostics(record, path):
    with open(path, "w") as fh:
        for t, diag in enumerate(record.diagnostics):
            fh.write(json.dumps({"step": t, **diag}, sort_keys=True) + "\n")


def run_experiment(config):
    """Run one configured experiment and write its output files."""
    os.makedirs(config.out_dir, exist_ok=True)
    motivation = config.motivation()
    agent = make_agent(config.mode, config.model, motivation, config.gamma,
                       optimizer=config.optimizer)
    runner = _GeometryRecorder(agent, config) if config.enable_exact_oracle else agent

    record = run_loop(config.environment, runner, config.steps, config.seed)

    paths = {
        "trajectory": os.path.join(config.out_dir, TRAJECTORY_FILE),
        "diagnostics": os.path.join(config.out_dir, DIAGNOSTICS_FILE),
        "manifest": os.path.join(config.out_dir, MANIFEST_FILE),
    }
    record.write_jsonl(paths["trajectory"])
    _write_diagnostics(record, paths["diagnostics"])

    manifest = dict(config.resolved)
    manifest["package_version"] = _package_version()
    with open(paths["manifest"], "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")

    snapshots = ()
    if config.enable_exact_oracle:
        snapshots = tuple(runner.snapshots)
        paths["geometry"] = os.path.join(config.out_dir, GEOMETRY_FILE)
        geometry.export_csv(snapshots, paths["geometry"])

    for name, path in paths.items():
        log.info("wrote %s: %s", name, path)
    return ExperimentResult(record=record, snapshots=snapshots, paths=paths)


def _package_version():
    try:
        from importlib.metadata import version
        return version("actinf")
    except Exception:
        return "unknown"


class _ModeProbe:
    """Agent wrapper for compare_modes that keeps per-step policy views."""

    def __init__(self, agent, config):
        self.agent = agent
        self.config = config
        self.rows = []

    def __call__(self, history, rng):
        action, diag = self.agent(history, rng)
        rho = getattr(self.agent, "last_rho", None)
        if rho is not None:
            policy = rho.policy
            d1, d2, total = diag["d1"], diag["d2"], diag["total"]
            f_map = diag["free_energy"]
        else:
            policy = self.agent.last_policy
            d1 = d2 = total = ""
            f_map = diag.get("free_energy", {})
        self.rows.append({
            "step": len(history),
            "mode": self.agent.mode,
            "action": int(action),
            "greedy_seq": format_action_seq(greedy_action_sequence(policy)),
            "policy": ";".join(f"{k}={v:.17g}" for k, v in
                               zip((format_action_seq(s) for s in policy.action_seqs),
                                   policy.as_array())),
            "f_values": ";".join(f"{k}={float(v):.17g}" for k, v in f_map.items()),
            "d1": d1 if d1 == "" else f"{d1:.17g}",
            "d2": d2 if d2 == "" else f"{d2:.17g}",
            "total": total if total == "" else f"{total:.17g}",
        })
        return action, diag


COMPARISON_COLUMNS = ("step", "mode", "action", "greedy_seq", "policy",
                      "f_values", "d1", "d2", "total")


def compare_modes(config, modes):
    """Run each mode on the same seed-split and tabulate them side by side.

    Every mode sees identical environment randomness and identical agent
    randomness, so rows differ only through the agents' decisions.
    Returns the rows and writes comparison.csv in the output directory.
    """
    rows = []
    for mode in modes:
        agent = make_agent(mode, config.model, config.motivation(), config.gamma,
                           optimizer=config.optimizer)
        probe = _ModeProbe(agent, config)
        run_loop(config.environment, probe, config.steps, config.seed)
        rows.extend(probe.rows)
    rows.sort(key=lambda r: (r["step"], r["mode"]))

    os.makedirs(config.out_dir, exist_ok=True)
    path = os.path.join(config.out_dir, COMPARISON_FILE)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=COMPARISON_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)
    log.info("wrote comparison: %s", path)
    return rows, path
