"""The three agent modes, packaged as loop callbacks.

Each agent maps (history, rng) to (action, diagnostics dict). All three
replan from scratch every step: the model re-conditions on the full
history, so there is no belief state to carry.

exact-induced:        exact posteriors, then the induced softmax policy.
variational-induced:  coordinate-descent posteriors, then the same softmax.
active-inference:     the combined objective, sampling from the s policy.
"""

from . import combined as combined_mod
from . import variational as variational_mod
from .exact import exact_active_posterior
from .model import format_action_seq
from .policy import induce_policy

MODES = ("exact-induced", "variational-induced", "active-inference")


def _policy_diag(policy):
    return {format_action_seq(seq): float(p)
            for seq, p in zip(policy.action_seqs, policy.as_array())}


class ExactInducedAgent:
    """Two-stage pipeline with exact inference."""

    mode = "exact-induced"

    def __init__(self, model, motivation, gamma):
        self.model = model
        self.motivation = motivation
        self.gamma = float(gamma)
        self.last_posterior = None
        self.last_policy = None

    def __call__(self, history, rng):
        posterior = exact_active_posterior(self.model, history)
        policy = induce_policy(posterior, self.motivation, self.gamma)
        seq = policy.sample(rng)
        self.last_posterior = posterior
        self.last_policy = policy
        diag = {
            "t": len(history),
            "mode": self.mode,
            "policy": _policy_diag(policy),
            "log_evidence": {format_action_seq(s): float(v)
                             for s, v in zip(posterior.action_seqs, posterior.log_evidences)},
            "chosen_seq": format_action_seq(seq),
        }
        return seq[0], diag


class VariationalInducedAgent:
    """Two-stage pipeline with mean-field inference."""

    mode = "variational-induced"

    def __init__(self, model, motivation, gamma, tol=variational_mod.DEFAULT_TOL,
                 max_iters=variational_mod.DEFAULT_MAX_ITERS):
        self.model = model
        self.motivation = motivation
        self.gamma = float(gamma)
        self.tol = tol
        self.max_iters = max_iters
        self.last_params = None
        self.last_policy = None

    def __call__(self, history, rng):
        params, report = variational_mod.optimize_all(self.model, history,
                                                      tol=self.tol, max_iters=self.max_iters)
        policy = induce_policy(variational_mod.variational_posterior(params),
                               self.motivation, self.gamma)
        seq = policy.sample(rng)
        self.last_params = params
        self.last_policy = policy
        diag = {
            "t": len(history),
            "mode": self.mode,
            "policy": _policy_diag(policy),
            "free_energy": {format_action_seq(s): float(v) for s, v in report.values.items()},
            "chosen_seq": format_action_seq(seq),
        }
        return seq[0], diag


class ActiveInferenceAgent:
    """Single combined objective over (posterior blocks, s policy)."""

    mode = "active-inference"

    def __init__(self, model, motivation, gamma, opts=None):
        self.model = model
        self.motivation = motivation
        self.gamma = float(gamma)
        self.opts = opts if opts is not None else combined_mod.ActiveInferenceOptions()
        self.last_params = None
        self.last_rho = None

    def __call__(self, history, rng):
        params, rho, trace, action = combined_mod.active_inference_step(
            self.model, history, self.motivation, self.gamma, opts=self.opts, rng=rng)
        self.last_params = params
        self.last_rho = rho
        last = trace[-1]
        diag = {
            "t": len(history),
            "mode": self.mode,
            "free_energy": {format_action_seq(s): float(v) for s, v in last.f_values.items()},
            "d1": last.d1,
            "d2": last.d2,
            "total": last.total,
            "joint_form": last.joint_form,
            "outer_iterations": len(trace),
            "s_policy": _policy_diag(rho.policy),
            "chosen_action": int(action),
        }
        return action, diag


def make_agent(mode, model, motivation, gamma, optimizer=None):
    """Agent factory used by the runner; ``optimizer`` carries tolerances."""
    if mode == "exact-induced":
        return ExactInducedAgent(model, motivation, gamma)
    if mode == "variational-induced":
        kwargs = {}
        if optimizer is not None:
            kwargs = {"tol": optimizer.tol, "max_iters": optimizer.max_iters}
        return VariationalInducedAgent(model, motivation, gamma, **kwargs)
    if mode == "active-inference":
        opts = None
        if optimizer is not None:
            opts = combined_mod.ActiveInferenceOptions(tol=optimizer.outer_tol,
                                                       max_iters=optimizer.outer_iters,
                                                       sweeps=optimizer.sweeps)
        return ActiveInferenceAgent(model, motivation, gamma, opts=opts)
    raise ValueError(f"unknown agent mode {mode!r} (expected one of {MODES})")
