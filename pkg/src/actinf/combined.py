"""Joint inference and action selection under one objective.

The objective splits into two named parts: D1, the policy-weighted sum of
per-sequence free energies, and D2, the divergence from the free policy s
to the policy induced by the variational posterior. The same quantity can
be written as a single divergence over the product space of (action
sequence, joint assignment); both forms are computed independently every
time and must agree, which is the engine's standing self-check.

Minimizing over s alone has a closed form: reweight the induced policy by
e^(-F) and renormalize. Alternating that exact update with per-sequence
coordinate sweeps gives the step routine agents call.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .core import Categorical, kl_divergence, softmax
from .errors import ActinfError, DegenerateNormalizer, ModelZero, NumericalInconsistency
from .model import format_action_seq
from .policy import PolicyDistribution, induce_policy
from .variational import VariationalParams, _BlockProblem, variational_posterior

OUTER_TOL = 1e-8
OUTER_MAX_ITERS = 50


@dataclass(frozen=True, eq=False)
class ThirdPolicyParams:
    """The free policy s over action sequences.

    Normally held directly as a distribution (the closed-form update
    produces one); ``from_logits`` keeps the door open for parameterized
    variants, mapping raw reals through a unit-temperature softmax.
    """

    policy: PolicyDistribution

    def __post_init__(self):
        if self.policy.provenance != "third-policy":
            object.__setattr__(self, "policy", PolicyDistribution(
                self.policy.action_seqs, self.policy.probs, "third-policy"))

    @classmethod
    def direct(cls, action_seqs, probs):
        cat = probs if isinstance(probs, Categorical) else Categorical(np.asarray(probs, dtype=float))
        return cls(PolicyDistribution(tuple(action_seqs), cat, "third-policy"))

    @classmethod
    def from_logits(cls, action_seqs, logits):
        return cls(PolicyDistribution(tuple(action_seqs), softmax(np.asarray(logits, dtype=float), 1.0),
                                      "third-policy"))


@dataclass(frozen=True)
class ObjectiveBreakdown:
    """One evaluation of the combined objective, all parts spelled out.

    Construction re-derives total = D1 + D2 and insists the independently
    accumulated joint form agrees to 1e-9; a silent mismatch would mean
    the two computations no longer measure the same thing.
    """

    d1: float
    d2: float
    total: float
    joint_form: float
    f_values: dict = field(compare=False)

    def __post_init__(self):
        if abs(self.total - (self.d1 + self.d2)) > 1e-10:
            raise NumericalInconsistency(
                f"total {self.total!r} drifted from D1+D2 {self.d1 + self.d2!r}")
        if abs(self.joint_form - self.total) > 1e-9:
            raise NumericalInconsistency(
                f"joint form {self.joint_form!r} disagrees with D1+D2 {self.total!r} "
                f"by {abs(self.joint_form - self.total):.3e}")


def _breakdown_from_problems(problems, params, rho, m, gamma):
    seqs = tuple(problems)
    s = rho.policy
    if s.action_seqs != seqs or params.action_seqs != seqs:
        raise ActinfError("policy, variational blocks, and problems must cover the same sequences")

    f_values = {seq: problems[seq].free_energy_of_block(params.block_for(seq)) for seq in seqs}
    r_ind = induce_policy(variational_posterior(params), m, gamma)

    s_arr = s.as_array()
    r_arr = r_ind.as_array()
    d2 = kl_divergence(s_arr, r_arr)
    d1 = float(sum(s_arr[i] * f_values[seq] for i, seq in enumerate(seqs)))

    joint = 0.0
    for i, seq in enumerate(seqs):
        if s_arr[i] <= 0.0:
            continue
        problem = problems[seq]
        packed = kernels.pack_factors(params.block_for(seq).factors, problem.dims)
        val, bad = kernels.active.policy_weighted_divergence(
            problem.L, problem.dims, packed, float(s_arr[i]), float(np.log(r_arr[i])))
        if bad >= 0:
            raise ModelZero(f"policy-weighted mass on an impossible assignment "
                            f"(flat cell {bad}, sequence {format_action_seq(seq)})")
        joint += val
    return ObjectiveBreakdown(d1=d1, d2=d2, total=d1 + d2, joint_form=joint, f_values=f_values)


def combined_objective(spec, history, params, rho, m, gamma):
    """Evaluate D1 + D2 and the equivalent single-divergence form.

    Raises SupportViolation if s places mass on a sequence the induced
    policy rules out (through the D2 divergence), and ModelZero if the
    weighted mass lands on an impossible assignment.
    """
    problems = {seq: _BlockProblem(spec, history, seq) for seq in params.action_seqs}
    return _breakdown_from_problems(problems, params, rho, m, gamma)


def optimal_third_policy(params, f_values, m, gamma):
    """Exact minimizer of the objective over s: induced policy reweighted
    by e^(-F), renormalized in log space."""
    r_ind = induce_policy(variational_posterior(params), m, gamma)
    seqs = r_ind.action_seqs
    r_arr = r_ind.as_array()
    f_arr = np.array([float(f_values[seq]) for seq in seqs])
    with np.errstate(divide="ignore"):
        log_s = np.where(r_arr > 0.0, np.log(np.where(r_arr > 0.0, r_arr, 1.0)), -math.inf) - f_arr
    peak = float(np.max(log_s))
    if peak == -math.inf or not math.isfinite(peak):
        raise DegenerateNormalizer("every candidate mass vanished in the s update")
    w = np.exp(log_s - peak)
    total = float(w.sum())
    if total <= 0.0:
        raise DegenerateNormalizer("every candidate mass vanished in the s update")
    return PolicyDistribution(seqs, Categorical(w / total), "third-policy")


@dataclass(frozen=True)
class ActiveInferenceOptions:
    """Knobs for the alternating scheme: outer stopping tolerance on the
    total objective, outer iteration cap, and coordinate sweeps per
    outer iteration."""

    tol: float = OUTER_TOL
    max_iters: int = OUTER_MAX_ITERS
    sweeps: int = 1


def active_inference_step(spec, history, m, gamma, opts=None, rng=None):
    """One planning step: fit (variational blocks, s) by alternation, then
    sample an action sequence from s and return its first action.

    Per outer iteration: every block takes ``opts.sweeps`` coordinate
    sweeps (blocks only feel D1, and their argmins are independent of the
    s-weights), then s is set to its exact minimizer, then the full
    breakdown is logged. Stops when the total objective moves by less
    than ``opts.tol``. Returns (params, rho, breakdown trace, action).
    """
    opts = opts if opts is not None else ActiveInferenceOptions()
    rng = rng if rng is not None else np.random.default_rng()
    t = len(history)
    seqs = spec.action_sequences(t)
    problems = {seq: _BlockProblem(spec, history, seq) for seq in seqs}
    layout = spec.layout_for(t)
    params = VariationalParams.tilted_uniform(spec, history)
    schedule = tuple(range(layout.ndim))

    trace = []
    prev_total = None
    rho = None
    for _ in range(opts.max_iters):
        blocks = {}
        for seq in seqs:
            block = params.block_for(seq)
            for _ in range(opts.sweeps):
                block = problems[seq].sweep(block, schedule)
            blocks[seq] = block
        params = VariationalParams(layout, blocks)
        f_values = {seq: problems[seq].free_energy_of_block(blocks[seq]) for seq in seqs}
        rho = ThirdPolicyParams(optimal_third_policy(params, f_values, m, gamma))
        breakdown = _breakdown_from_problems(problems, params, rho, m, gamma)
        trace.append(breakdown)
        if prev_total is not None and abs(prev_total - breakdown.total) < opts.tol:
            break
        prev_total = breakdown.total

    chosen = rho.policy.sample(rng)
    return params, rho, trace, chosen[0]
