"""Mean-field variational posterior and its coordinate-descent fit.

Each candidate action sequence gets its own block of independent factors
(one per tensor axis: parameter, each latent state, each free sensor).
Blocks never interact, so fitting all of them is an embarrassingly
separable loop. Coordinate updates are the classic closed form: the new
log factor for axis j is the expected joint log-probability under the
other factors, renormalized.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .constants import EFFECTIVE_ZERO, FACTOR_FLOOR, ZERO_LOG_THRESHOLD
from .core import Categorical, JointTable
from .errors import (
    BlockOptimizationError,
    ModelZero,
    NonDecreasingGuard,
    NumericalInconsistency,
    ShapeMismatch,
)
from .exact import ActivePosteriorTable
from .model import format_action_seq

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITERS = 500

# relative size of the symmetry-breaking tilt in the default init
_TILT = 1e-9


@dataclass(frozen=True, eq=False)
class MeanFieldBlock:
    """Fully factorized distribution over one action sequence's joint."""

    layout: object
    factors: tuple

    def __post_init__(self):
        if len(self.factors) != self.layout.ndim:
            raise ShapeMismatch(f"block needs {self.layout.ndim} factors, got {len(self.factors)}")
        cleaned = []
        for ax, f in enumerate(self.factors):
            cat = f if isinstance(f, Categorical) else Categorical(np.asarray(f, dtype=float))
            if cat.size != self.layout.shape[ax]:
                raise ShapeMismatch(f"factor {ax} has {cat.size} entries, axis needs {self.layout.shape[ax]}")
            cleaned.append(cat.probs)
        object.__setattr__(self, "factors", tuple(cleaned))

    @classmethod
    def uniform(cls, layout):
        return cls(layout, tuple(np.full(d, 1.0 / d) for d in layout.shape))

    @classmethod
    def tilted_uniform(cls, layout):
        """Near-uniform start with a tiny weight advantage for lower indices.

        An exactly uniform block can be a stationary point of the
        coordinate update in models with hard zeros (every logit equally
        impossible), leaving infinite free energy forever. The tilt is far
        below any reported tolerance but breaks those ties immediately,
        and deterministically, favoring lexicographically smaller states.
        """
        factors = []
        for d in layout.shape:
            w = 1.0 + _TILT * (np.arange(d, dtype=float)[::-1] / max(d - 1, 1))
            factors.append(w / w.sum())
        return cls(layout, tuple(factors))

    @classmethod
    def random(cls, layout, rng):
        return cls(layout, tuple(rng.dirichlet(np.ones(d)) for d in layout.shape))

    def replace(self, axis, probs):
        fs = list(self.factors)
        fs[axis] = probs
        return MeanFieldBlock(self.layout, tuple(fs))

    def joint_values(self):
        """Dense product of the factors (the block's implied joint).

        Entries at or below the floor-dust threshold are reported as
        exact zeros: they exist only because factor updates floor their
        entries, and letting them count as support would make every
        divergence against a table with hard zeros spuriously infinite.
        """
        ndim = self.layout.ndim
        out = np.ones((1,) * ndim)
        for ax, f in enumerate(self.factors):
            shape = [1] * ndim
            shape[ax] = f.shape[0]
            out = out * f.reshape(shape)
        return np.where(out <= EFFECTIVE_ZERO, 0.0, out)

    def joint_table(self):
        return JointTable(self.joint_values(), normalized=True)


@dataclass(frozen=True, eq=False)
class VariationalParams:
    """One mean-field block per candidate action sequence."""

    layout: object
    blocks: dict

    def __post_init__(self):
        object.__setattr__(self, "blocks", dict(self.blocks))

    @classmethod
    def uniform(cls, spec, history):
        t = len(history)
        layout = spec.layout_for(t)
        return cls(layout, {seq: MeanFieldBlock.uniform(layout) for seq in spec.action_sequences(t)})

    @classmethod
    def tilted_uniform(cls, spec, history):
        t = len(history)
        layout = spec.layout_for(t)
        return cls(layout, {seq: MeanFieldBlock.tilted_uniform(layout)
                            for seq in spec.action_sequences(t)})

    @classmethod
    def random(cls, spec, history, rng):
        t = len(history)
        layout = spec.layout_for(t)
        return cls(layout, {seq: MeanFieldBlock.random(layout, rng) for seq in spec.action_sequences(t)})

    @property
    def action_seqs(self):
        return tuple(self.blocks)

    def block_for(self, action_seq):
        return self.blocks[tuple(action_seq)]

    def with_block(self, action_seq, block):
        new = dict(self.blocks)
        new[tuple(action_seq)] = block
        return VariationalParams(self.layout, new)


@dataclass(frozen=True)
class FreeEnergyReport:
    """Per-action-sequence free energies, plus evidence gaps when the
    exact oracle was consulted. A negative gap beyond slack would mean the
    bound is broken, so it is rejected outright."""

    values: dict
    gaps: dict = None

    def __post_init__(self):
        if self.gaps is not None:
            for seq, gap in self.gaps.items():
                if gap < -1e-9:
                    raise NumericalInconsistency(
                        f"free energy undercuts the evidence bound by {-gap:.3e} for sequence {seq}")


class _BlockProblem:
    """The dense tensor for one (history, action sequence), built once."""

    def __init__(self, spec, history, action_seq):
        self.action_seq = tuple(int(a) for a in action_seq)
        self.L, self.layout = spec.build_log_tensor(history, self.action_seq)
        self.dims = self.layout.dims()

    def _mass_label(self):
        return format_action_seq(self.action_seq)

    def free_energy_of_block(self, block):
        packed = kernels.pack_factors(block.factors, self.dims)
        f, ce, h, bad = kernels.active.free_energy_terms(self.L, self.dims, packed)
        if bad >= 0:
            raise ModelZero(f"variational mass on an impossible assignment "
                            f"(flat cell {bad}, sequence {self._mass_label()})")
        if abs(f - (ce - h)) > 1e-10:
            raise NumericalInconsistency(
                f"free-energy decomposition drifted by {abs(f - (ce - h)):.3e}")
        return float(f)

    def free_energy_of_table(self, values):
        r = np.asarray(values, dtype=float).reshape(-1)
        if r.shape != self.L.shape:
            raise ShapeMismatch(f"table has {r.shape[0]} cells, tensor has {self.L.shape[0]}")
        mask = r >= EFFECTIVE_ZERO
        if np.any(mask & (self.L <= ZERO_LOG_THRESHOLD)):
            bad = int(np.flatnonzero(mask & (self.L <= ZERO_LOG_THRESHOLD))[0])
            raise ModelZero(f"posterior mass on an impossible assignment "
                            f"(flat cell {bad}, sequence {self._mass_label()})")
        rp = r[mask]
        lq = self.L[mask]
        ce = float(-np.sum(rp * lq))
        h = float(-np.sum(rp * np.log(rp)))
        f = float(np.sum(rp * (np.log(rp) - lq)))
        if abs(f - (ce - h)) > 1e-10:
            raise NumericalInconsistency(
                f"free-energy decomposition drifted by {abs(f - (ce - h)):.3e}")
        return f

    def free_energy(self, dist):
        if isinstance(dist, MeanFieldBlock):
            return self.free_energy_of_block(dist)
        if isinstance(dist, VariationalParams):
            return self.free_energy_of_block(dist.block_for(self.action_seq))
        if isinstance(dist, JointTable):
            return self.free_energy_of_table(dist.values)
        return self.free_energy_of_table(dist)

    def update_factor(self, block, j):
        packed = kernels.pack_factors(block.factors, self.dims)
        logits = kernels.active.cavi_logits(self.L, self.dims, packed, j)
        z = np.exp(logits - logits.max())
        z = np.maximum(z, FACTOR_FLOOR)
        return block.replace(j, z / z.sum())

    def sweep(self, block, schedule):
        for j in schedule:
            block = self.update_factor(block, j)
        return block


def free_energy(spec, history, action_seq, params):
    """Variational free energy of ``params`` for one action sequence.

    ``params`` may be a VariationalParams, a single block, or a full
    joint table (the unrestricted-family case, e.g. the exact posterior).
    """
    return _BlockProblem(spec, history, action_seq).free_energy(params)


def cavi_minimize(spec, history, action_seq, init=None, schedule=None,
                  tol=DEFAULT_TOL, max_iters=DEFAULT_MAX_ITERS):
    """Coordinate descent on one block until the per-sweep improvement
    drops below ``tol``. Returns (block, FreeEnergyReport, per-sweep F trace).

    The sweep order defaults to parameter axis, then latent states in time
    order, then free sensors in time order. Free energy must never rise;
    a rise past 1e-9 trips NonDecreasingGuard (CAVI is provably monotone,
    so that signals a bug, not a data problem).
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    problem = _BlockProblem(spec, history, action_seq)
    block = init if init is not None else MeanFieldBlock.tilted_uniform(problem.layout)
    order = tuple(schedule) if schedule is not None else tuple(range(problem.layout.ndim))

    try:
        f_prev = problem.free_energy_of_block(block)
    except ModelZero:
        # a random init can start outside the model's support; the first
        # sweep pulls it back in, so there is just no baseline to compare
        f_prev = None
    trace = []
    for _ in range(max_iters):
        block = problem.sweep(block, order)
        f = problem.free_energy_of_block(block)
        trace.append(f)
        if f_prev is not None:
            if f > f_prev + 1e-9:
                raise NonDecreasingGuard(
                    f"free energy rose from {f_prev!r} to {f!r} during a sweep "
                    f"(sequence {format_action_seq(problem.action_seq)})")
            if f_prev - f < tol:
                break
        f_prev = f
    report = FreeEnergyReport(values={problem.action_seq: trace[-1]})
    return block, report, trace


def optimize_all(spec, history, tol=DEFAULT_TOL, max_iters=DEFAULT_MAX_ITERS,
                 init=None, exact=None):
    """Fit every action sequence's block independently.

    ``init`` may be a VariationalParams to start from. When ``exact`` (an
    exact ActivePosteriorTable) is supplied, the report carries the gap
    F + log_evidence per sequence. Per-block failures are collected and
    raised together, labeled by sequence.
    """
    t = len(history)
    seqs = spec.action_sequences(t)
    layout = spec.layout_for(t)
    blocks = {}
    values = {}
    failures = {}
    for seq in seqs:
        start = init.block_for(seq) if init is not None else None
        try:
            block, _, trace = cavi_minimize(spec, history, seq, init=start,
                                            tol=tol, max_iters=max_iters)
        except Exception as exc:
            failures[seq] = exc
            continue
        blocks[seq] = block
        values[seq] = trace[-1]
    if failures:
        raise BlockOptimizationError(failures)
    gaps = None
    if exact is not None:
        gaps = {seq: values[seq] + exact.log_evidence_for(seq) for seq in seqs}
    return VariationalParams(layout, blocks), FreeEnergyReport(values=values, gaps=gaps)


def variational_posterior(params):
    """Package the blocks' implied joints in the exact-posterior container
    so policy code can consume either interchangeably. Variational tables
    carry no evidence; that slot is NaN."""
    seqs = params.action_seqs
    tables = tuple(params.blocks[seq].joint_table() for seq in seqs)
    return ActivePosteriorTable(layout=params.layout, action_seqs=seqs, tables=tables,
                                log_evidences=tuple(math.nan for _ in seqs),
                                kind="variational")


def write_trace_csv(traces, path):
    """Per-sweep free-energy traces as CSV rows (action_seq, sweep, value)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["action_seq", "sweep", "free_energy"])
        for seq, trace in traces.items():
            for i, f in enumerate(trace):
                writer.writerow([format_action_seq(seq), i, f"{f:.17g}"])
