"""Exact posterior over (parameter, latent states, future sensors) per plan.

For each candidate action sequence the joint tensor is normalized by its
total mass (the evidence for the observed history under that plan). Small
state spaces make this exact enumeration affordable, which is exactly what
makes it usable as ground truth for the variational machinery.
"""

import math
from dataclasses import dataclass

from . import kernels
from .constants import ZERO_LOG_THRESHOLD
from .core import JointTable
from .errors import ZeroEvidence

import numpy as np


@dataclass(frozen=True, eq=False)
class ActivePosteriorTable:
    """Posterior tables and log evidences, one pair per action sequence.

    ``kind`` records how the tables were produced ("exact" or
    "variational"); downstream policy code uses it to label provenance.
    """

    layout: object
    action_seqs: tuple
    tables: tuple
    log_evidences: tuple
    kind: str = "exact"

    def __post_init__(self):
        if not (len(self.action_seqs) == len(self.tables) == len(self.log_evidences)):
            raise ValueError("table container tracks must have equal length")
        object.__setattr__(self, "_index",
                           {seq: i for i, seq in enumerate(self.action_seqs)})

    def table_for(self, action_seq):
        return self.tables[self._index[tuple(action_seq)]]

    def log_evidence_for(self, action_seq):
        return self.log_evidences[self._index[tuple(action_seq)]]

    def items(self):
        return zip(self.action_seqs, self.tables)


def log_evidence(spec, history, action_seq):
    """Log marginal probability of the past sensors under one plan.

    Returns -inf when the model assigns the history zero probability
    (the caller decides whether that is an error).
    """
    flat, _ = spec.build_log_tensor(history, action_seq)
    lse = kernels.active.log_sum_exp(flat)
    if lse <= ZERO_LOG_THRESHOLD:
        return -math.inf
    return float(lse)


def exact_active_posterior(spec, history):
    """Exact posterior tables for every candidate plan at this history.

    Raises ZeroEvidence if any plan gives the observed history zero
    probability; conditioning on a null event has no answer.
    """
    t = len(history)
    seqs = spec.action_sequences(t)
    tables = []
    evidences = []
    layout = spec.layout_for(t)
    for seq in seqs:
        flat, layout = spec.build_log_tensor(history, seq)
        lse = kernels.active.log_sum_exp(flat)
        if lse <= ZERO_LOG_THRESHOLD:
            raise ZeroEvidence(f"history has zero probability under action sequence {seq}")
        probs = np.exp(flat - lse)
        # exact zeros for impossible cells, not clamp dust
        probs[flat <= ZERO_LOG_THRESHOLD] = 0.0
        tables.append(JointTable(probs.reshape(layout.shape), normalized=True))
        evidences.append(float(lse))
    return ActivePosteriorTable(layout=layout, action_seqs=seqs, tables=tuple(tables),
                                log_evidences=tuple(evidences), kind="exact")


def theta_marginal(table):
    """Posterior over parameter points (axis 0 of the joint)."""
    return table.values.reshape(table.values.shape[0], -1).sum(axis=1)
