"""Turning posteriors into policies over future action sequences.

The induced policy is a softmax over motivation scores, one score per
candidate sequence, evaluated on that sequence's posterior table. At
gamma 0 it ignores the scores entirely; as gamma grows it concentrates
on the best-scoring sequence.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .core import Categorical, softmax
from .errors import ActinfError
from .model import format_action_seq, parse_action_seq

PROVENANCES = ("exact-induced", "variational-induced", "third-policy")


@dataclass(frozen=True, eq=False)
class PolicyDistribution:
    """Categorical over action sequences, in lexicographic sequence order."""

    action_seqs: tuple
    probs: Categorical
    provenance: str

    def __post_init__(self):
        seqs = tuple(tuple(int(a) for a in s) for s in self.action_seqs)
        if len(seqs) != self.probs.size:
            raise ActinfError(f"{len(seqs)} sequences but {self.probs.size} probabilities")
        if self.provenance not in PROVENANCES:
            raise ActinfError(f"unknown provenance {self.provenance!r}")
        if list(seqs) != sorted(seqs):
            raise ActinfError("action sequences must be in lexicographic order")
        object.__setattr__(self, "action_seqs", seqs)
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(seqs)})

    def prob_for(self, action_seq):
        return float(self.probs.probs[self._index[tuple(action_seq)]])

    def as_array(self):
        return self.probs.probs

    def sample(self, rng):
        i = int(rng.choice(len(self.action_seqs), p=self.probs.probs))
        return self.action_seqs[i]

    def __len__(self):
        return len(self.action_seqs)


def induce_policy(posterior, m, gamma):
    """Softmax over per-sequence motivation scores.

    ``posterior`` is any table container with one normalized table per
    sequence (exact or variational); the result is tagged accordingly.
    Motivation errors are re-raised with the offending sequence named.
    """
    values = []
    for seq, table in posterior.items():
        try:
            values.append(float(m(table, posterior.layout, seq)))
        except Exception as exc:
            raise ActinfError(
                f"motivation {getattr(m, 'name', m)!r} failed for sequence "
                f"{format_action_seq(seq)}: {exc}") from exc
    provenance = "exact-induced" if posterior.kind == "exact" else "variational-induced"
    return PolicyDistribution(posterior.action_seqs, softmax(np.array(values), gamma), provenance)


def greedy_action_sequence(policy):
    """Highest-probability sequence; exact ties go to the lexicographic
    smallest (argmax returns the first hit and the order is lexicographic)."""
    return policy.action_seqs[int(np.argmax(policy.as_array()))]


def write_policy_csv(policy, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["action_seq", "probability", "provenance"])
        for seq, p in zip(policy.action_seqs, policy.as_array()):
            writer.writerow([format_action_seq(seq), f"{float(p):.17g}", policy.provenance])


def read_policy_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    seqs = tuple(parse_action_seq(r["action_seq"]) for r in rows)
    probs = Categorical(np.array([float(r["probability"]) for r in rows]))
    return PolicyDistribution(seqs, probs, rows[0]["provenance"]) if rows else None
