"""Divergence geometry between the exact and variational objects.

For one step this measures where the variational posterior sits relative
to the exact one (both KL directions, per action sequence) and where the
three policies sit relative to each other, alongside the two named parts
of the combined objective. A pair whose divergence is genuinely infinite
(mass outside the reference support) is reported as inf rather than
aborting the whole snapshot; the report is a measurement, not a gate.
"""

import csv
import math
from dataclasses import dataclass

from .core import kl_divergence
from .errors import SupportViolation
from .model import format_action_seq, parse_action_seq
from .policy import induce_policy
from .variational import variational_posterior


def _kl_or_inf(p, q):
    try:
        return kl_divergence(p, q)
    except SupportViolation:
        return math.inf


@dataclass(frozen=True)
class GeometrySnapshot:
    """All divergences for one step.

    Posterior space: per action sequence, KL(variational‖exact) and
    KL(exact‖variational). Policy space: KL(s‖r-induced) (this is D2),
    KL(r-induced‖q-induced), KL(s‖q-induced). D1 is the s-weighted free
    energy, recovered from evidence plus posterior divergence.
    """

    step: int
    action_seqs: tuple
    kl_variational_exact: tuple
    kl_exact_variational: tuple
    kl_s_r_induced: float
    kl_r_induced_q_induced: float
    kl_s_q_induced: float
    d1: float
    d2: float


def snapshot(exact, params, s, m, gamma, step=0):
    """Measure every Fig-style distance for one (exact, variational, s) triple.

    Free energies are recovered through the identity
    F = -log evidence + KL(variational‖exact), so no model access is
    needed here.
    """
    seqs = exact.action_seqs
    if params.action_seqs != seqs or s.action_seqs != seqs:
        raise SupportViolation("exact tables, variational blocks, and s must cover the same sequences")

    var_set = variational_posterior(params)
    kl_ve = tuple(_kl_or_inf(var_set.table_for(seq), exact.table_for(seq)) for seq in seqs)
    kl_ev = tuple(_kl_or_inf(exact.table_for(seq), var_set.table_for(seq)) for seq in seqs)

    r_ind = induce_policy(var_set, m, gamma)
    q_ind = induce_policy(exact, m, gamma)
    kl_sr = _kl_or_inf(s.probs, r_ind.probs)
    kl_rq = _kl_or_inf(r_ind.probs, q_ind.probs)
    kl_sq = _kl_or_inf(s.probs, q_ind.probs)

    s_arr = s.as_array()
    d1 = 0.0
    for i, seq in enumerate(seqs):
        if s_arr[i] <= 0.0:
            continue
        f = -exact.log_evidence_for(seq) + kl_ve[i]
        d1 += float(s_arr[i]) * f
    return GeometrySnapshot(step=step, action_seqs=seqs,
                            kl_variational_exact=kl_ve, kl_exact_variational=kl_ev,
                            kl_s_r_induced=kl_sr, kl_r_induced_q_induced=kl_rq,
                            kl_s_q_induced=kl_sq, d1=d1, d2=kl_sr)


CSV_HEADER = ("step", "quantity_name", "action_seq", "value")

_SCALAR_QUANTITIES = (
    ("kl_s_r_induced", "kl_s_r_induced"),
    ("kl_r_induced_q_induced", "kl_r_induced_q_induced"),
    ("kl_s_q_induced", "kl_s_q_induced"),
    ("d1", "d1"),
    ("d2", "d2"),
)


def export_csv(snapshots, path):
    """Write snapshots as long-form rows; per-sequence quantities carry
    the sequence, scalars carry "-". 17 significant digits round-trip
    doubles exactly."""
    try:
        fh = open(path, "w", newline="")
    except OSError as exc:
        raise OSError(f"cannot write geometry CSV at {path}: {exc}") from exc
    with fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for snap in snapshots:
            for i, seq in enumerate(snap.action_seqs):
                label = format_action_seq(seq)
                writer.writerow([snap.step, "kl_variational_exact", label,
                                 f"{snap.kl_variational_exact[i]:.17g}"])
                writer.writerow([snap.step, "kl_exact_variational", label,
                                 f"{snap.kl_exact_variational[i]:.17g}"])
            for name, attr in _SCALAR_QUANTITIES:
                writer.writerow([snap.step, name, "-", f"{getattr(snap, attr):.17g}"])


def read_csv(path):
    """Round-trip reader: list of (step, quantity_name, action_seq-or-None, value)."""
    rows = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            seq = None if row["action_seq"] == "-" else parse_action_seq(row["action_seq"])
            rows.append((int(row["step"]), row["quantity_name"], seq, float(row["value"])))
    return rows
