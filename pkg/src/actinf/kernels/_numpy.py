"""Pure-numpy reference implementations of the hot kernels.

Every function here has a jitted twin in ``_numba`` with identical
semantics; results agree to floating-point reassociation error.  All
tensors are passed flat (C order) together with their dims vector, and all
log tables are pre-clamped (see ``actinf.constants``).
"""

import numpy as np

from ..constants import EFFECTIVE_ZERO, ZERO_LOG_THRESHOLD

NAME = "numpy"


def _expand(arr, axes, ndim):
    """View ``arr`` with its axes placed at ``axes`` in an ndim-shape."""
    shape = [1] * ndim
    for ax, size in zip(axes, arr.shape):
        shape[ax] = size
    return arr.reshape(shape)


def log_sum_exp(values):
    m = float(np.max(values))
    return m + float(np.log(np.sum(np.exp(values - m))))


def build_joint_log_tensor(log_prior, log_init, log_trans, log_sens,
                           actions, past_sensors, t, dims):
    """Accumulate the model's joint log-probability over the free cells.

    Axes: 0 = parameter point, 1..n_env = latent states 0..T, then one
    sensor axis per future step t..T.  ``actions`` is the full action
    vector (slot 0 is never read: the first latent state is drawn from its
    own prior).  Returns the flat tensor.
    """
    ndim = len(dims)
    n_env = len(actions)
    shape = tuple(int(d) for d in dims)
    L = np.zeros(shape)
    L += _expand(log_prior, [0], ndim)
    L += _expand(log_init, [0, 1], ndim)
    for tau in range(1, n_env):
        L += _expand(log_trans[:, actions[tau], :, :], [0, tau, tau + 1], ndim)
    for tau in range(t):
        L += _expand(log_sens[:, :, past_sensors[tau]], [0, 1 + tau], ndim)
    for tau in range(t, n_env):
        s_axis = 1 + n_env + (tau - t)
        L += _expand(log_sens, [0, 1 + tau, s_axis], ndim)
    return L.reshape(-1)


def _weight_tensor(dims, factors, skip=-1):
    """Outer product of the per-axis factors, axis ``skip`` left broadcast."""
    ndim = len(dims)
    W = np.ones((1,) * ndim)
    for k in range(ndim):
        if k == skip:
            continue
        W = W * _expand(factors[k, :dims[k]], [k], ndim)
    return W


def cavi_logits(L_flat, dims, factors, j):
    """Expected joint log-probability as a function of axis ``j``.

    Off-axis weights below ``EFFECTIVE_ZERO`` contribute nothing (floor
    dust); real weight on an impossible cell drives the logit to an
    effective minus-infinity, which is the correct zero-forcing.
    """
    shape = tuple(int(d) for d in dims)
    ndim = len(shape)
    L = L_flat.reshape(shape)
    W = _weight_tensor(dims, factors, skip=j)
    W = np.where(W < EFFECTIVE_ZERO, 0.0, W)
    contrib = W * L
    axes = tuple(ax for ax in range(ndim) if ax != j)
    return contrib.sum(axis=axes)


def free_energy_terms(L_flat, dims, factors):
    """Return (direct F, cross-entropy, entropy, violation flat index).

    The violation index is the first cell carrying real variational mass
    on an impossible assignment, or -1.  On violation the three
    accumulators are meaningless.
    """
    shape = tuple(int(d) for d in dims)
    L = L_flat.reshape(shape)
    R = _weight_tensor(dims, factors)
    mask = R >= EFFECTIVE_ZERO
    bad = mask & (L <= ZERO_LOG_THRESHOLD)
    if np.any(bad):
        return 0.0, 0.0, 0.0, int(np.flatnonzero(bad.reshape(-1))[0])
    logR = np.where(mask, np.log(np.where(mask, R, 1.0)), 0.0)
    f = float(np.sum(np.where(mask, R * (logR - L), 0.0)))
    ce = float(np.sum(np.where(mask, -R * L, 0.0)))
    h = float(np.sum(np.where(mask, -R * logR, 0.0)))
    return f, ce, h, -1


def policy_weighted_divergence(L_flat, dims, factors, s_a, log_rind_a):
    """One action sequence's share of the joint-form objective.

    Accumulates sum_x w(x) * (log w(x) - L(x) - log_rind_a) with
    w(x) = s_a * prod_k factor_k(x_k).  Returns (value, violation index).
    """
    if s_a <= 0.0:
        return 0.0, -1
    shape = tuple(int(d) for d in dims)
    L = L_flat.reshape(shape)
    W = s_a * _weight_tensor(dims, factors)
    mask = W >= EFFECTIVE_ZERO
    bad = mask & (L <= ZERO_LOG_THRESHOLD)
    if np.any(bad):
        return 0.0, int(np.flatnonzero(bad.reshape(-1))[0])
    logW = np.where(mask, np.log(np.where(mask, W, 1.0)), 0.0)
    val = float(np.sum(np.where(mask, W * (logW - L - log_rind_a), 0.0)))
    return val, -1


def kl_flat(p, q):
    """Strict KL over flat arrays: (value, first support violation or -1)."""
    pos = p > 0.0
    bad = pos & (q == 0.0)
    if np.any(bad):
        return 0.0, int(np.flatnonzero(bad)[0])
    pp = p[pos]
    qq = q[pos]
    return float(np.sum(pp * (np.log(pp) - np.log(qq)))), -1
