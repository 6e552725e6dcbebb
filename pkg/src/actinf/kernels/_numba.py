"""Jitted implementations of the hot kernels.

Same contracts as ``_numpy``; see that module for semantics.  Each kernel
walks the flat tensor once, decoding the multi-index on the fly, so the
whole engine spends its time inside these loops.
"""

import numpy as np
from numba import njit

from ..constants import EFFECTIVE_ZERO, ZERO_LOG_THRESHOLD

NAME = "numba"


@njit(cache=True)
def log_sum_exp(values):
    m = values[0]
    for i in range(values.shape[0]):
        if values[i] > m:
            m = values[i]
    acc = 0.0
    for i in range(values.shape[0]):
        acc += np.exp(values[i] - m)
    return m + np.log(acc)


@njit(cache=True)
def build_joint_log_tensor(log_prior, log_init, log_trans, log_sens,
                           actions, past_sensors, t, dims):
    ndim = dims.shape[0]
    n_env = actions.shape[0]
    ncells = 1
    for ax in range(ndim):
        ncells *= dims[ax]
    out = np.empty(ncells)
    idx = np.empty(ndim, np.int64)
    for flat in range(ncells):
        rem = flat
        for ax in range(ndim - 1, -1, -1):
            idx[ax] = rem % dims[ax]
            rem //= dims[ax]
        k = idx[0]
        acc = log_prior[k]
        acc += log_init[k, idx[1]]
        for tau in range(1, n_env):
            acc += log_trans[k, actions[tau], idx[tau], idx[tau + 1]]
        for tau in range(t):
            acc += log_sens[k, idx[1 + tau], past_sensors[tau]]
        for tau in range(t, n_env):
            acc += log_sens[k, idx[1 + tau], idx[1 + n_env + (tau - t)]]
        out[flat] = acc
    return out


@njit(cache=True)
def cavi_logits(L_flat, dims, factors, j):
    ndim = dims.shape[0]
    ncells = 1
    for ax in range(ndim):
        ncells *= dims[ax]
    out = np.zeros(dims[j])
    idx = np.empty(ndim, np.int64)
    for flat in range(ncells):
        rem = flat
        for ax in range(ndim - 1, -1, -1):
            idx[ax] = rem % dims[ax]
            rem //= dims[ax]
        w = 1.0
        for ax in range(ndim):
            if ax != j:
                w *= factors[ax, idx[ax]]
        if w >= EFFECTIVE_ZERO:
            out[idx[j]] += w * L_flat[flat]
    return out


@njit(cache=True)
def free_energy_terms(L_flat, dims, factors):
    ndim = dims.shape[0]
    ncells = 1
    for ax in range(ndim):
        ncells *= dims[ax]
    f = 0.0
    ce = 0.0
    h = 0.0
    idx = np.empty(ndim, np.int64)
    for flat in range(ncells):
        rem = flat
        for ax in range(ndim - 1, -1, -1):
            idx[ax] = rem % dims[ax]
            rem //= dims[ax]
        w = 1.0
        for ax in range(ndim):
            w *= factors[ax, idx[ax]]
        if w < EFFECTIVE_ZERO:
            continue
        lq = L_flat[flat]
        if lq <= ZERO_LOG_THRESHOLD:
            return 0.0, 0.0, 0.0, flat
        lw = np.log(w)
        f += w * (lw - lq)
        ce += -w * lq
        h += -w * lw
    return f, ce, h, -1


@njit(cache=True)
def policy_weighted_divergence(L_flat, dims, factors, s_a, log_rind_a):
    if s_a <= 0.0:
        return 0.0, -1
    ndim = dims.shape[0]
    ncells = 1
    for ax in range(ndim):
        ncells *= dims[ax]
    val = 0.0
    idx = np.empty(ndim, np.int64)
    for flat in range(ncells):
        rem = flat
        for ax in range(ndim - 1, -1, -1):
            idx[ax] = rem % dims[ax]
            rem //= dims[ax]
        w = s_a
        for ax in range(ndim):
            w *= factors[ax, idx[ax]]
        if w < EFFECTIVE_ZERO:
            continue
        lq = L_flat[flat]
        if lq <= ZERO_LOG_THRESHOLD:
            return 0.0, flat
        val += w * (np.log(w) - lq - log_rind_a)
    return val, -1


@njit(cache=True)
def kl_flat(p, q):
    acc = 0.0
    for i in range(p.shape[0]):
        if p[i] > 0.0:
            if q[i] == 0.0:
                return 0.0, i
            acc += p[i] * (np.log(p[i]) - np.log(q[i]))
    return acc, -1
