"""Both kernel backends must agree bit-for-bit-close on every operation."""

import subprocess
import sys

import numpy as np
import pytest
from numpy.testing import assert_allclose

from actinf import kernels
from actinf.constants import NEG_CLAMP
from actinf.kernels import numpy_backend, pack_factors, select_backend

from conftest import random_factors, random_history, random_spec

numba_backend = kernels.numba_backend
needs_numba = pytest.mark.skipif(numba_backend is None, reason="numba not importable")


@pytest.fixture
def both_backends():
    if numba_backend is None:
        pytest.skip("numba not importable")
    return numpy_backend, numba_backend


def tensor_instance(seed=0):
    rng = np.random.default_rng(seed)
    spec = random_spec(rng, n_theta=2, n_sensor=3, lookahead=1)
    history = random_history(rng, spec, 1)
    seq = (1, 0)
    layout = spec.layout_for(1)
    factors = random_factors(rng, layout)
    return spec, history, seq, layout, factors


@needs_numba
def test_log_sum_exp_agrees(both_backends):
    a, b = both_backends
    rng = np.random.default_rng(1)
    for scale in (1.0, 100.0, 1e4):
        vals = rng.normal(size=40) * scale
        assert_allclose(a.log_sum_exp(vals), b.log_sum_exp(vals), rtol=1e-14)


@needs_numba
def test_kl_flat_agrees(both_backends):
    a, b = both_backends
    rng = np.random.default_rng(2)
    p = rng.dirichlet(np.ones(30))
    q = rng.dirichlet(np.ones(30))
    va, ia = a.kl_flat(p, q)
    vb, ib = b.kl_flat(p, q)
    assert_allclose(va, vb, rtol=1e-13)
    assert ia == ib == -1

    q2 = q.copy()
    q2[3] = 0.0
    _, ia2 = a.kl_flat(p, q2 / q2.sum())
    _, ib2 = b.kl_flat(p, q2 / q2.sum())
    assert ia2 == ib2 == 3


@needs_numba
def test_joint_tensor_agrees(both_backends):
    a, b = both_backends
    spec, history, seq, layout, _ = tensor_instance()
    select_backend("numpy")
    try:
        flat_np, _ = spec.build_log_tensor(history, seq)
    finally:
        select_backend("auto")
    select_backend("numba")
    try:
        flat_nb, _ = spec.build_log_tensor(history, seq)
    finally:
        select_backend("auto")
    assert_allclose(flat_np, flat_nb, rtol=1e-13)


@needs_numba
def test_cavi_logits_agree(both_backends):
    a, b = both_backends
    spec, history, seq, layout, factors = tensor_instance()
    flat, _ = spec.build_log_tensor(history, seq)
    dims = layout.dims()
    packed = pack_factors(factors, dims)
    for axis in range(layout.ndim):
        za = a.cavi_logits(flat, dims, packed, axis)
        zb = b.cavi_logits(flat, dims, packed, axis)
        assert_allclose(za, zb, rtol=1e-12, atol=1e-12)


@needs_numba
def test_free_energy_terms_agree(both_backends):
    a, b = both_backends
    spec, history, seq, layout, factors = tensor_instance()
    flat, _ = spec.build_log_tensor(history, seq)
    dims = layout.dims()
    packed = pack_factors(factors, dims)
    fa, cea, ha, va = a.free_energy_terms(flat, dims, packed)
    fb, ceb, hb, vb = b.free_energy_terms(flat, dims, packed)
    assert_allclose([fa, cea, ha], [fb, ceb, hb], rtol=1e-12)
    assert va == vb == -1
    assert fa == pytest.approx(cea - ha, abs=1e-10)


@needs_numba
def test_free_energy_terms_flag_impossible_mass(both_backends):
    a, b = both_backends
    flat = np.array([0.0, NEG_CLAMP])
    dims = np.array([2], dtype=np.int64)
    packed = pack_factors([np.array([0.5, 0.5])], dims)
    _, _, _, va = a.free_energy_terms(flat, dims, packed)
    _, _, _, vb = b.free_energy_terms(flat, dims, packed)
    assert va == vb == 1


@needs_numba
def test_policy_weighted_divergence_agrees(both_backends):
    a, b = both_backends
    spec, history, seq, layout, factors = tensor_instance()
    flat, _ = spec.build_log_tensor(history, seq)
    dims = layout.dims()
    packed = pack_factors(factors, dims)
    va, fa = a.policy_weighted_divergence(flat, dims, packed, 0.37, np.log(0.25))
    vb, fb = b.policy_weighted_divergence(flat, dims, packed, 0.37, np.log(0.25))
    assert_allclose(va, vb, rtol=1e-12)
    assert fa == fb == -1


def test_pack_factors_pads_with_zeros():
    packed = pack_factors([np.array([0.5, 0.5]), np.array([1.0])],
                          np.array([2, 1], dtype=np.int64))
    assert packed.shape == (2, 2)
    assert packed[1, 1] == 0.0


def test_select_backend_rejects_unknown():
    with pytest.raises(ValueError):
        select_backend("fortran")
    assert kernels.backend_name() in ("numpy", "numba")


def test_env_var_forces_backend():
    code = ("import actinf.kernels as k; print(k.backend_name())")
    out = subprocess.run(
        [sys.executable, "-c", code],
        capture_output=True, text=True,
        env={"PATH": "/usr/bin:/bin", "ACTINF_BACKEND": "numpy"},
    )
    assert out.stdout.strip() == "numpy"


@needs_numba
def test_full_pipeline_matches_across_backends():
    """End-to-end: one optimization under each backend, same numbers."""
    from actinf import History, RewardStructure, optimize_all, reward_motivation
    from actinf import active_inference_step

    rng = np.random.default_rng(10)
    spec = random_spec(rng, n_theta=2, lookahead=1)
    history = random_history(rng, spec, 1)
    m = reward_motivation(RewardStructure(np.array([0.0, 1.0])))

    results = {}
    for name in ("numpy", "numba"):
        select_backend(name)
        try:
            params, report = optimize_all(spec, history)
            _, rho, trace, _ = active_inference_step(
                spec, history, m, 2.0, rng=np.random.default_rng(0))
        finally:
            select_backend("auto")
        results[name] = (dict(report.values), rho.policy.as_array(), trace[-1].total)

    v_np, s_np, t_np = results["numpy"]
    v_nb, s_nb, t_nb = results["numba"]
    for seq in v_np:
        assert v_np[seq] == pytest.approx(v_nb[seq], rel=1e-12, abs=1e-12)
    assert_allclose(s_np, s_nb, rtol=1e-10)
    assert t_np == pytest.approx(t_nb, rel=1e-12)
