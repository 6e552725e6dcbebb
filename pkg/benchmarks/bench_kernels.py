"""Times the hot kernels under both backends across problem sizes.

Usage: python benchmarks/bench_kernels.py [--repeat N] [--backends numpy,numba]

Per-call wall-clock medians. The jitted backend pays a one-off
compilation cost on first use (excluded here by a warmup call); after
that the loop kernels win on the small tensors an experiment actually
touches, while the vectorized fallback wins once tensors grow past a
few thousand cells. Run this to find the crossover on your machine.
"""

import argparse
import statistics
import time

import numpy as np

from actinf import kernels
from actinf.core import Alphabet, Categorical
from actinf.kernels import pack_factors, select_backend
from actinf.loop import History
from actinf.model import GenerativeModelSpec, Horizon, ThetaPoint, ThetaSupport
from actinf.variational import cavi_minimize


def build_problem(n_env, n_sensor, n_action, n_theta, lookahead, t, seed=0):
    rng = np.random.default_rng(seed)

    def rows(shape):
        raw = rng.dirichlet(np.ones(shape[-1]), size=shape[:-1]) + 0.02
        return raw / raw.sum(axis=-1, keepdims=True)

    points = tuple(
        ThetaPoint(
            sensor=rows((n_env, n_sensor)),
            transition=rows((n_action, n_env, n_env)),
            initial=rows((n_env,)),
        )
        for _ in range(n_theta)
    )
    spec = GenerativeModelSpec(
        env_alphabet=Alphabet(n_env),
        sensor_alphabet=Alphabet(n_sensor),
        action_alphabet=Alphabet(n_action),
        theta=ThetaSupport(points=points, prior=Categorical(rows((n_theta,)))),
        horizon=Horizon(mode="rolling", value=lookahead),
    )
    history = History(pairs=tuple(
        (int(rng.integers(n_sensor)), int(rng.integers(n_action))) for _ in range(t)))
    seq = spec.action_sequences(t)[0]
    layout = spec.layout_for(t)
    factors = [rows((d,)) for d in layout.shape]
    return spec, history, seq, layout, factors


PROBLEMS = {
    # label: (env, sensor, action, theta, lookahead, t)
    "small (desk scale)": (2, 2, 2, 1, 0, 1),
    "medium": (3, 3, 2, 2, 1, 2),
    "large": (3, 3, 2, 3, 2, 3),
}


def timed(fn, repeat):
    fn()  # warmup; also absorbs jit compilation on the numba path
    samples = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - start)
    return statistics.median(samples)


def bench_problem(label, dims_spec, backends, repeat):
    spec, history, seq, layout, factors = build_problem(*dims_spec)
    flat, _ = spec.build_log_tensor(history, seq)
    dims = layout.dims()
    packed = pack_factors(factors, dims)
    print(f"\n{label}: {layout.n_cells} cells per plan, {layout.ndim} axes")

    results = {}
    for name in backends:
        try:
            select_backend(name)
        except (RuntimeError, ValueError) as exc:
            print(f"  {name}: skipped ({exc})")
            continue
        backend = kernels.active
        cases = {
            "build_joint_log_tensor": lambda: spec.build_log_tensor(history, seq),
            "free_energy_terms": lambda: backend.free_energy_terms(flat, dims, packed),
            "cavi_logits (all axes)": lambda: [
                backend.cavi_logits(flat, dims, packed, ax) for ax in range(layout.ndim)],
            "policy_weighted_divergence": lambda: backend.policy_weighted_divergence(
                flat, dims, packed, 0.5, np.log(0.5)),
            "cavi_minimize (full)": lambda: cavi_minimize(spec, history, seq),
        }
        results[name] = {case: timed(fn, repeat) for case, fn in cases.items()}
    select_backend("auto")
    if not results:
        return

    names = list(results)
    header = f"  {'kernel':<30}" + "".join(f"{n:>14}" for n in names)
    if len(names) == 2:
        header += f"{'numpy/numba':>13}"
    print(header)
    for case in next(iter(results.values())):
        row = f"  {case:<30}"
        for n in names:
            row += f"{results[n][case] * 1e6:>12.1f}us"
        if len(names) == 2:
            a, b = (results[n][case] for n in names)
            row += f"{a / b:>12.2f}x"
        print(row)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=30)
    parser.add_argument("--backends", default="numpy,numba")
    args = parser.parse_args()
    backends = [n.strip() for n in args.backends.split(",") if n.strip()]
    for label, dims_spec in PROBLEMS.items():
        bench_problem(label, dims_spec, backends, args.repeat)


if __name__ == "__main__":
    main()
