import numpy as np
import pytest

from actinf import (
    Alphabet,
    Categorical,
    GenerativeModelSpec,
    History,
    Horizon,
    ThetaPoint,
    ThetaSupport,
)

# collected by the criterion() helper in test_acceptance.py and printed
# as one line per criterion at the end of the run
ACCEPTANCE_RESULTS = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    tw = terminalreporter
    tw.section("acceptance criteria")
    for num in sorted(ACCEPTANCE_RESULTS):
        label, ok = ACCEPTANCE_RESULTS[num]
        dots = "." * max(1, 58 - len(label))
        tw.write_line(f"  {num}. {label} {dots} {'PASS' if ok else 'FAIL'}")


def positive_rows(rng, shape):
    """Random stochastic table with every entry bounded away from zero."""
    raw = rng.dirichlet(np.ones(shape[-1]), size=shape[:-1])
    raw = raw + 0.02
    return raw / raw.sum(axis=-1, keepdims=True)


def random_spec(rng, n_theta=1, n_env=2, n_sensor=2, n_action=2, lookahead=1,
                fixed_final=None):
    """Small random model with strictly positive kernels.

    Rolling horizon by default; pass fixed_final for a fixed one.
    """
    points = []
    for _ in range(n_theta):
        points.append(ThetaPoint(
            sensor=positive_rows(rng, (n_env, n_sensor)),
            transition=positive_rows(rng, (n_action, n_env, n_env)),
            initial=positive_rows(rng, (n_env,)),
        ))
    support = ThetaSupport(
        points=tuple(points),
        prior=Categorical(positive_rows(rng, (n_theta,))),
    )
    if fixed_final is None:
        horizon = Horizon(mode="rolling", value=lookahead)
    else:
        horizon = Horizon(mode="fixed", value=fixed_final)
    return GenerativeModelSpec(
        env_alphabet=Alphabet(n_env),
        sensor_alphabet=Alphabet(n_sensor),
        action_alphabet=Alphabet(n_action),
        theta=support,
        horizon=horizon,
    )


def factorizing_spec(rng, n_env=2, n_sensor=2, n_action=2, lookahead=1):
    """Model whose exact active posterior is an exact mean-field product.

    Single parameter point; every transition row ignores the source
    state and every sensor row ignores the state, so nothing couples
    across axes and coordinate descent can recover the posterior.
    """
    trans_rows = positive_rows(rng, (n_action, n_env))
    transition = np.repeat(trans_rows[:, None, :], n_env, axis=1)
    sensor_row = positive_rows(rng, (n_sensor,))
    sensor = np.tile(sensor_row, (n_env, 1))
    point = ThetaPoint(
        sensor=sensor,
        transition=transition,
        initial=positive_rows(rng, (n_env,)),
    )
    support = ThetaSupport(points=(point,), prior=Categorical(np.ones(1)))
    return GenerativeModelSpec(
        env_alphabet=Alphabet(n_env),
        sensor_alphabet=Alphabet(n_sensor),
        action_alphabet=Alphabet(n_action),
        theta=support,
        horizon=Horizon(mode="rolling", value=lookahead),
    )


def bandit_model_spec(lookahead=0):
    """Deterministic shift world: action a drives the state to 1 - a.

    Identity sensor, uniform start, single parameter point.  Small
    enough to reason about in closed form.
    """
    transition = np.zeros((2, 2, 2))
    transition[0, :, 1] = 1.0
    transition[1, :, 0] = 1.0
    point = ThetaPoint(
        sensor=np.eye(2),
        transition=transition,
        initial=np.array([0.5, 0.5]),
    )
    return GenerativeModelSpec(
        env_alphabet=Alphabet(2),
        sensor_alphabet=Alphabet(2),
        action_alphabet=Alphabet(2),
        theta=ThetaSupport(points=(point,), prior=Categorical(np.ones(1))),
        horizon=Horizon(mode="rolling", value=lookahead),
    )


def random_history(rng, spec, t):
    pairs = tuple(
        (int(rng.integers(spec.sensor_alphabet.size)),
         int(rng.integers(spec.action_alphabet.size)))
        for _ in range(t)
    )
    return History(pairs=pairs)


def random_factors(rng, layout):
    """One strictly positive normalized factor per tensor axis."""
    return [positive_rows(rng, (d,)) for d in layout.shape]


@pytest.fixture
def rng():
    return np.random.default_rng(20260818)
