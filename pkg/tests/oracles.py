"""Independent brute-force reference computations for the test suite.

Everything in here is written against the math directly, with plain
Python floats and explicit enumeration loops.  None of it calls into
the package's tensor or kernel code, so agreement between the two is
evidence rather than tautology.  Slow on purpose; keep instances tiny.
"""

import itertools
import math


def plain_tables(spec):
    """Pull a model's kernels out into nested Python lists.

    prior[k], initial[k][e], transition[k][a][e_prev][e_next],
    sensor[k][e][s].  Conversion only; no package math is reused.
    """
    prior = [float(p) for p in spec.theta.prior.probs]
    initial, transition, sensor = [], [], []
    for point in spec.theta.points:
        initial.append([float(v) for v in point.initial])
        transition.append([[[float(v) for v in row] for row in act] for act in point.transition])
        sensor.append([[float(v) for v in row] for row in point.sensor])
    return prior, initial, transition, sensor


def assignment_weight(tables, past_sensors, full_actions, t_final, k, env_states, future_sensors):
    """Unnormalized model weight of one complete assignment.

    env_states covers steps 0..t_final; future_sensors covers steps
    t..t_final where t = len(past_sensors).  The action at step 0 never
    enters (the initial law absorbs the first transition).
    """
    prior, initial, transition, sensor = tables
    w = prior[k] * initial[k][env_states[0]]
    for tau in range(1, t_final + 1):
        w *= transition[k][full_actions[tau]][env_states[tau - 1]][env_states[tau]]
    sensors = list(past_sensors) + list(future_sensors)
    for tau in range(t_final + 1):
        w *= sensor[k][env_states[tau]][sensors[tau]]
    return w


def enum_cells(spec, history, action_seq):
    """All free-cell weights in flat C order, plus the cell shape.

    Order matches the package's tensor layout: parameter index first,
    then every latent state, then the free (future) sensors.
    """
    tables = plain_tables(spec)
    t = len(history)
    # both horizon modes satisfy t_final == t + n_future - 1
    t_final = t + len(action_seq) - 1
    n_theta = len(spec.theta.points)
    n_env = spec.env_alphabet.size
    n_sensor = spec.sensor_alphabet.size
    full_actions = list(history.actions) + [int(a) for a in action_seq]
    past = list(history.sensors)
    shape = (n_theta,) + (n_env,) * (t_final + 1) + (n_sensor,) * len(action_seq)
    weights = []
    for cell in itertools.product(*(range(d) for d in shape)):
        k = cell[0]
        env_states = cell[1:t_final + 2]
        future_sensors = cell[t_final + 2:]
        weights.append(assignment_weight(tables, past, full_actions, t_final,
                                         k, env_states, future_sensors))
    return weights, shape


def enum_posterior(spec, history, action_seq):
    """Exact conditional over free cells by direct normalization.

    Returns (flat probability list in C order, log evidence).
    """
    weights, shape = enum_cells(spec, history, action_seq)
    z = math.fsum(weights)
    if z <= 0.0:
        return [0.0] * len(weights), -math.inf
    return [w / z for w in weights], math.log(z)


def kl_by_hand(p, q):
    total = 0.0
    for pi, qi in zip(p, q):
        if pi == 0.0:
            continue
        if qi == 0.0:
            return math.inf
        total += pi * math.log(pi / qi)
    return total


def entropy_by_hand(p):
    return -math.fsum(pi * math.log(pi) for pi in p if pi > 0.0)


def softmax_by_hand(values, gamma):
    scaled = [gamma * v for v in values]
    m = max(scaled)
    exps = [math.exp(v - m) for v in scaled]
    z = math.fsum(exps)
    return [e / z for e in exps]


def mean_field_cell_probs(factors, shape):
    """Product-measure probabilities over cells, flat C order."""
    probs = []
    for cell in itertools.product(*(range(d) for d in shape)):
        w = 1.0
        for axis, idx in enumerate(cell):
            w *= float(factors[axis][idx])
        probs.append(w)
    return probs


def free_energy_by_hand(spec, history, action_seq, factors):
    """KL from the factorized distribution to the unnormalized model joint.

    Sum of r(x) * (log r(x) - log q(x)) over cells with r(x) > 0;
    infinite as soon as r touches a model zero.
    """
    weights, shape = enum_cells(spec, history, action_seq)
    probs = mean_field_cell_probs(factors, shape)
    total = 0.0
    for r, q in zip(probs, weights):
        if r <= 0.0:
            continue
        if q <= 0.0:
            return math.inf
        total += r * (math.log(r) - math.log(q))
    return total


def free_energy_of_table_by_hand(spec, history, action_seq, flat_probs):
    """Same functional evaluated on an arbitrary flat joint table."""
    weights, _ = enum_cells(spec, history, action_seq)
    total = 0.0
    for r, q in zip(flat_probs, weights):
        if r <= 0.0:
            continue
        if q <= 0.0:
            return math.inf
        total += r * (math.log(r) - math.log(q))
    return total


def expected_reward_by_hand(spec, history, action_seq, flat_probs, reward_values):
    """Posterior-expected summed future reward by direct enumeration."""
    t = len(history)
    t_final = t + len(action_seq) - 1
    n_theta = len(spec.theta.points)
    n_env = spec.env_alphabet.size
    n_sensor = spec.sensor_alphabet.size
    shape = (n_theta,) + (n_env,) * (t_final + 1) + (n_sensor,) * len(action_seq)
    total = 0.0
    for p, cell in zip(flat_probs, itertools.product(*(range(d) for d in shape))):
        future_sensors = cell[t_final + 2:]
        total += p * math.fsum(float(reward_values[s]) for s in future_sensors)
    return total


def sensor_marginal_by_hand(spec, history, action_seq, flat_probs):
    """Joint marginal over the free sensor block, flat C order."""
    t = len(history)
    t_final = t + len(action_seq) - 1
    n_theta = len(spec.theta.points)
    n_env = spec.env_alphabet.size
    n_sensor = spec.sensor_alphabet.size
    shape = (n_theta,) + (n_env,) * (t_final + 1) + (n_sensor,) * len(action_seq)
    marg = {}
    for p, cell in zip(flat_probs, itertools.product(*(range(d) for d in shape))):
        key = cell[t_final + 2:]
        marg[key] = marg.get(key, 0.0) + p
    keys = sorted(marg)
    return [marg[key] for key in keys]


def joint_form_by_hand(spec, history, seq_factors, s_probs, rind_probs):
    """Single divergence between the two lifted joints over (plan, cells).

    seq_factors maps each action sequence to its factor list; s_probs and
    rind_probs are parallel to the lexicographic sequence order.  Expands
    sum over plans and cells of s(a) r_a(x) * log of the ratio
    (s(a) r_a(x)) / (rind(a) q_a(x)) term by term.
    """
    seqs = sorted(seq_factors)
    total = 0.0
    for sa, rind, seq in zip(s_probs, rind_probs, seqs):
        if sa == 0.0:
            continue
        if rind == 0.0:
            return math.inf
        weights, shape = enum_cells(spec, history, seq)
        probs = mean_field_cell_probs(seq_factors[seq], shape)
        for r, q in zip(probs, weights):
            if r <= 0.0:
                continue
            if q <= 0.0:
                return math.inf
            total += sa * r * (math.log(sa) + math.log(r) - math.log(rind) - math.log(q))
    return total
