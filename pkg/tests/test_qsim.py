import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dqcount.oracle import SubOracle, decompose_prefix, make_oracle
from dqcount.qsim import (
    AmplitudeModel,
    AnalyticSampler,
    ExactSampler,
    StatevectorSampler,
    StateVector,
    apply_A,
    apply_A_dagger,
    apply_Q,
    prob11_analytic,
    prob11_statevector,
    sample_shots,
)


def sub_for(m: int, t: int) -> SubOracle:
    return SubOracle(m=m, node_id=0, k=1, scheme="prefix", marked_local=frozenset(range(t)))


def test_prob11_analytic_examples():
    assert prob11_analytic(AmplitudeModel(5, 2), 0) == pytest.approx(2 / 32, abs=1e-15)
    for power in range(5):
        assert prob11_analytic(AmplitudeModel(5, 0), power) == 0.0
    # independent closed form: sin(3*asin(s)) = 3s - 4s^3 with s = 1/4
    s = math.sqrt(2 / 32)
    expected = (3 * s - 4 * s ** 3) ** 2
    assert expected == 0.47265625
    assert prob11_analytic(AmplitudeModel(5, 2), 1) == pytest.approx(expected, abs=1e-14)


def test_model_validation():
    with pytest.raises(ValueError):
        AmplitudeModel(3, 9)
    with pytest.raises(ValueError):
        AmplitudeModel(3, 1, r=0.0)
    with pytest.raises(ValueError):
        prob11_analytic(AmplitudeModel(3, 1), -1)


def test_apply_A_masses():
    oracle = make_oracle(6, {38, 8, 16})
    sub0 = decompose_prefix(oracle, 1)[0]
    state = apply_A(StateVector.zero(7), sub0, 1.0)
    assert state.prob11() == pytest.approx(2 / 32, abs=1e-12)
    assert state.norm_squared() == pytest.approx(1.0, abs=1e-12)

    empty = sub_for(5, 0)
    assert apply_A(StateVector.zero(7), empty, 1.0).prob11() == pytest.approx(0.0, abs=1e-15)

    half = apply_A(StateVector.zero(7), sub_for(5, 2), 0.5)
    assert half.prob11() == pytest.approx(0.5 * 2 / 32, abs=1e-12)


def test_apply_A_width_mismatch():
    with pytest.raises(ValueError):
        apply_A(StateVector.zero(6), sub_for(5, 1), 1.0)
    with pytest.raises(ValueError):
        apply_A(StateVector.zero(7), sub_for(5, 1), 0.0)


def test_prepared_state_matches_two_component_decomposition():
    """A|0> = sin(theta_tilde)|good> + cos(theta_tilde)|rest> exactly."""
    m, t, r = 4, 3, 0.7
    sub = sub_for(m, t)
    size = 1 << (m + 2)
    good = np.zeros(size, dtype=complex)
    rest = np.zeros(size, dtype=complex)
    for x in range(1 << m):
        if x < t:
            good[(x << 2) | 0b11] = 1 / math.sqrt(t)
            rest[(x << 2) | 0b10] = math.sqrt((1 - r) / (1 << m))
        else:
            rest[(x << 2) | 0b01] = math.sqrt(r / (1 << m))
            rest[(x << 2) | 0b00] = math.sqrt((1 - r) / (1 << m))
    rest *= math.sqrt((1 << m) / ((1 << m) - t * r))
    theta = AmplitudeModel(m, t, r).theta_tilde
    expected = math.sin(theta) * good + math.cos(theta) * rest

    state = apply_A(StateVector.zero(m + 2), sub, r)
    assert np.allclose(state.amplitudes, expected, atol=1e-12)

    # two amplification iterates stay inside span{good, rest}
    apply_Q(state, sub, r)
    apply_Q(state, sub, r)
    overlap = abs(np.vdot(good, state.amplitudes)) ** 2 + abs(np.vdot(rest, state.amplitudes)) ** 2
    assert overlap == pytest.approx(1.0, abs=1e-10)


def test_apply_Q_matches_analytic_on_small_grid():
    for m in (1, 2, 3):
        for t in range(0, (1 << m) + 1):
            sub = sub_for(m, t)
            for r in (0.25, 0.8, 1.0):
                model = AmplitudeModel(m, t, r)
                state = apply_A(StateVector.zero(m + 2), sub, r)
                for power in range(6):
                    if power:
                        apply_Q(state, sub, r)
                    assert state.prob11() == pytest.approx(
                        prob11_analytic(model, power), abs=1e-10
                    )
                assert state.norm_squared() == pytest.approx(1.0, abs=1e-10)


def test_all_marked_is_certain():
    sub = sub_for(3, 8)
    assert prob11_statevector(sub, 1.0, 0) == pytest.approx(1.0, abs=1e-12)


def test_prob11_linear_in_r():
    sub = sub_for(5, 3)
    probs = [prob11_statevector(sub, r, 0) for r in (0.2, 0.4, 0.8)]
    assert probs[0] == pytest.approx(0.2 * 3 / 32, abs=1e-12)
    assert probs[1] == pytest.approx(2 * probs[0], abs=1e-12)
    assert probs[2] == pytest.approx(4 * probs[0], abs=1e-12)


@given(
    m=st.integers(min_value=1, max_value=4),
    r=st.floats(min_value=0.05, max_value=1.0),
    ops=st.lists(st.sampled_from(["A", "Ad", "Q"]), min_size=1, max_size=60),
    t=st.integers(min_value=0, max_value=16),
)
def test_unitarity_under_random_gate_sequences(m, r, ops, t):
    sub = sub_for(m, min(t, 1 << m))
    state = StateVector.zero(m + 2)
    apply_A(state, sub, r)
    for op in ops:
        if op == "A":
            apply_A(state, sub, r)
        elif op == "Ad":
            apply_A_dagger(state, sub, r)
        else:
            apply_Q(state, sub, r)
    assert state.norm_squared() == pytest.approx(1.0, abs=1e-10)


def test_a_dagger_inverts_a():
    sub = sub_for(4, 5)
    rng = np.random.default_rng(2)
    raw = rng.normal(size=64) + 1j * rng.normal(size=64)
    raw /= np.linalg.norm(raw)
    state = StateVector(6, raw.copy())
    apply_A_dagger(apply_A(state, sub, 0.6), sub, 0.6)
    assert np.allclose(state.amplitudes, raw, atol=1e-12)


def test_statevector_limits():
    with pytest.raises(ValueError):
        StateVector.zero(23)
    with pytest.raises(ValueError):
        StateVector.zero(1)
    with pytest.raises(ValueError):
        StateVector(3, np.ones(4))


def test_sample_shots():
    rng = np.random.default_rng(0)
    assert sample_shots(0.0, 1000, rng) == 0
    assert sample_shots(1.0, 100, rng) == 100
    assert sample_shots(0.5, 10, 123) == sample_shots(0.5, 10, 123)
    with pytest.raises(ValueError):
        sample_shots(1.5, 10, rng)
    with pytest.raises(ValueError):
        sample_shots(0.5, 0, rng)


def test_sample_shots_binomial_band():
    count = sample_shots(0.5, 10 ** 6, 7)
    assert 0.4985 <= count / 10 ** 6 <= 0.5015


def test_samplers_agree_and_cache():
    sub = sub_for(4, 3)
    analytic = AnalyticSampler.from_sub_oracle(sub, 5)
    exact = ExactSampler.from_amplitude(3 / 16)
    sv = StatevectorSampler(sub, 5)
    for power in (0, 1, 3):
        for r in (0.5, 1.0):
            p = analytic.probability(power, r)
            assert p == pytest.approx(sv.probability(power, r), abs=1e-10)
            assert p == pytest.approx(exact.probability(power, r), abs=1e-12)
    assert (3, 0.5) in sv._cache
    assert exact.sample(0, 1.0, 1600) == round(1600 * 3 / 16)
    # same seed, same stream
    a = AnalyticSampler.from_amplitude(0.3, 42)
    b = AnalyticSampler.from_amplitude(0.3, 42)
    assert [a.sample(1, 1.0, 9) for _ in range(5)] == [b.sample(1, 1.0, 9) for _ in range(5)]
