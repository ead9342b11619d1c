import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cogaoi.markov import (
    AccessProbabilities,
    DropForm,
    battery_charge_probability,
    drop_probability,
    effective_arrival,
    fcfs_steady_state,
    qr_steady_state,
    transmit_probability,
)
from cogaoi.geometry import Region
from oracles import fcfs_chain, qr_chain, stationary, truncation_size

rates = st.floats(0.01, 0.99)


def battery_chain_stationary(p_eh, p_gz, p_s):
    # Empty -> Full w.p. p_eh; Full -> Empty w.p. (1 - p_gz) p_s
    P = np.array([[1 - p_eh, p_eh], [(1 - p_gz) * p_s, 1 - (1 - p_gz) * p_s]])
    return stationary(P)


def test_charge_probability_default():
    assert battery_charge_probability(0.0256, 0.0576, 0.5) == pytest.approx(0.051530, abs=5e-7)
    # 0.05153 * 0.9424 * 0.5
    assert transmit_probability(0.05153, 0.0576, 0.5) == pytest.approx(0.02428094, abs=1e-8)


def test_charge_probability_matches_two_state_chain():
    for p_eh, p_gz, p_s in [(0.0256, 0.0576, 0.5), (0.3, 0.9, 0.1), (0.01, 0.0, 1.0)]:
        full = battery_chain_stationary(p_eh, p_gz, p_s)[1]
        exact = p_eh / (p_eh + (1 - p_gz) * p_s)
        assert full == pytest.approx(exact, rel=1e-12)
        approx = battery_charge_probability(p_eh, p_gz, p_s)
        assert approx == pytest.approx(exact, rel=1e-12)


def test_charge_probability_degenerate():
    with pytest.raises(ValueError):
        battery_charge_probability(0.0, 0.0, 0.0)
    assert battery_charge_probability(0.0, 0.3, 0.5) == 0.0
    assert battery_charge_probability(0.2, 0.1, 0.0) == 1.0


def test_access_probabilities_from_region():
    acc = AccessProbabilities.from_region(Region(500, 200, 80, 120), 0.5)
    assert acc.p_eh == pytest.approx(0.0256)
    assert acc.p_tr == pytest.approx(acc.p_ch * (1 - acc.p_gz) * 0.5)


def test_fcfs_steady_state_example():
    st_ = fcfs_steady_state(0.2, 0.5)
    assert st_.rho == pytest.approx(0.2 * 0.5 / (0.5 * 0.8))
    assert st_.total_mass() == pytest.approx(1.0, abs=1e-15)
    assert st_.prob(3) == pytest.approx(st_.rho**2 * st_.pi[1])


def test_fcfs_unstable():
    st_ = fcfs_steady_state(0.6, 0.5)
    assert not st_.stable
    with pytest.raises(ValueError):
        st_.prob(0)


def test_qr_steady_state_example():
    st_ = qr_steady_state(0.2, 0.5)
    assert st_.pi == pytest.approx((0.615385, 0.307692, 0.076923), abs=5e-7)


def test_qr_equal_rates():
    st_ = qr_steady_state(0.4, 0.4)
    assert sum(st_.pi) == pytest.approx(1.0, abs=1e-15)
    assert st_.pi == pytest.approx(tuple(stationary(qr_chain(0.4, 0.4))), abs=1e-12)


def test_drop_forms_disagree():
    assert drop_probability(0.2, 0.5, DropForm.DEFINITIONAL) == pytest.approx(0.076923, abs=5e-7)
    assert drop_probability(0.2, 0.5, "closed_form") == pytest.approx(0.0625, abs=1e-15)


def test_definitional_drop_is_full_buffer_mass():
    for lam, mu in [(0.2, 0.5), (0.9, 0.3), (0.05, 0.95)]:
        assert drop_probability(lam, mu, "definitional") == pytest.approx(qr_steady_state(lam, mu).pi[2], rel=1e-12)


def test_effective_arrival_zero_and_bounds():
    assert effective_arrival(0.0, 0.5) == 0.0
    assert 0 < effective_arrival(0.5, 0.5) < 0.5


def test_rate_validation():
    for bad in [(0.0, 0.5), (1.0, 0.5), (0.5, 0.0), (0.5, 1.2)]:
        with pytest.raises(ValueError):
            fcfs_steady_state(*bad)
        with pytest.raises(ValueError):
            qr_steady_state(*bad)


@settings(max_examples=50, deadline=None)
@given(lam=rates, mu=rates)
def test_fcfs_against_truncated_chain(lam, mu):
    if lam >= mu * 0.999:
        return
    st_ = fcfs_steady_state(lam, mu)
    if st_.rho > 0.98:
        return
    pi = stationary(fcfs_chain(lam, mu, truncation_size(st_.rho)))
    for n in range(5):
        assert st_.prob(n) == pytest.approx(pi[n], abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(lam=rates, mu=rates)
def test_qr_against_chain(lam, mu):
    pi = stationary(qr_chain(lam, mu))
    assert qr_steady_state(lam, mu).pi == pytest.approx(tuple(pi), abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(lam=rates, mu=rates)
def test_effective_arrival_identity(lam, mu):
    p_d = drop_probability(lam, mu, "closed_form")
    assert effective_arrival(lam, mu) == pytest.approx(lam * (1 - p_d), rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(lam=rates, mu=rates)
def test_distributions_normalise(lam, mu):
    assert math.fsum(qr_steady_state(lam, mu).pi) == pytest.approx(1.0, abs=1e-12)
    f = fcfs_steady_state(lam, mu)
    if f.stable:
        assert f.total_mass() == pytest.approx(1.0, abs=1e-12)
    for form in DropForm:
        assert 0.0 <= drop_probability(lam, mu, form) <= 1.0


def test_trivial_battery_cases():
    assert battery_charge_probability(1.0, 0.0, 1.0) == 0.5
    assert battery_charge_probability(0.3, 0.2, 0.0) == 1.0
    assert transmit_probability(0.4, 0.1, 0.0) == 0.0
    assert transmit_probability(1.0, 0.0, 1.0) == 1.0


def test_fcfs_textbook_values():
    st_ = fcfs_steady_state(0.2, 0.5)
    assert st_.rho == pytest.approx(0.25, abs=1e-15)
    assert st_.pi == pytest.approx((0.6, 0.3), abs=1e-15)
    assert fcfs_steady_state(1e-9, 0.5).pi[0] == pytest.approx(1.0, abs=1e-8)


def test_perfect_service_limits():
    assert qr_steady_state(0.3, 1.0).pi[2] == 0.0
    for form in DropForm:
        assert drop_probability(0.3, 1.0, form) == 0.0
    assert effective_arrival(0.3, 1.0) == pytest.approx(0.3, abs=1e-15)
    assert qr_steady_state(1e-9, 0.5).pi[0] == pytest.approx(1.0, abs=1e-8)


def test_effective_arrival_example():
    assert effective_arrival(0.2, 0.5) == pytest.approx(0.1875, abs=1e-15)
    assert 0.2 * (1 - drop_probability(0.2, 0.5)) == pytest.approx(0.1875, abs=1e-15)
