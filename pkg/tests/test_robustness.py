import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from steercert.linalg import phi_plus, proj
from steercert.povm import bob_ideal, validate_set
from steercert.robustness import (
    NoiseConfig,
    NoiseRangeError,
    W_closed_form_delta,
    W_closed_form_epsilon,
    diagonal_cell_closed_form,
    f_closed_form,
    noisy_bob,
    noisy_state,
    simulate_config,
    simulate_W,
    sweep,
    threshold_epsilon,
)

seeds = st.integers(0, 2**32 - 1)


def test_noisy_bob_limits():
    assert np.abs(noisy_bob(0).array() - bob_ideal().array()).max() == 0
    full = noisy_bob(1).array()
    assert np.abs(full - np.eye(2) / 3).max() < 1e-15
    for eps in np.linspace(0, 1, 11):
        assert validate_set(noisy_bob(eps)) == []


def test_noisy_bob_range():
    with pytest.raises(NoiseRangeError):
        noisy_bob(1.01)
    with pytest.raises(NoiseRangeError):
        noisy_bob(np.full((3, 3), -0.1))


def test_noisy_state_examples():
    assert np.abs(noisy_state(0, 0) - proj(phi_plus())).max() < 1e-15
    for eps in (0.1, 0.4, 2 / 3):
        assert abs(np.trace(noisy_state(eps)) - 1) < 1e-12
    assert np.abs(noisy_state(0, 1, "scaled") - np.diag([1, 0, 0, 0])).max() < 1e-15
    assert np.abs(noisy_state(0, 1 / np.sqrt(2), "shifted") - np.diag([1, 0, 0, 0])).max() < 1e-15
    with pytest.raises(NoiseRangeError):
        noisy_state(0.7)


def test_closed_form_values():
    assert W_closed_form_epsilon(0) == 3
    assert abs(W_closed_form_epsilon(0.1) - 2.72) < 1e-12
    assert abs(diagonal_cell_closed_form(0.1) - 0.28 / 9) < 1e-15
    for eps in np.linspace(0, 2 / 3, 40):
        assert W_closed_form_epsilon(eps) >= 3 * (1 - eps) - 1e-15


def test_per_cell_uniform():
    for eps in (0.05, 0.3):
        _, cells = simulate_config(NoiseConfig(eps))
        assert np.abs(cells - diagonal_cell_closed_form(eps)).max() < 1e-12


def test_W_monotone_in_epsilon():
    w = [simulate_W(e) for e in np.linspace(0, 2 / 3, 60)]
    assert np.all(np.diff(w) < 0)


def test_linear_sensitivity():
    eps = 1e-5
    assert abs((3 - simulate_W(eps)) / eps - 3) < 1e-4


def test_f_at_zero_delta():
    assert f_closed_form(0, 0) == 0
    for eps in np.linspace(0, 0.6, 13):
        assert abs(f_closed_form(0, eps) - (3 * eps - 2 * eps**2)) < 1e-12
        assert abs(f_closed_form(0, eps) - (3 - W_closed_form_epsilon(eps))) < 1e-12


def test_f_matches_direct_oracle():
    assert abs(3 - simulate_W(0.05, 0.1, "shifted") - f_closed_form(0.1, 0.05)) < 1e-9


def test_conventions_related_by_sqrt2():
    for delta in (-0.2, 0.05, 0.3):
        for eps in (0.0, 0.1):
            w = simulate_W(eps, delta, "scaled")
            assert abs(w - W_closed_form_delta(delta, eps, "scaled")) < 1e-12
            assert abs(w - W_closed_form_delta(delta / np.sqrt(2), eps)) < 1e-12


def test_literal_scaled_family_differs_from_closed_form():
    # The closed form is not the value for the (1, 1 - delta) family at the same delta.
    assert abs(simulate_W(0.0, 0.1, "scaled") - W_closed_form_delta(0.1, 0.0)) > 1e-3


def test_denominator_has_no_real_root():
    # -3 + 3 (sqrt2 - delta) delta = -3 ((delta - 1/sqrt2)^2 + 1/2) <= -3/2
    deltas = np.linspace(-10, 10, 20001)
    assert np.all(-3 + 3 * (np.sqrt(2) - deltas) * deltas <= -1.5 + 1e-12)


def test_f_small_parameter_scaling():
    for delta in np.linspace(-0.05, 0.05, 41):
        for eps in np.linspace(0, 0.05, 21):
            assert abs(f_closed_form(delta, eps)) <= 5 * (abs(delta) + eps) + 1e-15


@settings(max_examples=60)
@given(seeds)
def test_max_substitution_is_conservative(seed):
    rng = np.random.default_rng(seed)
    per = rng.uniform(0, 0.5, (3, 3))
    eps_s = rng.uniform(0, 0.5)
    cfg = NoiseConfig(per_element_epsilons=per, epsilon_s=eps_s)
    assert cfg.epsilon == max(per.max(), eps_s)
    w, _ = simulate_config(cfg)
    assert W_closed_form_epsilon(cfg.epsilon) <= w + 1e-9


def test_sweep_rows():
    rows = sweep([0.0, 0.2, 0.1], [0.1, 0.0, -0.1])
    keys = [(r.delta, r.epsilon) for r in rows]
    assert keys == sorted(keys)
    first = [r for r in rows if r.delta == 0 and r.epsilon == 0][0]
    assert first.W_closed_form == 3 and first.W_simulated == 3 and first.discrepancy == 0
    assert max(r.discrepancy for r in rows if r.delta == 0) <= 1e-10
    assert max(r.discrepancy for r in rows) <= 1e-9


def test_sweep_clips_out_of_range(caplog):
    rows = sweep([0.8], [0.0])
    assert rows[0].clipped and rows[0].epsilon == 2 / 3
    assert "clipped" in caplog.text


def test_threshold_epsilon():
    beta = 2.7980567236571
    eps = threshold_epsilon(beta)
    assert abs(W_closed_form_epsilon(eps) - beta) < 1e-12
    assert 0 < eps < 0.1
