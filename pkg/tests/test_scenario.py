import itertools

import numpy as np
import pytest
from conftest import random_measurements
from hypothesis import given, settings
from hypothesis import strategies as st

from steercert.linalg import DimensionError, phi_plus, random_density
from steercert.povm import alice_ideal, alice_vectors, bob_ideal
from steercert.robustness import noisy_bob, noisy_state
from steercert.scenario import (
    InvalidStateError,
    JointDistribution,
    LhsModel,
    NormalizationError,
    assemblage_from,
    deterministic_responses,
    diagonal_cells,
    distribution_from,
    distribution_from_lhs,
    estimate_W,
    random_lhs_model,
    sample_shots,
    steering_functional,
)

seeds = st.integers(0, 2**32 - 1)
UNIFORM = JointDistribution(np.full((3, 3, 3, 3), 1 / 9))


def ideal():
    return distribution_from(phi_plus(), alice_ideal(), bob_ideal())


def test_ideal_matches_transpose_trick_oracle():
    # <phi+| M (x) N |phi+> = Tr(M^T N) / 2
    ma, nb = alice_ideal().array(), bob_ideal().array()
    oracle = np.array([[[[np.trace(ma[x, a].T @ nb[y, b]).real / 2 for b in range(3)]
                         for a in range(3)] for y in range(3)] for x in range(3)])
    assert np.abs(ideal().p - oracle).max() < 1e-12


def test_ideal_distribution_values():
    p = ideal().p
    assert np.abs(diagonal_cells(ideal())).max() < 1e-12
    assert abs(p[0, 0, 0, 1] - 1 / 6) < 1e-12
    for x, a, b in itertools.product(range(3), repeat=3):
        if a != b:
            assert abs(p[x, x, a, b] - 1 / 6) < 1e-12


def test_maximally_mixed_gives_uniform():
    d = distribution_from(np.eye(4) / 4, alice_ideal(), bob_ideal())
    assert np.abs(d.p - 1 / 9).max() < 1e-12


def test_assemblage_of_phi_plus():
    sigma = assemblage_from(phi_plus(), bob_ideal())
    assert sigma.violations() == []
    nb = bob_ideal().array()
    assert np.abs(sigma.sigma - nb.transpose(0, 1, 3, 2) / 2).max() < 1e-12
    assert np.allclose(sigma.traces(), 1 / 3)
    for y in range(3):
        assert np.abs(sigma.sigma[y].sum(axis=0) - np.eye(2) / 2).max() < 1e-12


def test_assemblage_of_product_state(rng):
    ra, rb = random_density(2, rng), random_density(2, rng)
    sigma = assemblage_from(np.kron(ra, rb), bob_ideal()).sigma
    nb = bob_ideal().array()
    for y, b in itertools.product(range(3), repeat=2):
        assert np.abs(sigma[y, b] - np.trace(nb[y, b] @ rb) * ra).max() < 1e-12


def test_invalid_inputs():
    with pytest.raises(DimensionError):
        assemblage_from(np.eye(6) / 6, bob_ideal())
    with pytest.raises(InvalidStateError):
        distribution_from(np.diag([1.0, 0.5, -0.5, 0]), alice_ideal(), bob_ideal())
    with pytest.raises(InvalidStateError):
        distribution_from(np.eye(4) / 2, alice_ideal(), bob_ideal())


@settings(max_examples=50)
@given(seeds, st.integers(2, 4))
def test_random_quantum_triples(seed, db):
    rng = np.random.default_rng(seed)
    alice, bob = random_measurements(2, rng), random_measurements(db, rng)
    rho = random_density(2 * db, rng)
    d = distribution_from(rho, alice, bob)
    assert d.violations() == []
    sigma = assemblage_from(rho, bob)
    assert sigma.violations() == []
    via = np.einsum("xaij,ybji->xyab", alice.array(), sigma.sigma).real
    assert np.abs(via - d.p).max() < 1e-10
    am, bm = d.alice_marginal(), d.bob_marginal()
    assert np.abs(am - am[:, :1]).max() < 1e-10
    assert np.abs(bm - bm[:1]).max() < 1e-10
    assert steering_functional(d) <= 3 + 1e-9


def test_functional_examples():
    assert abs(steering_functional(ideal()) - 3) < 1e-12
    assert abs(steering_functional(UNIFORM) - 2) < 1e-12
    d = distribution_from(noisy_state(0.1), alice_ideal(), noisy_bob(0.1))
    assert abs(steering_functional(d) - 2.72) < 1e-12


def test_functional_rejects_unnormalized():
    with pytest.raises(NormalizationError):
        steering_functional(JointDistribution(np.full((3, 3, 3, 3), 0.1)))


def test_lhs_deterministic_single_state():
    # |0>, b = y. Diagonal cells need a = x: p(0|0) + p(1|1) + p(2|2)
    # = (2/3)(1 + 3/4 + 1/2) = 3/2 from the |<e_{x,x}|0>|^2 values.
    e = alice_vectors()
    hand = sum(2 / 3 * abs(e[x, x][0]) ** 2 for x in range(3))
    assert abs(hand - 1.5) < 1e-12
    model = LhsModel([1.0], [[1, 0]], [np.eye(3)])
    d = distribution_from_lhs(model, alice_ideal())
    assert d.violations() == []
    assert abs(steering_functional(d) - (3 - hand)) < 1e-12


@given(seeds, st.integers(1, 6))
def test_uniform_response_gives_two(seed, n_hidden):
    rng = np.random.default_rng(seed)
    m = random_lhs_model(rng, n_hidden)
    m = LhsModel(m.weights, m.states, np.full((n_hidden, 3, 3), 1 / 3))
    assert abs(steering_functional(distribution_from_lhs(m, alice_ideal())) - 2) < 1e-12


def test_lhs_model_rejects_bad_rows():
    with pytest.raises(ValueError):
        LhsModel([0.5, 0.6], [[1, 0], [0, 1]], np.full((2, 3, 3), 1 / 3))
    with pytest.raises(ValueError):
        LhsModel([1.0], [[1, 0]], [np.full((3, 3), 0.5)])


def test_deterministic_responses_enumeration():
    all_g = list(deterministic_responses())
    assert len(all_g) == 27
    assert len({g for g, _ in all_g}) == 27
    for _, r in all_g:
        assert np.allclose(r.sum(axis=1), 1)


@settings(max_examples=200)
@given(seeds, st.integers(1, 20))
def test_random_lhs_models_below_bound(seed, n_hidden):
    from steercert.lhs import deterministic_lhs_cross_check

    bound = deterministic_lhs_cross_check(alice_ideal())
    d = distribution_from_lhs(random_lhs_model(np.random.default_rng(seed), n_hidden), alice_ideal())
    assert d.violations() == []
    assert steering_functional(d) <= bound + 1e-9


def test_sampler_on_ideal_is_exact():
    rec = sample_shots(ideal(), 5000, seed=1)
    w, se = estimate_W(rec)
    assert w == 3.0 and se == 0.0


def test_sampler_deterministic():
    a = sample_shots(UNIFORM, 1000, seed=42)
    b = sample_shots(UNIFORM, 1000, seed=42)
    c = sample_shots(UNIFORM, 1000, seed=43)
    assert np.array_equal(a.rows(), b.rows())
    assert not np.array_equal(a.rows(), c.rows())


def test_sampler_frequencies_follow_distribution():
    d = distribution_from(noisy_state(0.3), alice_ideal(), noisy_bob(0.3))
    policy = np.zeros((3, 3))
    policy[1, 1] = 1.0
    policy = 0.9 * policy + 0.1 / 9
    rec = sample_shots(d, 200_000, seed=5, policy=policy)
    sel = (rec.x == 1) & (rec.y == 1)
    n = sel.sum()
    freq = np.zeros((3, 3))
    np.add.at(freq, (rec.a[sel], rec.b[sel]), 1)
    freq /= n
    se = np.sqrt(d.p[1, 1] * (1 - d.p[1, 1]) / n)
    assert np.all(np.abs(freq - d.p[1, 1]) <= 5 * se + 1e-12)


def test_estimate_requires_diagonal_shots():
    rec = sample_shots(UNIFORM, 10, seed=0)
    keep = rec.x != rec.y
    from steercert.scenario import ShotRecords

    partial = ShotRecords(rec.x[keep], rec.y[keep], rec.a[keep], rec.b[keep], 0)
    with pytest.raises(ValueError):
        estimate_W(partial)


def test_sampler_policy_must_cover_diagonal():
    with pytest.raises(ValueError):
        sample_shots(UNIFORM, 10, seed=0, policy=(np.ones((3, 3)) - np.eye(3)) / 6)


def test_estimate_consistent_over_seeds():
    d = distribution_from(noisy_state(0.2), alice_ideal(), noisy_bob(0.2))
    target = steering_functional(d)
    est = [estimate_W(sample_shots(d, 100_000, seed=s)) for s in range(50)]
    w = np.array([e[0] for e in est])
    se = np.sqrt(np.sum(np.array([e[1] for e in est]) ** 2)) / len(est)
    assert abs(w.mean() - target) <= 3 * se

