"""Tests for nonlocal games, strategies, and the symmetrized product."""

import math

import numpy as np
import pytest

from cstarkit.games import (Measurement, NonlocalGame, State, Strategy,
                            best_value, chsh, commutator_defect, correlation,
                            game_element, game_value, is_delta_op_commuting,
                            sym_product)
from cstarkit.operators import dagger, herm_part, op_norm
from cstarkit.sampling import random_density, random_povm, rng_from_seed

Z = np.diag([1.0, -1.0]).astype(complex)
X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


def _projectors(observable):
    """Spectral projectors of a +-1 observable: (P_+, P_-)."""
    plus = (np.eye(2) + observable) / 2
    minus = (np.eye(2) - observable) / 2
    return plus, minus


def _tensor_measurement(observables):
    """One binary measurement per question from +-1 observables, as 4x4 blocks."""
    rows = []
    for obs in observables:
        plus, minus = _projectors(obs)
        rows.append([plus, minus])
    return rows


def chsh_tensor_strategy():
    """The standard optimal CHSH strategy embedded in one 4-dim algebra.

    Alice measures Z and X on her qubit; Bob measures (Z+X)/sqrt(2) and
    (Z-X)/sqrt(2) on his; they share the maximally entangled state.
    """
    s2 = math.sqrt(2.0)
    alice_obs = [Z, X]
    bob_obs = [(Z + X) / s2, (Z - X) / s2]
    eye = np.eye(2)
    alice_rows = [[np.kron(p, eye) for p in _projectors(obs)] for obs in alice_obs]
    bob_rows = [[np.kron(eye, p) for p in _projectors(obs)] for obs in bob_obs]
    bell = np.zeros(4, dtype=complex)
    bell[0] = bell[3] = 1.0 / s2
    rho = np.outer(bell, bell.conj())
    return Strategy(Measurement(np.array(alice_rows)),
                    Measurement(np.array(bob_rows)),
                    State(rho))


def random_strategy(rng, n, k, dim):
    alice = Measurement(np.array([random_povm(rng, dim, k) for _ in range(n)]))
    bob = Measurement(np.array([random_povm(rng, dim, k) for _ in range(n)]))
    return Strategy(alice, bob, State(random_density(rng, dim)))


# --- game construction --------------------------------------------------------

def test_chsh_shape_and_predicate():
    game = chsh()
    assert game.n == 2 and game.k == 2
    assert np.allclose(game.pi, 0.25)
    for x in range(2):
        for y in range(2):
            for a in range(2):
                for b in range(2):
                    assert game.predicate[x, y, a, b] == (1 if (a ^ b) == (x & y) else 0)


def test_game_validation():
    with pytest.raises(ValueError):
        NonlocalGame(pi=np.full((2, 2), 0.3), predicate=np.zeros((2, 2, 2, 2)))
    with pytest.raises(ValueError):
        NonlocalGame(pi=np.full((2, 2), -0.25), predicate=np.zeros((2, 2, 2, 2)))
    with pytest.raises(ValueError):
        NonlocalGame(pi=np.full((2, 2), 0.25), predicate=2 * np.ones((2, 2, 2, 2)))
    with pytest.raises(ValueError):
        NonlocalGame(pi=np.full((2, 2), 0.25), predicate=np.zeros((2, 2, 3, 2)))


def test_measurement_validation():
    good = np.zeros((1, 2, 2, 2), dtype=complex)
    good[0, 0] = np.diag([1.0, 0.0])
    good[0, 1] = np.diag([0.0, 1.0])
    Measurement(good)  # fine
    bad_sum = good.copy()
    bad_sum[0, 1] = np.diag([0.0, 0.5])
    with pytest.raises(ValueError):
        Measurement(bad_sum)
    bad_pos = good.copy()
    bad_pos[0, 0] = np.diag([1.5, 0.0])
    bad_pos[0, 1] = np.diag([-0.5, 1.0])
    with pytest.raises(ValueError):
        Measurement(bad_pos)


def test_state_validation():
    State(np.eye(2) / 2)
    with pytest.raises(ValueError):
        State(np.eye(2))  # trace 2
    with pytest.raises(ValueError):
        State(np.diag([1.5, -0.5]))  # negative eigenvalue


# --- symmetrized product --------------------------------------------------------

def test_sym_product_symmetric():
    rng = rng_from_seed(50)
    for _ in range(20):
        dim = int(rng.integers(2, 7))
        a = random_povm(rng, dim, 2)[0]
        b = random_povm(rng, dim, 2)[1]
        assert op_norm(sym_product(a, b) - sym_product(b, a)) < 1e-12


def test_sym_product_collapses_on_commuting():
    a = np.diag([0.3, 0.7, 0.1]).astype(complex)
    b = np.diag([0.5, 0.2, 0.9]).astype(complex)
    assert op_norm(sym_product(a, b) - a @ b) < 1e-12


def test_sym_product_positive_for_positive_inputs():
    rng = rng_from_seed(51)
    for _ in range(25):
        dim = int(rng.integers(2, 6))
        a = random_povm(rng, dim, 3)[0]
        b = random_povm(rng, dim, 3)[2]
        low = float(np.linalg.eigvalsh(sym_product(a, b))[0])
        assert low > -1e-10


def test_sym_product_rejects_negative_input():
    with pytest.raises(ValueError):
        sym_product(np.diag([-0.5, 1.0]), np.eye(2) / 2)


# --- correlations and values ---------------------------------------------------

def test_chsh_tensor_strategy_value():
    """The optimal tensor strategy wins with probability cos^2(pi/8)."""
    strategy = chsh_tensor_strategy()
    value = game_value(chsh(), strategy)
    assert value == pytest.approx(math.cos(math.pi / 8) ** 2, abs=1e-9)


def test_chsh_tensor_correlations_match_oracle():
    """Each correlation equals the textbook (1 +- <obs x obs>)/4 pattern."""
    strategy = chsh_tensor_strategy()
    c = math.cos(math.pi / 8) ** 2
    game = chsh()
    for x in range(2):
        for y in range(2):
            win = sum(correlation(strategy, x, y, a, b)
                      for a in range(2) for b in range(2)
                      if game.predicate[x, y, a, b])
            assert win == pytest.approx(c, abs=1e-9)


def test_correlation_normalization():
    rng = rng_from_seed(52)
    for _ in range(15):
        n, k = int(rng.integers(1, 3)), int(rng.integers(2, 4))
        dim = int(rng.integers(2, 5))
        strategy = random_strategy(rng, n, k, dim)
        for x in range(n):
            for y in range(n):
                total = sum(correlation(strategy, x, y, a, b)
                            for a in range(k) for b in range(k))
                assert total == pytest.approx(1.0, abs=1e-10)


def test_correlation_index_checks():
    strategy = chsh_tensor_strategy()
    with pytest.raises(IndexError):
        correlation(strategy, 2, 0, 0, 0)
    with pytest.raises(IndexError):
        correlation(strategy, 0, 0, 0, 5)


def test_game_element_spectrum_in_unit_interval():
    rng = rng_from_seed(53)
    game = chsh()
    for _ in range(15):
        dim = int(rng.integers(2, 5))
        strategy = random_strategy(rng, 2, 2, dim)
        element = game_element(game, strategy.alice, strategy.bob)
        assert op_norm(element - dagger(element)) < 1e-12
        eigs = np.linalg.eigvalsh(element)
        assert float(eigs[0]) >= -1e-10
        assert float(eigs[-1]) <= 1.0 + 1e-10


def test_game_value_equals_weighted_correlations():
    rng = rng_from_seed(54)
    game = chsh()
    strategy = random_strategy(rng, 2, 2, 3)
    direct = sum(game.pi[x, y] * correlation(strategy, x, y, a, b)
                 for x in range(2) for y in range(2)
                 for a in range(2) for b in range(2)
                 if game.predicate[x, y, a, b])
    assert game_value(game, strategy) == pytest.approx(direct, abs=1e-10)


def test_best_value_dominates_all_states():
    rng = rng_from_seed(55)
    game = chsh()
    strategy = random_strategy(rng, 2, 2, 4)
    top = best_value(game, strategy.alice, strategy.bob)
    assert top.value + 1e-10 >= game_value(game, strategy)
    hit = game_value(game, Strategy(strategy.alice, strategy.bob, top.state))
    assert hit == pytest.approx(top.value, abs=1e-10)


def test_relabeling_invariance():
    """Permuting answers in the measurement and the predicate leaves the value."""
    rng = rng_from_seed(56)
    game = chsh()
    strategy = random_strategy(rng, 2, 2, 3)
    value = game_value(game, strategy)
    perm = [1, 0]
    swapped_pred = game.predicate[:, :, perm, :]
    swapped_game = NonlocalGame(game.pi, swapped_pred)
    swapped_alice = Measurement(strategy.alice.ops[:, perm])
    swapped = Strategy(swapped_alice, strategy.bob, strategy.state)
    assert game_value(swapped_game, swapped) == pytest.approx(value, abs=1e-12)


def test_deterministic_embedding_matches_exact_count():
    """Dimension-one deterministic strategies score the exact predicate average."""
    game = chsh()
    ops_a = np.zeros((2, 2, 1, 1), dtype=complex)
    ops_b = np.zeros((2, 2, 1, 1), dtype=complex)
    fa, fb = (0, 1), (1, 1)
    for x, a in enumerate(fa):
        ops_a[x, a, 0, 0] = 1.0
    for y, b in enumerate(fb):
        ops_b[y, b, 0, 0] = 1.0
    strategy = Strategy(Measurement(ops_a), Measurement(ops_b),
                        State(np.eye(1)))
    expected = sum(0.25 * game.predicate[x, y, fa[x], fb[y]]
                   for x in range(2) for y in range(2))
    assert game_value(game, strategy) == pytest.approx(float(expected), abs=1e-15)


# --- commutator checks -----------------------------------------------------------

def test_commutator_defect_pauli():
    """[Z, X] has norm 2, and both PVMs contribute one such pair."""
    ops = np.zeros((1, 2, 2, 2), dtype=complex)
    ops[0, 0] = _projectors(Z)[0]
    ops[0, 1] = _projectors(Z)[1]
    meas_z = Measurement(ops)
    ops = np.zeros((1, 2, 2, 2), dtype=complex)
    ops[0, 0] = _projectors(X)[0]
    ops[0, 1] = _projectors(X)[1]
    meas_x = Measurement(ops)
    # each of the four projector pairs contributes |[P, Q]| = 1/2
    assert commutator_defect(meas_z, meas_x, 0, 0) == pytest.approx(2.0, abs=1e-12)


def test_is_delta_op_commuting():
    strategy = chsh_tensor_strategy()
    check = is_delta_op_commuting(strategy.alice, strategy.bob, 1e-10)
    assert check.ok
    assert check.worst_defect < 1e-12
    with pytest.raises(ValueError):
        is_delta_op_commuting(strategy.alice, strategy.bob, -0.5)


def test_commuting_strategies_satisfy_plain_product():
    """For tensor strategies the bullet product is the plain product."""
    strategy = chsh_tensor_strategy()
    a = strategy.alice.ops[0, 0]
    b = strategy.bob.ops[1, 1]
    assert op_norm(sym_product(a, b) - a @ b) < 1e-12
