#!/usr/bin/env python3
"""The CHSH game: classical bound 3/4 versus the entangled value cos^2(pi/8).

Two players receive uniform question bits x, y and answer bits a, b; they
win when a XOR b equals x AND y.  Answering from a shared strategy fixed
in advance caps the win probability at 3/4.  Sharing an entangled state
and measuring in rotated bases lifts it to cos^2(pi/8), about 0.854.
"""

import math

import numpy as np

from cstarkit.games import (Measurement, State, Strategy, best_value, chsh,
                            game_value)
from cstarkit.search import classical_optimum, classical_value

# Alice measures the observables Z and X on her half of a Bell pair; Bob
# measures (Z + X)/sqrt(2) and (Z - X)/sqrt(2).  Everything is embedded in
# one 4-dimensional algebra so the two sides share a single state.
Z = np.diag([1.0, -1.0]).astype(complex)
X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


def projectors(observable):
    plus = (np.eye(2) + observable) / 2
    return plus, np.eye(2) - plus


def tensor_strategy():
    s2 = math.sqrt(2.0)
    eye = np.eye(2)
    alice = [[np.kron(p, eye) for p in projectors(obs)] for obs in (Z, X)]
    bob = [[np.kron(eye, p) for p in projectors(obs)]
           for obs in ((Z + X) / s2, (Z - X) / s2)]
    bell = np.zeros(4, dtype=complex)
    bell[0] = bell[3] = 1.0 / s2
    return Strategy(Measurement(np.array(alice)), Measurement(np.array(bob)),
                    State(np.outer(bell, bell.conj())))


def main():
    game = chsh()

    value, alice_answers, bob_answers = classical_optimum(game)
    print(f"classical value : {value} = {float(value):.6f}")
    print(f"  attained by answer functions a(x) = {alice_answers}, b(y) = {bob_answers}")
    assert classical_value(game) == value

    strategy = tensor_strategy()
    quantum = game_value(game, strategy)
    print(f"entangled value : {quantum:.12f}")
    print(f"  cos^2(pi/8)   = {math.cos(math.pi / 8) ** 2:.12f}")

    # best_value keeps the measurements and picks the best state for them:
    # the top eigenvector of the game element.  For the optimal measurements
    # the Bell state is already that eigenvector.
    top = best_value(game, strategy.alice, strategy.bob)
    print(f"best state value: {top.value:.12f}")
    overlap = float(np.trace(top.state.rho @ strategy.state.rho).real)
    print(f"  overlap with the Bell state: {overlap:.6f}")


if __name__ == "__main__":
    main()
