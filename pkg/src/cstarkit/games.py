"""Nonlocal games played by one-algebra strategies.

A game is a question distribution ``pi`` over pairs (x, y) and a binary
predicate ``D(x, y, a, b)``.  Both players' measurements live in the same
matrix algebra; probabilities come from the symmetrized product

    A • B = (sqrt(A) B sqrt(A) + sqrt(B) A sqrt(B)) / 2

which is positive, sums to the identity over (a, b), and collapses to the
ordinary product when the measurements commute.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .operators import (DEFAULT_TOL, Tolerance, as_operator, dagger, herm_part,
                        hermitian_eig, op_norm)

_PROB_SLACK = 1e-9


def _frozen_array(obj, name, value):
    arr = np.array(value)
    arr.setflags(write=False)
    object.__setattr__(obj, name, arr)


@dataclass(frozen=True)
class NonlocalGame:
    """Question distribution and winning predicate.

    pi: (n, n) nonnegative array summing to 1 within 1e-12.
    predicate: (n, n, k, k) array of {0, 1}, indexed [x, y, a, b].
    """

    pi: np.ndarray
    predicate: np.ndarray

    def __post_init__(self) -> None:
        pi = np.asarray(self.pi, dtype=float)
        pred = np.asarray(self.predicate)
        if pi.ndim != 2 or pi.shape[0] != pi.shape[1] or pi.shape[0] < 1:
            raise ValueError(f"pi must be square, got shape {pi.shape}")
        n = pi.shape[0]
        if pred.ndim != 4 or pred.shape[:2] != (n, n) or pred.shape[2] != pred.shape[3]:
            raise ValueError(f"predicate shape {pred.shape} does not match pi shape {pi.shape}")
        if np.any(pi < 0):
            raise ValueError("pi entries must be nonnegative")
        total = float(pi.sum())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"pi must sum to 1 within 1e-12, got {total!r}")
        if not np.isin(pred, (0, 1)).all():
            raise ValueError("predicate entries must be 0 or 1")
        _frozen_array(self, "pi", pi)
        _frozen_array(self, "predicate", pred.astype(np.int8))

    @property
    def n(self) -> int:
        return self.pi.shape[0]

    @property
    def k(self) -> int:
        return self.predicate.shape[2]


def chsh() -> NonlocalGame:
    """Two questions, two answers, uniform pi; win when a xor b = x and y."""
    pi = np.full((2, 2), 0.25)
    pred = np.zeros((2, 2, 2, 2), dtype=np.int8)
    for x in range(2):
        for y in range(2):
            for a in range(2):
                for b in range(2):
                    pred[x, y, a, b] = 1 if (a ^ b) == (x & y) else 0
    return NonlocalGame(pi, pred)


@dataclass(frozen=True)
class Measurement:
    """One POVM per question: ops[x][a] is outcome a of question x.

    ops has shape (n, k, dim, dim); each element is positive semidefinite
    within tolerance and each question's outcomes sum to the identity
    within tolerance.
    """

    ops: np.ndarray

    def __post_init__(self) -> None:
        ops = np.asarray(self.ops, dtype=np.complex128)
        if ops.ndim != 4 or ops.shape[2] != ops.shape[3]:
            raise ValueError(f"ops must have shape (n, k, dim, dim), got {ops.shape}")
        tol = DEFAULT_TOL
        herm = np.max(np.abs(ops - np.conj(np.swapaxes(ops, 2, 3))))
        if herm > tol.algebraic:
            raise ValueError(f"POVM elements must be Hermitian within tolerance, defect {herm:.3e}")
        eigs = np.linalg.eigvalsh(ops)
        low = float(eigs.min())
        if low < -tol.algebraic:
            raise ValueError(f"POVM elements must be positive within tolerance, min eigenvalue {low:.3e}")
        sums = ops.sum(axis=1)
        eye = np.eye(ops.shape[2])
        worst = max(op_norm(sums[x] - eye) for x in range(ops.shape[0]))
        if worst > tol.algebraic:
            raise ValueError(f"each question's outcomes must sum to 1 within tolerance, defect {worst:.3e}")
        _frozen_array(self, "ops", ops)

    @property
    def questions(self) -> int:
        return self.ops.shape[0]

    @property
    def outcomes(self) -> int:
        return self.ops.shape[1]

    @property
    def dim(self) -> int:
        return self.ops.shape[2]


@dataclass(frozen=True)
class State:
    """Density matrix: positive within tolerance, trace 1 within 1e-12."""

    rho: np.ndarray

    def __post_init__(self) -> None:
        rho = as_operator(self.rho)
        tol = DEFAULT_TOL
        if op_norm(rho - dagger(rho)) > tol.algebraic:
            raise ValueError("state must be Hermitian within tolerance")
        low = float(np.linalg.eigvalsh(herm_part(rho))[0])
        if low < -tol.algebraic:
            raise ValueError(f"state must be positive within tolerance, min eigenvalue {low:.3e}")
        tr = complex(np.trace(rho))
        if abs(tr - 1.0) > 1e-12:
            raise ValueError(f"state must have trace 1 within 1e-12, got {tr!r}")
        _frozen_array(self, "rho", rho)

    @property
    def dim(self) -> int:
        return self.rho.shape[0]


@dataclass(frozen=True)
class Strategy:
    """Two measurements and a shared state in one algebra."""

    alice: Measurement
    bob: Measurement
    state: State

    def __post_init__(self) -> None:
        if not (self.alice.dim == self.bob.dim == self.state.dim):
            raise ValueError("strategy parts must share one dimension")


def _psd_sqrt(a: np.ndarray, tol: Tolerance) -> np.ndarray:
    spec = hermitian_eig(a, tol)
    low = float(spec.eigenvalues[0])
    if low < -tol.algebraic:
        raise ValueError(f"matrix must be positive within tolerance, min eigenvalue {low:.3e}")
    roots = np.sqrt(np.maximum(spec.eigenvalues, 0.0))
    return (spec.eigenvectors * roots) @ dagger(spec.eigenvectors)


def sym_product(a, b, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Symmetrized product (sqrt(a) b sqrt(a) + sqrt(b) a sqrt(b)) / 2.

    Positive for positive inputs, and equal to ab when [a, b] = 0.
    """
    a = as_operator(a)
    b = as_operator(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    ra = _psd_sqrt(a, tol)
    rb = _psd_sqrt(b, tol)
    return herm_part((ra @ b @ ra + rb @ a @ rb) / 2)


def correlation(strategy: Strategy, x: int, y: int, a: int, b: int,
                tol: Tolerance = DEFAULT_TOL) -> float:
    """Probability of answers (a, b) to questions (x, y).

    Violations of [0, 1] beyond 1e-9 raise instead of being clamped.
    """
    al, bo = strategy.alice, strategy.bob
    if not (0 <= x < al.questions and 0 <= y < bo.questions):
        raise IndexError(f"question index out of range: ({x}, {y})")
    if not (0 <= a < al.outcomes and 0 <= b < bo.outcomes):
        raise IndexError(f"answer index out of range: ({a}, {b})")
    p = float(np.trace(strategy.state.rho @ sym_product(al.ops[x, a], bo.ops[y, b], tol)).real)
    if p < -_PROB_SLACK or p > 1.0 + _PROB_SLACK:
        raise ArithmeticError(f"correlation {p!r} escapes [0, 1] beyond slack {_PROB_SLACK}")
    return p


def _sqrt_family(ops: np.ndarray, tol: Tolerance) -> np.ndarray:
    flat = ops.reshape(-1, ops.shape[2], ops.shape[3])
    roots = np.stack([_psd_sqrt(m, tol) for m in flat])
    return roots.reshape(ops.shape)


def game_element(game: NonlocalGame, alice: Measurement, bob: Measurement,
                 tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Weighted sum of symmetrized products: sum pi(x,y) D(x,y,a,b) (A • B).

    Hermitian with spectrum in [0, 1] up to tolerance; the game value of a
    state is its expectation against this matrix.
    """
    _check_shapes(game, alice, bob)
    ra = _sqrt_family(alice.ops, tol)
    rb = _sqrt_family(bob.ops, tol)
    dim = alice.dim
    element = np.zeros((dim, dim), dtype=np.complex128)
    for x in range(game.n):
        for y in range(game.n):
            weight = game.pi[x, y] * game.predicate[x, y].astype(float)
            if not weight.any():
                continue
            first = np.einsum("aij,bjk,akl->abil", ra[x], bob.ops[y], ra[x], optimize=True)
            second = np.einsum("bij,ajk,bkl->abil", rb[y], alice.ops[x], rb[y], optimize=True)
            element += np.einsum("ab,abil->il", weight, (first + second) / 2)
    return herm_part(element)


def _check_shapes(game: NonlocalGame, alice: Measurement, bob: Measurement) -> None:
    if alice.questions != game.n or bob.questions != game.n:
        raise ValueError("measurement question count does not match the game")
    if alice.outcomes != game.k or bob.outcomes != game.k:
        raise ValueError("measurement outcome count does not match the game")
    if alice.dim != bob.dim:
        raise ValueError("players must share one dimension")


def game_value(game: NonlocalGame, strategy: Strategy,
               tol: Tolerance = DEFAULT_TOL) -> float:
    """Winning probability of the strategy."""
    element = game_element(game, strategy.alice, strategy.bob, tol)
    return float(np.trace(strategy.state.rho @ element).real)


class BestValue(NamedTuple):
    value: float
    state: State


def best_value(game: NonlocalGame, alice: Measurement, bob: Measurement,
               tol: Tolerance = DEFAULT_TOL) -> BestValue:
    """Best winning probability over states for fixed measurements.

    The maximum eigenvalue of the game element, attained by the rank-one
    density on its top eigenvector (returned alongside).
    """
    element = game_element(game, alice, bob, tol)
    spec = hermitian_eig(element, tol)
    top = spec.eigenvectors[:, -1]
    rho = np.outer(top, top.conj())
    rho = herm_part(rho) / float(np.trace(rho).real)
    return BestValue(value=float(spec.eigenvalues[-1]), state=State(rho))


def commutator_defect(alice: Measurement, bob: Measurement, x: int, y: int) -> float:
    """Sum over answers of |[A^x_a, B^y_b]| for one question pair."""
    if not (0 <= x < alice.questions and 0 <= y < bob.questions):
        raise IndexError(f"question index out of range: ({x}, {y})")
    total = 0.0
    for a in range(alice.outcomes):
        for b in range(bob.outcomes):
            total += op_norm(alice.ops[x, a] @ bob.ops[y, b] - bob.ops[y, b] @ alice.ops[x, a])
    return total


class CommutationCheck(NamedTuple):
    ok: bool
    worst_pair: tuple[int, int]
    worst_defect: float


def is_delta_op_commuting(alice: Measurement, bob: Measurement,
                          delta: float) -> CommutationCheck:
    """Strict check: every question pair's commutator defect is < delta."""
    if delta < 0:
        raise ValueError(f"delta must be nonnegative, got {delta!r}")
    worst = -1.0
    worst_pair = (0, 0)
    for x in range(alice.questions):
        for y in range(bob.questions):
            d = commutator_defect(alice, bob, x, y)
            if d > worst:
                worst = d
                worst_pair = (x, y)
    return CommutationCheck(ok=worst < delta, worst_pair=worst_pair, worst_defect=worst)
