"""Semidecision over finite-dimensional strategy candidates.

A game family maps bit strings to games; membership is half-decided by
sweeping a deterministic stream of measurement pairs (dimension one
deterministic strategies first, then caller-planted pairs, then seeded
random dyadic-grid candidates) and accepting as soon as the best state
value certifiably exceeds one half.  A see-saw optimizer and an exact
classical brute force round out the toolbox.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, NamedTuple, Sequence

import numpy as np

from .errors import HypothesisError, PreconditionError
from .games import (
    Measurement,
    NonlocalGame,
    State,
    Strategy,
    best_value,
    commutator_defect,
    game_element,
    is_delta_op_commuting,
)
from .operators import DEFAULT_TOL, Tolerance, herm_part, op_norm, spectral_apply
from .rounding import povm_defect, round_to_povm
from .sampling import random_povm, rng_from_seed

# Certified bound on the eigenvalue error of the value estimate.  Dense
# Hermitian solves are accurate to machine precision times the norm, so
# this is a generous ceiling; acceptance demands value - error > 1/2.
CERTIFIED_EIG_ERROR = 2.0 ** -7

_OUTCOMES = ("accepted", "budget_exhausted")
_STEP_GRID = tuple(0.5 * 2.0 ** -j for j in range(10))
_ENUMERATION_CAP = 2 ** 24


@dataclass(frozen=True)
class GameFamily:
    """Bit strings to games, with a commutator budget per input length."""

    encode: Callable[[str], NonlocalGame]
    delta: Callable[[int], float]


def constant_family(game: NonlocalGame, delta: float) -> GameFamily:
    """Family sending every bit string to the same game and budget."""
    return GameFamily(encode=lambda z: game, delta=lambda m: float(delta))


@dataclass(frozen=True)
class CandidateStream:
    """Deterministic recipe for generating measurement-pair candidates.

    dims is the round-robin dimension sweep for the random phase,
    grid_denominator the power of two whose inverse is the entry grid,
    and planted an optional tuple of (alice, bob) pairs inserted after
    the deterministic prefix and before the random phase.
    """

    dims: tuple[int, ...]
    grid_denominator: int = 1024
    seed: int = 0
    budget: int = 10_000
    planted: tuple = ()

    def __post_init__(self) -> None:
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 1 for d in dims):
            raise ValueError("dims must be a nonempty sequence of positive integers")
        object.__setattr__(self, "dims", dims)
        q = int(self.grid_denominator)
        if q < 2 or q & (q - 1):
            raise ValueError(
                f"grid_denominator must be a power of two, at least 2, got {self.grid_denominator!r}")
        object.__setattr__(self, "grid_denominator", q)
        budget = int(self.budget)
        if budget < 1:
            raise ValueError(f"budget must be at least 1, got {self.budget!r}")
        object.__setattr__(self, "budget", budget)
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "planted", tuple(self.planted))


@dataclass(frozen=True)
class Witness:
    """Accepted strategy: measurements, state, certified value, defect."""

    alice: Measurement
    bob: Measurement
    state: State
    certified_value: float
    defect: float


@dataclass(frozen=True)
class SearchVerdict:
    outcome: str
    witness: Witness | None
    candidates_tried: int
    wall_time: float

    def __post_init__(self) -> None:
        if self.outcome not in _OUTCOMES:
            raise ValueError(f"outcome must be one of {_OUTCOMES}, got {self.outcome!r}")
        if self.outcome == "accepted":
            if self.witness is None or not self.witness.certified_value > 0.5:
                raise ValueError("accepted verdicts need a witness certified above 1/2")


def deterministic_measurement(answers: Sequence[int], k: int) -> Measurement:
    """Dimension-one measurement answering question x with answers[x]."""
    answers = tuple(int(a) for a in answers)
    if any(not 0 <= a < k for a in answers):
        raise ValueError(f"answers must lie in [0, {k}), got {answers}")
    ops = np.zeros((len(answers), k, 1, 1), dtype=np.complex128)
    for x, a in enumerate(answers):
        ops[x, a, 0, 0] = 1.0
    return Measurement(ops)


def _snap_to_grid(m: np.ndarray, q: int) -> np.ndarray:
    return (np.round(m.real * q) + 1j * np.round(m.imag * q)) / q


def _grid_measurement(rng: np.random.Generator, n: int, k: int, dim: int,
                      q: int, tol: Tolerance) -> Measurement:
    """Random POVM per question with entries snapped to the dyadic grid.

    Snapping breaks exactness, so each row is repaired; the repair
    refuses (and the candidate is skipped) if the grid is too coarse.
    """
    rows = []
    for _ in range(n):
        base = random_povm(rng, dim, k)
        snapped = [_snap_to_grid(m, q) for m in base]
        repaired, _ = round_to_povm(snapped, tol)
        rows.append(repaired)
    return Measurement(np.array(rows))


def _checked_plant(game: NonlocalGame, pair) -> tuple[Measurement, Measurement]:
    alice, bob = pair
    for side in (alice, bob):
        if not isinstance(side, Measurement):
            raise PreconditionError("planted candidates must be Measurement pairs")
        if side.questions != game.n or side.outcomes != game.k:
            raise PreconditionError(
                f"planted measurement shape ({side.questions}, {side.outcomes}) does not "
                f"match the game ({game.n}, {game.k})")
    if alice.dim != bob.dim:
        raise PreconditionError("planted pair must share one dimension")
    return alice, bob


def _raw_pairs(game: NonlocalGame, stream: CandidateStream,
               tol: Tolerance) -> Iterator[tuple[Measurement, Measurement] | None]:
    """Unfiltered candidate source; None marks a consumed-but-skipped slot."""
    n, k = game.n, game.k
    for fa in itertools.product(range(k), repeat=n):
        alice = deterministic_measurement(fa, k)
        for fb in itertools.product(range(k), repeat=n):
            yield alice, deterministic_measurement(fb, k)
    for pair in stream.planted:
        yield _checked_plant(game, pair)
    rng = rng_from_seed(stream.seed)
    i = 0
    while True:
        dim = stream.dims[i % len(stream.dims)]
        i += 1
        try:
            alice = _grid_measurement(rng, n, k, dim, stream.grid_denominator, tol)
            bob = _grid_measurement(rng, n, k, dim, stream.grid_denominator, tol)
        except HypothesisError:
            yield None
            continue
        yield alice, bob


def _indexed_candidates(game: NonlocalGame, stream: CandidateStream, delta: float,
                        tol: Tolerance) -> Iterator[tuple[int, Measurement, Measurement]]:
    source = itertools.islice(_raw_pairs(game, stream, tol), stream.budget)
    for examined, pair in enumerate(source, start=1):
        if pair is None:
            continue
        alice, bob = pair
        if is_delta_op_commuting(alice, bob, delta).ok:
            yield examined, alice, bob


def enumerate_candidates(game: NonlocalGame, stream: CandidateStream, delta: float,
                         tol: Tolerance = DEFAULT_TOL) -> Iterator[tuple[Measurement, Measurement]]:
    """Candidate pairs that are exact measurements and almost commute.

    Order: all dimension-one deterministic pairs, then planted pairs,
    then seeded random grid candidates cycling through stream.dims.
    The stream examines at most stream.budget pairs; pairs failing the
    strict per-question-pair commutator check are dropped silently.
    """
    for _, alice, bob in _indexed_candidates(game, stream, delta, tol):
        yield alice, bob


def semidecide_membership(family: GameFamily, z: str, stream: CandidateStream,
                          tol: Tolerance = DEFAULT_TOL) -> SearchVerdict:
    """Half-decide membership of z by sweeping the candidate stream.

    Accepts once best_value minus the certified eigenvalue error clears
    one half; returns budget_exhausted otherwise.  Never answers "no".
    """
    if not isinstance(z, str) or set(z) - {"0", "1"}:
        raise PreconditionError(f"z must be a string of 0s and 1s, got {z!r}")
    game = family.encode(z)
    delta = float(family.delta(len(z)))
    if not 0.0 <= delta <= 1.0:
        raise PreconditionError(f"delta({len(z)}) = {delta!r} must lie in [0, 1]")
    start = time.perf_counter()
    for examined, alice, bob in _indexed_candidates(game, stream, delta, tol):
        approx = best_value(game, alice, bob, tol)
        certified = approx.value - CERTIFIED_EIG_ERROR
        if certified > 0.5:
            check = is_delta_op_commuting(alice, bob, delta)
            witness = Witness(alice=alice, bob=bob, state=approx.state,
                              certified_value=certified, defect=check.worst_defect)
            return SearchVerdict(outcome="accepted", witness=witness,
                                 candidates_tried=examined,
                                 wall_time=time.perf_counter() - start)
    return SearchVerdict(outcome="budget_exhausted", witness=None,
                         candidates_tried=stream.budget,
                         wall_time=time.perf_counter() - start)


def evaluate_stream(game: NonlocalGame, stream: CandidateStream, delta: float,
                    tol: Tolerance = DEFAULT_TOL) -> tuple[Witness | None, int]:
    """Best certified value over the whole candidate stream, no threshold.

    Returns the best Witness found (None when nothing in the stream passes
    the measurement and commutation gates) and the number of candidates
    examined, which is the full budget.  A stream-limited lower estimate
    of the delta-almost-commuting value of the game.
    """
    if not 0.0 <= delta <= 1.0:
        raise PreconditionError(f"delta = {delta!r} must lie in [0, 1]")
    best: Witness | None = None
    for _, alice, bob in _indexed_candidates(game, stream, delta, tol):
        approx = best_value(game, alice, bob, tol)
        certified = approx.value - CERTIFIED_EIG_ERROR
        if best is None or certified > best.certified_value:
            check = is_delta_op_commuting(alice, bob, delta)
            best = Witness(alice=alice, bob=bob, state=approx.state,
                           certified_value=certified, defect=check.worst_defect)
    return best, stream.budget


class WitnessAudit(NamedTuple):
    ok: bool
    povm_residual: float
    worst_defect: float
    value: float


def measurement_residual(meas: Measurement) -> float:
    """Distance from exact POVM conditions: row sums and negativity."""
    eye = np.eye(meas.dim)
    worst = 0.0
    for x in range(meas.questions):
        worst = max(worst, op_norm(meas.ops[x].sum(axis=0) - eye))
        for a in range(meas.outcomes):
            low = float(np.linalg.eigvalsh(herm_part(meas.ops[x, a]))[0])
            worst = max(worst, -min(low, 0.0))
    return worst


def verify_witness(game: NonlocalGame, witness: Witness, delta: float,
                   tol: Tolerance = DEFAULT_TOL) -> WitnessAudit:
    """Independent re-check of an accepted witness.

    Sound iff both measurements satisfy exact POVM conditions within
    1e-10, the pair almost commutes under delta, and the witness state
    wins with probability above one half.
    """
    residual = max(measurement_residual(witness.alice), measurement_residual(witness.bob))
    check = is_delta_op_commuting(witness.alice, witness.bob, delta)
    element = game_element(game, witness.alice, witness.bob, tol)
    value = float(np.trace(witness.state.rho @ element).real)
    ok = residual <= 1e-10 and check.ok and value > 0.5
    return WitnessAudit(ok=ok, povm_residual=residual,
                        worst_defect=check.worst_defect, value=value)


class SeesawRun(NamedTuple):
    strategy: Strategy
    trace: list[float]


def _penalty(alice: Measurement, bob: Measurement, delta: float) -> float:
    total = 0.0
    for x in range(alice.questions):
        for y in range(bob.questions):
            total += max(0.0, commutator_defect(alice, bob, x, y) - delta)
    return total


def _objective(game: NonlocalGame, alice: Measurement, bob: Measurement,
               rho: np.ndarray, delta: float, mu: float, tol: Tolerance) -> float:
    value = float(np.trace(rho @ game_element(game, alice, bob, tol)).real)
    return value - mu * _penalty(alice, bob, delta)


def _psd_sqrt_clip(m: np.ndarray) -> np.ndarray:
    lam, vecs = np.linalg.eigh(herm_part(m))
    return (vecs * np.sqrt(np.clip(lam, 0.0, None))) @ vecs.conj().T


def _row_weights(game: NonlocalGame, x: int, side: str) -> np.ndarray:
    """weights[a, y, b]: coefficient of tr(rho (mine[a] • other[y, b]))."""
    predicate = game.predicate.astype(float)
    if side == "alice":
        return np.einsum("y,yab->ayb", game.pi[x, :], predicate[x])
    return np.einsum("x,xab->bxa", game.pi[:, x], predicate[:, x])


def _row_value(row: np.ndarray, weights: np.ndarray, other_ops: np.ndarray,
               other_rho_roots: np.ndarray, rho: np.ndarray) -> float:
    """Weighted bullet value of one row against a fixed state.

    other_rho_roots[y, b] must hold sqrt(F) rho sqrt(F); the trace of
    rho (E • F) then splits into two plain traces.
    """
    total = 0.0
    for a in range(row.shape[0]):
        if not weights[a].any():
            continue
        root = _psd_sqrt_clip(row[a])
        conj = root @ rho @ root
        for y in range(other_ops.shape[0]):
            for b in range(other_ops.shape[1]):
                c = weights[a, y, b]
                if c:
                    total += 0.5 * c * ((conj * other_ops[y, b].T).sum()
                                        + (other_rho_roots[y, b] * row[a].T).sum()).real
    return total


def _row_penalty(row: np.ndarray, other_ops: np.ndarray, delta: float) -> float:
    total = 0.0
    for y in range(other_ops.shape[0]):
        defect = 0.0
        for a in range(row.shape[0]):
            for b in range(other_ops.shape[1]):
                defect += op_norm(row[a] @ other_ops[y, b] - other_ops[y, b] @ row[a])
        total += max(0.0, defect - delta)
    return total


def _row_value_gradient(game: NonlocalGame, my_ops: np.ndarray, other_ops: np.ndarray,
                        rho: np.ndarray, x: int, side: str, tol: Tolerance,
                        floor: float = 1e-6) -> np.ndarray:
    """Derivative of the row value in the Hermitian trace pairing.

    The value depends on a row element E through tr(rho (E • F)) summed
    with predicate weights; the derivative splits into a direct term
    sqrt(F) rho sqrt(F) and a chain term through sqrt(E), evaluated with
    the divided-difference rule for the matrix square root.  The floor
    caps the divided differences where E is nearly singular; the exact
    derivative uses a vanishing floor, while ascent proposals use a
    coarse one so near-kernel noise cannot drown the useful directions.
    """
    n, k = game.n, game.k
    weights = _row_weights(game, x, side)
    dim = my_ops.shape[-1]
    roots = np.zeros_like(other_ops)
    for y in range(n):
        for b in range(k):
            roots[y, b] = spectral_apply(other_ops[y, b], lambda t: math.sqrt(max(t, 0.0)), tol)
    grads = np.zeros((k, dim, dim), dtype=np.complex128)
    for a in range(k):
        if not weights[a].any():
            continue
        lam, vecs = np.linalg.eigh(herm_part(my_ops[x, a]))
        s = np.sqrt(np.clip(lam, 0.0, None))
        my_root = (vecs * s) @ vecs.conj().T
        chain = np.zeros((dim, dim), dtype=np.complex128)
        direct = np.zeros((dim, dim), dtype=np.complex128)
        for y in range(n):
            for b in range(k):
                c = weights[a, y, b]
                if c == 0.0:
                    continue
                other = other_ops[y, b]
                chain += c * (other @ my_root @ rho + rho @ my_root @ other)
                direct += c * (roots[y, b] @ rho @ roots[y, b])
        divided = 1.0 / np.maximum(s[:, None] + s[None, :], floor)
        lifted = vecs @ (divided * (vecs.conj().T @ chain @ vecs)) @ vecs.conj().T
        grads[a] = herm_part(0.5 * (lifted + direct))
    return grads


# Divided-difference floor for ascent proposals.  Repaired POVM elements
# carry exact kernel directions whose formal derivative entries blow up;
# a coarse floor keeps proposals pointed at the informative eigenblocks.
_PROPOSAL_FLOOR = 0.25


def _improve_rows(game: NonlocalGame, alice: Measurement, bob: Measurement,
                  rho: np.ndarray, delta: float, mu: float, obj: float,
                  side: str, tol: Tolerance) -> tuple[Measurement, Measurement, float]:
    """One projected-gradient pass over the chosen side's POVM rows.

    The state and the other side stay fixed, so the objective splits
    into row-local pieces; each accepted step adds its exact gain.
    """
    mine = alice if side == "alice" else bob
    other = bob if side == "alice" else alice
    n, k = game.n, game.k
    other_roots = np.array([[_psd_sqrt_clip(other.ops[y, b]) for b in range(k)]
                            for y in range(n)])
    conjugated = np.array([[other_roots[y, b] @ rho @ other_roots[y, b] for b in range(k)]
                           for y in range(n)])
    ops = np.array(mine.ops)
    for x in range(n):
        weights = _row_weights(game, x, side)
        current_value = _row_value(ops[x], weights, other.ops, conjugated, rho)
        current_pen = _row_penalty(ops[x], other.ops, delta)
        grad = _row_value_gradient(game, ops, other.ops, rho, x, side, tol,
                                   floor=_PROPOSAL_FLOOR)
        grad = grad - grad.mean(axis=0)
        scale = max(op_norm(g) for g in grad)
        if scale <= tol.algebraic:
            continue
        direction = grad / scale
        for t in _STEP_GRID:
            raw = [herm_part(ops[x, a] + t * direction[a]) for a in range(k)]
            if povm_defect(raw, tol) >= 0.5:
                continue
            try:
                repaired, _ = round_to_povm(raw, tol)
            except HypothesisError:
                continue
            trial = np.array(repaired)
            gain = (_row_value(trial, weights, other.ops, conjugated, rho) - current_value
                    - mu * (_row_penalty(trial, other.ops, delta) - current_pen))
            if gain > 1e-12:
                ops[x] = trial
                obj += gain
                break
    mine = Measurement(ops)
    if side == "alice":
        return mine, other, obj
    return other, mine, obj


def seesaw_optimize(game: NonlocalGame, dim: int, delta: float = 0.0, mu: float = 10.0,
                    iters: int = 50, init: tuple[Measurement, Measurement] | None = None,
                    seed: int = 0, tol: Tolerance = DEFAULT_TOL) -> SeesawRun:
    """Alternating ascent on value minus mu times excess commutator defect.

    Each sweep replaces the state by the top eigenvector of the game
    element, then polishes each player's POVM rows with a projected
    gradient step repaired back to an exact POVM; steps that fail to
    improve the objective are rolled back, so the recorded trace never
    decreases.  Returns the final strategy and the objective trace.
    """
    if dim < 1:
        raise PreconditionError(f"dim must be at least 1, got {dim!r}")
    if mu < 0:
        raise PreconditionError(f"mu must be nonnegative, got {mu!r}")
    if iters < 1:
        raise PreconditionError(f"iters must be at least 1, got {iters!r}")
    if init is not None:
        alice, bob = init
        if alice.dim != dim or bob.dim != dim:
            raise PreconditionError(
                f"init dimensions ({alice.dim}, {bob.dim}) do not match dim={dim}")
        if (alice.questions, alice.outcomes) != (game.n, game.k) or \
                (bob.questions, bob.outcomes) != (game.n, game.k):
            raise PreconditionError("init measurement shapes do not match the game")
    else:
        rng = rng_from_seed(seed)
        alice = Measurement(np.array([random_povm(rng, dim, game.k) for _ in range(game.n)]))
        bob = Measurement(np.array([random_povm(rng, dim, game.k) for _ in range(game.n)]))
    rho = np.eye(dim, dtype=np.complex128) / dim
    obj = _objective(game, alice, bob, rho, delta, mu, tol)
    trace = [obj]
    for _ in range(iters):
        top = best_value(game, alice, bob, tol)
        cand = top.value - mu * _penalty(alice, bob, delta)
        if cand >= obj:
            rho = top.state.rho
            obj = cand
        trace.append(obj)
        alice, bob, obj = _improve_rows(game, alice, bob, rho, delta, mu, obj, "alice", tol)
        trace.append(obj)
        alice, bob, obj = _improve_rows(game, alice, bob, rho, delta, mu, obj, "bob", tol)
        trace.append(obj)
    return SeesawRun(strategy=Strategy(alice, bob, State(rho)), trace=trace)


def classical_optimum(game: NonlocalGame) -> tuple[Fraction, tuple[int, ...], tuple[int, ...]]:
    """Exact best deterministic strategy: value and answer functions.

    Enumerates Alice's answer functions and picks Bob's best reply per
    question, in exact rational arithmetic over the probability table.
    """
    n, k = game.n, game.k
    pairs = k ** (2 * n)
    if pairs > _ENUMERATION_CAP:
        raise PreconditionError(
            f"deterministic enumeration needs k^(2n) = {pairs} strategy pairs, "
            f"above the supported {_ENUMERATION_CAP}")
    table = [[Fraction(float(game.pi[x, y])) for y in range(n)] for x in range(n)]
    common = math.lcm(*(f.denominator for row in table for f in row))
    nums = [[int(f * common) for f in row] for row in table]
    predicate = game.predicate
    best = -1
    best_fa: tuple[int, ...] = ()
    best_fb: tuple[int, ...] = ()
    for fa in itertools.product(range(k), repeat=n):
        total = 0
        reply = []
        for y in range(n):
            scores = [sum(nums[x][y] * int(predicate[x, y, fa[x], b]) for x in range(n))
                      for b in range(k)]
            b_best = max(range(k), key=lambda b: scores[b])
            reply.append(b_best)
            total += scores[b_best]
        if total > best:
            best = total
            best_fa = fa
            best_fb = tuple(reply)
    return Fraction(best, common), best_fa, best_fb


def classical_value(game: NonlocalGame) -> Fraction:
    """Exact winning probability of the best deterministic strategy."""
    value, _, _ = classical_optimum(game)
    return value
