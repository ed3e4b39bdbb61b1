"""Finitely presented C*-algebras at desk scale.

A presentation lists generators with dyadic norm bounds and *-polynomial
relations; a representation assigns matrices to the generators with the unit
mapped to the identity exactly.  Registered presentation families carry a
stability witness (a rounding procedure turning near-representations into
exact ones) together with a modulus table saying how small the relation
defect must be for a requested output distance.  On top of that sits a
certified lower-bound enumerator for universal norms of *-polynomials,
scanning a seeded representation catalog.
"""

from __future__ import annotations

import hashlib
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Mapping, NamedTuple

import numpy as np

from .dyadic import ceil_log2, is_dyadic
from .errors import HypothesisError, PreconditionError, UnsupportedPresentationError
from .operators import DEFAULT_TOL, Tolerance, as_operator, dagger, op_norm
from .polynomials import NCPolynomial, generator, lipschitz_bound
from .rounding import (_isometry_cut, round_to_projection, round_to_pvm,
                       round_to_unitary)
from .sampling import random_projection, random_unitary, rng_from_seed

_NAME_KINDS = ("trivial", "free_unitaries", "projections", "matrix_units")


@dataclass(frozen=True)
class Presentation:
    """Generators with nonnegative dyadic norm bounds plus *-polynomial relations."""

    generators: tuple
    relations: tuple
    unit_generator: str = "e"

    def __post_init__(self) -> None:
        gens = []
        seen = set()
        for name, bound in self.generators:
            if not isinstance(name, str) or not name.isidentifier():
                raise PreconditionError(f"invalid generator name {name!r}")
            if name in seen:
                raise PreconditionError(f"duplicate generator name {name!r}")
            seen.add(name)
            bound = Fraction(bound)
            if bound < 0 or not is_dyadic(bound):
                raise PreconditionError(
                    f"norm bound for {name!r} must be a nonnegative dyadic rational, got {bound}")
            gens.append((name, bound))
        object.__setattr__(self, "generators", tuple(gens))
        if self.unit_generator not in seen:
            raise PreconditionError(
                f"unit generator {self.unit_generator!r} is not among the generators")
        rels = tuple(self.relations)
        for p in rels:
            if not isinstance(p, NCPolynomial):
                raise PreconditionError("relations must be NCPolynomial instances")
            stray = p.symbols() - seen
            if stray:
                raise PreconditionError(
                    f"relation mentions undeclared generators: {sorted(stray)}")
        object.__setattr__(self, "relations", rels)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.generators)

    @property
    def bounds(self) -> dict[str, Fraction]:
        return dict(self.generators)


@dataclass(frozen=True, eq=False)
class Representation:
    """Matrix images for generators; the unit image is the identity exactly."""

    dim: int
    images: Mapping[str, np.ndarray]
    unit: str = "e"

    def __post_init__(self) -> None:
        if not isinstance(self.dim, int) or self.dim < 1:
            raise PreconditionError(f"dim must be a positive integer, got {self.dim}")
        eye = np.eye(self.dim, dtype=np.complex128)
        fixed: dict[str, np.ndarray] = {}
        for name, img in dict(self.images).items():
            img = as_operator(img)
            if img.shape != (self.dim, self.dim):
                raise PreconditionError(
                    f"image of {name!r} has shape {img.shape}, expected {(self.dim, self.dim)}")
            img = img.copy()
            img.flags.writeable = False
            fixed[name] = img
        if self.unit in fixed:
            if not np.array_equal(fixed[self.unit], eye):
                raise PreconditionError(
                    f"unit generator {self.unit!r} must map to the identity exactly")
        else:
            eye.flags.writeable = False
            fixed[self.unit] = eye
        object.__setattr__(self, "images", fixed)


def eval_poly(p: NCPolynomial, rep: Representation) -> np.ndarray:
    """Substitute the representation's images into p (star = adjoint)."""
    return p.evaluate(rep.images, rep.dim)


def relation_defect(pres: Presentation, rep: Representation) -> float:
    """max over relation norms and norm-bound excesses at rep.

    Zero exactly on representations; the unit must be imaged by the identity.
    """
    unit_img = rep.images.get(pres.unit_generator)
    if unit_img is None:
        raise PreconditionError(f"missing image for generator {pres.unit_generator!r}")
    if not np.array_equal(unit_img, np.eye(rep.dim, dtype=np.complex128)):
        raise PreconditionError(
            f"unit generator {pres.unit_generator!r} must map to the identity exactly")
    worst = 0.0
    for name, bound in pres.generators:
        img = rep.images.get(name)
        if img is None:
            raise PreconditionError(f"missing image for generator {name!r}")
        worst = max(worst, op_norm(img) - float(bound))
    for p in pres.relations:
        worst = max(worst, op_norm(eval_poly(p, rep)))
    return max(worst, 0.0)


@dataclass(frozen=True)
class StabilityModulusTable:
    """Total monotone map n -> m: defect 2^-m guarantees distance below 2^-n."""

    presentation_id: str
    modulus: Callable[[int], int]

    def of(self, n: int) -> int:
        if not isinstance(n, int) or n < 0:
            raise PreconditionError(f"modulus argument must be a natural number, got {n}")
        m = self.modulus(n)
        if not isinstance(m, int) or m < 0:
            raise ArithmeticError(f"modulus table returned a non-natural value {m!r} at {n}")
        return m


# --- registered presentation families ------------------------------------

def trivial_presentation(unit: str = "e") -> Presentation:
    """The scalar algebra: just the unit, no relations."""
    return Presentation(((unit, Fraction(1)),), (), unit_generator=unit)


def free_unitaries(n: int, unit: str = "e") -> Presentation:
    """n universal unitaries u1..un: uk* uk = uk uk* = 1, bounds 1."""
    if n < 1:
        raise PreconditionError(f"need at least one unitary generator, got {n}")
    e = generator(unit)
    gens = [(unit, Fraction(1))]
    rels = []
    for k in range(1, n + 1):
        u = generator(f"u{k}")
        gens.append((f"u{k}", Fraction(1)))
        rels.append(u.adjoint() * u - e)
        rels.append(u * u.adjoint() - e)
    return Presentation(tuple(gens), tuple(rels), unit_generator=unit)


def projections_presentation(n: int, unit: str = "e") -> Presentation:
    """n universal projections p1..pn: pk = pk* = pk^2, bounds 1."""
    if n < 1:
        raise PreconditionError(f"need at least one projection generator, got {n}")
    gens = [(unit, Fraction(1))]
    rels = []
    for k in range(1, n + 1):
        p = generator(f"p{k}")
        gens.append((f"p{k}", Fraction(1)))
        rels.append(p * p - p)
        rels.append(p.adjoint() - p)
    return Presentation(tuple(gens), tuple(rels), unit_generator=unit)


def matrix_units(k: int, unit: str = "e") -> Presentation:
    """The k x k matrix-unit presentation of M_k.

    Generators e{i}{j} with e{i}{j}* = e{j}{i}, e{i}{j} e{l}{m} = [j = l] e{i}{m}
    and sum of diagonal units equal to the unit.  Single-digit indices keep
    names unambiguous, so k is capped at 9 (far beyond desk scale already).
    """
    if not 1 <= k <= 9:
        raise PreconditionError(f"matrix-unit size must be between 1 and 9, got {k}")
    gens = [(unit, Fraction(1))]
    units = {}
    for i in range(1, k + 1):
        for j in range(1, k + 1):
            name = f"e{i}{j}"
            gens.append((name, Fraction(1)))
            units[i, j] = generator(name)
    rels = [sum((units[i, i] for i in range(2, k + 1)), units[1, 1]) - generator(unit)]
    for i in range(1, k + 1):
        for j in range(1, k + 1):
            rels.append(units[i, j].adjoint() - units[j, i])
            for l in range(1, k + 1):
                for m in range(1, k + 1):
                    prod = units[i, j] * units[l, m]
                    rels.append(prod - units[i, m] if j == l else prod)
    return Presentation(tuple(gens), tuple(rels), unit_generator=unit)


def cuntz(n: int, unit: str = "e") -> Presentation:
    """Cuntz relations: sk* sk = 1 and the range projections sum to 1.

    Constructible for defect evaluation only; deliberately not registered
    for stability witnesses (no finite-dimensional representations exist).
    """
    if n < 2:
        raise PreconditionError(f"Cuntz relations need at least two isometries, got {n}")
    e = generator(unit)
    gens = [(unit, Fraction(1))]
    rels = []
    ranges = None
    for k in range(1, n + 1):
        s = generator(f"s{k}")
        gens.append((f"s{k}", Fraction(1)))
        rels.append(s.adjoint() * s - e)
        term = s * s.adjoint()
        ranges = term if ranges is None else ranges + term
    rels.append(ranges - e)
    return Presentation(tuple(gens), tuple(rels), unit_generator=unit)


def toeplitz(unit: str = "e") -> Presentation:
    """A single proper isometry: s* s = 1 (and nothing about s s*)."""
    s = generator("s")
    gens = ((unit, Fraction(1)), ("s", Fraction(1)))
    return Presentation(gens, (s.adjoint() * s - generator(unit),), unit_generator=unit)


class RegisteredFamily(NamedTuple):
    presentation: Presentation
    table: StabilityModulusTable
    witness: Callable[[Presentation, Representation, float, Tolerance], Representation]


def _parse_registered_id(pres_id: str) -> tuple[str, int]:
    head, _, tail = pres_id.partition(":")
    if head == "trivial" and not tail:
        return "trivial", 0
    if head in ("free_unitaries", "projections", "matrix_units") and tail.isdigit():
        return head, int(tail)
    raise UnsupportedPresentationError(
        f"presentation id {pres_id!r} has no registered stability witness")


def registered_presentation(pres_id: str) -> RegisteredFamily:
    """Look up a registered family by id.

    Ids: "trivial", "free_unitaries:N", "projections:N", "matrix_units:K".
    Cuntz and Toeplitz presentations are constructible but unregistered:
    they have no finite-dimensional representations to round to.
    """
    kind, size = _parse_registered_id(pres_id)
    if kind == "trivial":
        pres = trivial_presentation()
        table = StabilityModulusTable(pres_id, lambda n: 0)
        return RegisteredFamily(pres, table, _witness_trivial)
    if kind == "free_unitaries":
        pres = free_unitaries(size)
        table = StabilityModulusTable(pres_id, lambda n: n + 1)
        return RegisteredFamily(pres, table, _witness_unitaries)
    if kind == "projections":
        pres = projections_presentation(size)
        table = StabilityModulusTable(pres_id, lambda n: 2 * n + 4)
        return RegisteredFamily(pres, table, _witness_projections)
    pres = matrix_units(size)
    table = StabilityModulusTable(pres_id, _matrix_units_modulus)
    return RegisteredFamily(pres, table, _witness_matrix_units)


def _matrix_units_modulus(n: int) -> int:
    # floor 10 keeps the diagonal family inside the PVM rounding entry gate;
    # the n + 4 branch leaves a 2^4 budget for product-relation amplification
    return max(10, n + 4)


def _witness_trivial(pres, rep, eps, tol):
    return Representation(rep.dim, {}, unit=pres.unit_generator)


def _witness_unitaries(pres, rep, eps, tol):
    images = {}
    for name, _ in pres.generators:
        if name == pres.unit_generator:
            continue
        images[name], _ = round_to_unitary(rep.images[name], eps, tol)
    return Representation(rep.dim, images, unit=pres.unit_generator)


def _witness_projections(pres, rep, eps, tol):
    images = {}
    for name, _ in pres.generators:
        if name == pres.unit_generator:
            continue
        images[name], _ = round_to_projection(rep.images[name], eps, tol)
    return Representation(rep.dim, images, unit=pres.unit_generator)


_ISOMETRY_ENTRY_GATE = 1.0 / 16.0


def _matrix_unit_isometry(a, p1, p2, tol: Tolerance) -> np.ndarray:
    """Round a to a partial isometry with support p1 and range p2, exactly.

    For inputs this close to matrix units, b = p2 a p1 has b^H b spectrum
    {0} on the complement of ran(p1) and clustered at 1 on it, so the cut
    at 1/2 yields w with w^H w = p1 and w w^H = p2 at float accuracy.
    """
    defect = max(op_norm(dagger(a) @ a - p1), op_norm(a @ dagger(a) - p2))
    if defect > _ISOMETRY_ENTRY_GATE:
        raise HypothesisError("input too far from a partial isometry between the corners",
                              defect=defect, bound=_ISOMETRY_ENTRY_GATE)
    w = _isometry_cut(a, p1, p2, 0.5, tol)
    resid = max(op_norm(dagger(w) @ w - p1), op_norm(w @ dagger(w) - p2))
    if resid > tol.algebraic:
        raise ArithmeticError(
            f"matrix-unit isometry missed exactness: residual {resid:.3e}")
    return w


def _witness_matrix_units(pres, rep, eps, tol):
    k = round(math.isqrt(len(pres.generators) - 1))
    diag, _ = round_to_pvm([rep.images[f"e{i}{i}"] for i in range(1, k + 1)], tol)
    v = {1: diag[0]}
    for i in range(2, k + 1):
        v[i] = _matrix_unit_isometry(rep.images[f"e{i}1"], diag[0], diag[i - 1], tol)
    images = {}
    for i in range(1, k + 1):
        for j in range(1, k + 1):
            images[f"e{i}{j}"] = v[i] @ dagger(v[j])
    return Representation(rep.dim, images, unit=pres.unit_generator)


def stability_witness(pres_id: str, rep: Representation, eps: float,
                      tol: Tolerance = DEFAULT_TOL) -> Representation:
    """Round a near-representation of a registered family to an exact one.

    The relation defect must not exceed 2^-m for m = table(n), where 2^-n is
    the largest dyadic target at or below eps; the output is an exact
    representation (defect at float scale) within eps of the input.
    """
    family = registered_presentation(pres_id)
    if not eps > 0:
        raise PreconditionError(f"eps must be positive, got {eps}")
    n = max(1, ceil_log2(1 / Fraction(eps)))
    m = family.table.of(n)
    gate = Fraction(1, 2 ** m)
    defect = relation_defect(family.presentation, rep)
    if defect > gate:
        raise HypothesisError(
            f"relation defect too large for target 2^-{n} under {pres_id}",
            defect=defect, bound=float(gate))
    out = family.witness(family.presentation, rep, 2.0 ** -n, tol)
    resid = relation_defect(family.presentation, out)
    if resid > tol.algebraic:
        raise ArithmeticError(f"witness missed exactness: residual {resid:.3e}")
    dist = max((op_norm(out.images[name] - rep.images[name])
                for name in family.presentation.names if name in rep.images),
               default=0.0)
    if not dist < eps:
        raise ArithmeticError(f"witness moved too far: {dist:.6f} >= {eps}")
    return out


def combine_moduli(kind: str, base: StabilityModulusTable, size: int) -> StabilityModulusTable:
    """Modulus table for a direct sum of `size` copies or an M_size amplification.

    Conservative by design: the summand/inner algebra is rounded at a
    shifted index and the block bookkeeping (unit projections of summands,
    matrix units of the amplification) adds its own rounding budget.
    """
    if not isinstance(size, int) or size < 1:
        raise PreconditionError(f"size must be a positive integer, got {size!r}")
    pad = (size - 1).bit_length()
    label = f"{kind}({base.presentation_id},{size})"
    if kind == "direct_sum":
        return StabilityModulusTable(
            label, lambda n: max(base.of(n + 2), n + 4 + pad))
    if kind == "matrix_amplification":
        shift = 2 * pad + 4
        if size == 1:
            return StabilityModulusTable(label, lambda n: base.of(n + shift))
        return StabilityModulusTable(
            label, lambda n: max(base.of(n + shift), _matrix_units_modulus(n)))
    raise PreconditionError(f"unknown combinator kind {kind!r}")


# --- representation catalog and norm enumeration -------------------------

def _subseed(seed, pres_id: str, round_index: int) -> tuple[int, int, int]:
    digest = hashlib.sha256(pres_id.encode()).digest()
    return (int(seed), int(round_index), int.from_bytes(digest[:8], "big"))


def _exact_matrix_unit_images(k: int, dim: int, u: np.ndarray | None = None) -> dict[str, np.ndarray]:
    reps = dim // k
    images = {}
    for i in range(1, k + 1):
        for j in range(1, k + 1):
            block = np.zeros((k, k), dtype=np.complex128)
            block[i - 1, j - 1] = 1.0
            img = np.kron(block, np.eye(reps, dtype=np.complex128))
            if u is not None:
                img = u @ img @ dagger(u)
            images[f"e{i}{j}"] = img
    return images


@dataclass(frozen=True)
class RepresentationCatalog:
    """Seeded, reproducible supply of representations for registered families.

    Every round yields the family's canonical representations (so sharp
    finite-dimensional witnesses are never missed) followed by `per_round`
    random ones cycling through `dims`.
    """

    dims: tuple = tuple(range(1, 17))
    per_round: int = 32
    seed: int = 0

    def __post_init__(self) -> None:
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 1 for d in dims):
            raise PreconditionError(f"dims must be positive integers, got {self.dims}")
        if self.per_round < 0:
            raise PreconditionError(f"per_round must be nonnegative, got {self.per_round}")
        object.__setattr__(self, "dims", dims)

    def batch(self, pres_id: str, round_index: int) -> list[Representation]:
        """Deterministic list of candidate representations for one round."""
        kind, size = _parse_registered_id(pres_id)
        rng = rng_from_seed(_subseed(self.seed, pres_id, round_index))
        out = list(self._canonical(kind, size))
        for i in range(self.per_round):
            out.append(self._random(kind, size, rng, self.dims[i % len(self.dims)]))
        return out

    def _canonical(self, kind: str, size: int) -> Iterator[Representation]:
        if kind == "trivial":
            yield Representation(1, {})
            return
        if kind == "free_unitaries":
            for value in (1.0, -1.0):
                images = {f"u{k}": np.array([[value]]) for k in range(1, size + 1)}
                yield Representation(1, images)
            return
        if kind == "projections":
            for value in (0.0, 1.0):
                images = {f"p{k}": np.array([[value]]) for k in range(1, size + 1)}
                yield Representation(1, images)
            return
        yield Representation(size, _exact_matrix_unit_images(size, size))

    def _random(self, kind: str, size: int, rng, dim: int) -> Representation:
        if kind == "trivial":
            return Representation(dim, {})
        if kind == "free_unitaries":
            images = {f"u{k}": random_unitary(rng, dim) for k in range(1, size + 1)}
            return Representation(dim, images)
        if kind == "projections":
            images = {f"p{k}": random_projection(rng, dim) for k in range(1, size + 1)}
            return Representation(dim, images)
        blocks = max(1, dim // size)
        full = blocks * size
        u = random_unitary(rng, full)
        return Representation(full, _exact_matrix_unit_images(size, full, u))


def norm_lower_enumerate(pres: Presentation, q: NCPolynomial,
                         catalog: RepresentationCatalog,
                         modulus: StabilityModulusTable, pres_id: str,
                         budget: int) -> Iterator[Fraction]:
    """Yield an increasing stream of certified dyadic lower bounds for |q|.

    Round j targets accuracy 2^-j: the continuity radius n(j) makes any
    generator perturbation below 2^-n move |q| by less than 2^-j, so a
    catalog representation with relation defect below 2^-modulus(n) can be
    repaired into an exact one while moving |q(rep)| by less than 2^-j.
    The emitted value is the largest multiple of 2^-(j+4) at or below
    |q(rep)| - 2^-j that beats all previous outputs.  The budget counts
    catalog representations examined; exhausting it ends the stream.
    """
    registered_presentation(pres_id)
    if budget < 0:
        raise PreconditionError(f"budget must be nonnegative, got {budget}")
    stray = q.symbols() - set(pres.names)
    if stray:
        raise PreconditionError(f"q mentions undeclared generators: {sorted(stray)}")
    lip = lipschitz_bound(q, pres.bounds)
    pad = max(0, ceil_log2(lip)) if lip > 0 else 0
    best: Fraction | None = None
    examined = 0
    for j in itertools.count():
        if examined >= budget:
            return
        gate = Fraction(1, 2 ** modulus.of(j + pad + 1))
        grid = 2 ** (j + 4)
        for rep in catalog.batch(pres_id, j):
            if examined >= budget:
                return
            examined += 1
            if not relation_defect(pres, rep) < gate:
                continue
            value = op_norm(eval_poly(q, rep))
            d = Fraction(math.floor((value - 2.0 ** -j) * grid), grid)
            if d > 0 and (best is None or d > best):
                best = d
                yield d
