"""Rounding of almost-structures to exact ones with quantitative guarantees.

Each ``round_to_*`` function checks a closeness hypothesis sized by
``stability_modulus`` and then produces an exactly-structured output (up to
the algebraic tolerance) within the requested distance.  The moduli are
dyadic rationals sitting strictly inside the admissible ranges

    unitary           delta <= eps/2          (needs delta < eps)
    projection        delta <= eps^2/16       (needs 0 < delta < eps^2/8)
    partial_isometry  delta <= 2^-17 eps^8    (needs delta < 2^-16 eps^8)
    povm, pvm         delta <= eps^2/64

so a defect within the modulus always satisfies the underlying hypothesis
with room to spare.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .dyadic import largest_pow2_leq
from .errors import HypothesisError
from .operators import (DEFAULT_TOL, Tolerance, as_operator, dagger, herm_part,
                        hermitian_eig, identity_like, op_norm, polar_unitary)

ROUNDING_KINDS = ("unitary", "projection", "partial_isometry", "povm", "pvm")

# round_to_pvm entry budget and per-stage drift gate (see round_to_pvm)
PVM_ENTRY_BUDGET = Fraction(1, 256)
PVM_STAGE_GATE = 0.125


@dataclass(frozen=True)
class RoundingReport:
    """What a rounding did: hypothesis size, movement, and exactness.

    For family-valued roundings the distance and residual are maxima over
    the family members.
    """

    input_defect: float
    output_distance: float
    exactness_residual: float


def stability_modulus(kind: str, eps: float) -> Fraction:
    """Admissible input defect for rounding `kind` to within eps.

    Returns the largest power of two below half (or the squared/8th-power
    scaling of) the guaranteeing bound, as an exact dyadic rational.
    Defined on eps in (0, 1]; the rounding operations themselves demand a
    strict eps < 1.
    """
    if kind not in ROUNDING_KINDS:
        raise ValueError(f"unknown rounding kind {kind!r}; expected one of {ROUNDING_KINDS}")
    if not (0.0 < eps <= 1.0):
        raise ValueError(f"eps must lie in (0, 1], got {eps!r}")
    e = Fraction(eps)
    if kind == "unitary":
        bound = e / 2
    elif kind == "projection":
        bound = e * e / 16
    elif kind == "partial_isometry":
        bound = e ** 8 / 2 ** 17
    else:  # povm, pvm
        bound = e * e / 64
    return largest_pow2_leq(bound)


def _check(kind: str, eps: float, defect: float) -> float:
    if not (0.0 < eps < 1.0):
        raise ValueError(f"eps must lie in (0, 1), got {eps!r}")
    delta = float(stability_modulus(kind, eps))
    if defect > delta:
        raise HypothesisError(f"input is not {kind}-roundable at eps={eps}",
                              defect=defect, bound=delta)
    return delta


def round_to_unitary(a, eps: float, tol: Tolerance = DEFAULT_TOL):
    """Round an almost-unitary to the unitary polar factor.

    Hypothesis: max(|a^H a - 1|, |a a^H - 1|) within the unitary modulus.
    Returns (u, report) with |a - u| < eps and u exactly unitary.
    """
    a = as_operator(a)
    eye = identity_like(a)
    defect = max(op_norm(dagger(a) @ a - eye), op_norm(a @ dagger(a) - eye))
    _check("unitary", eps, defect)
    u = polar_unitary(a, tol)
    report = RoundingReport(
        input_defect=defect,
        output_distance=op_norm(a - u),
        exactness_residual=op_norm(dagger(u) @ u - eye),
    )
    _guarantee(report, eps, tol)
    return u, report


def _projection_cut(x, cut: float, tol: Tolerance) -> np.ndarray:
    """Spectral step function: eigenvalues below `cut` to 0, the rest to 1."""
    spec = hermitian_eig(x, tol)
    ind = (spec.eigenvalues >= cut).astype(float)
    return (spec.eigenvectors * ind) @ dagger(spec.eigenvectors)


def round_to_projection(a, eps: float, tol: Tolerance = DEFAULT_TOL):
    """Round an almost-projection (|a| <= 2) to a spectral projection.

    Hypothesis: max(|a - a^H|, |a - a^2|) within the projection modulus.
    The Hermitian part then has spectrum clustered near {0, 1}; cutting at
    1/2 lands on an exact projection within eps of a.
    """
    a = as_operator(a)
    norm_a = op_norm(a)
    if norm_a > 2.0:
        raise HypothesisError(f"almost-projection must satisfy |a| <= 2, got {norm_a:.6f}")
    defect = max(op_norm(a - dagger(a)), op_norm(a - a @ a))
    _check("projection", eps, defect)
    p = _projection_cut(herm_part(a), 0.5, tol)
    report = RoundingReport(
        input_defect=defect,
        output_distance=op_norm(a - p),
        exactness_residual=max(op_norm(p @ p - p), op_norm(p - dagger(p))),
    )
    _guarantee(report, eps, tol)
    return p, report


def _isometry_cut(a, p1, p2, cut: float, tol: Tolerance) -> np.ndarray:
    """Partial-isometry construction: compress to the corners, then rescale.

    b = p2 a p1 has b^H b supported in ran(p1) with spectrum split around
    `cut`; w = b f(b^H b) with f = 0 below the cut and t^(-1/2) above is a
    partial isometry from ran(p1) onto ran(p2).
    """
    b = p2 @ a @ p1
    h = herm_part(dagger(b) @ b)
    spec = hermitian_eig(h, tol)
    scale = np.where(spec.eigenvalues > cut,
                     1.0 / np.sqrt(np.maximum(spec.eigenvalues, cut)), 0.0)
    return b @ ((spec.eigenvectors * scale) @ dagger(spec.eigenvectors))


def round_to_partial_isometry(a, p1, p2, eps: float, tol: Tolerance = DEFAULT_TOL):
    """Round a to a partial isometry w with w^H w = p1 and w w^H = p2.

    p1, p2 must be exact projections (within tolerance); the hypothesis is
    max(|a^H a - p1|, |a a^H - p2|) within the partial-isometry modulus.
    """
    a = as_operator(a)
    p1 = as_operator(p1)
    p2 = as_operator(p2)
    if a.shape != p1.shape or a.shape != p2.shape:
        raise ValueError("a, p1, p2 must share one dimension")
    for name, p in (("p1", p1), ("p2", p2)):
        resid = max(op_norm(p - dagger(p)), op_norm(p @ p - p))
        if resid > tol.algebraic:
            raise ValueError(f"{name} is not a projection within tolerance: residual {resid:.6e}")
    defect = max(op_norm(dagger(a) @ a - p1), op_norm(a @ dagger(a) - p2))
    delta = _check("partial_isometry", eps, defect)
    gamma = 7.0 * delta ** 0.25
    w = _isometry_cut(a, p1, p2, gamma, tol)
    report = RoundingReport(
        input_defect=defect,
        output_distance=op_norm(a - w),
        exactness_residual=max(op_norm(dagger(w) @ w - p1), op_norm(w @ dagger(w) - p2)),
    )
    _guarantee(report, eps, tol)
    return w, report


def _positive_part(x, tol: Tolerance) -> np.ndarray:
    spec = hermitian_eig(x, tol)
    clipped = np.maximum(spec.eigenvalues, 0.0)
    return (spec.eigenvectors * clipped) @ dagger(spec.eigenvectors)


def povm_defect(mats, tol: Tolerance = DEFAULT_TOL) -> float:
    """How far a family is from being a POVM.

    max over i of the distance from A_i to the positive cone (measured
    through the positive part of the Hermitian part, a computable surrogate
    for the cone distance) joined with |sum A_i - 1|.
    """
    family = [as_operator(m) for m in mats]
    if not family:
        raise ValueError("empty family")
    dim = family[0].shape[0]
    if any(m.shape[0] != dim for m in family):
        raise ValueError("family members must share one dimension")
    cone = max(op_norm(m - _positive_part(herm_part(m), tol)) for m in family)
    total = op_norm(sum(family) - np.eye(dim))
    return max(cone, total)


def round_to_povm(mats, tol: Tolerance = DEFAULT_TOL):
    """Round a family with povm_defect < 1/2 to an exact POVM.

    Positive parts are renormalized by the inverse square root of their sum
    S; S ⪰ (1 - defect)·1 ⪰ 1/2 keeps the rescale well defined, and the
    output sums to the identity by construction.
    """
    family = [as_operator(m) for m in mats]
    defect = povm_defect(family, tol)
    if defect >= 0.5:
        raise HypothesisError("family is too far from a POVM",
                              defect=defect, bound=0.5)
    positives = [_positive_part(herm_part(m), tol) for m in family]
    s = sum(positives)
    spec = hermitian_eig(s, tol)
    if float(spec.eigenvalues[0]) <= tol.spectral:
        raise HypothesisError(
            f"positive-part sum is singular within tolerance: smallest eigenvalue "
            f"{float(spec.eigenvalues[0]):.6e}")
    root = (spec.eigenvectors * (spec.eigenvalues ** -0.5)) @ dagger(spec.eigenvectors)
    rounded = [herm_part(root @ p @ root) for p in positives]
    eye = np.eye(family[0].shape[0])
    min_eig = min(float(np.linalg.eigvalsh(b)[0]) for b in rounded)
    report = RoundingReport(
        input_defect=defect,
        output_distance=max(op_norm(a - b) for a, b in zip(family, rounded)),
        exactness_residual=max(op_norm(sum(rounded) - eye), max(0.0, -min_eig)),
    )
    _guarantee(report, None, tol)
    return rounded, report


def round_to_pvm(mats, tol: Tolerance = DEFAULT_TOL):
    """Round almost-projections that almost sum to 1 into an exact PVM.

    Entry hypothesis: every family member is an almost-projection and the
    family almost sums to the identity, all within 2^-8.  Blocks are rounded
    one at a time inside the corner left by the previous ones; the final
    block is the remaining corner identity, so the output sums to 1 exactly.
    """
    family = [as_operator(m) for m in mats]
    if not family:
        raise ValueError("empty family")
    dim = family[0].shape[0]
    if any(m.shape[0] != dim for m in family):
        raise ValueError("family members must share one dimension")
    eye = np.eye(dim, dtype=np.complex128)
    defect = max(op_norm(sum(family) - eye),
                 max(max(op_norm(m - dagger(m)), op_norm(m - m @ m)) for m in family))
    budget = float(PVM_ENTRY_BUDGET)
    if defect > budget:
        raise HypothesisError("family is too far from a PVM", defect=defect, bound=budget)
    remaining = eye
    blocks: list[np.ndarray] = []
    for i, m in enumerate(family[:-1]):
        c = remaining @ m @ remaining
        stage_defect = max(op_norm(c - dagger(c)), op_norm(c - c @ c))
        if stage_defect > PVM_STAGE_GATE:
            raise HypothesisError("compressed block drifted out of the projection cluster",
                                  defect=stage_defect, bound=PVM_STAGE_GATE,
                                  stage=f"block {i}")
        q = _projection_cut(herm_part(c), 0.5, tol)
        blocks.append(q)
        # re-cut the corner so float drift cannot accumulate across stages
        remaining = _projection_cut(herm_part(remaining - q), 0.5, tol)
    blocks.append(remaining)
    resid = max(op_norm(sum(blocks) - eye),
                max(max(op_norm(q - dagger(q)), op_norm(q @ q - q)) for q in blocks))
    for i in range(len(blocks)):
        for j in range(i + 1, len(blocks)):
            resid = max(resid, op_norm(blocks[i] @ blocks[j]))
    report = RoundingReport(
        input_defect=defect,
        output_distance=max(op_norm(a - q) for a, q in zip(family, blocks)),
        exactness_residual=resid,
    )
    _guarantee(report, None, tol)
    return blocks, report


def _guarantee(report: RoundingReport, eps: float | None, tol: Tolerance) -> None:
    # a passed hypothesis makes these unreachable; fail loudly rather than
    # hand back an output that misses the contract
    if report.exactness_residual > tol.algebraic:
        raise ArithmeticError(
            f"rounding missed exactness: residual {report.exactness_residual:.3e}")
    if eps is not None and not report.output_distance < eps:
        raise ArithmeticError(
            f"rounding moved too far: {report.output_distance:.6f} >= {eps}")
