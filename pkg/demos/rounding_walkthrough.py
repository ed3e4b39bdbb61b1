#!/usr/bin/env python3
"""Walkthrough: repairing almost-structured matrices back to exact ones.

A matrix that almost satisfies an algebraic identity (almost unitary,
almost a projection, almost a POVM) can be moved onto an exact solution
without traveling far, provided its defect is below the stability
modulus for the target accuracy.  This script perturbs exact objects,
rounds them back, and prints how far each repair had to move.
"""

import argparse

import numpy as np

from cstarkit.operators import dagger, herm_part, op_norm
from cstarkit.rounding import (round_to_povm, round_to_projection,
                               round_to_unitary, stability_modulus)
from cstarkit.sampling import (random_povm, random_projection, random_unitary,
                               rng_from_seed)


def show(label, report, eps=None):
    line = (f"  defect in : {report.input_defect:.3e}\n"
            f"  moved by  : {report.output_distance:.3e}"
            + (f"  (allowed < {eps})" if eps is not None else "") + "\n"
            f"  residual  : {report.exactness_residual:.3e}")
    print(f"{label}\n{line}")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--dim", type=int, default=6)
    args = parser.parse_args()
    rng = rng_from_seed(args.seed)
    dim = args.dim
    eps = 0.25

    # Almost unitary: u(1 + small Hermitian) has defect about twice the bump.
    # The polar factor is the closest unitary, and the modulus eps/2 keeps
    # the repair inside eps.
    budget = float(stability_modulus("unitary", eps))
    print(f"unitary modulus at eps={eps}: {budget}")
    u = random_unitary(rng, dim)
    h = herm_part(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
    h *= budget / (4 * op_norm(h))
    repaired, report = round_to_unitary(u @ (np.eye(dim) + h), eps)
    show("almost unitary -> polar factor", report, eps)
    print(f"  check |u^H u - 1| = {op_norm(dagger(repaired) @ repaired - np.eye(dim)):.2e}")

    # Almost projection: spectrum clustered near {0, 1}; cutting at 1/2
    # lands on the nearby spectral projection.
    budget = float(stability_modulus("projection", eps))
    print(f"\nprojection modulus at eps={eps}: {budget}")
    p = random_projection(rng, dim, rank=dim // 2)
    bump = herm_part(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
    bump *= budget / (8 * op_norm(bump))
    repaired, report = round_to_projection(p + bump, eps)
    show("almost projection -> spectral cut", report, eps)
    print(f"  check |p^2 - p|   = {op_norm(repaired @ repaired - repaired):.2e}")

    # Almost POVM: positive parts renormalized by the inverse square root
    # of their sum; the output sums to the identity exactly.
    family = random_povm(rng, dim, 3)
    noisy = [m + 1e-3 * herm_part(rng.normal(size=(dim, dim))) for m in family]
    repaired, report = round_to_povm(noisy)
    show("\nalmost POVM -> renormalized family", report)
    print(f"  check |sum - 1|   = {op_norm(sum(repaired) - np.eye(dim)):.2e}")


if __name__ == "__main__":
    main()
