"""Stability of constant-coefficient quaternion systems x' = A x.

Walks four 2x2/3x3 systems whose standard eigenvalue patterns cover the
whole verdict range: a positive real part, a defective boundary eigenvalue,
a simple boundary eigenvalue, and a fully decaying spectrum.  The norm of
e^{tA} is sampled to corroborate each verdict.
"""

import numpy as np

from qfloquet import QMatrix, classify_constant, expm, standard_eigenvalues
from qfloquet.quaternion import I, J, K, Quaternion

SYSTEMS = {
    "positive real part": QMatrix.from_entries([
        [I, J, J],
        [K, 1, K],
        [0, 0, 1],
    ]),
    "defective boundary eigenvalue": QMatrix.from_entries([
        [I, 1, 0],
        [0, J, 0],
        [0, 1, K],
    ]),
    "simple boundary eigenvalue": QMatrix.from_entries([
        [Quaternion(-1, 0, 2, -1), Quaternion(-1, 2, 1, 0)],
        [Quaternion(0, -1, 1, 2), Quaternion(-2, -1, 0, 1)],
    ]),
    "decaying spectrum": QMatrix.from_entries([
        [Quaternion(-1, 1, 0, -1), Quaternion(0, -1, 0, 0)],
        [Quaternion(1, 1, -1, 1), Quaternion(-2, 0, 0, -1)],
    ]),
}


def describe(name, A):
    spectrum = standard_eigenvalues(A)
    verdict = classify_constant(A)
    print(f"== {name}")
    for entry in spectrum:
        print(f"   eigenvalue {entry.value:.6g}  "
              f"am={entry.algebraic_multiplicity} "
              f"gm={entry.geometric_multiplicity}  "
              f"Re={entry.value.real:+.3g}")
    print(f"   verdict: {verdict}")
    norms = [expm(A * t).sum_norm() for t in np.linspace(0.0, 12.0, 7)]
    trend = " -> ".join(f"{v:.3g}" for v in norms)
    print(f"   ||e^(tA)|| over t in [0, 12]: {trend}")
    print()


def main():
    print("Constant quaternion systems: spectra decide stability\n")
    for name, A in SYSTEMS.items():
        describe(name, A)
    print("Summary: negative real parts decay, a defective eigenvalue on the")
    print("imaginary axis grows polynomially, and any positive real part")
    print("dominates everything else.")


if __name__ == "__main__":
    main()
