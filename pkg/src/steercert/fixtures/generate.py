"""Regenerate the bundled JSON fixtures: ``python -m steercert.fixtures.generate``."""

from pathlib import Path

import numpy as np

from ..linalg import phi_plus, proj, random_unitary
from ..povm import MeasurementSet, Povm, alice_vectors, bob_ideal
from ..serialize import dumps, encode_measurements, encode_state

HERE = Path(__file__).parent


def embedded_ideal(d: int, seed: int):
    """|phi+> and the ideal trines embedded in C^d, rotated by a random unitary on Bob's side."""
    rng = np.random.default_rng(seed)
    v = random_unitary(d, rng)
    psi = np.zeros(2 * d, dtype=complex)
    psi.reshape(2, d)[:, :2] = phi_plus().reshape(2, 2)
    psi = np.kron(np.eye(2), v) @ psi
    povms = []
    for p in bob_ideal():
        # Split the identity on the complement among the three outcomes.
        w = rng.dirichlet(np.ones(3))
        els = []
        for a, e in enumerate(p.elements):
            big = np.zeros((d, d), dtype=complex)
            big[:2, :2] = e
            big[2:, 2:] = w[a] * np.eye(d - 2)
            els.append(v @ big @ v.conj().T)
        povms.append(Povm(tuple(els)))
    return psi, MeasurementSet(tuple(povms))


def main():
    bob = encode_measurements(bob_ideal())
    (HERE / "ideal.json").write_text(dumps({"state": encode_state(phi_plus()), "bob": bob}))
    product = np.array([1, 0, 0, 0], dtype=complex)
    (HERE / "product.json").write_text(dumps({"state": encode_state(product), "bob": bob}))
    psi, m = embedded_ideal(5, seed=7)
    (HERE / "rotated_d5.json").write_text(
        dumps({"state": encode_state(psi), "bob": encode_measurements(m)})
    )
    e = alice_vectors()
    six = Povm(tuple(proj(e[x, a]) / 3 for x in (0, 1) for a in range(3)))
    (HERE / "six_outcome.json").write_text(dumps(encode_measurements(MeasurementSet((six,)))))
    (HERE / "bob_ideal.json").write_text(dumps(bob))


if __name__ == "__main__":
    main()
