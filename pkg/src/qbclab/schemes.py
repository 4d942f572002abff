"""Concrete commitment schemes.

``bb84_scheme`` is the photon commitment with perfect hiding: both reduced
evidence operators equal identity / 2**s. ``tilted_pair_scheme`` is a
minimal two-qubit family with an adjustable hiding defect, used to study
cheating when the two evidence operators merely have fidelity cos(eps).
"""

from __future__ import annotations

import numpy as np

from .protocol import (
    DIAGONAL,
    RECTILINEAR,
    CommitmentScheme,
    PhotonLayout,
    tensor_product_basis_rows,
)
from .qmath import check_dimension

MAX_PHOTONS = 10
CORPUS_SEED = 20260810

TILTED_EPSILONS = (0.0, 0.05, 0.1, 0.2, 0.5)
BB84_SIZES = (1, 2, 3, 4)


def bb84_scheme(s: int) -> CommitmentScheme:
    """Photon commitment with security parameter s.

    Bit 0 sends s photons drawn uniformly from the rectilinear basis, bit 1
    from the diagonal basis; the A register records which product was sent.
    Either way the evidence register is maximally mixed, so the receiver
    learns nothing about the bit before the opening.
    """
    if not 1 <= int(s) <= MAX_PHOTONS:
        raise ValueError(f"s must be in 1..{MAX_PHOTONS}, got {s}")
    s = int(s)
    dim = 2**s
    check_dimension(dim * dim)
    amps = np.full(dim, dim**-0.5, dtype=complex)
    basis = np.eye(dim, dtype=complex)
    return CommitmentScheme(
        dim_a=dim,
        dim_b=dim,
        amps0=amps,
        basis_a0=basis,
        evidence0=tensor_product_basis_rows(RECTILINEAR, s),
        amps1=amps.copy(),
        basis_a1=basis.copy(),
        evidence1=tensor_product_basis_rows(DIAGONAL, s),
        label=f"bb84(s={s})",
        photon_layout=PhotonLayout(s=s, bases=(RECTILINEAR, DIAGONAL)),
    )


def tilted_pair_scheme(epsilon: float) -> CommitmentScheme:
    """Two-qubit family whose evidence operators have fidelity cos(epsilon).

    Bit 0 is the maximally entangled pair with computational evidence
    {|0>, |1>}. Bit 1 keeps uniform amplitudes over the Hadamard A basis
    while its two evidence vectors are tilted off the diagonal pair:
    cos(g)|0> +- sin(g)|1> with g = pi/4 + epsilon, which makes them
    non-orthogonal for epsilon > 0. The prepared bit-1 state is
    cos(g)|00> + sin(g)|11>, both reduced evidence operators are diagonal,
    their fidelity is cos(epsilon), and the projective verifier accepts the
    best delayed-measurement cheat with probability exactly cos(epsilon)^2.
    """
    epsilon = float(epsilon)
    if not 0.0 <= epsilon < np.pi / 4:
        raise ValueError(f"epsilon must be in [0, pi/4), got {epsilon}")
    g = np.pi / 4 + epsilon
    sqrt2 = np.sqrt(2.0)
    amps = np.array([1.0, 1.0], dtype=complex) / sqrt2
    eye = np.eye(2, dtype=complex)
    hadamard = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / sqrt2
    tilted = np.array(
        [[np.cos(g), np.sin(g)], [np.cos(g), -np.sin(g)]], dtype=complex
    )
    return CommitmentScheme(
        dim_a=2,
        dim_b=2,
        amps0=amps,
        basis_a0=eye,
        evidence0=eye.copy(),
        amps1=amps.copy(),
        basis_a1=hadamard,
        evidence1=tilted,
        label=f"tilted(eps={epsilon:g})",
    )


def random_scheme(
    rng: np.random.Generator, dim_a: int, dim_b: int, label: str
) -> CommitmentScheme:
    """Random valid scheme: Haar orthonormal A bases, Gaussian unit evidence
    vectors, positive normalized amplitudes. Index families are complete
    (one outcome per A dimension)."""

    def haar_unitary():
        g = rng.normal(size=(dim_a, dim_a)) + 1j * rng.normal(size=(dim_a, dim_a))
        q, r = np.linalg.qr(g)
        d = np.diagonal(r)
        return q * (d.conjugate() / np.abs(d))

    def unit_rows(n):
        g = rng.normal(size=(n, dim_b)) + 1j * rng.normal(size=(n, dim_b))
        return g / np.linalg.norm(g, axis=1, keepdims=True)

    def positive_amps(n):
        v = rng.uniform(0.1, 1.0, size=n)
        return (v / np.linalg.norm(v)).astype(complex)

    return CommitmentScheme(
        dim_a=dim_a,
        dim_b=dim_b,
        amps0=positive_amps(dim_a),
        basis_a0=haar_unitary(),
        evidence0=unit_rows(dim_a),
        amps1=positive_amps(dim_a),
        basis_a1=haar_unitary(),
        evidence1=unit_rows(dim_a),
        label=label,
    )


def scheme_corpus() -> list[CommitmentScheme]:
    """Fixed test corpus: bb84 for s in 1..4, the tilted family at five
    epsilon values, and five seeded random schemes of assorted dimensions."""
    corpus = [bb84_scheme(s) for s in BB84_SIZES]
    corpus += [tilted_pair_scheme(e) for e in TILTED_EPSILONS]
    rng = np.random.default_rng(CORPUS_SEED)
    for n, (da, db) in enumerate([(2, 2), (3, 2), (2, 3), (4, 3), (3, 4)]):
        corpus.append(random_scheme(rng, da, db, label=f"random{n}"))
    return corpus
