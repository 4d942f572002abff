"""Generic two-register bit commitment protocol and its verifier.

The framework: the committer (Alice) encodes a bit b in a joint state of
register A, which she keeps, and register B, which she sends as evidence:

    b = 0:  sum_i alpha_i |e_i>_A (x) |phi_i>_B
    b = 1:  sum_j beta_j |e'_j>_A (x) |phi'_j>_B

Each A-side family {|e_i>} is orthonormal; the evidence vectors |phi_i>
are normalized but need not be orthogonal to one another. An honest
session runs: (1) prepare the state for b, (2) measure register A to learn
the index, (3) send register B, (4) announce (b, index) at opening,
(5) the receiver (Bob) checks the announcement against register B.

Two receiver behaviours are modelled. The default "store" receiver keeps
register B coherent and, at opening, applies the binary projective test
onto the announced evidence vector. That is the strongest per-session
verifier available, so a cheat that defeats it defeats every weaker
receiver as well. The "measure-at-commit" receiver models photon hardware:
each photon is measured in a randomly chosen conjugate basis on receipt,
and at opening every photon measured in the announced basis must match the
announced polarization. It applies to photon-product schemes (the BB84
layout); for any other scheme it falls back to the store verifier.

Simulation convention: the two parties' measurements act on different
registers and commute, so the simulator is free to apply Alice's
opening-phase measurement first and sample Bob's commit-phase photon
measurements afterwards, inside ``bob_verify``. No observable statistic
depends on this ordering.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qmath import ATOL, BipartitePureState, check_dimension

BOB_STORE = "store"
BOB_MEASURE_AT_COMMIT = "measure-at-commit"
BOB_MODES = (BOB_STORE, BOB_MEASURE_AT_COMMIT)

_SQRT2 = np.sqrt(2.0)

# Single-photon polarization kets. Rectilinear doubles as the computational
# basis; the diagonal basis is its conjugate partner.
KET_H = np.array([1.0, 0.0], dtype=complex)
KET_V = np.array([0.0, 1.0], dtype=complex)
KET_D45 = np.array([1.0, 1.0], dtype=complex) / _SQRT2
KET_D135 = np.array([1.0, -1.0], dtype=complex) / _SQRT2
RECTILINEAR = (KET_H, KET_V)
DIAGONAL = (KET_D45, KET_D135)

MASK64 = (1 << 64) - 1


def trial_rng(seed: int, trial: int = 0) -> np.random.Generator:
    """Independent stream for (seed, trial).

    Counter-based: Philox keyed by the master seed with the trial index in
    the top counter word, so streams never overlap and aggregate results
    cannot depend on the order trials are executed in.
    """
    key = np.array([seed & MASK64, 0], dtype=np.uint64)
    counter = np.array([0, 0, 0, trial & MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(counter=counter, key=key))


def int_to_bits(value: int, width: int) -> list[int]:
    """Big-endian bits of an index; bit t addresses photon t."""
    return [(value >> (width - 1 - t)) & 1 for t in range(width)]


def bits_to_int(bits) -> int:
    out = 0
    for b in bits:
        out = (out << 1) | int(b)
    return out


def tensor_product_basis_rows(basis, s: int) -> np.ndarray:
    """Rows: all s-fold tensor products of the two basis kets, indexed by
    the big-endian bits of the row number."""
    dim = 2**s
    check_dimension(dim)
    rows = np.empty((dim, dim), dtype=complex)
    for i in range(dim):
        v = np.ones(1, dtype=complex)
        for bit in int_to_bits(i, s):
            v = np.kron(v, basis[bit])
        rows[i] = v
    return rows


def sample_index(probs: np.ndarray, rng: np.random.Generator) -> int:
    """Inverse-CDF sample with indices in ascending order."""
    c = np.cumsum(probs)
    idx = int(np.searchsorted(c, rng.random(), side="right"))
    return min(idx, len(c) - 1)


def _check_bit(bit: int) -> int:
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit!r}")
    return int(bit)


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PhotonLayout:
    """Marks a scheme whose evidence vectors are s-fold products drawn from
    two conjugate single-photon bases (bit 0 basis, bit 1 basis); enables
    the measure-at-commit verifier."""

    s: int
    bases: tuple


@dataclass(frozen=True)
class CommitmentScheme:
    """Data of one two-register commitment scheme.

    ``basis_a0`` / ``basis_a1`` hold orthonormal columns of the A register;
    ``evidence0`` / ``evidence1`` hold the matching evidence vectors as rows
    (normalized, not necessarily orthogonal); ``amps0`` / ``amps1`` are the
    preparation amplitudes.
    """

    dim_a: int
    dim_b: int
    amps0: np.ndarray
    basis_a0: np.ndarray
    evidence0: np.ndarray
    amps1: np.ndarray
    basis_a1: np.ndarray
    evidence1: np.ndarray
    label: str
    photon_layout: PhotonLayout | None = None

    def __post_init__(self):
        check_dimension(self.dim_a * self.dim_b)
        for name in ("amps0", "amps1", "basis_a0", "basis_a1", "evidence0", "evidence1"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=complex))
        for bit in (0, 1):
            amps, basis, ev = self.amps(bit), self.basis_a(bit), self.evidence(bit)
            n = amps.size
            if basis.shape != (self.dim_a, n) or ev.shape != (n, self.dim_b):
                raise ValueError(f"{self.label}: inconsistent shapes for bit {bit}")
            if abs(np.linalg.norm(amps) - 1.0) > ATOL:
                raise ValueError(f"{self.label}: amplitudes for bit {bit} not normalized")
            gram = basis.conj().T @ basis
            if np.max(np.abs(gram - np.eye(n))) > ATOL:
                raise ValueError(f"{self.label}: A basis for bit {bit} not orthonormal")
            norms = np.linalg.norm(ev, axis=1)
            if np.max(np.abs(norms - 1.0)) > ATOL:
                raise ValueError(f"{self.label}: evidence vectors for bit {bit} not normalized")

    def amps(self, bit: int) -> np.ndarray:
        return self.amps0 if _check_bit(bit) == 0 else self.amps1

    def basis_a(self, bit: int) -> np.ndarray:
        return self.basis_a0 if _check_bit(bit) == 0 else self.basis_a1

    def evidence(self, bit: int) -> np.ndarray:
        return self.evidence0 if _check_bit(bit) == 0 else self.evidence1

    def n_outcomes(self, bit: int) -> int:
        return self.amps(bit).size


@dataclass(frozen=True)
class AliceRecord:
    """Committer's private record after the commit phase.

    Exactly one of ``outcome_index`` (honest path: the measured index) and
    ``held_state_a`` (delayed measurement: the still-coherent joint state,
    register A plus its correlations with the evidence in transit) is set.
    """

    bit: int
    outcome_index: int | None = None
    held_state_a: BipartitePureState | None = None

    def __post_init__(self):
        _check_bit(self.bit)
        if (self.outcome_index is None) == (self.held_state_a is None):
            raise ValueError("exactly one of outcome_index / held_state_a must be set")


@dataclass(frozen=True)
class Announcement:
    """Opening-phase declaration: the bit and the index into its evidence list."""

    bit: int
    outcome_index: int

    def __post_init__(self):
        _check_bit(self.bit)


@dataclass(frozen=True)
class OpenMove:
    """A committer strategy's opening action.

    ``outcome_index`` is None when the strategy concedes (its measurement
    fell outside the declared index family); ``b_state`` is the pure
    evidence-register state the receiver ends up testing.
    """

    bit: int
    outcome_index: int | None
    b_state: np.ndarray | None


@dataclass(frozen=True)
class Transcript:
    """Full record of one session. ``outcome_index`` is -1 for a conceded
    opening; ``accepted`` is set once verification has run."""

    scheme_label: str
    bit_committed: int | str
    bit_announced: int
    outcome_index: int
    bob_mode: str
    accepted: bool
    seed: int


# ---------------------------------------------------------------------------
# Honest protocol steps
# ---------------------------------------------------------------------------


def committed_state(scheme: CommitmentScheme, bit: int) -> BipartitePureState:
    """The joint prepared state for the bit: sum_i amp_i |a_i> (x) |phi_i>."""
    basis = scheme.basis_a(bit)
    m = (basis * scheme.amps(bit)) @ scheme.evidence(bit)
    return BipartitePureState(scheme.dim_a, scheme.dim_b, m.reshape(-1))


def honest_commit(
    scheme: CommitmentScheme, bit: int, rng: np.random.Generator
) -> tuple[AliceRecord, np.ndarray]:
    """Commit honestly: sample the index by the Born rule and collapse.

    Returns the committer's record and the pure B state sent as evidence
    (the evidence vector of the sampled index).
    """
    probs = np.abs(scheme.amps(bit)) ** 2
    idx = sample_index(probs, rng)
    return AliceRecord(bit=_check_bit(bit), outcome_index=idx), scheme.evidence(bit)[idx]


def open_commitment(record: AliceRecord) -> Announcement:
    """Honest opening: announce the stored bit and index."""
    if record.outcome_index is None:
        raise ValueError(
            "delayed-measurement record: honest opening undefined, use an attack strategy"
        )
    return Announcement(bit=record.bit, outcome_index=record.outcome_index)


def bob_verify(
    scheme: CommitmentScheme,
    announcement: Announcement,
    evidence_state: np.ndarray,
    mode: str,
    rng: np.random.Generator,
) -> bool:
    """Receiver's acceptance decision for one announced opening.

    store: binary projective test {P, 1-P} with P the projector onto the
    announced evidence vector; accept on the P outcome.

    measure-at-commit: photon-product schemes only. Each photon is measured
    in a random conjugate basis; accept iff every photon measured in the
    announced basis matches the announced polarization bit. Schemes without
    a photon layout fall back to the store verifier (the stronger test).
    """
    if mode not in BOB_MODES:
        raise ValueError(f"unknown receiver mode {mode!r}")
    if not 0 <= announcement.outcome_index < scheme.n_outcomes(announcement.bit):
        raise ValueError(f"announced index {announcement.outcome_index} out of range")
    if mode == BOB_MEASURE_AT_COMMIT and scheme.photon_layout is not None:
        return _verify_photons(scheme, announcement, evidence_state, rng)
    target = scheme.evidence(announcement.bit)[announcement.outcome_index]
    p_accept = abs(np.vdot(target, evidence_state)) ** 2
    return bool(rng.random() < p_accept)


def _verify_photons(scheme, announcement, evidence_state, rng) -> bool:
    layout = scheme.photon_layout
    s = layout.s
    announced_bits = int_to_bits(announcement.outcome_index, s)
    state = np.asarray(evidence_state, dtype=complex)
    choices = rng.integers(0, 2, size=s)
    for t in range(s):
        outcome, state = measure_photon(state, s, t, layout.bases[choices[t]], rng)
        if choices[t] == announcement.bit and outcome != announced_bits[t]:
            return False
    return True


def measure_photon(
    state: np.ndarray, s: int, t: int, basis, rng: np.random.Generator
) -> tuple[int, np.ndarray]:
    """Projective measurement of photon t (big-endian) of an s-photon register.

    Returns the outcome and the collapsed full register state.
    """
    pre, post = 2**t, 2 ** (s - 1 - t)
    tens = state.reshape(pre, 2, post)
    amp0 = np.tensordot(np.conj(basis[0]), tens, axes=([0], [1]))
    p0 = float(np.vdot(amp0, amp0).real)
    if rng.random() < p0:
        outcome, amp = 0, amp0
    else:
        outcome = 1
        amp = np.tensordot(np.conj(basis[1]), tens, axes=([0], [1]))
    amp = amp / np.linalg.norm(amp)
    collapsed = np.einsum("j,ab->ajb", basis[outcome], amp).reshape(-1)
    return outcome, collapsed


# ---------------------------------------------------------------------------
# Sessions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HonestAlice:
    """Follows the protocol: commit to ``bit``, measure, open truthfully."""

    bit: int

    def commit(self, scheme, rng):
        record, evidence = honest_commit(scheme, self.bit, rng)
        return self.bit, (record, evidence)

    def open(self, scheme, payload, rng):
        record, evidence = payload
        ann = open_commitment(record)
        return OpenMove(ann.bit, ann.outcome_index, evidence)


def run_session(
    scheme: CommitmentScheme,
    alice,
    bob_mode: str,
    seed: int,
    trial: int = 0,
) -> Transcript:
    """One commit -> open -> verify session, deterministic in (seed, trial).

    ``alice`` is a strategy object with ``commit(scheme, rng)`` returning
    (bit_committed_or_"delayed", payload) and ``open(scheme, payload, rng)``
    returning an OpenMove.
    """
    rng = trial_rng(seed, trial)
    committed, payload = alice.commit(scheme, rng)
    move = alice.open(scheme, payload, rng)
    if move.outcome_index is None:
        accepted = False
        outcome_index = -1
    else:
        announcement = Announcement(move.bit, move.outcome_index)
        accepted = bob_verify(scheme, announcement, move.b_state, bob_mode, rng)
        outcome_index = move.outcome_index
    return Transcript(
        scheme_label=scheme.label,
        bit_committed=committed,
        bit_announced=move.bit,
        outcome_index=outcome_index,
        bob_mode=bob_mode,
        accepted=accepted,
        seed=seed,
    )
