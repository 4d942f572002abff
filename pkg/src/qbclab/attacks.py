"""Cheating strategies for the two-register commitment framework.

The central cheat is delayed measurement: the committer always prepares the
bit-0 state, skips the prescribed commit-phase measurement, and decides the
bit only at opening. If she sticks with 0 she just runs the honest opening.
To switch to 1 she rotates register A alone:

  * ideal schemes (the two reduced evidence operators coincide): the two
    prepared states share Schmidt weights and an evidence-side basis, so
    the rotation mapping one A-side Schmidt basis onto the other carries
    the bit-0 state exactly onto the bit-1 state;

  * non-ideal schemes (fidelity F = 1 - delta between the evidence
    operators): no rotation reaches the bit-1 state, but one reaches the
    purification of the prepared evidence operator with overlap F against
    it, because all purifications of a fixed operator are related by
    rotations of the purifying register alone. The projective verifier
    then accepts with probability at least F squared.

Photon-level baselines for the BB84 layout: the naive basis lie, which
succeeds with probability (3/4)^s against the photon-measuring receiver,
and the entangled-pair attack, which succeeds with certainty against
either receiver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .protocol import (
    BOB_MEASURE_AT_COMMIT,
    BOB_STORE,
    Announcement,
    CommitmentScheme,
    HonestAlice,
    OpenMove,
    Transcript,
    bits_to_int,
    committed_state,
    run_session,
    sample_index,
    tensor_product_basis_rows,
)
from .qmath import (
    SCHMIDT_FLOOR,
    BipartitePureState,
    DensityOperator,
    apply_to_a,
    degenerate_blocks,
    fidelity,
    orthonormal_completion,
    pad_dim_a,
    partial_trace_a,
    schmidt_decompose,
)
from .schemes import bb84_scheme

IDEAL_FIDELITY_TOL = 1e-9

ATTACK_KINDS = ("ideal-epr", "nonideal-uhlmann", "naive", "bb84-epr", "honest")
PAIR_STATES = ("phi_plus", "singlet")


@dataclass(frozen=True)
class CheatUnitary:
    """A rotation of register A alone, checked unitary at construction."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("cheat unitary must be square")
        gram = m.conj().T @ m
        err = np.max(np.abs(gram - np.eye(m.shape[0])))
        if err > 1e-9:
            raise ValueError(f"matrix not unitary: max |U^dag U - 1| = {err:.3e}")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class AttackReport:
    """Aggregate of a batch of seeded attack sessions.

    ``fidelity_bound`` is the fidelity F between the two reduced evidence
    operators (delta = 1 - F); ``exact_accept_prob`` is the closed-form
    audit value where one is defined. Accept counts are keyed by the
    announced bit.
    """

    scheme_label: str
    attack_kind: str
    trials: int
    accept_count0: int
    accept_count1: int
    fidelity_bound: float
    exact_accept_prob: float | None
    seed: int

    def __post_init__(self):
        if self.accept_count0 + self.accept_count1 > self.trials:
            raise ValueError("accept counts exceed trial count")
        if self.exact_accept_prob is not None and not 0.0 <= self.exact_accept_prob <= 1.0:
            raise ValueError("exact acceptance probability out of [0, 1]")

    @property
    def accept_rate(self) -> float:
        return (self.accept_count0 + self.accept_count1) / self.trials


# ---------------------------------------------------------------------------
# Cheat unitaries
# ---------------------------------------------------------------------------


def _blockwise_orthonormalize(cols: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Gram-Schmidt in index order inside each degenerate weight block."""
    out = cols.copy()
    for blk in degenerate_blocks(weights):
        for k in blk:
            v = out[:, k]
            for p in range(blk.start, k):
                v = v - out[:, p] * np.vdot(out[:, p], v)
            out[:, k] = v / np.linalg.norm(v)
    return out


def build_ideal_cheat_unitary(scheme: CommitmentScheme) -> CheatUnitary:
    """Register-A rotation mapping the bit-0 state onto the bit-1 state.

    Requires an ideal scheme (evidence operators equal within tolerance).
    The bit-0 state is Schmidt decomposed; the partner A basis for bit 1 is
    read off by contracting the bit-1 state against the shared
    evidence-side basis and orthonormalizing inside degenerate weight
    blocks, which keeps the construction valid for fully degenerate
    spectra. The map sends one basis onto the other and is completed
    deterministically on the orthogonal complement.
    """
    state0 = committed_state(scheme, 0)
    state1 = committed_state(scheme, 1)
    f = fidelity(partial_trace_a(state0), partial_trace_a(state1))
    if f < 1.0 - IDEAL_FIDELITY_TOL:
        raise ValueError(
            f"scheme {scheme.label} is not ideal (fidelity {f:.9f}); use the non-ideal attack"
        )
    form = schmidt_decompose(state0)
    partners = (state1.matrix() @ np.conj(form.basis_b)) / form.coefficients
    partners = _blockwise_orthonormalize(partners, form.weights())
    u = partners @ form.basis_a.conj().T
    if form.rank < scheme.dim_a:
        comp0 = orthonormal_completion(form.basis_a)
        comp1 = orthonormal_completion(partners)
        u = u + comp1 @ comp0.conj().T
    return CheatUnitary(u)


def maximally_parallel_purification(
    rho0: DensityOperator, reference: BipartitePureState
) -> BipartitePureState:
    """The purification of rho0 with the largest overlap against ``reference``.

    The achieved overlap |<psi0|reference>| equals the fidelity between
    rho0 and the reference's reduced evidence operator. Construction: take
    the eigen-purification of rho0 and rotate its A-side factor by the
    polar unitary of the cross-overlap with the reference's A-side factor.
    If the reference's A register is smaller than rank(rho0) it is first
    padded with zero amplitudes.
    """
    if rho0.dim != reference.dim_b:
        raise ValueError("rho0 dimension does not match the reference's B register")
    w, q = np.linalg.eigh(rho0.matrix)
    keep = w > SCHMIDT_FLOOR
    w, q = w[keep], q[:, keep]
    rank = w.size
    dim_a = max(reference.dim_a, rank)
    ref = pad_dim_a(reference, dim_a)
    factor = np.sqrt(w)[:, None] * q.T  # A-side factor of the eigen-purification
    cross = factor @ ref.matrix().conj().T  # rank x dim_a
    uc, _, vhc = np.linalg.svd(cross, full_matrices=False)
    isometry = vhc.conj().T @ uc.conj().T  # dim_a x rank
    m0 = isometry @ factor
    return BipartitePureState(dim_a, rho0.dim, m0.reshape(-1))


def _loewdin(cols: np.ndarray) -> np.ndarray:
    """Closest isometry to the given columns (symmetric orthonormalization)."""
    u, _, vh = np.linalg.svd(cols, full_matrices=False)
    return u @ vh


def build_nonideal_cheat_unitary(
    state0: BipartitePureState, psi0: BipartitePureState
) -> CheatUnitary:
    """Register-A rotation carrying one purification onto another.

    Both inputs must purify the same evidence operator (within 1e-8); the
    rotation matches their A-side polar factors and is completed
    deterministically on the orthogonal complements.
    """
    if state0.dim_b != psi0.dim_b:
        raise ValueError("purifications have different B dimensions")
    dim_a = max(state0.dim_a, psi0.dim_a)
    state0 = pad_dim_a(state0, dim_a)
    psi0 = pad_dim_a(psi0, dim_a)
    rho_s = partial_trace_a(state0).matrix
    rho_p = partial_trace_a(psi0).matrix
    if np.max(np.abs(rho_s - rho_p)) > 1e-8:
        raise ValueError("inputs purify different density matrices")
    w, q = np.linalg.eigh((rho_s + rho_p) / 2)
    keep = w > SCHMIDT_FLOOR
    w, q = w[keep], q[:, keep]
    scale = w**-0.5
    factor_s = _loewdin(state0.matrix() @ q.conj() * scale)
    factor_p = _loewdin(psi0.matrix() @ q.conj() * scale)
    u = factor_p @ factor_s.conj().T
    if w.size < dim_a:
        comp_s = orthonormal_completion(factor_s)
        comp_p = orthonormal_completion(factor_p)
        u = u + comp_p @ comp_s.conj().T
    return CheatUnitary(u)


# ---------------------------------------------------------------------------
# Strategies
# ---------------------------------------------------------------------------


class DelayedChoiceAlice:
    """Delayed-measurement cheat.

    Always prepares the bit-0 state and sends register B; the announced bit
    is fixed only at opening. Announcing 0 runs the honest opening from the
    coherent state. Announcing 1 first rotates register A: the ideal path
    maps onto the bit-1 state exactly, the "uhlmann" path maps onto the
    maximally parallel purification, and "auto" picks by the scheme's
    fidelity. Should the opening measurement land outside the declared
    index family (possible only for incomplete A bases) the cheat concedes
    and the session is rejected.
    """

    def __init__(self, scheme: CommitmentScheme, chosen_bit: int, path: str = "auto"):
        if path not in ("auto", "ideal", "uhlmann"):
            raise ValueError(f"unknown attack path {path!r}")
        self.chosen_bit = int(chosen_bit)
        self.path = path
        state0 = committed_state(scheme, 0)
        if self.chosen_bit == 0:
            pre = state0
        else:
            pre = apply_to_a(self._unitary_for(scheme, state0).matrix, state0)
        basis = scheme.basis_a(self.chosen_bit)
        if pre.dim_a > scheme.dim_a:
            padded = np.zeros((pre.dim_a, basis.shape[1]), dtype=complex)
            padded[: scheme.dim_a] = basis
            basis = padded
        rows = basis.conj().T @ pre.matrix()  # row j = (<a_j| (x) 1) |pre>
        probs = np.einsum("jk,jk->j", rows, rows.conj()).real
        norms = np.sqrt(np.clip(probs, 1e-300, None))
        self._collapsed = rows / norms[:, None]
        concede = max(0.0, 1.0 - probs.sum())
        if concede < 1e-12:  # below numerical floor: complete index family
            self._probs = probs
        else:
            self._probs = np.append(probs, concede)
        self._n = probs.size

    def _unitary_for(self, scheme, state0) -> CheatUnitary:
        if self.path == "ideal":
            return build_ideal_cheat_unitary(scheme)
        if self.path == "uhlmann":
            return self._uhlmann_unitary(scheme, state0)
        rho0 = partial_trace_a(state0)
        rho1 = partial_trace_a(committed_state(scheme, 1))
        if fidelity(rho0, rho1) >= 1.0 - IDEAL_FIDELITY_TOL:
            return build_ideal_cheat_unitary(scheme)
        return self._uhlmann_unitary(scheme, state0)

    @staticmethod
    def _uhlmann_unitary(scheme, state0) -> CheatUnitary:
        psi0 = maximally_parallel_purification(
            partial_trace_a(state0), committed_state(scheme, 1)
        )
        return build_nonideal_cheat_unitary(state0, psi0)

    def commit(self, scheme, rng):
        return "delayed", None

    def open(self, scheme, payload, rng):
        idx = sample_index(self._probs, rng)
        if idx >= self._n:
            return OpenMove(self.chosen_bit, None, None)
        return OpenMove(self.chosen_bit, idx, self._collapsed[idx])


def delayed_choice_attack(
    scheme: CommitmentScheme, chosen_bit: int, rng: np.random.Generator
) -> tuple[Announcement | None, np.ndarray | None]:
    """One opening of the delayed-measurement cheat.

    Returns the announcement (None if the cheat conceded) and the evidence
    state the receiver ends up testing.
    """
    alice = DelayedChoiceAlice(scheme, chosen_bit)
    _, payload = alice.commit(scheme, rng)
    move = alice.open(scheme, payload, rng)
    if move.outcome_index is None:
        return None, None
    return Announcement(move.bit, move.outcome_index), move.b_state


class NaiveCheatAlice:
    """Basis lie on the photon scheme: commit rectilinear photons (bit 0),
    then announce bit 1 with uniformly guessed diagonal polarizations."""

    def __init__(self, scheme: CommitmentScheme):
        if scheme.photon_layout is None:
            raise ValueError("naive cheat requires a photon-product scheme")
        self._dim = 2**scheme.photon_layout.s

    def commit(self, scheme, rng):
        i = int(rng.integers(self._dim))
        return 0, scheme.evidence(0)[i]

    def open(self, scheme, payload, rng):
        guess = int(rng.integers(self._dim))
        return OpenMove(1, guess, payload)


class EprAttackAlice:
    """Entangled-pair cheat on the photon scheme.

    Sends one half of each of s photon pairs at commit time and measures
    the kept halves only at opening, in the basis of the chosen bit. With
    "phi_plus" pairs both halves agree in either conjugate basis, so she
    announces her own outcomes; with "singlet" pairs the halves are always
    perpendicular, so she announces the orthogonal polarizations. The
    receiver-side statistics are identical either way.
    """

    def __init__(self, scheme: CommitmentScheme, chosen_bit: int, pair_state: str = "phi_plus"):
        if scheme.photon_layout is None:
            raise ValueError("entangled-pair attack requires a photon-product scheme")
        if pair_state not in PAIR_STATES:
            raise ValueError(f"unknown pair state {pair_state!r}")
        self.chosen_bit = int(chosen_bit)
        self.pair_state = pair_state
        self._layout = scheme.photon_layout

    def commit(self, scheme, rng):
        return "delayed", None

    def open(self, scheme, payload, rng):
        s = self._layout.s
        outcomes = rng.integers(0, 2, size=s)
        if self.pair_state == "singlet":
            announced = 1 - outcomes
        else:
            announced = outcomes
        basis = self._layout.bases[self.chosen_bit]
        b_state = np.ones(1, dtype=complex)
        for bit in announced:
            b_state = np.kron(b_state, basis[bit])
        return OpenMove(self.chosen_bit, bits_to_int(announced), b_state)


def bb84_epr_attack(
    s: int,
    chosen_bit: int,
    seed: int,
    trial: int = 0,
    bob_mode: str = BOB_STORE,
    pair_state: str = "phi_plus",
) -> Transcript:
    """One session of the entangled-pair attack on the photon scheme."""
    scheme = bb84_scheme(s)
    alice = EprAttackAlice(scheme, chosen_bit, pair_state)
    return run_session(scheme, alice, bob_mode, seed, trial)


# ---------------------------------------------------------------------------
# Closed-form audits and Monte Carlo
# ---------------------------------------------------------------------------


def _pre_measurement(scheme, attack_kind, chosen_bit):
    """Joint pre-measurement state and A measurement basis for an attack."""
    bit = int(chosen_bit)
    if attack_kind == "honest":
        return committed_state(scheme, bit), scheme.basis_a(bit)
    if attack_kind in ("ideal-epr", "nonideal-uhlmann"):
        state0 = committed_state(scheme, 0)
        if bit == 0:
            return state0, scheme.basis_a(0)
        if attack_kind == "ideal-epr":
            u = build_ideal_cheat_unitary(scheme)
        else:
            u = DelayedChoiceAlice._uhlmann_unitary(scheme, state0)
        psi = apply_to_a(u.matrix, pad_dim_a(state0, u.dim))
        basis = scheme.basis_a(1)
        if psi.dim_a > scheme.dim_a:
            padded = np.zeros((psi.dim_a, basis.shape[1]), dtype=complex)
            padded[: scheme.dim_a] = basis
            basis = padded
        return psi, basis
    if attack_kind == "bb84-epr":
        if scheme.photon_layout is None:
            raise ValueError("bb84-epr audit requires a photon-product scheme")
        # half-pair state equals the bit-0 preparation; the opening
        # measurement is in the chosen bit's product basis
        basis = tensor_product_basis_rows(
            scheme.photon_layout.bases[bit], scheme.photon_layout.s
        ).T
        return committed_state(scheme, 0), basis
    raise ValueError(f"unknown attack kind {attack_kind!r}")


def exact_accept_probability(scheme: CommitmentScheme, attack_kind: str, chosen_bit: int) -> float:
    """Closed-form acceptance of the projective verifier against an attack.

    Computes sum_j |(<a_j| (x) <phi_j|) |psi>|^2 for the attack's joint
    pre-measurement state |psi>, the probability that the announced index
    passes the receiver's projective test marginalized over the opening
    measurement, with out-of-family outcomes counted as rejections. The
    naive baseline is audited instead by its photon closed form (3/4)^s.
    """
    if attack_kind == "naive":
        if scheme.photon_layout is None:
            raise ValueError("naive cheat requires a photon-product scheme")
        return 0.75**scheme.photon_layout.s
    psi, basis = _pre_measurement(scheme, attack_kind, chosen_bit)
    rows = basis.conj().T @ psi.matrix()
    vals = np.einsum("jk,jk->j", rows, scheme.evidence(int(chosen_bit)).conj())
    return float(np.clip(np.sum(np.abs(vals) ** 2), 0.0, 1.0))


def expected_accept_probability(
    scheme: CommitmentScheme, attack_kind: str, chosen_bit: int, bob_mode: str
) -> float:
    """Mode-aware audit value. Identical to ``exact_accept_probability``
    except for the naive baseline against the store receiver, where every
    photon faces the full overlap penalty and the success rate is (1/2)^s."""
    if attack_kind == "naive" and bob_mode == BOB_STORE:
        return 0.5**scheme.photon_layout.s
    return exact_accept_probability(scheme, attack_kind, chosen_bit)


def make_strategy(
    scheme: CommitmentScheme, attack_kind: str, chosen_bit: int, pair_state: str = "phi_plus"
):
    """Strategy factory for the session runner."""
    if attack_kind == "honest":
        return HonestAlice(int(chosen_bit))
    if attack_kind == "ideal-epr":
        return DelayedChoiceAlice(scheme, chosen_bit, path="ideal")
    if attack_kind == "nonideal-uhlmann":
        return DelayedChoiceAlice(scheme, chosen_bit, path="uhlmann")
    if attack_kind == "naive":
        return NaiveCheatAlice(scheme)
    if attack_kind == "bb84-epr":
        return EprAttackAlice(scheme, chosen_bit, pair_state)
    raise ValueError(f"unknown attack kind {attack_kind!r}")


def run_monte_carlo(
    scheme: CommitmentScheme,
    attack_kind: str,
    chosen_bit: int,
    trials: int,
    seed: int,
    bob_mode: str = BOB_STORE,
    pair_state: str = "phi_plus",
    trial_indices=None,
) -> AttackReport:
    """Seeded batch of attack sessions.

    Each trial draws from its own counter-derived stream and aggregation is
    by counts only, so any execution order (or parallel split) of
    ``trial_indices`` produces the same report.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    alice = make_strategy(scheme, attack_kind, chosen_bit, pair_state)
    f = fidelity(
        partial_trace_a(committed_state(scheme, 0)),
        partial_trace_a(committed_state(scheme, 1)),
    )
    exact = expected_accept_probability(scheme, attack_kind, chosen_bit, bob_mode)
    counts = [0, 0]
    for t in range(trials) if trial_indices is None else trial_indices:
        transcript = run_session(scheme, alice, bob_mode, seed, t)
        if transcript.accepted:
            counts[transcript.bit_announced] += 1
    return AttackReport(
        scheme_label=scheme.label,
        attack_kind=attack_kind,
        trials=trials,
        accept_count0=counts[0],
        accept_count1=counts[1],
        fidelity_bound=f,
        exact_accept_prob=exact,
        seed=seed,
    )


@dataclass(frozen=True)
class NaiveCheatStats:
    """Exact and simulated success of the naive basis lie.

    ``exact_probability`` is (3/4)^s against the photon-measuring receiver:
    a photon survives unless it was both measured diagonally (prob 1/2) and
    came out opposite to the announced guess (prob 1/2).
    ``average_case_heuristic`` is (1/2)^{s/2}: the odds of guessing the
    roughly s/2 photons the receiver checks in the announced basis.
    """

    s: int
    trials: int
    accept_count: int
    exact_probability: float
    average_case_heuristic: float
    mc_estimate: float
    seed: int


def naive_cheat_bb84(s: int, trials: int = 100_000, seed: int = 7) -> NaiveCheatStats:
    """Monte Carlo of the naive basis lie against the photon receiver."""
    scheme = bb84_scheme(s)
    report = run_monte_carlo(
        scheme, "naive", chosen_bit=1, trials=trials, seed=seed, bob_mode=BOB_MEASURE_AT_COMMIT
    )
    accepted = report.accept_count0 + report.accept_count1
    return NaiveCheatStats(
        s=s,
        trials=trials,
        accept_count=accepted,
        exact_probability=0.75**s,
        average_case_heuristic=0.5 ** (s / 2),
        mc_estimate=accepted / trials,
        seed=seed,
    )
