"""qbclab: simulator and attack laboratory for two-register quantum bit
commitment protocols."""

from .attacks import (
    AttackReport,
    CheatUnitary,
    DelayedChoiceAlice,
    EprAttackAlice,
    NaiveCheatAlice,
    NaiveCheatStats,
    bb84_epr_attack,
    build_ideal_cheat_unitary,
    build_nonideal_cheat_unitary,
    delayed_choice_attack,
    exact_accept_probability,
    make_strategy,
    maximally_parallel_purification,
    naive_cheat_bb84,
    run_monte_carlo,
)
from .protocol import (
    BOB_MEASURE_AT_COMMIT,
    BOB_MODES,
    BOB_STORE,
    AliceRecord,
    Announcement,
    CommitmentScheme,
    HonestAlice,
    PhotonLayout,
    Transcript,
    bob_verify,
    committed_state,
    honest_commit,
    open_commitment,
    run_session,
    trial_rng,
)
from .qmath import (
    BipartitePureState,
    DensityOperator,
    DimensionCapError,
    SchmidtForm,
    fidelity,
    matrix_sqrt,
    partial_trace_a,
    polar_unitary,
    schmidt_decompose,
    tensor,
    trace_distance,
)
from .schemes import bb84_scheme, random_scheme, scheme_corpus, tilted_pair_scheme

__version__ = "0.1.0"
