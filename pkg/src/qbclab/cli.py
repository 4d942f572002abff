"""Experiment harness: run attacks, honest baselines, and parameter sweeps
over the bundled commitment schemes, emitting machine-readable reports.

Exit codes: 0 success, 1 self-check failure, 2 invalid configuration,
3 dimension cap exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from . import attacks, protocol, qmath, schemes

REPORT_FIELDS = [
    "command",
    "schemeLabel",
    "attackKind",
    "chosenBit",
    "bobMode",
    "trials",
    "seed",
    "acceptCount0",
    "acceptCount1",
    "empiricalAcceptRate",
    "fidelityBound",
    "delta",
    "traceDistance",
    "bobOptimalGuessProb",
    "exactAcceptProb",
    "averageCaseHeuristic",
    "config",
    "timestamp",
]

SWEEP_COLUMNS = [
    "scheme",
    "parameter",
    "fidelity",
    "delta",
    "exactAcceptProb",
    "empiricalAcceptRate",
    "trials",
    "seed",
]


class ConfigError(ValueError):
    """Semantically invalid experiment configuration."""


@dataclass
class ExperimentConfig:
    command: str
    scheme: str = "bb84"
    s: int = 2
    epsilon: float = 0.1
    random_index: int = 0
    attack: str = "bb84-epr"
    chosen_bit: int = 1
    trials: int = 1000
    seed: int = 7
    bob_mode: str = protocol.BOB_STORE
    pair_state: str = "phi_plus"
    output_path: str | None = None
    format: str = "json"
    epsilon_grid: list[float] = field(default_factory=list)
    s_grid: list[int] = field(default_factory=list)

    def validate(self) -> None:
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.scheme not in ("bb84", "tilted-pair", "random"):
            raise ConfigError(f"unknown scheme {self.scheme!r}")
        if self.attack not in attacks.ATTACK_KINDS:
            raise ConfigError(f"unknown attack {self.attack!r}")
        if self.chosen_bit not in (0, 1):
            raise ConfigError("chosen bit must be 0 or 1")
        if self.bob_mode not in protocol.BOB_MODES:
            raise ConfigError(f"unknown receiver mode {self.bob_mode!r}")
        if self.scheme == "bb84" and not 1 <= self.s <= schemes.MAX_PHOTONS:
            raise ConfigError(f"s must be in 1..{schemes.MAX_PHOTONS}")
        if self.scheme == "tilted-pair" and not 0.0 <= self.epsilon < np.pi / 4:
            raise ConfigError("epsilon must be in [0, pi/4)")
        if self.scheme == "random" and not 0 <= self.random_index < 5:
            raise ConfigError("random scheme index must be in 0..4")
        if self.attack in ("naive", "bb84-epr") and self.scheme != "bb84":
            raise ConfigError(f"attack {self.attack!r} requires the bb84 scheme")
        if self.format not in ("json", "csv"):
            raise ConfigError(f"unknown format {self.format!r}")
        if self.command == "sweep":
            if self.scheme == "bb84" and not self.s_grid:
                raise ConfigError("bb84 sweep needs a nonempty --s-grid")
            if self.scheme == "tilted-pair" and not self.epsilon_grid:
                raise ConfigError("tilted-pair sweep needs a nonempty --epsilon-grid")
            if self.scheme == "random":
                raise ConfigError("sweep supports bb84 and tilted-pair schemes")

    def echo(self) -> dict:
        return {
            "scheme": self.scheme,
            "s": self.s,
            "epsilon": self.epsilon,
            "randomIndex": self.random_index,
            "attack": self.attack,
            "chosenBit": self.chosen_bit,
            "trials": self.trials,
            "seed": self.seed,
            "bobMode": self.bob_mode,
            "pairState": self.pair_state,
            "format": self.format,
            "output": self.output_path,
        }


def build_scheme(config: ExperimentConfig) -> protocol.CommitmentScheme:
    if config.scheme == "bb84":
        return schemes.bb84_scheme(config.s)
    if config.scheme == "tilted-pair":
        return schemes.tilted_pair_scheme(config.epsilon)
    rng = np.random.default_rng(schemes.CORPUS_SEED)
    pool = [
        schemes.random_scheme(rng, da, db, label=f"random{n}")
        for n, (da, db) in enumerate([(2, 2), (3, 2), (2, 3), (4, 3), (3, 4)])
    ]
    return pool[config.random_index]


def run_experiment(config: ExperimentConfig) -> dict:
    """Run one attack/honest experiment and assemble the report object."""
    config.validate()
    scheme = build_scheme(config)
    report = attacks.run_monte_carlo(
        scheme,
        config.attack,
        config.chosen_bit,
        trials=config.trials,
        seed=config.seed,
        bob_mode=config.bob_mode,
        pair_state=config.pair_state,
    )
    rho0 = qmath.partial_trace_a(protocol.committed_state(scheme, 0))
    rho1 = qmath.partial_trace_a(protocol.committed_state(scheme, 1))
    distance = qmath.trace_distance(rho0, rho1)
    heuristic = 0.5 ** (config.s / 2) if config.attack == "naive" else None
    return {
        "command": config.command,
        "schemeLabel": report.scheme_label,
        "attackKind": report.attack_kind,
        "chosenBit": config.chosen_bit,
        "bobMode": config.bob_mode,
        "trials": report.trials,
        "seed": report.seed,
        "acceptCount0": report.accept_count0,
        "acceptCount1": report.accept_count1,
        "empiricalAcceptRate": report.accept_rate,
        "fidelityBound": report.fidelity_bound,
        "delta": 1.0 - report.fidelity_bound,
        "traceDistance": distance,
        "bobOptimalGuessProb": 0.5 * (1.0 + distance),
        "exactAcceptProb": report.exact_accept_prob,
        "averageCaseHeuristic": heuristic,
        "config": config.echo(),
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }


def run_sweep(config: ExperimentConfig) -> list[dict]:
    """One row per grid point, ordered by the swept parameter."""
    config.validate()
    rows = []
    if config.scheme == "tilted-pair":
        grid = sorted(config.epsilon_grid)
    else:
        grid = sorted(config.s_grid)
    for value in grid:
        point = ExperimentConfig(
            command="attack",
            scheme=config.scheme,
            s=int(value) if config.scheme == "bb84" else config.s,
            epsilon=float(value) if config.scheme == "tilted-pair" else config.epsilon,
            attack=config.attack,
            chosen_bit=config.chosen_bit,
            trials=config.trials,
            seed=config.seed,
            bob_mode=config.bob_mode,
            pair_state=config.pair_state,
        )
        point.validate()
        scheme = build_scheme(point)
        report = attacks.run_monte_carlo(
            scheme,
            point.attack,
            point.chosen_bit,
            trials=point.trials,
            seed=point.seed,
            bob_mode=point.bob_mode,
            pair_state=point.pair_state,
        )
        rows.append(
            {
                "scheme": report.scheme_label,
                "parameter": value,
                "fidelity": report.fidelity_bound,
                "delta": 1.0 - report.fidelity_bound,
                "exactAcceptProb": report.exact_accept_prob,
                "empiricalAcceptRate": report.accept_rate,
                "trials": report.trials,
                "seed": report.seed,
            }
        )
    return rows


def render_report(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    keys = [k for k in REPORT_FIELDS if k not in ("config", "timestamp")]
    writer.writerow(keys)
    writer.writerow([report[k] for k in keys])
    return buf.getvalue()


def render_sweep(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_attack(config: ExperimentConfig) -> int:
    report = run_experiment(config)
    _emit(render_report(report, config.format), config.output_path)
    return 0


def cmd_sweep(config: ExperimentConfig) -> int:
    rows = run_sweep(config)
    _emit(render_sweep(rows), config.output_path)
    return 0


def cmd_demo_ideal(config: ExperimentConfig) -> int:
    """Walk through the perfect-hiding scheme and its delayed-choice defeat."""
    scheme = schemes.bb84_scheme(config.s)
    state0 = protocol.committed_state(scheme, 0)
    state1 = protocol.committed_state(scheme, 1)
    rho0 = qmath.partial_trace_a(state0)
    rho1 = qmath.partial_trace_a(state1)
    print(f"scheme {scheme.label}: dim A = {scheme.dim_a}, dim B = {scheme.dim_b}")
    print(f"hiding: trace distance between the two evidence operators = "
          f"{qmath.trace_distance(rho0, rho1):.3e} (receiver's best guess is a coin flip)")
    unitary = attacks.build_ideal_cheat_unitary(scheme)
    rotated = qmath.apply_to_a(unitary.matrix, state0)
    residual = qmath.phase_aligned_distance(rotated.amplitudes, state1.amplitudes)
    print(f"cheat rotation on register A alone maps the bit-0 state onto the "
          f"bit-1 state: residual {residual:.3e}")
    for chosen_bit in (0, 1):
        for mode in protocol.BOB_MODES:
            report = attacks.run_monte_carlo(
                scheme, "ideal-epr", chosen_bit, trials=config.trials,
                seed=config.seed, bob_mode=mode,
            )
            accepted = report.accept_count0 + report.accept_count1
            print(f"delayed choice, announce {chosen_bit}, receiver {mode}: "
                  f"{accepted}/{report.trials} accepted")
    print("the commitment binds nothing: the committer picks the bit at opening")
    return 0


def cmd_verify_math(config: ExperimentConfig) -> int:
    """Quick numerical self-checks of the linear-algebra kernel."""
    rng = np.random.default_rng(config.seed)
    failures = 0

    def check(name: str, ok: bool, detail: str = "") -> None:
        nonlocal failures
        print(f"[{'PASS' if ok else 'FAIL'}] {name}" + (f" ({detail})" if detail else ""))
        if not ok:
            failures += 1

    worst = 0.0
    for _ in range(200):
        da, db = rng.integers(1, 7, size=2)
        amps = rng.normal(size=da * db) + 1j * rng.normal(size=da * db)
        state = qmath.BipartitePureState(int(da), int(db), amps / np.linalg.norm(amps))
        form = qmath.schmidt_decompose(state)
        err = float(np.linalg.norm(form.reconstruct().amplitudes - state.amplitudes))
        worst = max(worst, err)
    check("schmidt reconstruction on 200 random states", worst < 1e-9, f"max error {worst:.2e}")

    worst = 0.0
    for _ in range(50):
        d = int(rng.integers(2, 6))
        g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        rho = qmath.DensityOperator(g @ g.conj().T / np.trace(g @ g.conj().T).real)
        root = qmath.matrix_sqrt(rho)
        worst = max(worst, float(np.max(np.abs(root @ root - rho.matrix))))
    check("matrix sqrt multiplication identity", worst < 1e-9, f"max error {worst:.2e}")

    worst = 0.0
    for _ in range(50):
        d = int(rng.integers(2, 6))
        m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        w = qmath.polar_unitary(m)
        p = qmath.matrix_sqrt(m.conj().T @ m / np.trace(m.conj().T @ m).real) * np.sqrt(
            np.trace(m.conj().T @ m).real
        )
        worst = max(worst, float(np.max(np.abs(w @ p - m))))
    check("polar reconstruction identity", worst < 1e-7, f"max error {worst:.2e}")

    ok = True
    for _ in range(50):
        d = int(rng.integers(2, 5))
        rhos = []
        for _ in range(2):
            g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
            rhos.append(qmath.DensityOperator(g @ g.conj().T / np.trace(g @ g.conj().T).real))
        f = qmath.fidelity(rhos[0], rhos[1])
        dist = qmath.trace_distance(rhos[0], rhos[1])
        sym = abs(f - qmath.fidelity(rhos[1], rhos[0]))
        ok = ok and sym < 1e-9 and 1 - f <= dist + 1e-9 and dist <= np.sqrt(1 - f**2) + 1e-9
    check("fidelity symmetry and distance bounds", ok)

    for eps in (0.05, 0.2):
        scheme = schemes.tilted_pair_scheme(eps)
        rho0 = qmath.partial_trace_a(protocol.committed_state(scheme, 0))
        rho1 = qmath.partial_trace_a(protocol.committed_state(scheme, 1))
        check(
            f"tilted family closed-form fidelity (eps={eps})",
            abs(qmath.fidelity(rho0, rho1) - np.cos(eps)) < 1e-9,
        )
    return 1 if failures else 0


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _parse_grid(text: str, cast) -> list:
    return [cast(tok) for tok in text.split(",") if tok.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qbclab",
        description="Commitment protocol simulator and attack laboratory",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_attack=True):
        p.add_argument("--scheme", choices=["bb84", "tilted-pair", "random"], default="bb84")
        p.add_argument("--s", type=int, default=2, help="photon count for bb84")
        p.add_argument("--epsilon", type=float, default=0.1, help="tilt angle (radians)")
        p.add_argument("--random-index", type=int, default=0, help="seeded random scheme 0..4")
        if with_attack:
            p.add_argument("--attack", choices=list(attacks.ATTACK_KINDS), default="bb84-epr")
        p.add_argument("--chosen-bit", type=int, choices=[0, 1], default=1)
        p.add_argument("--trials", type=int, default=1000)
        p.add_argument("--seed", type=int, default=7)
        p.add_argument("--bob-mode", choices=list(protocol.BOB_MODES), default=protocol.BOB_STORE)
        p.add_argument("--pair-state", choices=["phi-plus", "singlet"], default="phi-plus")
        p.add_argument("--output", default=None, help="write the report here instead of stdout")

    p_attack = sub.add_parser("attack", help="run one attack or honest baseline")
    add_common(p_attack)
    p_attack.add_argument("--format", choices=["json", "csv"], default="json")

    p_sweep = sub.add_parser("sweep", help="run an attack across a parameter grid")
    add_common(p_sweep)
    p_sweep.add_argument("--epsilon-grid", default="", help="comma-separated tilt angles")
    p_sweep.add_argument("--s-grid", default="", help="comma-separated photon counts")

    p_demo = sub.add_parser("demo-ideal", help="walk through the perfect-hiding cheat")
    p_demo.add_argument("--s", type=int, default=2)
    p_demo.add_argument("--trials", type=int, default=1000)
    p_demo.add_argument("--seed", type=int, default=7)

    p_verify = sub.add_parser("verify-math", help="numerical self-checks")
    p_verify.add_argument("--seed", type=int, default=7)
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    config = ExperimentConfig(command=args.command)
    config.seed = getattr(args, "seed", config.seed)
    config.s = getattr(args, "s", config.s)
    config.trials = getattr(args, "trials", config.trials)
    if args.command in ("attack", "sweep"):
        config.scheme = args.scheme
        config.epsilon = args.epsilon
        config.random_index = args.random_index
        config.attack = args.attack
        config.chosen_bit = args.chosen_bit
        config.bob_mode = args.bob_mode
        config.pair_state = args.pair_state.replace("-", "_")
        config.output_path = args.output
        config.format = getattr(args, "format", "json")
    if args.command == "sweep":
        try:
            config.epsilon_grid = _parse_grid(args.epsilon_grid, float)
            config.s_grid = _parse_grid(args.s_grid, int)
        except ValueError as exc:
            raise ConfigError(f"bad grid value: {exc}") from exc
    return config


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = config_from_args(args)
        if args.command == "attack":
            return cmd_attack(config)
        if args.command == "sweep":
            return cmd_sweep(config)
        if args.command == "demo-ideal":
            return cmd_demo_ideal(config)
        if args.command == "verify-math":
            return cmd_verify_math(config)
        raise ConfigError(f"unknown command {args.command!r}")
    except qmath.DimensionCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
