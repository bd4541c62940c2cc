"""Configuration ingestion, subcommand dispatch, sweeps, and result emission.

    rpsolve <subcommand> --config <path> [--out <path>] [--format json|csv]
            [--parallel] [--quiet]

Subcommands: discrete, continuum, complex-pole, complex-full, verify, sweep,
identities. Configurations are JSON validated against the schema shipped with
the package before any computation; density tables may be inlined or loaded
from CSV files resolved relative to the configuration file. Data goes to
stdout or --out, human diagnostics to stderr. Exit codes: 0 success, 2
nonconvergence (or a failed identity check), 3 configuration error.

All energies are unitless model values. JSON output is deterministic: field
order is fixed and floats use their shortest round-trip representation; CSV
carries 17 significant digits. Sweeps reuse each converged solution as the
warm start for the next strength unless --parallel requests independent
solves.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Sequence

import jsonschema
import numpy as np

from .continuum import (
    ContinuumMode,
    ContinuumProblem,
    make_quadrature,
    solve_continuum,
)
from .errors import ConfigError, NonconvergenceError
from .oracle import build_basis, build_hamiltonian, compare, lowest_eigenvalues
from .richardson import (
    PairSolution,
    SolverSettings,
    ground_occupation,
    solve_discrete,
    verify_identities,
)
from .spectrum import (
    DensityKind,
    DensityTable,
    Level,
    PairingProblem,
    Resonance,
    box_spectrum,
)

SOLVE_MODES = ("discrete", "continuum", "complex-pole", "complex-full")
ALL_MODES = SOLVE_MODES + ("verify", "sweep", "identities")

_CONTINUUM_MODE = {
    "continuum": ContinuumMode.REAL_CONTINUUM,
    "complex-pole": ContinuumMode.COMPLEX_POLE,
    "complex-full": ContinuumMode.COMPLEX_FULL,
}

# Requirements checked after schema validation, keyed by mode.
_REQUIRED_KEYS = {
    "discrete": ("strength", "pairs"),
    "continuum": ("strength", "pairs", "background"),
    "complex-pole": ("strength", "pairs", "resonances"),
    "complex-full": ("strength", "pairs", "resonances", "background", "complex_background"),
    "verify": ("strength", "pairs"),
    "sweep": ("strength_sweep", "pairs"),
    "identities": (),
}


@dataclass(frozen=True)
class RunConfig:
    """Validated, fully materialized run request."""

    mode: str
    problem: PairingProblem | None
    occupation: list[int] | None
    g_values: np.ndarray
    settings: SolverSettings
    quadrature_cutoff: float | None
    nodes_per_panel: int
    oracle_count: int | None
    oracle_tolerance: float
    identity_trials: int
    identity_seed: int
    identity_tolerance: float
    out: Path | None
    fmt: str
    parallel: bool
    quiet: bool


# --------------------------------------------------------------------------
# Configuration loading


def _load_schema() -> dict:
    with resources.files("rpsolve").joinpath("schema.json").open("rb") as fh:
        return json.load(fh)


def _load_table_csv(path: Path, complex_values: bool) -> DensityTable:
    try:
        data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    except OSError as exc:
        raise ConfigError(f"cannot read density CSV {path}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"malformed density CSV {path}: {exc}") from exc
    want = 3 if complex_values else 2
    if data.shape[1] != want:
        raise ConfigError(
            f"density CSV {path} must have {want} columns, found {data.shape[1]}"
        )
    if complex_values:
        return DensityTable(
            data[:, 0], data[:, 1] + 1j * data[:, 2], DensityKind.COMPLEX_BACKGROUND
        )
    return DensityTable(data[:, 0], data[:, 1], DensityKind.BACKGROUND)


def _build_table(raw, base_dir: Path, kind: DensityKind) -> DensityTable:
    complex_values = kind is DensityKind.COMPLEX_BACKGROUND
    if "csv" in raw:
        return _load_table_csv(base_dir / raw["csv"], complex_values)
    if complex_values:
        values = np.asarray(raw["real"], dtype=float) + 1j * np.asarray(raw["imag"], dtype=float)
        return DensityTable(raw["grid"], values, kind)
    return DensityTable(raw["grid"], raw["values"], kind)


def _build_problem(raw: dict, base_dir: Path, strength: float) -> PairingProblem:
    levels = [
        Level(float(item["energy"]), item.get("label", f"lvl{i}"))
        for i, item in enumerate(raw.get("levels", []))
    ]
    box = []
    if "box" in raw:
        spec = raw["box"]
        box = box_spectrum(spec["radius"], spec["count"], spec.get("mass_scale", 1.0))
    resonances = [
        Resonance(item["position"], item["width"]) for item in raw.get("resonances", [])
    ]
    background = None
    if "background" in raw:
        background = _build_table(raw["background"], base_dir, DensityKind.BACKGROUND)
    complex_background = None
    if "complex_background" in raw:
        complex_background = _build_table(
            raw["complex_background"], base_dir, DensityKind.COMPLEX_BACKGROUND
        )
    return PairingProblem(
        bound_levels=levels,
        box_levels=box,
        resonances=resonances,
        background=background,
        complex_background=complex_background,
        strength=strength,
        pairs=int(raw["pairs"]),
    )


def _build_settings(raw: dict) -> SolverSettings:
    spec = dict(raw.get("settings", {}))
    if "seed_offsets" in spec:
        spec["seed_offsets"] = tuple(complex(re, im) for re, im in spec["seed_offsets"])
    return SolverSettings(**spec)


def load_config(mode: str, config_path: Path | None, args) -> RunConfig:
    """Parse, schema-validate, and materialize one run configuration."""
    if config_path is None:
        if mode != "identities":
            raise ConfigError(f"subcommand {mode!r} requires --config")
        raw: dict = {}
        base_dir = Path.cwd()
    else:
        try:
            raw = json.loads(config_path.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {config_path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {config_path} is not valid JSON: {exc}") from exc
        base_dir = config_path.parent

    try:
        jsonschema.validate(raw, _load_schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config error at {where}: {exc.message}") from exc

    if "mode" in raw and raw["mode"] != mode:
        raise ConfigError(
            f"config declares mode {raw['mode']!r} but subcommand is {mode!r}"
        )
    for key in _REQUIRED_KEYS[mode]:
        if key not in raw:
            raise ConfigError(f"config error: {key!r} is a required property for mode {mode!r}")
        if key == "resonances" and not raw[key]:
            raise ConfigError(f"config error: {key!r} must be nonempty for mode {mode!r}")

    try:
        settings = _build_settings(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config error in settings: {exc}") from exc

    problem = None
    g_values = np.zeros(0)
    occupation = None
    if mode != "identities":
        if mode == "sweep":
            sweep = raw["strength_sweep"]
            if sweep["stop"] < sweep["start"]:
                raise ConfigError("config error: strength_sweep stop must be >= start")
            g_values = np.linspace(sweep["start"], sweep["stop"], int(sweep["steps"]))
            strength = float(g_values[-1])
        else:
            g_values = np.array([float(raw["strength"])])
            strength = float(raw["strength"])
        try:
            problem = _build_problem(raw, base_dir, strength)
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"config error: {exc}") from exc
        if mode == "sweep" and (
            problem.background is not None or problem.complex_background is not None
        ):
            raise ConfigError("config error: sweeps support discrete problems only")
        if mode == "verify" and (
            problem.resonances
            or problem.background is not None
            or problem.complex_background is not None
        ):
            raise ConfigError("config error: verify supports real discrete problems only")
        occ_raw = raw.get("occupation", "ground")
        occupation = None if occ_raw == "ground" else [int(i) for i in occ_raw]

    quad = raw.get("quadrature", {})
    oracle_raw = raw.get("oracle", {})
    ident = raw.get("identities", {})
    return RunConfig(
        mode=mode,
        problem=problem,
        occupation=occupation,
        g_values=g_values,
        settings=settings,
        quadrature_cutoff=quad.get("cutoff"),
        nodes_per_panel=int(quad.get("nodes_per_panel", 64)),
        oracle_count=oracle_raw.get("count"),
        oracle_tolerance=float(oracle_raw.get("tolerance", 1e-8)),
        identity_trials=int(ident.get("trials", 1000)),
        identity_seed=int(ident.get("seed", 0)),
        identity_tolerance=float(ident.get("tolerance", 1e-12)),
        out=Path(args.out) if args.out else None,
        fmt=args.format,
        parallel=bool(args.parallel),
        quiet=bool(args.quiet),
    )


# --------------------------------------------------------------------------
# Result emission


def emit_sweep(results: Sequence[tuple[float, PairSolution]]) -> tuple[list[str], list[list]]:
    """Tabulate sweep results: one row per strength, ascending.

    Columns: g, total_re, total_im, residual_norm, continuation_steps, then
    e{i}_re, e{i}_im per pair energy.
    """
    if not results:
        raise ValueError("emit_sweep needs at least one result")
    gs = [g for g, _ in results]
    if any(b < a for a, b in zip(gs, gs[1:])):
        raise ValueError("sweep results must be in ascending strength order")
    n = results[0][1].energies.size
    header = ["g", "total_re", "total_im", "residual_norm", "continuation_steps"]
    for i in range(1, n + 1):
        header += [f"e{i}_re", f"e{i}_im"]
    rows = []
    for g, sol in results:
        row = [
            float(g),
            float(sol.total.real),
            float(sol.total.imag),
            float(sol.residual_norm),
            int(sol.continuation_steps),
        ]
        for e in sol.energies:
            row += [float(e.real), float(e.imag)]
        rows.append(row)
    return header, rows


def _csv_cell(value) -> str:
    if isinstance(value, int):
        return str(value)
    return f"{value:.17g}"


def _write_csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_csv_cell(v) for v in row])
    return buf.getvalue()


def _dump_json(payload) -> str:
    return json.dumps(payload, indent=2) + "\n"


def _solution_payload(
    mode: str,
    strength: float,
    occupation: list[int],
    sol: PairSolution,
    cutoff: float | None = None,
) -> dict:
    payload = {
        "mode": mode,
        "g": float(strength),
        "pairs": int(sol.energies.size),
        "occupation": [int(i) for i in occupation],
        "total_re": float(sol.total.real),
        "total_im": float(sol.total.imag),
        "residual_norm": float(sol.residual_norm),
        "iterations": int(sol.iterations),
        "continuation_steps": int(sol.continuation_steps),
        "pair_energies": [
            {"re": float(e.real), "im": float(e.imag)} for e in sol.energies
        ],
    }
    if cutoff is not None:
        payload["cutoff"] = float(cutoff)
    return payload


_NUMBER = {"type": "number"}
_PAIR_ENERGIES = {
    "type": "array",
    "items": {
        "type": "object",
        "required": ["re", "im"],
        "properties": {"re": _NUMBER, "im": _NUMBER},
    },
}

RESULT_SCHEMA = {
    "type": "object",
    "required": [
        "mode",
        "g",
        "pairs",
        "occupation",
        "total_re",
        "total_im",
        "residual_norm",
        "iterations",
        "continuation_steps",
        "pair_energies",
    ],
    "properties": {
        "mode": {"type": "string"},
        "g": _NUMBER,
        "pairs": {"type": "integer"},
        "occupation": {"type": "array", "items": {"type": "integer"}},
        "total_re": _NUMBER,
        "total_im": _NUMBER,
        "residual_norm": _NUMBER,
        "iterations": {"type": "integer"},
        "continuation_steps": {"type": "integer"},
        "pair_energies": _PAIR_ENERGIES,
        "cutoff": _NUMBER,
    },
    "additionalProperties": False,
}

SWEEP_SCHEMA = {
    "type": "array",
    "minItems": 1,
    "items": {
        "type": "object",
        "required": ["g", "total_re", "total_im", "residual_norm", "continuation_steps"],
        "additionalProperties": _NUMBER,
    },
}

VERIFY_SCHEMA = {
    "type": "object",
    "required": ["mode", "g", "solver", "oracle_eigenvalues", "comparison"],
    "properties": {
        "mode": {"const": "verify"},
        "g": _NUMBER,
        "solver": RESULT_SCHEMA,
        "oracle_eigenvalues": {"type": "array", "items": _NUMBER},
        "comparison": {
            "type": "object",
            "required": ["nearest", "gap", "tolerance", "imaginary_leak", "passed", "message"],
        },
    },
}

IDENTITIES_SCHEMA = {
    "type": "object",
    "required": [
        "mode",
        "trials",
        "double_sum_failures",
        "partial_fraction_failures",
        "max_double_sum_error",
        "max_partial_fraction_error",
        "passed",
    ],
}


# --------------------------------------------------------------------------
# Execution


def _note(config: RunConfig, message: str) -> None:
    if not config.quiet:
        print(message, file=sys.stderr)


def _resolved_occupation(config: RunConfig) -> list[int]:
    if config.occupation is not None:
        return list(config.occupation)
    return ground_occupation(config.problem)


def _solve_one(config: RunConfig, mode: str, strength: float, warm_start=None) -> tuple[PairSolution, float | None]:
    problem = replace(config.problem, strength=float(strength))
    occupation = _resolved_occupation(config)
    if mode == "discrete":
        sol = solve_discrete(problem, occupation, config.settings, warm_start=warm_start)
        return sol, None
    rule = make_quadrature(problem, config.quadrature_cutoff, config.nodes_per_panel)
    cproblem = ContinuumProblem(problem, rule, _CONTINUUM_MODE[mode])
    sol = solve_continuum(cproblem, occupation, config.settings, warm_start=warm_start)
    cutoff = rule.upper_cutoff if mode in ("continuum", "complex-full") else None
    return sol, cutoff


def _run_solve(config: RunConfig) -> str:
    strength = float(config.g_values[0])
    sol, cutoff = _solve_one(config, config.mode, strength)
    if cutoff is not None:
        _note(config, f"integration cutoff {cutoff:.6g} (finite truncation accepted)")
    if abs(sol.total.imag) > 0.0:
        _note(
            config,
            f"imaginary part of the total energy |Im| = {abs(sol.total.imag):.6g} "
            "(pole-approximation quality measure)",
        )
    payload = _solution_payload(config.mode, strength, _resolved_occupation(config), sol, cutoff)
    if config.fmt == "csv":
        header, rows = emit_sweep([(strength, sol)])
        return _write_csv(header, rows)
    return _dump_json(payload)


def _run_sweep(config: RunConfig) -> str:
    results: list[tuple[float, PairSolution]] = []
    if config.parallel:
        with ThreadPoolExecutor() as pool:
            sols = list(
                pool.map(lambda g: _solve_one(config, "discrete", g)[0], config.g_values)
            )
        results = list(zip((float(g) for g in config.g_values), sols))
    else:
        warm = None
        for g in config.g_values:
            if warm is not None and float(g) <= warm[0]:
                warm = None  # degenerate grid point; restart continuation
            sol, _ = _solve_one(config, "discrete", float(g), warm_start=warm)
            results.append((float(g), sol))
            warm = (float(g), sol.energies)
    _note(config, f"swept {len(results)} strength points")
    header, rows = emit_sweep(results)
    if config.fmt == "csv":
        return _write_csv(header, rows)
    return _dump_json([dict(zip(header, row)) for row in rows])


def _run_verify(config: RunConfig) -> tuple[str, bool]:
    problem = config.problem
    occupation = _resolved_occupation(config)
    sol = solve_discrete(problem, occupation, config.settings)
    levels = list(problem.discrete_levels)
    basis = build_basis(len(levels), problem.pairs)
    matrix = build_hamiltonian(basis, levels, problem.strength)
    count = config.oracle_count or min(basis.dimension, max(6, problem.pairs + 2))
    eigenvalues = lowest_eigenvalues(matrix, count)
    report = compare(
        sol,
        eigenvalues,
        tolerance=config.oracle_tolerance,
        ground=config.occupation is None,
    )
    payload = {
        "mode": "verify",
        "g": float(problem.strength),
        "solver": _solution_payload("discrete", problem.strength, occupation, sol),
        "oracle_eigenvalues": [float(v) for v in eigenvalues],
        "comparison": {
            "nearest": report.nearest,
            "gap": report.gap,
            "tolerance": report.tolerance,
            "imaginary_leak": report.imaginary_leak,
            "passed": report.passed,
            "message": report.message,
        },
    }
    _note(config, f"oracle comparison: {report.message} (gap {report.gap:.3e})")
    return _dump_json(payload), report.passed


def _run_identities(config: RunConfig) -> tuple[str, bool]:
    report = verify_identities(
        config.identity_trials,
        seed=config.identity_seed,
        tolerance=config.identity_tolerance,
    )
    payload = {
        "mode": "identities",
        "trials": report.trials,
        "double_sum_failures": report.double_sum_failures,
        "partial_fraction_failures": report.partial_fraction_failures,
        "max_double_sum_error": report.max_double_sum_error,
        "max_partial_fraction_error": report.max_partial_fraction_error,
        "passed": report.passed,
    }
    return _dump_json(payload), report.passed


def run(config: RunConfig) -> int:
    """Execute a validated run; returns the process exit code."""
    try:
        if config.mode == "identities":
            text, passed = _run_identities(config)
            exit_code = 0 if passed else 2
        elif config.mode == "verify":
            text, _ = _run_verify(config)
            exit_code = 0
        elif config.mode == "sweep":
            text = _run_sweep(config)
            exit_code = 0
        else:
            text = _run_solve(config)
            exit_code = 0
    except NonconvergenceError as exc:
        print(f"solver did not converge: {exc}", file=sys.stderr)
        if exc.last_good_g is not None:
            print(f"last converged strength: {exc.last_good_g:.9g}", file=sys.stderr)
        return 2

    if config.out is not None:
        config.out.write_text(text)
    else:
        sys.stdout.write(text)
    return exit_code


def _parse_args(argv):
    parser = argparse.ArgumentParser(
        prog="rpsolve",
        description="exact pairing eigenenergies from coupled pair-energy equations",
    )
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in ALL_MODES:
        p = sub.add_parser(mode)
        p.add_argument(
            "--config",
            type=Path,
            default=None,
            required=(mode != "identities"),
            help="JSON run configuration",
        )
        p.add_argument("--out", default=None, help="output file (default: stdout)")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument(
            "--parallel",
            action="store_true",
            help="solve sweep points independently instead of warm-starting",
        )
        p.add_argument("--quiet", action="store_true", help="suppress stderr diagnostics")
    return parser.parse_args(argv)


def main(argv=None) -> int:
    args = _parse_args(argv)
    if args.format == "csv" and args.mode in ("verify", "identities"):
        print("csv format is unavailable for report modes", file=sys.stderr)
        return 3
    try:
        config = load_config(args.mode, args.config, args)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 3
    return run(config)


def console_main() -> None:
    raise SystemExit(main())
