"""Quadrature of density integrals and the continuum / complex-energy solvers.

With a continuum the level sum in the discrete equations splits into a bound
part and a density integral; one residual component per pair energy reads

    1 - sum_b G/(2 eps_b - E_nu) - (G/2) int_0^Lambda g(e)/(2e - E_nu) de
      - sum_{nu' != nu} 2G/(E_nu - E_nu') = 0,

where the bound sum runs over pair states (the spin sum doubles G/2 to G) and
the density g carries the spin sum. In the complex-energy representation the
resonant part of g is traded for discrete pole terms G/(2 eps_r - i Gamma_r
- E_nu), optionally keeping the real background integral and a user-supplied
rotated-contour remainder density; dropping both integrals is the pole
approximation. An eigenenergy with nonzero imaginary part is then expected
and its magnitude is a quality measure of that approximation — it is always
reported, never discarded.

Evaluation is pure; integral terms for distinct pair energies may run in
parallel. The integration cutoff is finite and reported alongside results.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import ContourError
from .richardson import (
    PairSolution,
    SolverSettings,
    _jacobian_core,
    _residual_core,
    _run_branch,
    _validate_occupation,
    check_admissible,
    ground_occupation,
    seed_g0,
)
from .spectrum import DensityTable, PairingProblem

_CONTOUR_IMAG_TOL = 1e-12


class ContinuumMode(Enum):
    REAL_CONTINUUM = "continuum"
    COMPLEX_POLE = "complex-pole"
    COMPLEX_FULL = "complex-full"


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Panel-wise Gauss-Legendre rule tiling (0, cutoff].

    Panel edges carry every density-grid breakpoint and the resonance
    positions with their +-5 Gamma neighborhoods, so the interpolated
    integrands are smooth inside each panel.
    """

    panels: tuple[tuple[float, float], ...]
    upper_cutoff: float
    nodes_per_panel: int = 64

    def __post_init__(self):
        if not (self.upper_cutoff > 0.0):
            raise ValueError("cutoff must be positive")
        if self.nodes_per_panel < 2:
            raise ValueError("nodes_per_panel must be at least 2")
        panels = tuple((float(lo), float(hi)) for lo, hi in self.panels)
        if not panels:
            raise ValueError("quadrature rule needs at least one panel")
        prev = 0.0
        for lo, hi in panels:
            if not (0.0 <= lo < hi <= self.upper_cutoff):
                raise ValueError("panels must lie inside (0, cutoff]")
            if abs(lo - prev) > 1e-12 * self.upper_cutoff:
                raise ValueError("panels must tile (0, cutoff] without gaps or overlap")
            prev = hi
        if abs(prev - self.upper_cutoff) > 1e-12 * self.upper_cutoff:
            raise ValueError("panels must reach the cutoff")
        object.__setattr__(self, "panels", panels)

    @classmethod
    def build(
        cls,
        cutoff: float,
        breakpoints: Sequence[float] = (),
        nodes_per_panel: int = 64,
        max_panel_width: float | None = None,
    ) -> "QuadratureRule":
        if not (cutoff > 0.0):
            raise ValueError("cutoff must be positive")
        if max_panel_width is None:
            max_panel_width = cutoff / 16.0
        edges = [0.0, cutoff]
        edges.extend(b for b in breakpoints if 0.0 < b < cutoff)
        edges = sorted(set(edges))
        kept = [edges[0]]
        for e in edges[1:]:  # drop near-duplicate edges that would give void panels
            if e - kept[-1] > 1e-12 * cutoff:
                kept.append(e)
        if kept[-1] != cutoff:
            kept[-1] = cutoff
        panels = []
        for lo, hi in zip(kept[:-1], kept[1:]):
            # keep panels narrow so near-contour poles stay resolved
            parts = max(1, math.ceil((hi - lo) / max_panel_width))
            cuts = np.linspace(lo, hi, parts + 1)
            panels.extend((float(a), float(b)) for a, b in zip(cuts[:-1], cuts[1:]))
        return cls(panels=tuple(panels), upper_cutoff=cutoff, nodes_per_panel=nodes_per_panel)

    def with_nodes(self, nodes_per_panel: int) -> "QuadratureRule":
        return QuadratureRule(
            panels=self.panels,
            upper_cutoff=self.upper_cutoff,
            nodes_per_panel=nodes_per_panel,
        )

    @cached_property
    def nodes_weights(self) -> tuple[np.ndarray, np.ndarray]:
        """Concatenated Gauss-Legendre nodes and weights over all panels."""
        base_x, base_w = np.polynomial.legendre.leggauss(self.nodes_per_panel)
        xs, ws = [], []
        for lo, hi in self.panels:
            half = 0.5 * (hi - lo)
            xs.append(half * base_x + 0.5 * (hi + lo))
            ws.append(half * base_w)
        return np.concatenate(xs), np.concatenate(ws)


def default_cutoff(problem: PairingProblem) -> float:
    """Ten times the largest |2 eps| scale, extended to cover any density grid."""
    cutoff = 10.0 * problem.energy_scale
    for table in (problem.background, problem.complex_background):
        if table is not None:
            cutoff = max(cutoff, table.span[1])
    return cutoff


def make_quadrature(
    problem: PairingProblem,
    cutoff: float | None = None,
    nodes_per_panel: int = 64,
) -> QuadratureRule:
    """Quadrature rule for a problem's density tables and resonances."""
    cutoff = default_cutoff(problem) if cutoff is None else float(cutoff)
    breakpoints: list[float] = []
    for table in (problem.background, problem.complex_background):
        if table is not None:
            breakpoints.extend(table.grid.tolist())
    for res in problem.resonances:
        breakpoints.extend(
            (res.position - 5.0 * res.width, res.position, res.position + 5.0 * res.width)
        )
    return QuadratureRule.build(cutoff, breakpoints, nodes_per_panel)


@dataclass(frozen=True, eq=False)
class ContinuumProblem:
    """A pairing problem together with its integration rule and solve mode."""

    base: PairingProblem
    quadrature: QuadratureRule
    mode: ContinuumMode

    def __post_init__(self):
        if self.mode is ContinuumMode.REAL_CONTINUUM:
            if self.base.background is None:
                raise ValueError("real-continuum mode requires a background table")
            if self.base.resonances:
                raise ValueError(
                    "real-continuum mode represents resonances through the density; "
                    "use a complex mode for explicit poles"
                )
        elif self.mode is ContinuumMode.COMPLEX_POLE:
            if not self.base.resonances:
                raise ValueError("complex-pole mode requires at least one resonance")
        elif self.mode is ContinuumMode.COMPLEX_FULL:
            if self.base.background is None or self.base.complex_background is None:
                raise ValueError(
                    "complex-full mode requires background and complex-background tables"
                )
            if not self.base.resonances:
                raise ValueError("complex-full mode requires at least one resonance")

    @property
    def seed_states(self) -> np.ndarray:
        if self.mode is ContinuumMode.REAL_CONTINUUM:
            return self.base.two_eps_discrete
        return self.base.two_eps_all


def _on_real_contour(pair_energy: complex, cutoff: float) -> bool:
    return (
        abs(pair_energy.imag) <= _CONTOUR_IMAG_TOL
        and 0.0 < pair_energy.real < 2.0 * cutoff
    )


def _samples_integral(x: np.ndarray, w: np.ndarray, gvals: np.ndarray, pair_energy: complex):
    return np.sum(w * gvals / (2.0 * x - pair_energy))


def _principal_value_integral(
    density: DensityTable, rule: QuadratureRule, e_real: float
) -> complex:
    """PV of int_0^Lambda g(e)/(2e - E) de for real E inside the contour.

    The pole strength g(E/2) is subtracted out and integrated analytically,
    (g0/2) ln((2 Lambda - E)/E); the regular remainder is integrated on the
    panel set refined symmetrically around the pole.
    """
    cutoff = rule.upper_cutoff
    pole = 0.5 * e_real
    g0 = density(pole)
    edges = sorted({lo for lo, _ in rule.panels} | {hi for _, hi in rule.panels})
    below = max((e for e in edges if e < pole), default=0.0)
    above = min((e for e in edges if e > pole), default=cutoff)
    half = 0.5 * min(pole - below, above - pole)
    if half > 0.0:
        extra = [pole - half, pole, pole + half]
        edges = sorted(set(edges) | set(extra))
    xs, ws = [], []
    base_x, base_w = np.polynomial.legendre.leggauss(rule.nodes_per_panel)
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi - lo <= 0.0:
            continue
        h = 0.5 * (hi - lo)
        xs.append(h * base_x + 0.5 * (hi + lo))
        ws.append(h * base_w)
    x = np.concatenate(xs)
    w = np.concatenate(ws)
    regular = np.sum(w * (density(x) - g0) / (2.0 * x - e_real))
    analytic = 0.5 * g0 * math.log((2.0 * cutoff - e_real) / e_real)
    warnings.warn(
        f"pair energy {e_real:.6g} lies on the real contour; "
        "integral evaluated as a principal value",
        RuntimeWarning,
        stacklevel=3,
    )
    return regular + analytic


def integral_term(
    density: DensityTable,
    rule: QuadratureRule,
    pair_energy: complex,
    *,
    principal_value: bool = False,
):
    """int_0^Lambda g(e) / (2e - E) de by panel-wise Gauss-Legendre.

    The caller applies the leading G/2 factor. For real positive E inside the
    contour the integral is a principal value; it is evaluated (with a
    warning) only when `principal_value` is set, otherwise a ContourError is
    raised. Complex-valued tables integrate along the rotated contour their
    grid parametrizes.
    """
    pair_energy = complex(pair_energy)
    if _on_real_contour(pair_energy, rule.upper_cutoff):
        if abs(pair_energy.real) <= _CONTOUR_IMAG_TOL:
            raise ContourError("pair energy sits at the integration endpoint 0")
        if not principal_value:
            raise ContourError(
                f"pair energy {pair_energy:.6g} lies on the integration contour; "
                "request principal_value to evaluate"
            )
        return _principal_value_integral(density, rule, pair_energy.real)
    x, w = rule.nodes_weights
    return complex(_samples_integral(x, w, density(x), pair_energy))


def _integral_derivative(
    density: DensityTable,
    rule: QuadratureRule,
    pair_energy: complex,
) -> complex:
    """d/dE of the integral term: int g(e)/(2e - E)^2 de (finite differences on
    the principal-value branch)."""
    pair_energy = complex(pair_energy)
    if _on_real_contour(pair_energy, rule.upper_cutoff):
        h = 1e-7 * max(1.0, abs(pair_energy))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            hi = integral_term(density, rule, pair_energy + h, principal_value=True)
            lo = integral_term(density, rule, pair_energy - h, principal_value=True)
        return (hi - lo) / (2.0 * h)
    x, w = rule.nodes_weights
    return complex(np.sum(w * density(x) / (2.0 * x - pair_energy) ** 2))


def _density_terms(problem: ContinuumProblem) -> list[tuple[DensityTable, QuadratureRule]]:
    if problem.mode is ContinuumMode.REAL_CONTINUUM:
        return [(problem.base.background, problem.quadrature)]
    if problem.mode is ContinuumMode.COMPLEX_FULL:
        return [
            (problem.base.background, problem.quadrature),
            (problem.base.complex_background, problem.quadrature),
        ]
    return []


def _residual_mode(
    energies: np.ndarray,
    problem: ContinuumProblem,
    two_eps: np.ndarray,
    g: float,
    collision_tolerance: float,
    principal_value: bool,
) -> np.ndarray:
    check_admissible(energies, two_eps, collision_tolerance)
    res = _residual_core(energies, two_eps, g)
    for density, rule in _density_terms(problem):
        for nu in range(energies.size):
            res[nu] -= (
                0.5
                * g
                * integral_term(density, rule, energies[nu], principal_value=principal_value)
            )
    return res


def residual_continuum(
    energies,
    problem: ContinuumProblem,
    *,
    collision_tolerance: float = 1e-9,
    principal_value: bool = False,
) -> np.ndarray:
    """Residual of the real-continuum equations (bound sum + density integral)."""
    if problem.mode is not ContinuumMode.REAL_CONTINUUM:
        raise ValueError("residual_continuum requires real-continuum mode")
    energies = np.atleast_1d(np.asarray(energies, dtype=complex))
    return _residual_mode(
        energies,
        problem,
        problem.base.two_eps_discrete,
        problem.base.strength,
        collision_tolerance,
        principal_value,
    )


def residual_complex(
    energies,
    problem: ContinuumProblem,
    *,
    collision_tolerance: float = 1e-9,
    principal_value: bool = False,
) -> np.ndarray:
    """Residual of the complex-energy equations.

    Pole mode keeps only bound levels and resonance poles; full mode also
    subtracts the background and rotated-contour background integrals.
    """
    if problem.mode is ContinuumMode.REAL_CONTINUUM:
        raise ValueError("residual_complex requires a complex mode")
    energies = np.atleast_1d(np.asarray(energies, dtype=complex))
    return _residual_mode(
        energies,
        problem,
        problem.base.two_eps_all,
        problem.base.strength,
        collision_tolerance,
        principal_value,
    )


def _jacobian_mode(
    energies: np.ndarray,
    problem: ContinuumProblem,
    two_eps: np.ndarray,
    g: float,
) -> np.ndarray:
    jac = _jacobian_core(energies, two_eps, g)
    for density, rule in _density_terms(problem):
        for nu in range(energies.size):
            jac[nu, nu] -= 0.5 * g * _integral_derivative(density, rule, energies[nu])
    return jac


def solve_continuum(
    problem: ContinuumProblem,
    occupation=None,
    settings: SolverSettings | None = None,
    *,
    warm_start: tuple[float, np.ndarray] | None = None,
) -> PairSolution:
    """Continuation solve of the continuum or complex-energy equations.

    Occupation indices address the mode's seed states: bound + box levels in
    real-continuum mode, with resonance poles appended in the complex modes.
    Pair energies crossing the real contour are integrated as principal
    values (with a warning) to keep the iteration alive.
    """
    settings = settings if settings is not None else SolverSettings()
    base = problem.base
    # real-continuum mode forbids explicit resonances, so two_eps_all equals
    # two_eps_discrete there and the seed indexing is uniform across modes
    two_seed = problem.seed_states
    if base.pairs > two_seed.size:
        raise ValueError(
            f"{base.pairs} pairs exceed the {two_seed.size} seed states of this mode"
        )
    occ = (
        _validate_occupation(occupation, base.pairs, two_seed.size)
        if occupation is not None
        else np.asarray(ground_occupation(base), dtype=int)
    )
    two_residual = two_seed
    real_spectrum = problem.mode is ContinuumMode.REAL_CONTINUUM

    def residual_at(g: float):
        def fn(energies: np.ndarray) -> np.ndarray:
            return _residual_mode(
                energies,
                problem,
                two_residual,
                g,
                settings.collision_tolerance,
                True,
            )

        return fn

    def jacobian_at(g: float):
        return lambda energies: _jacobian_mode(energies, problem, two_residual, g)

    return _run_branch(
        base,
        residual_at,
        jacobian_at,
        two_seed[occ],
        settings,
        real_spectrum=real_spectrum,
        warm_start=warm_start,
        seeds=lambda g0: seed_g0(base, occ, g0=g0),
        real_poles=two_residual[np.abs(two_residual.imag) == 0.0].real,
    )
