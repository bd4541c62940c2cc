"""Single-particle model inputs: levels, resonances, and tabulated densities.

Energies are in abstract model units throughout. Every bound or box level and
every resonance stands for exactly one doubly degenerate pair state; spin
degeneracy factors live in the residual functions and in the density tables
(which carry the spin sum), never in these containers.

All types are immutable after construction and all functions are pure, so the
module is safe to use from multiple threads without synchronization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator


class DensityKind(Enum):
    BACKGROUND = "background"
    COMPLEX_BACKGROUND = "complex_background"


@dataclass(frozen=True)
class Level:
    """One doubly degenerate single-particle state (a single pair state)."""

    energy: float
    label: str

    def __post_init__(self):
        if not math.isfinite(self.energy):
            raise ValueError(f"level {self.label!r} has non-finite energy")


@dataclass(frozen=True)
class Resonance:
    """Single-particle resonance in the positive-energy continuum.

    The analytic continuation of its Lorentzian density has a pole at the
    complex energy ``position - 1j * width / 2``.
    """

    position: float
    width: float

    def __post_init__(self):
        if not (self.position > 0.0):
            raise ValueError("resonance position must be positive")
        if not (self.width > 0.0):
            raise ValueError("resonance width must be positive")

    @property
    def pole(self) -> complex:
        return self.position - 0.5j * self.width


@dataclass(frozen=True, eq=False)
class DensityTable:
    """Tabulated single-particle density on a strictly increasing positive grid.

    Values between grid points come from monotone piecewise-cubic (PCHIP)
    interpolation; outside the tabulated span the density evaluates to zero.
    Background tables are real and may be negative pointwise (difference
    densities carry no positivity guarantee); complex-background tables hold
    the rotated-contour remainder density and may be complex valued.
    """

    grid: np.ndarray
    values: np.ndarray
    kind: DensityKind = DensityKind.BACKGROUND

    def __post_init__(self):
        grid = np.atleast_1d(np.asarray(self.grid, dtype=float))
        if grid.ndim != 1 or grid.size < 2:
            raise ValueError("density grid needs at least two points")
        if grid[0] <= 0.0:
            raise ValueError("density grid entries must be positive")
        if not np.all(np.diff(grid) > 0.0):
            raise ValueError("density grid must be strictly increasing")
        values = np.atleast_1d(np.asarray(self.values))
        if self.kind is DensityKind.BACKGROUND:
            if np.iscomplexobj(values):
                if np.any(values.imag != 0.0):
                    raise ValueError("background density values must be real")
                values = values.real
            values = np.asarray(values, dtype=float)
        else:
            values = np.asarray(values, dtype=complex)
        if values.shape != grid.shape:
            raise ValueError("density grid and values must have matching length")
        if not np.all(np.isfinite(values)):
            raise ValueError("density values must be finite")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    @cached_property
    def _interpolants(self):
        if np.iscomplexobj(self.values):
            return (
                PchipInterpolator(self.grid, self.values.real, extrapolate=False),
                PchipInterpolator(self.grid, self.values.imag, extrapolate=False),
            )
        return (PchipInterpolator(self.grid, self.values, extrapolate=False), None)

    def __call__(self, energy):
        """Interpolated density at `energy` (scalar or array); zero off the span."""
        e = np.asarray(energy, dtype=float)
        re, im = self._interpolants
        out = np.nan_to_num(re(e), nan=0.0)
        if im is not None:
            out = out + 1j * np.nan_to_num(im(e), nan=0.0)
        if np.ndim(energy) == 0:
            return complex(out) if im is not None else float(out)
        return out

    @property
    def span(self) -> tuple[float, float]:
        return float(self.grid[0]), float(self.grid[-1])


@dataclass(frozen=True, eq=False)
class PairingProblem:
    """Full model specification for one pairing calculation.

    `strength` is the pairing coupling G >= 0 and `pairs` the number n of
    fermion pairs. Discrete pair states are ordered bound levels first, then
    box levels, then resonance poles; occupation indices refer to that order.
    """

    bound_levels: Sequence[Level]
    box_levels: Sequence[Level] = ()
    resonances: Sequence[Resonance] = ()
    background: DensityTable | None = None
    complex_background: DensityTable | None = None
    strength: float = 0.0
    pairs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "bound_levels", tuple(self.bound_levels))
        object.__setattr__(self, "box_levels", tuple(self.box_levels))
        object.__setattr__(self, "resonances", tuple(self.resonances))
        if self.strength < 0.0:
            raise ValueError("pairing strength must be nonnegative")
        if self.pairs < 1:
            raise ValueError("pair count must be a positive integer")
        labels = [lv.label for lv in self.bound_levels + self.box_levels]
        if len(set(labels)) != len(labels):
            raise ValueError("level labels must be unique within a spectrum")
        if self.background is not None and self.background.kind is not DensityKind.BACKGROUND:
            raise ValueError("background table must have kind BACKGROUND")
        if (
            self.complex_background is not None
            and self.complex_background.kind is not DensityKind.COMPLEX_BACKGROUND
        ):
            raise ValueError("complex background table must have kind COMPLEX_BACKGROUND")

    @property
    def discrete_levels(self) -> tuple[Level, ...]:
        return self.bound_levels + self.box_levels

    @property
    def two_eps_discrete(self) -> np.ndarray:
        """Doubled energies 2*eps of the real discrete pair states (bound + box)."""
        return np.array([2.0 * lv.energy for lv in self.discrete_levels], dtype=complex)

    @property
    def two_eps_poles(self) -> np.ndarray:
        """Doubled complex pole energies 2*(eps_r - i Gamma_r / 2)."""
        return np.array([2.0 * r.pole for r in self.resonances], dtype=complex)

    @property
    def two_eps_all(self) -> np.ndarray:
        """All discrete pair states in occupation order: bound, box, poles."""
        return np.concatenate([self.two_eps_discrete, self.two_eps_poles])

    @property
    def energy_scale(self) -> float:
        """Characteristic |2*eps| magnitude used for tolerances and cutoffs."""
        scale = 1.0
        two = self.two_eps_all
        if two.size:
            scale = max(scale, float(np.max(np.abs(two))))
        for table in (self.background, self.complex_background):
            if table is not None:
                scale = max(scale, 2.0 * table.span[1])
        return scale


def box_spectrum(radius: float, count: int, mass_scale: float = 1.0) -> list[Level]:
    """s-wave levels of a free particle in a spherical box of the given radius.

    eps_k = mass_scale * (k*pi/radius)**2 for k = 1..count, strictly
    increasing; `mass_scale` is the hbar^2/2m prefactor in the chosen units.
    """
    if not (radius > 0.0):
        raise ValueError("box radius must be positive")
    if count < 1:
        raise ValueError("box level count must be at least 1")
    if not (mass_scale > 0.0):
        raise ValueError("mass scale must be positive")
    return [
        Level(mass_scale * (k * math.pi / radius) ** 2, f"box{k}")
        for k in range(1, count + 1)
    ]


def lorentzian_density(resonances: Sequence[Resonance], energy):
    """Resonant part of the level density, one unit-area Lorentzian per pair state.

    g_res(e) = sum_r (1/pi) * (Gamma_r/2) / ((e - eps_r)**2 + (Gamma_r/2)**2).
    Degeneracy beyond one pair state per resonance is the caller's business.
    """
    e = np.asarray(energy, dtype=float)
    out = np.zeros_like(e)
    for r in resonances:
        half = 0.5 * r.width
        out = out + (half / math.pi) / ((e - r.position) ** 2 + half * half)
    if np.ndim(energy) == 0:
        return float(out)
    return out


def split_density(total: DensityTable, resonances: Sequence[Resonance]) -> DensityTable:
    """Background table: the full density minus its Lorentzian resonant part.

    The result is a difference density evaluated pointwise on the input grid
    and may be negative.
    """
    if total.kind is not DensityKind.BACKGROUND:
        raise ValueError("split_density expects a real background-kind table")
    remainder = total.values - lorentzian_density(resonances, total.grid)
    return DensityTable(total.grid, remainder, DensityKind.BACKGROUND)


def box_level_histogram(
    levels: Sequence[Level],
    *,
    area: float = 2.0,
    width_fraction: float = 0.25,
    span_sigmas: float = 8.0,
    points_per_sigma: int = 6,
    base_points: int = 200,
) -> DensityTable:
    """Smeared histogram density for a quasi-continuum of box levels.

    Each level becomes a normalized Gaussian of the given area (2 covers the
    spin sum) with sigma = width_fraction times the local level spacing. The
    grid clusters points around every spike so that quadrature panels resolve
    them. Realizes the sum-to-integral substitution at testable scale.
    """
    if not levels:
        raise ValueError("histogram needs at least one level")
    eps = np.sort(np.array([lv.energy for lv in levels], dtype=float))
    if eps[0] <= 0.0:
        raise ValueError("histogram levels must have positive energy")
    gaps = np.diff(eps)
    if eps.size == 1:
        local = np.array([eps[0]])
    else:
        local = np.empty_like(eps)
        local[0] = gaps[0]
        local[-1] = gaps[-1]
        if eps.size > 2:
            local[1:-1] = np.minimum(gaps[:-1], gaps[1:])
    sigma = width_fraction * local

    floor = eps[0] * 1e-3
    pieces = [
        np.linspace(floor, eps[-1] + span_sigmas * sigma[-1], base_points),
        np.linspace(floor, eps[0], max(16, points_per_sigma * 4)),
    ]
    n_local = max(5, int(2 * span_sigmas * points_per_sigma) + 1)
    for e_k, s_k in zip(eps, sigma):
        pieces.append(np.linspace(e_k - span_sigmas * s_k, e_k + span_sigmas * s_k, n_local))
    grid = np.unique(np.concatenate(pieces))
    grid = grid[grid > 0.0]

    values = np.zeros_like(grid)
    for e_k, s_k in zip(eps, sigma):
        # renormalize over (0, inf) so spikes clipped at zero keep their area
        positive_mass = 0.5 * (1.0 + math.erf(e_k / (s_k * math.sqrt(2.0))))
        amplitude = area / (s_k * math.sqrt(2.0 * math.pi) * positive_mass)
        values += amplitude * np.exp(-0.5 * ((grid - e_k) / s_k) ** 2)
    return DensityTable(grid, values, DensityKind.BACKGROUND)
