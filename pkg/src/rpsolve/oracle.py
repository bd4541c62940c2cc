"""Brute-force exact diagonalization of the pairing Hamiltonian in the
seniority-zero configuration space.

The Hamiltonian H = sum_j 2 eps_j b+_j b_j - G B+ B acts on n-pair
configurations (n-subsets of the L doubly degenerate levels) as

    <S|H|S>   = sum_{j in S} 2 eps_j - G n,
    <S'|H|S>  = -G   when S' differs from S by moving exactly one pair,

and zero otherwise; the (b+_j)^2 = 0 exclusion removes every other term.
This module is deliberately boring: dense matrices, cyclic Jacobi rotations,
no iterative shortcuts. It provides ground truth for the nonlinear solver.

All functions are pure; concurrent oracle runs are safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .errors import CapacityError
from .richardson import PairSolution
from .spectrum import Level

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda fn: fn


MAX_LEVELS = 24
MAX_BASIS = 500_000
MAX_EIGEN_DIM = 3000


@dataclass(frozen=True)
class ConfigBasis:
    """Lexicographic enumeration of the n-of-L seniority-zero configurations."""

    level_count: int
    pair_count: int
    configs: tuple[tuple[int, ...], ...]

    @property
    def dimension(self) -> int:
        return len(self.configs)


@dataclass(frozen=True)
class ComparisonReport:
    """Outcome of matching a solver total against oracle eigenvalues."""

    solver_total: complex
    nearest: float
    gap: float
    tolerance: float
    imaginary_leak: float
    passed: bool
    message: str


def build_basis(level_count: int, pair_count: int) -> ConfigBasis:
    """All n-subsets of {0..L-1} in lexicographic order."""
    if not (0 <= pair_count <= level_count):
        raise ValueError("pair count must satisfy 0 <= n <= L")
    if level_count > MAX_LEVELS:
        raise CapacityError(f"level count {level_count} exceeds the cap of {MAX_LEVELS}")
    size = math.comb(level_count, pair_count)
    if size > MAX_BASIS:
        raise CapacityError(f"basis size {size} exceeds the cap of {MAX_BASIS}")
    return ConfigBasis(
        level_count=level_count,
        pair_count=pair_count,
        configs=tuple(combinations(range(level_count), pair_count)),
    )


def build_hamiltonian(basis: ConfigBasis, levels: Sequence[Level], strength: float) -> np.ndarray:
    """Dense symmetric matrix of the pairing Hamiltonian on the given basis."""
    if len(levels) != basis.level_count:
        raise ValueError("level list length must match the basis level count")
    raw = np.asarray([lv.energy for lv in levels])
    if np.iscomplexobj(raw):
        raise ValueError("oracle levels must be real")
    energies = raw.astype(float)
    dim = basis.dimension
    if dim > MAX_EIGEN_DIM:
        raise CapacityError(f"matrix dimension {dim} exceeds the cap of {MAX_EIGEN_DIM}")
    index = {config: i for i, config in enumerate(basis.configs)}
    n = basis.pair_count
    matrix = np.zeros((dim, dim), dtype=float)
    for a, config in enumerate(basis.configs):
        matrix[a, a] = 2.0 * energies[list(config)].sum() - strength * n
        occupied = set(config)
        for j in config:
            for j_new in range(basis.level_count):
                if j_new in occupied:
                    continue
                moved = tuple(sorted(occupied - {j} | {j_new}))
                b = index[moved]
                matrix[b, a] = -strength
    return matrix


def _jacobi_sweeps_impl(a, tol, max_sweeps):  # pragma: no cover - jitted
    d = a.shape[0]
    for sweep in range(max_sweeps):
        off = 0.0
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = abs(a[p, q])
                if apq > off:
                    off = apq
        if off < tol:
            return sweep
        skip = 0.01 * tol
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                if abs(apq) <= skip:
                    continue
                theta = 0.5 * (a[q, q] - a[p, p]) / apq
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                for k in range(d):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(d):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
    return -1


_jacobi_sweeps = njit(cache=True)(_jacobi_sweeps_impl)


def lowest_eigenvalues(matrix: np.ndarray, k: int, *, tolerance: float = 1e-12) -> np.ndarray:
    """k smallest eigenvalues via cyclic Jacobi rotations, ascending.

    Rotations sweep until the largest off-diagonal magnitude drops below
    `tolerance`.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError("matrix must be square")
    dim = matrix.shape[0]
    if not (1 <= k <= dim):
        raise ValueError("k must satisfy 1 <= k <= dimension")
    if dim > MAX_EIGEN_DIM:
        raise CapacityError(f"matrix dimension {dim} exceeds the cap of {MAX_EIGEN_DIM}")
    if not np.allclose(matrix, matrix.T, atol=1e-12 * max(1.0, float(np.abs(matrix).max()))):
        raise ValueError("matrix must be symmetric")
    work = np.ascontiguousarray(matrix.copy())
    sweeps = _jacobi_sweeps(work, tolerance, 100)
    if sweeps < 0:
        raise RuntimeError("Jacobi iteration failed to converge within 100 sweeps")
    return np.sort(np.diag(work))[:k]


def compare(
    solution: PairSolution,
    oracle_values: Sequence[float],
    *,
    tolerance: float = 1e-8,
    ground: bool = False,
) -> ComparisonReport:
    """Match a solver total against oracle eigenvalues.

    With `ground=True` the total is held against the lowest eigenvalue;
    otherwise against the nearest one. An imaginary part of the total beyond
    tolerance fails the comparison regardless of the gap.
    """
    values = np.sort(np.asarray(oracle_values, dtype=float))
    if values.size == 0:
        raise ValueError("oracle_values must be nonempty")
    total = complex(solution.total)
    leak = abs(total.imag)
    if ground:
        nearest = float(values[0])
    else:
        nearest = float(values[np.argmin(np.abs(values - total.real))])
    gap = abs(total.real - nearest)
    if leak > tolerance:
        return ComparisonReport(
            solver_total=total,
            nearest=nearest,
            gap=gap,
            tolerance=tolerance,
            imaginary_leak=leak,
            passed=False,
            message=f"imaginary-part leak |Im total| = {leak:.3e} exceeds tolerance",
        )
    passed = gap <= tolerance
    message = "match" if passed else f"gap {gap:.3e} exceeds tolerance {tolerance:.1e}"
    return ComparisonReport(
        solver_total=total,
        nearest=nearest,
        gap=gap,
        tolerance=tolerance,
        imaginary_leak=leak,
        passed=passed,
        message=message,
    )
