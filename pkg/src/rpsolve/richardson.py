"""Residuals, Jacobians, and the continuation Newton solver for the discrete
Richardson equations.

For n pairs the discrete equations read, one component per pair energy E_nu,

    1 - sum_j G / (2 eps_j - E_nu) - sum_{nu' != nu} 2G / (E_nu - E_nu') = 0,

where j runs over the discrete pair states: bound plus box levels and, when
resonances are part of the model (pole approximation), the complex poles
2*(eps_r - i Gamma_r / 2). The many-body eigenenergy is the sum of the
converged pair energies.

Solver strategy: homotopy continuation in the strength G from the analytic
G -> 0 configuration E_nu = 2 eps_{j_nu}, with adaptive step control (halve on
failure, double on success) and a damped Newton iteration at every step. Two
pair energies that merge on the real axis as G grows are promoted to a
complex-conjugate pair and the step is retried.

Solver state is confined to each call; distinct solves may run concurrently.
Results are deterministic for fixed settings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import CollisionError, NonconvergenceError, SingularityError
from .spectrum import PairingProblem

DEFAULT_COLLISION_TOL = 1e-9

_REL_G_EPS = 1e-14  # continuation target reached when within this relative gap


@dataclass(frozen=True)
class SolverSettings:
    """Tolerances and step control for the continuation solver.

    `initial_g_step` defaults to strength/100 and `min_g_step` to
    strength*1e-8 when left unset; both are resolved at solve time.
    `seed_offsets`, when given, must hold one complex perturbation per pair
    and is added to the G -> 0 seeds (useful to steer degenerate branches).
    """

    newton_tolerance: float = 1e-12
    max_newton_iterations: int = 50
    initial_g_step: float | None = None
    min_g_step: float | None = None
    collision_tolerance: float = DEFAULT_COLLISION_TOL
    seed_offsets: tuple[complex, ...] | None = None

    def __post_init__(self):
        if not (self.newton_tolerance > 0.0):
            raise ValueError("newton_tolerance must be positive")
        if self.max_newton_iterations < 1:
            raise ValueError("max_newton_iterations must be positive")
        for name in ("initial_g_step", "min_g_step"):
            value = getattr(self, name)
            if value is not None and not (value > 0.0):
                raise ValueError(f"{name} must be positive when given")
        if (
            self.initial_g_step is not None
            and self.min_g_step is not None
            and self.min_g_step > self.initial_g_step
        ):
            raise ValueError("min_g_step must not exceed initial_g_step")
        if not (self.collision_tolerance > 0.0):
            raise ValueError("collision_tolerance must be positive")
        if self.seed_offsets is not None:
            object.__setattr__(self, "seed_offsets", tuple(complex(z) for z in self.seed_offsets))

    def resolved_initial_step(self, strength: float) -> float:
        if self.initial_g_step is not None:
            return self.initial_g_step
        return strength / 100.0

    def resolved_min_step(self, strength: float) -> float:
        if self.min_g_step is not None:
            return self.min_g_step
        return strength * 1e-8


@dataclass(frozen=True, eq=False)
class PairSolution:
    """Converged pair energies of one occupation branch.

    `total` is the conjugate-symmetrized sum of `energies` (see
    `total_energy`); `iterations` counts Newton iterations over the whole
    continuation and `continuation_steps` the accepted strength steps.
    """

    energies: np.ndarray
    residual_norm: float
    total: complex
    iterations: int
    continuation_steps: int

    def __post_init__(self):
        energies = np.array(self.energies, dtype=complex)
        energies.setflags(write=False)
        object.__setattr__(self, "energies", energies)


@dataclass(frozen=True)
class IdentityReport:
    """Outcome of the randomized summation-identity checks."""

    trials: int
    double_sum_failures: int
    partial_fraction_failures: int
    max_double_sum_error: float
    max_partial_fraction_error: float

    @property
    def passed(self) -> bool:
        return self.double_sum_failures == 0 and self.partial_fraction_failures == 0


def _as_energies(energies) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(energies, dtype=complex))
    if arr.ndim != 1:
        raise ValueError("pair energies must form a one-dimensional sequence")
    return arr


def check_admissible(energies: np.ndarray, two_eps: np.ndarray, collision_tolerance: float) -> None:
    """Raise SingularityError if any pair energy sits on a pole of the equations."""
    if two_eps.size:
        dist = np.abs(two_eps[None, :] - energies[:, None])
        hits = np.argwhere(dist < collision_tolerance)
        if hits.size:
            i, j = hits[0]
            raise SingularityError(
                f"pair energy E[{i}]={energies[i]:.9g} collides with pair state "
                f"2eps[{j}]={two_eps[j]:.9g}"
            )
    n = energies.size
    if n > 1:
        gap = np.abs(energies[:, None] - energies[None, :])
        gap[np.diag_indices(n)] = np.inf
        hits = np.argwhere(gap < collision_tolerance)
        if hits.size:
            i, j = hits[0]
            raise SingularityError(
                f"pair energies E[{i}]={energies[i]:.9g} and E[{j}]={energies[j]:.9g} collide"
            )


def _residual_core(energies: np.ndarray, two_eps: np.ndarray, g: float) -> np.ndarray:
    r = np.ones(energies.size, dtype=complex)
    if two_eps.size:
        r = r - g * np.sum(1.0 / (two_eps[None, :] - energies[:, None]), axis=1)
    n = energies.size
    if n > 1:
        diff = energies[:, None] - energies[None, :]
        inv = np.zeros_like(diff)
        off = ~np.eye(n, dtype=bool)
        inv[off] = 1.0 / diff[off]
        r = r - 2.0 * g * np.sum(inv, axis=1)
    return r


def _jacobian_core(energies: np.ndarray, two_eps: np.ndarray, g: float) -> np.ndarray:
    n = energies.size
    jac = np.zeros((n, n), dtype=complex)
    if two_eps.size:
        diff_lvl = two_eps[None, :] - energies[:, None]
        jac[np.diag_indices(n)] = -g * np.sum(diff_lvl**-2, axis=1)
    if n > 1:
        diff = energies[:, None] - energies[None, :]
        inv2 = np.zeros_like(diff)
        off = ~np.eye(n, dtype=bool)
        inv2[off] = diff[off] ** -2
        jac -= 2.0 * g * inv2
        jac[np.diag_indices(n)] += 2.0 * g * np.sum(inv2, axis=1)
    return jac


def residual_discrete(
    energies,
    problem: PairingProblem,
    *,
    collision_tolerance: float = DEFAULT_COLLISION_TOL,
) -> np.ndarray:
    """Residual components of the discrete equations at the given pair energies.

    Component nu is 1 - sum_j G/(2 eps_j - E_nu) - sum_{nu'!=nu} 2G/(E_nu - E_nu'),
    with j over bound + box levels and resonance poles when present.
    """
    energies = _as_energies(energies)
    two_eps = problem.two_eps_all
    check_admissible(energies, two_eps, collision_tolerance)
    return _residual_core(energies, two_eps, problem.strength)


def jacobian_discrete(
    energies,
    problem: PairingProblem,
    *,
    collision_tolerance: float = DEFAULT_COLLISION_TOL,
) -> np.ndarray:
    """Analytic Jacobian of `residual_discrete` with respect to the pair energies."""
    energies = _as_energies(energies)
    two_eps = problem.two_eps_all
    check_admissible(energies, two_eps, collision_tolerance)
    return _jacobian_core(energies, two_eps, problem.strength)


def ground_occupation(problem: PairingProblem, count: int | None = None) -> list[int]:
    """Indices of the n lowest pair states (by real part), the ground-state seed."""
    n = problem.pairs if count is None else count
    two = problem.two_eps_all
    order = np.argsort(two.real, kind="stable")
    return [int(i) for i in order[:n]]


def _validate_occupation(occupation, pairs: int, available: int) -> np.ndarray:
    occ = np.asarray(list(occupation), dtype=int)
    if occ.size != pairs:
        raise ValueError(f"occupation must list exactly {pairs} pair-state indices")
    if len(set(occ.tolist())) != occ.size:
        raise ValueError("occupation indices must be distinct")
    if occ.size and (occ.min() < 0 or occ.max() >= available):
        raise ValueError(f"occupation indices must lie in [0, {available})")
    return occ


def seed_g0(problem: PairingProblem, occupation, g0: float | None = None) -> np.ndarray:
    """Seeds E_nu = 2 eps_{j_nu} - g0 for the first continuation step.

    Occupied states sharing an identical level energy get additional conjugate
    imaginary offsets (+-i g0/4, +-i g0/2, ...) so the seeds stay pairwise
    distinct.
    """
    two = problem.two_eps_all
    occ = _validate_occupation(occupation, problem.pairs, two.size)
    if g0 is None:
        g0 = min(
            SolverSettings().resolved_initial_step(problem.strength),
            problem.strength,
        )
    seeds = two[occ] - g0

    groups: dict[complex, list[int]] = {}
    for pos, idx in enumerate(occ):
        groups.setdefault(complex(two[idx]), []).append(pos)
    for members in groups.values():
        if len(members) < 2:
            continue
        for k, pos in enumerate(members):
            sign = 1.0 if k % 2 == 0 else -1.0
            seeds[pos] += 1j * sign * (k // 2 + 1) * (g0 / 4.0)
    return seeds


def total_energy(energies, *, pairing_tolerance: float | None = None) -> complex:
    """Sum of pair energies with conjugate-pair symmetrization.

    Energies forming complex-conjugate pairs within tolerance contribute
    exactly twice their mean real part, and near-real values contribute their
    real part, so conjugation-closed multisets sum to a strictly real value.
    Unpaired complex energies (complex-energy spectra) are added as they are.
    """
    arr = np.asarray(energies, dtype=complex).ravel()
    if arr.size == 0:
        return 0.0 + 0.0j
    scale = max(1.0, float(np.max(np.abs(arr))))
    tol = pairing_tolerance if pairing_tolerance is not None else 1e-10 * scale

    total = 0.0 + 0.0j
    plus = [i for i in range(arr.size) if arr[i].imag > tol]
    minus = [i for i in range(arr.size) if arr[i].imag < -tol]
    matched: set[int] = set()
    for i in plus:
        best_j, best_gap = -1, np.inf
        for j in minus:
            if j in matched:
                continue
            gap = abs(arr[i] - np.conj(arr[j]))
            if gap < best_gap:
                best_j, best_gap = j, gap
        if best_j >= 0 and best_gap <= 2.0 * tol:
            matched.add(i)
            matched.add(best_j)
            total += arr[i].real + arr[best_j].real
    for i in range(arr.size):
        if i in matched:
            continue
        if abs(arr[i].imag) <= tol:
            total += arr[i].real
        else:
            total += arr[i]
    return complex(total)


# --------------------------------------------------------------------------
# Damped Newton iteration and continuation driver (shared with the continuum
# solvers).

ResidualFn = Callable[[np.ndarray], np.ndarray]
JacobianFn = Callable[[np.ndarray], np.ndarray]


class _NewtonStall(Exception):
    def __init__(self, iterate: np.ndarray, norm: float, iterations: int):
        self.iterate = iterate
        self.norm = norm
        self.iterations = iterations


def _inf_norm(vec: np.ndarray) -> float:
    return float(np.max(np.abs(vec))) if vec.size else 0.0


def _damped_newton(
    residual: ResidualFn,
    jacobian: JacobianFn,
    start: np.ndarray,
    settings: SolverSettings,
) -> tuple[np.ndarray, float, int]:
    """Newton iteration with step-halving line search on the residual inf-norm."""
    energies = np.array(start, dtype=complex)
    try:
        res = residual(energies)
    except SingularityError:
        raise _NewtonStall(energies, math.inf, 0)
    norm = _inf_norm(res)
    for iteration in range(settings.max_newton_iterations):
        if norm < settings.newton_tolerance:
            return energies, norm, iteration
        jac = jacobian(energies)
        try:
            step = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError:
            raise _NewtonStall(energies, norm, iteration)
        # near the zero-strength limit the Jacobian grows like 1/g and the
        # attainable residual is floored by the spacing of representable
        # energies; accept the iterate once Newton can no longer move it
        if _inf_norm(step) <= 4.0 * np.finfo(float).eps * max(1.0, _inf_norm(energies)):
            return energies, norm, iteration
        scale = 1.0
        for _ in range(45):
            trial = energies + scale * step
            try:
                trial_res = residual(trial)
            except SingularityError:
                scale *= 0.5
                continue
            trial_norm = _inf_norm(trial_res)
            if trial_norm < norm or trial_norm < settings.newton_tolerance:
                energies, res, norm = trial, trial_res, trial_norm
                break
            scale *= 0.5
        else:
            raise _NewtonStall(energies, norm, iteration + 1)
    if norm < settings.newton_tolerance:
        return energies, norm, settings.max_newton_iterations
    raise _NewtonStall(energies, norm, settings.max_newton_iterations)


def _closest_pair(energies: np.ndarray) -> tuple[int, int, float]:
    n = energies.size
    gap = np.abs(energies[:, None] - energies[None, :])
    gap[np.diag_indices(n)] = np.inf
    i, j = np.unravel_index(np.argmin(gap), gap.shape)
    return int(i), int(j), float(gap[i, j])


def _promotion_candidates(
    energies: np.ndarray, step: float, scale: float, collision_tol: float
) -> list[np.ndarray]:
    """Conjugate-pair (and real-split) retry seeds for the closest pair of energies."""
    if energies.size < 2:
        return []
    i, j, gap = _closest_pair(energies)
    if not math.isfinite(gap) or gap > 0.05 * scale:
        return []
    mean = 0.5 * (energies[i] + energies[j])
    floor = 1e3 * collision_tol
    deltas: list[float] = []
    for delta in (
        max(step, gap),
        math.sqrt(max(step, 1e-300) * scale),
        10.0 * step,
    ):
        delta = max(delta, floor)
        if all(abs(delta - d) > 0.25 * delta for d in deltas):
            deltas.append(delta)
    candidates = []
    for delta in deltas:  # complex merge: split off the real axis
        promoted = energies.copy()
        promoted[i] = mean + 1j * delta
        promoted[j] = mean - 1j * delta
        candidates.append(promoted)
    for delta in deltas:  # real re-split: land back on the real axis
        promoted = energies.copy()
        promoted[i] = mean + delta
        promoted[j] = mean - delta
        candidates.append(promoted)
    return candidates


def _branch_jump(
    old: np.ndarray, new: np.ndarray, real_poles: np.ndarray, scale: float
) -> bool:
    """Detect a real root hopping across a real pole between two accepted steps.

    A continuously tracked real root cannot cross a pole of the equations (the
    residual diverges there); real roots leave the axis only by pairwise
    collision. So if the number of real roots is unchanged, the count of real
    roots below every real pole must be unchanged too; any difference means
    the Newton iteration jumped onto a different branch.
    """
    if real_poles.size == 0:
        return False
    tol = 1e-9 * scale
    real_old = old[np.abs(old.imag) <= tol].real
    real_new = new[np.abs(new.imag) <= tol].real
    if real_old.size != real_new.size:
        return False
    for pole in real_poles:
        if np.sum(real_old < pole) != np.sum(real_new < pole):
            return True
    return False


def _symmetrize_conjugate(energies: np.ndarray, scale: float) -> np.ndarray:
    """Project a nearly conjugation-closed multiset onto exact closure."""
    atol = 1e-13 * scale
    pair_tol = 1e-7 * scale
    out = energies.copy()
    plus = [i for i in range(out.size) if out[i].imag > atol]
    minus = [i for i in range(out.size) if out[i].imag < -atol]
    used: set[int] = set()
    for i in plus:
        best_j, best_gap = -1, np.inf
        for j in minus:
            if j in used:
                continue
            gap = abs(out[i] - np.conj(out[j]))
            if gap < best_gap:
                best_j, best_gap = j, gap
        if best_j >= 0 and best_gap <= pair_tol:
            used.add(best_j)
            mean_re = 0.5 * (out[i].real + out[best_j].real)
            mean_im = 0.5 * (out[i].imag - out[best_j].imag)
            out[i] = mean_re + 1j * mean_im
            out[best_j] = mean_re - 1j * mean_im
    for i in range(out.size):
        if abs(out[i].imag) <= atol:
            out[i] = out[i].real
    return out


def _continue_in_strength(
    residual_at: Callable[[float], ResidualFn],
    jacobian_at: Callable[[float], JacobianFn],
    start: np.ndarray,
    g_start: float,
    g_target: float,
    first_step: float,
    settings: SolverSettings,
    *,
    real_spectrum: bool,
    scale: float,
    real_poles: np.ndarray | None = None,
) -> tuple[np.ndarray, float, int, int]:
    """Adaptive continuation in the strength from (g_start, start) to g_target."""
    energies = np.array(start, dtype=complex)
    g = g_start
    span = g_target - g_start
    step = min(first_step, span)
    min_step = max(settings.resolved_min_step(g_target), 1e-300)
    total_iterations = 0
    steps_taken = 0
    norm = math.nan
    if real_poles is None:
        real_poles = np.empty(0)

    while (g_target - g) > _REL_G_EPS * max(abs(g_target), 1.0):
        g_try = g_target if (g_target - g) <= step else g + step
        residual = residual_at(g_try)
        jacobian = jacobian_at(g_try)
        result = None
        stall: _NewtonStall | None = None
        try:
            result = _damped_newton(residual, jacobian, energies, settings)
        except _NewtonStall as exc:
            stall = exc
            for candidate_base in (exc.iterate, energies):
                for candidate in _promotion_candidates(
                    candidate_base, step, scale, settings.collision_tolerance
                ):
                    try:
                        result = _damped_newton(residual, jacobian, candidate, settings)
                    except _NewtonStall:
                        continue
                    break
                if result is not None:
                    break
        if result is not None and _branch_jump(energies, result[0], real_poles, scale):
            # Newton converged onto a different branch; reject the step
            # rather than accept the foreign root
            result = None
        if result is not None:
            new_energies, norm, iterations = result
            if real_spectrum:
                symmetric = _symmetrize_conjugate(new_energies, scale)
                if not np.array_equal(symmetric, new_energies):
                    try:
                        sym_norm = _inf_norm(residual(symmetric))
                    except SingularityError:
                        sym_norm = math.inf
                    if sym_norm < settings.newton_tolerance:
                        new_energies, norm = symmetric, sym_norm
            energies = new_energies
            g = g_try
            steps_taken += 1
            total_iterations += iterations
            step = min(2.0 * step, max(g_target - g, step))
        else:
            step *= 0.5
            if step < min_step:
                hint = stall.iterate if stall is not None else energies
                if hint.size >= 2:
                    i, j, gap = _closest_pair(hint)
                    if gap < 1e-3 * scale:
                        raise CollisionError(
                            f"unresolved pair-energy collision between E[{i}] and E[{j}] "
                            f"(gap {gap:.3g}) near strength {g_try:.9g}; "
                            f"last converged strength {g:.9g}",
                            last_good_g=g,
                        )
                raise NonconvergenceError(
                    f"continuation stalled at strength {g_try:.9g} "
                    f"(step underflow below {min_step:.3g}); "
                    f"last converged strength {g:.9g}",
                    last_good_g=g,
                )
    return energies, float(norm), total_iterations, steps_taken


def _limit_solution(two_occupied: np.ndarray) -> PairSolution:
    energies = np.array(two_occupied, dtype=complex)
    return PairSolution(
        energies=energies,
        residual_norm=0.0,
        total=total_energy(energies),
        iterations=0,
        continuation_steps=0,
    )


def solve_discrete(
    problem: PairingProblem,
    occupation=None,
    settings: SolverSettings | None = None,
    *,
    warm_start: tuple[float, np.ndarray] | None = None,
) -> PairSolution:
    """Solve the discrete equations for one occupation branch.

    `occupation` lists the pair-state indices (bound, then box, then resonance
    poles) filled at zero strength and labels the branch being continued; None
    selects the ground configuration (the n lowest states). `warm_start`
    continues from an already converged (strength, energies) point instead of
    restarting from zero strength.

    At zero strength the equations have no finite root; the returned energies
    are the analytic limit E_nu = 2 eps_{j_nu} of the branch with a residual
    norm reported as zero.
    """
    settings = settings if settings is not None else SolverSettings()
    if problem.background is not None or problem.complex_background is not None:
        raise ValueError("solve_discrete requires a problem without density tables")
    two = problem.two_eps_all
    if problem.pairs > two.size:
        raise ValueError(
            f"{problem.pairs} pairs exceed the {two.size} available discrete pair states"
        )
    occ = (
        _validate_occupation(occupation, problem.pairs, two.size)
        if occupation is not None
        else np.asarray(ground_occupation(problem), dtype=int)
    )
    real_spectrum = len(problem.resonances) == 0

    def residual_at(g: float) -> ResidualFn:
        def fn(energies: np.ndarray) -> np.ndarray:
            check_admissible(energies, two, settings.collision_tolerance)
            return _residual_core(energies, two, g)

        return fn

    def jacobian_at(g: float) -> JacobianFn:
        return lambda energies: _jacobian_core(energies, two, g)

    return _run_branch(
        problem,
        residual_at,
        jacobian_at,
        two[occ],
        settings,
        real_spectrum=real_spectrum,
        warm_start=warm_start,
        seeds=lambda g0: seed_g0(problem, occ, g0=g0),
        real_poles=two[np.abs(two.imag) == 0.0].real,
    )


def _run_branch(
    problem: PairingProblem,
    residual_at: Callable[[float], ResidualFn],
    jacobian_at: Callable[[float], JacobianFn],
    two_occupied: np.ndarray,
    settings: SolverSettings,
    *,
    real_spectrum: bool,
    warm_start: tuple[float, np.ndarray] | None,
    seeds: Callable[[float], np.ndarray],
    real_poles: np.ndarray | None = None,
) -> PairSolution:
    """Shared branch driver for the discrete and continuum solvers."""
    g_target = problem.strength
    scale = problem.energy_scale

    if warm_start is not None:
        g_start, start = float(warm_start[0]), np.asarray(warm_start[1], dtype=complex)
        if g_target <= g_start:
            raise ValueError("warm start requires a strength below the target")
        first_step = g_target - g_start
        if g_start == 0.0:
            # the zero-strength limit sits on the poles; reseed just off them
            first_step = min(settings.resolved_initial_step(g_target), g_target)
            start = seeds(first_step)
    else:
        if g_target == 0.0:
            return _limit_solution(two_occupied)
        g_start = 0.0
        first_step = min(settings.resolved_initial_step(g_target), g_target)
        start = seeds(first_step)

    if settings.seed_offsets is not None and warm_start is None:
        if len(settings.seed_offsets) != start.size:
            raise ValueError("seed_offsets must provide one value per pair")
        start = start + np.asarray(settings.seed_offsets, dtype=complex)

    energies, norm, iterations, steps = _continue_in_strength(
        residual_at,
        jacobian_at,
        start,
        g_start,
        g_target,
        first_step,
        settings,
        real_spectrum=real_spectrum,
        scale=scale,
        real_poles=real_poles,
    )
    return PairSolution(
        energies=energies,
        residual_norm=norm,
        total=total_energy(energies),
        iterations=iterations,
        continuation_steps=steps,
    )


def verify_identities(
    trials: int = 1000,
    *,
    max_size: int = 6,
    seed: int = 0,
    tolerance: float = 1e-12,
) -> IdentityReport:
    """Randomized numeric check of the two summation identities the equations rest on.

    (i) Upper-triangle double-sum relabelling
        sum_i sum_{j>i} a_ij == sum_j sum_{i<j} a_ij,
    checked for exact equality (both sides accumulated with math.fsum, whose
    correctly rounded result is order independent).

    (ii) Two-pole partial fractions
        1/((x-a)(x-b)) == (1/(a-b)) * (1/(x-a) - 1/(x-b)),
    checked to the given relative tolerance on random complex triples.
    """
    rng = np.random.default_rng(seed)
    double_sum_failures = 0
    partial_failures = 0
    max_double = 0.0
    max_partial = 0.0
    for _ in range(trials):
        m = int(rng.integers(2, max_size + 1))
        a = rng.standard_normal((m, m))
        lhs = math.fsum(a[i, j] for i in range(m) for j in range(i + 1, m))
        rhs = math.fsum(a[i, j] for j in range(m) for i in range(j))
        err = abs(lhs - rhs)
        max_double = max(max_double, err)
        if err != 0.0:
            double_sum_failures += 1

        while True:
            za, zb, zx = (
                complex(*pair) for pair in rng.standard_normal((3, 2))
            )
            if min(abs(za - zb), abs(zx - za), abs(zx - zb)) > 1e-3:
                break
        lhs_pf = 1.0 / ((zx - za) * (zx - zb))
        rhs_pf = (1.0 / (za - zb)) * (1.0 / (zx - za) - 1.0 / (zx - zb))
        rel = abs(lhs_pf - rhs_pf) / abs(lhs_pf)
        max_partial = max(max_partial, rel)
        if rel > tolerance:
            partial_failures += 1
    return IdentityReport(
        trials=trials,
        double_sum_failures=double_sum_failures,
        partial_fraction_failures=partial_failures,
        max_double_sum_error=max_double,
        max_partial_fraction_error=max_partial,
    )
