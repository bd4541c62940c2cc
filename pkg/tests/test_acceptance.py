"""Acceptance gate: every criterion below must pass at its stated tolerance.

Each test prints one PASS line (pytest reports the failure otherwise) so a
verbose run doubles as the acceptance report:

    pytest tests/test_acceptance.py -v -s
"""

import json
import math
import time

import numpy as np
import pytest

from rpsolve.cli import main as cli_main
from rpsolve.continuum import (
    ContinuumMode,
    ContinuumProblem,
    QuadratureRule,
    integral_term,
    make_quadrature,
    residual_continuum,
    solve_continuum,
)
from rpsolve.oracle import build_basis, build_hamiltonian, lowest_eigenvalues
from rpsolve.richardson import (
    jacobian_discrete,
    residual_discrete,
    solve_discrete,
    verify_identities,
)
from rpsolve.spectrum import (
    DensityTable,
    Level,
    PairingProblem,
    Resonance,
    box_level_histogram,
    box_spectrum,
)

GOLDEN = math.sqrt(5.0)


def levels_from(energies):
    return [Level(float(e), f"l{i}") for i, e in enumerate(energies)]


@pytest.fixture(scope="module", autouse=True)
def warm_eigensolver():
    # one tiny solve up front so jit compilation stays out of the budgets
    lowest_eigenvalues(np.eye(2), 1)


def report(index, text):
    print(f"ACCEPTANCE {index:2d} PASS — {text}")


def test_criterion_1_two_level_closed_form():
    start = time.monotonic()
    problem = PairingProblem(bound_levels=levels_from([0.0, 1.0]), strength=0.5, pairs=1)
    ground = solve_discrete(problem, occupation=[0])
    excited = solve_discrete(problem, occupation=[1])
    basis = build_basis(2, 1)
    eigenvalues = lowest_eigenvalues(
        build_hamiltonian(basis, list(problem.bound_levels), 0.5), 2
    )
    assert abs(ground.total - (1 - GOLDEN) / 2) < 1e-10
    assert abs(excited.total - (1 + GOLDEN) / 2) < 1e-10
    assert abs(ground.total - eigenvalues[0]) < 1e-10
    assert abs(excited.total - eigenvalues[1]) < 1e-10
    elapsed = time.monotonic() - start
    assert elapsed < 1.0
    report(1, f"two-level ground/excited match closed form and oracle ({elapsed:.2f}s)")


def test_criterion_2_degenerate_model():
    start = time.monotonic()
    problem = PairingProblem(bound_levels=levels_from([1.0] * 4), strength=0.2, pairs=2)
    sol = solve_discrete(problem)
    closed_form = 2 * 2 * 1.0 - 0.2 * 2 * (4 - 2 + 1)
    assert closed_form == pytest.approx(2.8)
    assert abs(sol.total - closed_form) < 1e-8
    basis = build_basis(4, 2)
    eigenvalues = lowest_eigenvalues(
        build_hamiltonian(basis, list(problem.bound_levels), 0.2), 1
    )
    assert abs(eigenvalues[0] - closed_form) < 1e-10
    assert abs(sol.total - eigenvalues[0]) < 1e-8
    elapsed = time.monotonic() - start
    assert elapsed < 1.0
    report(2, f"degenerate 4-level model gives 2.8 against closed form and oracle ({elapsed:.2f}s)")


def test_criterion_3_oracle_equivalence_sweep():
    start = time.monotonic()
    levels = levels_from([float(j) for j in range(1, 9)])
    basis = build_basis(8, 4)
    worst = 0.0
    for strength in np.arange(0.05, 0.5001, 0.05):
        problem = PairingProblem(bound_levels=levels, strength=float(strength), pairs=4)
        sol = solve_discrete(problem)
        lowest = lowest_eigenvalues(build_hamiltonian(basis, levels, float(strength)), 1)[0]
        gap = abs(sol.total.real - lowest)
        worst = max(worst, gap)
        assert gap < 1e-8, f"G={strength}: gap {gap}"
        assert abs(sol.total.imag) < 1e-10
    elapsed = time.monotonic() - start
    assert elapsed < 10.0
    report(3, f"picket-fence ground totals match the 70x70 oracle, worst gap {worst:.2e} ({elapsed:.1f}s)")


def regression_problems():
    """Real-spectrum regression set shared by the closure criterion."""
    problems = [
        (PairingProblem(bound_levels=levels_from([0.0, 1.0]), strength=0.5, pairs=1), None),
        (PairingProblem(bound_levels=levels_from([1.0] * 4), strength=0.2, pairs=2), None),
        (
            PairingProblem(
                bound_levels=levels_from([0.3, 0.9, 1.7, 2.4]), strength=0.33, pairs=2
            ),
            None,
        ),
        (
            PairingProblem(
                bound_levels=levels_from([0.15, 0.6, 1.9, 2.2, 3.1, 4.4, 5.0, 6.8]),
                strength=0.35,
                pairs=4,
            ),
            None,
        ),
    ]
    for strength in (0.1, 0.3, 0.5):
        problems.append(
            (
                PairingProblem(
                    bound_levels=levels_from([float(j) for j in range(1, 9)]),
                    strength=strength,
                    pairs=4,
                ),
                None,
            )
        )
    problems.append(
        (
            PairingProblem(
                bound_levels=levels_from([-2.0, -0.5]),
                box_levels=box_spectrum(10.0, 10, 1.0),
                strength=0.3,
                pairs=2,
            ),
            None,
        )
    )
    problems.append(
        (
            PairingProblem(
                bound_levels=levels_from([0.3, 0.9, 1.7, 2.4, 3.0, 3.3]),
                strength=0.4,
                pairs=3,
            ),
            [0, 1, 3],
        )
    )
    return problems


def test_criterion_4_conjugate_closure():
    for problem, occupation in regression_problems():
        sol = solve_discrete(problem, occupation=occupation)
        energies = np.sort_complex(sol.energies)
        conjugated = np.sort_complex(np.conj(sol.energies))
        assert np.max(np.abs(energies - conjugated)) < 1e-9
        assert abs(sol.total.imag) < 1e-10
    report(4, f"pair-energy multisets conjugation-closed on {len(regression_problems())} regression problems")


def test_criterion_5_jacobian_central_differences():
    rng = np.random.default_rng(2024)
    problem = PairingProblem(
        bound_levels=levels_from([0.2, 0.9, 1.7, 2.6, 3.8, 4.4]), strength=0.41, pairs=3
    )
    two_eps = problem.two_eps_all.real
    h = 1e-6
    checked = 0
    worst = 0.0
    while checked < 100:
        energies = rng.uniform(-3.0, 11.0, 3) + 1j * rng.uniform(-2.0, 2.0, 3)
        # admissible and well-separated from every pole and from each other
        if np.min(np.abs(energies[:, None] - two_eps[None, :])) < 0.3:
            continue
        pair_gap = np.abs(energies[:, None] - energies[None, :])
        np.fill_diagonal(pair_gap, np.inf)
        if pair_gap.min() < 0.3:
            continue
        analytic = jacobian_discrete(energies, problem)
        fd = np.zeros_like(analytic)
        for nu in range(3):
            shift = np.zeros(3, dtype=complex)
            shift[nu] = h
            fd[:, nu] = (
                residual_discrete(energies + shift, problem)
                - residual_discrete(energies - shift, problem)
            ) / (2 * h)
        rel = np.linalg.norm(fd - analytic) / np.linalg.norm(analytic)
        worst = max(worst, rel)
        assert rel <= 1e-6
        checked += 1
    report(5, f"analytic Jacobian matches central differences on 100 states, worst {worst:.2e}")


def test_criterion_6_box_to_continuum_limit():
    start = time.monotonic()
    bound = levels_from([-2.0, -0.5])
    cutoff = math.pi**2  # count/radius fixed at 1 keeps the top level at pi^2
    totals = {}
    for radius, count in ((10.0, 10), (20.0, 20), (40.0, 40)):
        problem = PairingProblem(
            bound_levels=bound,
            box_levels=box_spectrum(radius, count, 1.0),
            strength=0.3,
            pairs=2,
        )
        totals[radius] = solve_discrete(problem).total.real
    histogram = box_level_histogram(box_spectrum(40.0, 40, 1.0))
    smeared = PairingProblem(
        bound_levels=bound, background=histogram, strength=0.3, pairs=2
    )
    rule = make_quadrature(smeared, cutoff=cutoff, nodes_per_panel=16)
    continuum = solve_continuum(
        ContinuumProblem(smeared, rule, ContinuumMode.REAL_CONTINUUM)
    ).total.real
    gaps = [abs(totals[r] - continuum) for r in (10.0, 20.0, 40.0)]
    assert gaps[0] > gaps[1] > gaps[2]
    final_rel = gaps[2] / abs(continuum)
    assert final_rel < 0.01
    elapsed = time.monotonic() - start
    assert elapsed < 30.0
    report(
        6,
        f"box totals converge to the continuum total, gaps {gaps[0]:.2f} > {gaps[1]:.2f} > "
        f"{gaps[2]:.3f}, final {final_rel:.2%} ({elapsed:.1f}s)",
    )


def test_criterion_7_pole_approximation_continuity(tmp_path, capsys):
    narrow = PairingProblem(
        bound_levels=[], resonances=[Resonance(1.0, 1e-8)], strength=0.1, pairs=1
    )
    sol_narrow = solve_continuum(
        ContinuumProblem(narrow, make_quadrature(narrow), ContinuumMode.COMPLEX_POLE)
    )
    reference = solve_discrete(
        PairingProblem(bound_levels=levels_from([1.0]), strength=0.1, pairs=1)
    )
    assert abs(sol_narrow.energies[0] - reference.energies[0]) < 1e-6

    # Gamma = 0.2: the imaginary part is reported, end to end through the CLI
    config = tmp_path / "pole.json"
    config.write_text(
        json.dumps(
            {"resonances": [{"position": 1.0, "width": 0.2}], "strength": 0.1, "pairs": 1}
        )
    )
    out_path = tmp_path / "pole_out.json"
    code = cli_main(
        ["complex-pole", "--config", str(config), "--out", str(out_path), "--quiet"]
    )
    capsys.readouterr()
    assert code == 0
    payload = json.loads(out_path.read_text())
    assert abs(payload["total_im"]) > 0.0
    report(
        7,
        f"pole mode matches the bound-level limit at width 1e-8 and emits |Im| = "
        f"{abs(payload['total_im']):.3g} at width 0.2",
    )


def test_criterion_8_quadrature_validation():
    table = DensityTable([1e-9, 10.0], [1.0, 1.0])
    rule = QuadratureRule.build(10.0, table.grid)
    value = integral_term(table, rule, -2.0)
    analytic = 0.5 * math.log(11.0)
    assert abs(value.real - analytic) < 1e-6
    worst = 0.0
    for energy in (-2.0, -0.37, 1.0 - 0.5j, 4.0 + 1.0j):
        v1 = integral_term(table, rule, energy)
        v2 = integral_term(table, rule.with_nodes(2 * rule.nodes_per_panel), energy)
        rel = abs(v1 - v2) / max(1.0, abs(v1))
        worst = max(worst, rel)
        assert rel < 1e-9
    report(8, f"constant-density integral within 1e-6 of the log formula; doubling drift {worst:.1e}")


def test_criterion_9_appendix_identities():
    result = verify_identities(1000, seed=0)
    assert result.trials == 1000
    assert result.double_sum_failures == 0
    assert result.max_double_sum_error == 0.0
    assert result.partial_fraction_failures == 0
    assert result.max_partial_fraction_error <= 1e-12
    report(
        9,
        f"1000 trials: double-sum exact, partial fraction max error "
        f"{result.max_partial_fraction_error:.2e}",
    )


def test_criterion_10_reduction_law():
    zero = DensityTable([1e-9, 10.0], [0.0, 0.0])
    problem = PairingProblem(
        bound_levels=levels_from([-2.0, -0.5, 0.7]),
        background=zero,
        strength=0.3,
        pairs=2,
    )
    cproblem = ContinuumProblem(
        problem, make_quadrature(problem), ContinuumMode.REAL_CONTINUUM
    )
    discrete = PairingProblem(
        bound_levels=list(problem.bound_levels), strength=0.3, pairs=2
    )
    rng = np.random.default_rng(17)
    worst = 0.0
    for _ in range(20):
        energies = rng.uniform(-6.0, -0.5, 2) + 1j * rng.uniform(-1.0, 1.0, 2)
        lhs = residual_continuum(energies, cproblem)
        rhs = residual_discrete(energies, discrete)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
        assert np.max(np.abs(lhs - rhs)) <= 1e-14
    report(10, f"empty-density continuum residual equals the discrete residual, max diff {worst:.1e}")
