import math

import numpy as np
import pytest

from rpsolve.errors import CapacityError
from rpsolve.oracle import (
    build_basis,
    build_hamiltonian,
    compare,
    lowest_eigenvalues,
)
from rpsolve.richardson import PairSolution, solve_discrete, total_energy
from rpsolve.spectrum import Level, PairingProblem


def levels_from(energies):
    return [Level(float(e), f"l{i}") for i, e in enumerate(energies)]


def solution_with_total(total):
    energies = np.array([total], dtype=complex)
    return PairSolution(
        energies=energies,
        residual_norm=0.0,
        total=total_energy(energies),
        iterations=0,
        continuation_steps=0,
    )


class TestBasis:
    def test_two_choose_one(self):
        basis = build_basis(2, 1)
        assert basis.configs == ((0,), (1,))

    def test_four_choose_two(self):
        basis = build_basis(4, 2)
        assert basis.dimension == 6

    def test_eight_choose_four(self):
        assert build_basis(8, 4).dimension == 70

    def test_lexicographic_order(self):
        basis = build_basis(5, 3)
        assert list(basis.configs) == sorted(basis.configs)
        assert all(c == tuple(sorted(c)) for c in basis.configs)

    def test_capacity_errors(self):
        with pytest.raises(CapacityError):
            build_basis(30, 2)
        with pytest.raises(ValueError):
            build_basis(4, 5)


class TestHamiltonian:
    def test_two_level_matrix(self):
        basis = build_basis(2, 1)
        matrix = build_hamiltonian(basis, levels_from([0.0, 1.0]), 0.5)
        assert np.allclose(matrix, [[-0.5, -0.5], [-0.5, 1.5]], atol=1e-15)

    def test_zero_strength_diagonal(self):
        basis = build_basis(4, 2)
        matrix = build_hamiltonian(basis, levels_from([0.1, 0.7, 1.3, 2.9]), 0.0)
        assert np.allclose(matrix, np.diag(np.diag(matrix)))
        expected = [2 * (0.1 + 0.7), 2 * (0.1 + 1.3), 2 * (0.1 + 2.9)]
        assert np.allclose(np.diag(matrix)[:3], expected)

    def test_degenerate_couplings(self):
        basis = build_basis(4, 2)
        matrix = build_hamiltonian(basis, levels_from([1.0] * 4), 0.2)
        assert np.allclose(np.diag(matrix), 4.0 - 0.2 * 2)
        off = matrix[~np.eye(6, dtype=bool)]
        # configs sharing one level couple with -G; disjoint pairs do not
        assert sorted(set(np.round(off, 12))) == [-0.2, 0.0]
        for a, ca in enumerate(basis.configs):
            for b, cb in enumerate(basis.configs):
                if a == b:
                    continue
                expected = -0.2 if len(set(ca) & set(cb)) == 1 else 0.0
                assert matrix[a, b] == pytest.approx(expected, abs=1e-15)

    def test_symmetry_exact(self):
        basis = build_basis(6, 3)
        matrix = build_hamiltonian(basis, levels_from([0.3, 0.9, 1.1, 2.0, 3.3, 4.1]), 0.37)
        assert np.array_equal(matrix, matrix.T)

    def test_trace_identity(self):
        basis = build_basis(6, 3)
        levels = levels_from([0.3, 0.9, 1.1, 2.0, 3.3, 4.1])
        matrix = build_hamiltonian(basis, levels, 0.37)
        trace = sum(
            2 * sum(levels[j].energy for j in cfg) - 0.37 * 3 for cfg in basis.configs
        )
        assert np.trace(matrix) == pytest.approx(trace, rel=1e-14)
        eigenvalues = lowest_eigenvalues(matrix, basis.dimension)
        assert np.sum(eigenvalues) == pytest.approx(trace, rel=1e-9)


class TestEigenvalues:
    def test_two_by_two_closed_form(self):
        matrix = np.array([[-0.5, -0.5], [-0.5, 1.5]])
        values = lowest_eigenvalues(matrix, 2)
        golden = math.sqrt(5.0)
        assert values[0] == pytest.approx((1 - golden) / 2, abs=1e-10)
        assert values[1] == pytest.approx((1 + golden) / 2, abs=1e-10)

    def test_diagonal_matrix(self):
        matrix = np.diag([3.0, -1.0, 2.0])
        assert np.allclose(lowest_eigenvalues(matrix, 3), [-1.0, 2.0, 3.0])

    def test_degenerate_model(self):
        basis = build_basis(4, 2)
        matrix = build_hamiltonian(basis, levels_from([1.0] * 4), 0.2)
        values = lowest_eigenvalues(matrix, 1)
        assert values[0] == pytest.approx(2.8, abs=1e-10)

    def test_matches_library_on_random_symmetric(self):
        rng = np.random.default_rng(5)
        for dim in (3, 17, 40):
            a = rng.standard_normal((dim, dim))
            a = 0.5 * (a + a.T)
            mine = lowest_eigenvalues(a, dim)
            reference = np.linalg.eigvalsh(a)
            assert np.max(np.abs(mine - reference)) < 1e-10

    def test_zero_strength_spectrum_is_config_sums(self):
        basis = build_basis(5, 2)
        energies = [0.2, 0.9, 1.7, 2.4, 3.6]
        matrix = build_hamiltonian(basis, levels_from(energies), 0.0)
        values = lowest_eigenvalues(matrix, basis.dimension)
        expected = sorted(2 * (energies[i] + energies[j]) for i, j in basis.configs)
        assert np.allclose(values, expected, atol=1e-12)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(9)
        energies = [0.2, 0.9, 1.7, 2.4, 3.6]
        basis = build_basis(5, 2)
        reference = lowest_eigenvalues(
            build_hamiltonian(basis, levels_from(energies), 0.31), basis.dimension
        )
        for _ in range(3):
            perm = rng.permutation(5)
            shuffled = levels_from([energies[i] for i in perm])
            values = lowest_eigenvalues(
                build_hamiltonian(basis, shuffled, 0.31), basis.dimension
            )
            assert np.max(np.abs(values - reference)) < 1e-10

    def test_asymmetric_rejected(self):
        with pytest.raises(ValueError):
            lowest_eigenvalues(np.array([[1.0, 2.0], [0.0, 1.0]]), 1)

    def test_capacity_cap(self):
        with pytest.raises(CapacityError):
            lowest_eigenvalues(np.eye(3001), 1)


class TestCompare:
    def test_match(self):
        report = compare(
            solution_with_total(-0.6180339887), [-0.6180339887498949, 1.618033988749895]
        )
        assert report.passed
        assert report.gap < 1e-8

    def test_exact_zero(self):
        report = compare(solution_with_total(0.0), [0.0])
        assert report.gap == 0.0
        assert report.passed

    def test_imaginary_leak_fails(self):
        report = compare(solution_with_total(1.0 - 0.5j), [1.0])
        assert not report.passed
        assert "imaginary" in report.message
        assert report.imaginary_leak == pytest.approx(0.5)

    def test_ground_uses_lowest(self):
        report = compare(solution_with_total(1.6), [-0.6, 1.6], ground=True)
        assert not report.passed
        assert report.nearest == -0.6


class TestOracleSolverEquivalence:
    """Every occupation-seeded branch must land on an oracle eigenvalue."""

    CASES = [
        ([0.0, 1.0], 0.5, 1),
        ([0.3, 0.9, 1.7, 2.4], 0.33, 2),
        ([1.0, 2.0, 3.0, 4.0, 5.0, 6.0], 0.4, 3),
        ([0.15, 0.6, 1.9, 2.2, 3.1, 4.4, 5.0, 6.8], 0.35, 4),
    ]

    @pytest.mark.parametrize("energies,strength,pairs", CASES)
    def test_ground_state(self, energies, strength, pairs):
        problem = PairingProblem(
            bound_levels=levels_from(energies), strength=strength, pairs=pairs
        )
        sol = solve_discrete(problem)
        basis = build_basis(len(energies), pairs)
        matrix = build_hamiltonian(basis, list(problem.bound_levels), strength)
        values = lowest_eigenvalues(matrix, 1)
        report = compare(sol, values, ground=True)
        assert report.passed, report.message

    def test_excited_branches_cover_distinct_eigenvalues(self):
        energies = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]
        problem = PairingProblem(bound_levels=levels_from(energies), strength=0.3, pairs=3)
        basis = build_basis(6, 3)
        matrix = build_hamiltonian(basis, list(problem.bound_levels), 0.3)
        values = lowest_eigenvalues(matrix, basis.dimension)
        # occupations whose zero-strength totals are pairwise distinct seed
        # pairwise distinct branches
        occupations = [(0, 1, 2), (0, 1, 3), (0, 1, 4), (0, 2, 4), (1, 2, 4)]
        seed_totals = {sum(2 * energies[i] for i in occ) for occ in occupations}
        assert len(seed_totals) == len(occupations)
        branches = []
        for occ in occupations:
            sol = solve_discrete(problem, occupation=list(occ))
            report = compare(sol, values)
            assert report.passed, report.message
            branches.append(np.sort_complex(np.round(sol.energies, 8)))
        distinct = {tuple(b.tolist()) for b in branches}
        assert len(distinct) == len(occupations)

    def test_largest_regression_case(self):
        # L = 12, n = 6 upper corner of the regression envelope
        energies = [float(j) for j in range(1, 13)]
        problem = PairingProblem(bound_levels=levels_from(energies), strength=0.4, pairs=6)
        sol = solve_discrete(problem)
        basis = build_basis(12, 6)
        matrix = build_hamiltonian(basis, list(problem.bound_levels), 0.4)
        values = lowest_eigenvalues(matrix, 1)
        assert abs(sol.total.real - values[0]) < 1e-8
        assert abs(sol.total.imag) < 1e-10


class TestDomainErrors:
    def test_level_count_mismatch(self):
        basis = build_basis(4, 2)
        with pytest.raises(ValueError):
            build_hamiltonian(basis, levels_from([1.0, 2.0]), 0.1)
