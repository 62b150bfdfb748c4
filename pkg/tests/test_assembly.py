import numpy as np
import pytest

from peenform import (
    IntensityMap,
    MaskRect,
    MomentField,
    PlateSpec,
    TensorBasis,
    analytic_uniform_solution,
    assemble_constraints,
    assemble_moment_map,
    assemble_stiffness,
    basis_function,
    eval_displacement,
    forward_solve,
    moment_resultants,
    project_moment,
)
from peenform.assembly import condition_estimate, equilibrated_solve, saddle_matrix
from peenform.errors import InputError
from peenform.legendre import gauss_rule


def quad2d(basis, integrand, points=20):
    """Brute-force tensor Gauss quadrature over the plate, independent of the
    factorized assembly path."""
    plate = basis.plate
    rule = gauss_rule(points)
    p1, w1 = rule.mapped(0.0, plate.L1)
    p2, w2 = rule.mapped(0.0, plate.L2)
    total = 0.0
    for a, wa in zip(p1, w1):
        for b, wb in zip(p2, w2):
            total += wa * wb * integrand(a, b)
    return total


def stiffness_entry_oracle(basis, i, j):
    plate = basis.plate
    v = plate.v

    def integrand(a, b):
        x = (a, b)
        return (
            basis_function(basis, i, x, 2, 0) * basis_function(basis, j, x, 2, 0)
            + basis_function(basis, i, x, 0, 2) * basis_function(basis, j, x, 0, 2)
            + 2 * (1 - v) * basis_function(basis, i, x, 1, 1) * basis_function(basis, j, x, 1, 1)
            + 2 * v * basis_function(basis, i, x, 2, 0) * basis_function(basis, j, x, 0, 2)
        )

    return plate.D1 * quad2d(basis, integrand)


def moment_map_entry_oracle(basis, j, i):
    plate = basis.plate

    def integrand(a, b):
        x = (a, b)
        return basis_function(basis, j, x) * (
            basis_function(basis, i, x, 2, 0) + basis_function(basis, i, x, 0, 2))

    return plate.D2 * quad2d(basis, integrand)


def rigid_mode_coefficients(basis, mode):
    """Tensor coefficients of u = 1, u = x1 or u = x2."""
    coeffs = np.zeros((basis.N, basis.N))
    if mode == "one":
        coeffs[0, 0] = 1.0
    elif mode == "x1":
        coeffs[0, 0] = basis.plate.L1 / 2
        coeffs[1, 0] = basis.plate.L1 / 2
    else:
        coeffs[0, 0] = basis.plate.L2 / 2
        coeffs[0, 1] = basis.plate.L2 / 2
    return coeffs.reshape(-1)


class TestStiffness:
    def test_symmetry(self, plate):
        k = assemble_stiffness(TensorBasis(plate, 7)).K
        assert np.abs(k - k.T).max() <= 1e-12 * np.abs(k).max()

    def test_known_entry_square_plate(self):
        # Mode (2,0) against itself on a 2 x 2 plate: the only surviving term
        # is (P2'' shifted)^2 integrated in x1 times the constant in x2, and
        # the entry does not involve v. Hand value: 18 * 2 = 36 (in units of D1).
        plate = PlateSpec(L1=2.0, L2=2.0, h=0.05, E=1.0, v=0.3)
        basis = TensorBasis(plate, 3)
        k = assemble_stiffness(basis).K
        n = 2 * basis.N + 0
        assert k[n, n] == pytest.approx(36.0 * plate.D1, rel=1e-12)
        assert k[n, n] == pytest.approx(stiffness_entry_oracle(basis, n, n), rel=1e-10)

    def test_entries_against_quadrature_oracle(self, plate):
        rng = np.random.default_rng(23)
        basis = TensorBasis(plate, 4)
        k = assemble_stiffness(basis).K
        scale = np.abs(k).max()
        for _ in range(10):
            i, j = rng.integers(basis.size, size=2)
            oracle = 0.5 * (
                stiffness_entry_oracle(basis, int(i), int(j))
                + stiffness_entry_oracle(basis, int(j), int(i)))
            assert abs(k[i, j] - oracle) <= 1e-10 * scale

    def test_rigid_modes_in_nullspace(self, plate):
        basis = TensorBasis(plate, 6)
        k = assemble_stiffness(basis).K
        scale = np.abs(k).max()
        for mode in ("one", "x1", "x2"):
            assert np.abs(k @ rigid_mode_coefficients(basis, mode)).max() <= 1e-10 * scale

    def test_positive_semidefinite_with_three_zero_modes(self, plate):
        basis = TensorBasis(plate, 5)
        k = assemble_stiffness(basis).K
        eigenvalues = np.linalg.eigvalsh(k)
        scale = abs(eigenvalues[-1])
        assert eigenvalues[0] > -1e-12 * scale
        near_zero = np.abs(eigenvalues) <= 1e-10 * scale
        assert near_zero.sum() == 3
        # The three rigid coefficient vectors live in that nullspace.
        _, vectors = np.linalg.eigh(k)
        null_basis = vectors[:, :3]
        for mode in ("one", "x1", "x2"):
            c = rigid_mode_coefficients(basis, mode)
            c = c / np.linalg.norm(c)
            residual = c - null_basis @ (null_basis.T @ c)
            assert np.linalg.norm(residual) < 1e-8


class TestMomentMap:
    def test_constant_displacement_column_is_zero(self, plate):
        t = assemble_moment_map(TensorBasis(plate, 5)).T
        assert np.abs(t[:, 0]).max() == 0.0

    def test_delta_structure(self, plate):
        basis = TensorBasis(plate, 4)
        t = assemble_moment_map(basis).T
        for j in range(basis.size):
            for i in range(basis.size):
                if t[j, i] != 0.0:
                    shares_row = j // basis.N == i // basis.N
                    shares_col = j % basis.N == i % basis.N
                    assert shares_row or shares_col

    def test_uniform_moment_loads_axis_modes_only(self, plate):
        basis = TensorBasis(plate, 5)
        moment_map = assemble_moment_map(basis)
        t = np.zeros(basis.size)
        t[0] = 1.0
        force = moment_map.force(t)
        for i in range(basis.size):
            p, q = basis.index_pair(i)
            if force[i] != 0.0:
                assert p == 0 or q == 0

    def test_entries_against_quadrature_oracle(self, plate):
        rng = np.random.default_rng(29)
        basis = TensorBasis(plate, 4)
        t = assemble_moment_map(basis).T
        scale = np.abs(t).max()
        for _ in range(10):
            j, i = rng.integers(basis.size, size=2)
            assert abs(t[j, i] - moment_map_entry_oracle(basis, int(j), int(i))) <= 1e-10 * scale


class TestConstraints:
    def test_sign_patterns(self, plate):
        basis = TensorBasis(plate, 2)
        g = assemble_constraints(basis).G
        assert list(g[:, 1]) == [1.0, -1.0, 1.0, -1.0]
        assert g[0, 0] == 1.0
        assert set(np.unique(g)) == {-1.0, 1.0}
        basis4 = TensorBasis(plate, 4)
        g4 = assemble_constraints(basis4).G
        for n in range(basis4.size):
            p, q = basis4.index_pair(n)
            assert g4[n, 0] == (-1.0) ** (p + q)
            assert g4[n, 1] == (-1.0) ** q
            assert g4[n, 2] == (-1.0) ** p

    def test_constrained_fields_vanish_at_corners(self, plate):
        rng = np.random.default_rng(31)
        basis = TensorBasis(plate, 5)
        g = assemble_constraints(basis).G
        from peenform import DisplacementField

        for _ in range(5):
            raw = rng.normal(size=basis.size)
            # Project onto the constraint nullspace.
            coeffs = raw - g @ np.linalg.solve(g.T @ g, g.T @ raw)
            field = DisplacementField(basis, coeffs)
            for corner in ((0.0, 0.0), (plate.L1, 0.0), (0.0, plate.L2)):
                assert eval_displacement(basis, field, corner) == pytest.approx(0.0, abs=1e-12)


class TestForwardSolve:
    def test_zero_moment_gives_zero_solution(self, plate):
        basis = TensorBasis(plate, 6)
        sol = forward_solve(basis, MomentField(basis, np.zeros(basis.size)))
        assert np.all(sol.a.a == 0.0)
        assert np.all(sol.multipliers == 0.0)

    def test_uniform_moment_matches_analytic(self, plate):
        tau = 1.76394684375e-6
        for n in (3, 7, 13):
            basis = TensorBasis(plate, n)
            t = np.zeros(basis.size)
            t[0] = tau
            sol = forward_solve(basis, MomentField(basis, t))
            exact = analytic_uniform_solution(plate, tau, basis)
            xs = np.linspace(0, 8, 10)
            from peenform import eval_displacement_grid

            got = eval_displacement_grid(basis, sol.a, xs, xs)
            want = eval_displacement_grid(basis, exact, xs, xs)
            assert np.abs(got - want).max() <= 1e-9 * np.abs(want).max()

    def test_corner_constraints_satisfied(self, plate, cal):
        basis = TensorBasis(plate, 9)
        imap = IntensityMap(0.0101, (MaskRect(0.0, 3.0, 0.0, 3.0),))
        sol = forward_solve(basis, project_moment(basis, imap, cal))
        g = assemble_constraints(basis).G
        assert np.abs(g.T @ sol.a.a).max() <= 1e-10 * np.linalg.norm(sol.a.a)

    def test_linearity(self, plate):
        rng = np.random.default_rng(37)
        basis = TensorBasis(plate, 5)
        t1 = rng.normal(size=basis.size) * 1e-6
        t2 = rng.normal(size=basis.size) * 1e-6
        c1, c2 = 2.5, -0.75
        a1 = forward_solve(basis, MomentField(basis, t1)).a.a
        a2 = forward_solve(basis, MomentField(basis, t2)).a.a
        combo = forward_solve(basis, MomentField(basis, c1 * t1 + c2 * t2)).a.a
        expected = c1 * a1 + c2 * a2
        assert np.abs(combo - expected).max() <= 1e-10 * np.abs(expected).max()

    def test_swap_symmetry_on_square_plate(self, plate, cal):
        basis = TensorBasis(plate, 9)
        imap = IntensityMap(
            0.0101,
            (MaskRect(2.0, 3.0, 0.0, 8.0), MaskRect(0.0, 8.0, 2.0, 3.0)))
        sol = forward_solve(basis, project_moment(basis, imap, cal))
        rng = np.random.default_rng(41)
        scale = abs(eval_displacement(basis, sol.a, (4.0, 4.0)))
        for _ in range(10):
            a, b = rng.uniform(0, 8, size=2)
            u_ab = eval_displacement(basis, sol.a, (a, b))
            u_ba = eval_displacement(basis, sol.a, (b, a))
            assert abs(u_ab - u_ba) <= 1e-9 * scale

    def test_fourth_corner_zero_for_uniform(self):
        plate = PlateSpec(L1=7.0, L2=11.0, h=0.1, E=1e7, v=0.29)
        basis = TensorBasis(plate, 6)
        t = np.zeros(basis.size)
        t[0] = 3.3e-6
        sol = forward_solve(basis, MomentField(basis, t))
        center = eval_displacement(basis, sol.a, (plate.L1 / 2, plate.L2 / 2))
        fourth = eval_displacement(basis, sol.a, (plate.L1, plate.L2))
        assert abs(fourth) <= 1e-9 * abs(center)

    def test_moment_free_uniform(self, plate):
        tau = 1.76394684375e-6
        basis = TensorBasis(plate, 5)
        t = np.zeros(basis.size)
        t[0] = tau
        field = MomentField(basis, t)
        sol = forward_solve(basis, field)
        pts = np.linspace(8 / 6, 8 * 5 / 6, 5)
        scale = plate.D2 * tau
        worst = max(
            max(abs(m) for m in moment_resultants(basis, sol.a, field, plate, (a, b)))
            for a in pts for b in pts)
        assert worst <= 1e-8 * scale

    def test_masked_self_convergence(self, plate, cal):
        imap = IntensityMap(0.0101, (MaskRect(4.0, 8.0, 0.0, 8.0),))
        centers = {}
        for n in (9, 13):
            basis = TensorBasis(plate, n)
            sol = forward_solve(basis, project_moment(basis, imap, cal))
            centers[n] = eval_displacement(basis, sol.a, (4.0, 4.0))
        assert abs(centers[9] - centers[13]) <= 0.01 * abs(centers[13])

    def test_basis_mismatch_rejected(self, plate):
        basis = TensorBasis(plate, 4)
        other = TensorBasis(plate, 5)
        with pytest.raises(InputError):
            forward_solve(basis, MomentField(other, np.zeros(other.size)))


class TestSolverPlumbing:
    def test_equilibrated_solve_matches_numpy_on_benign_system(self):
        rng = np.random.default_rng(43)
        m = rng.normal(size=(12, 12)) + 12 * np.eye(12)
        b = rng.normal(size=12)
        assert equilibrated_solve(m, b) == pytest.approx(np.linalg.solve(m, b), rel=1e-12)

    def test_matrix_rhs_consistent_with_columns(self):
        rng = np.random.default_rng(47)
        m = rng.normal(size=(9, 9)) + 9 * np.eye(9)
        b = rng.normal(size=(9, 4))
        block = equilibrated_solve(m, b)
        for col in range(4):
            assert block[:, col] == pytest.approx(equilibrated_solve(m, b[:, col]))

    def test_saddle_matrix_shape_and_blocks(self, plate):
        basis = TensorBasis(plate, 4)
        k = assemble_stiffness(basis)
        g = assemble_constraints(basis)
        m = saddle_matrix(k, g)
        n = basis.size
        assert m.shape == (n + 3, n + 3)
        assert np.all(m[n:, n:] == 0.0)
        assert np.array_equal(m[:n, n:], g.G)
        assert np.array_equal(m[n:, :n], g.G.T)

    def test_condition_estimate_positive(self, plate):
        assert condition_estimate(TensorBasis(plate, 5)) > 1.0
