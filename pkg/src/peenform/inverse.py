"""Regularized recipe design.

The forward chain "moment coefficients -> corner-pinned solve -> displacement
at sample points" is condensed into a dense response matrix. Among all moment
fields meeting the point constraints, the one minimizing a smoothness measure
(moment values plus plate-scaled first and second derivatives) is selected by
solving the KKT system; slowly varying recipes are what peening machines can
actually run. The optimal moment field divides by the calibrated slope to
give an intensity map.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import qr

from . import legendre
from .assembly import (
    assemble_constraints,
    assemble_moment_map,
    assemble_stiffness,
    equilibrated_solve,
    saddle_matrix,
)
from .errors import DegenerateConstraintsError, InputError, OverConstrainedError
from .model import MomentField, TensorBasis, eval_moment_grid


@dataclass(frozen=True)
class DisplacementConstraint:
    """Target midplane displacement at one plate point."""

    point: tuple
    value: float


@dataclass(frozen=True, eq=False)
class RegularizationMatrix:
    """Symmetric positive definite quadratic form on moment coefficients."""

    basis: TensorBasis
    H: np.ndarray


@dataclass(frozen=True, eq=False)
class ResponseMap:
    """Rows map moment coefficients to the solved displacement at each point."""

    basis: TensorBasis
    constraints: tuple
    A: np.ndarray

    @property
    def targets(self):
        return np.array([c.value for c in self.constraints])


def assemble_regularization(basis):
    """Smoothness measure of the moment field.

    H_ij integrates Phi_i Phi_j plus L1 L2 times the gradient products plus
    (L1 L2)^2 times the curvature products (with the mixed term doubled).
    The zeroth-order block is the diagonal Gram matrix of the orthogonal
    basis, which makes H positive definite.
    """
    plate = basis.plate
    x1 = lambda da, db: legendre.shifted_products(da, db, plate.L1, basis.N)
    x2 = lambda da, db: legendre.shifted_products(da, db, plate.L2, basis.N)
    first = plate.L1 * plate.L2
    second = first**2
    terms = (
        np.einsum("pr,qs->pqrs", x1(0, 0), x2(0, 0))
        + first * (
            np.einsum("pr,qs->pqrs", x1(1, 1), x2(0, 0))
            + np.einsum("pr,qs->pqrs", x1(0, 0), x2(1, 1)))
        + second * (
            np.einsum("pr,qs->pqrs", x1(2, 2), x2(0, 0))
            + np.einsum("pr,qs->pqrs", x1(0, 0), x2(2, 2))
            + 2.0 * np.einsum("pr,qs->pqrs", x1(1, 1), x2(1, 1)))
    )
    h = terms.reshape(basis.size, basis.size)
    return RegularizationMatrix(basis, 0.5 * (h + h.T))


def _check_points(basis, constraints):
    plate = basis.plate
    pts = np.array([c.point for c in constraints], dtype=float)
    tol = legendre._X_TOL * max(plate.L1, plate.L2)
    if np.any(pts[:, 0] < -tol) or np.any(pts[:, 0] > plate.L1 + tol) \
            or np.any(pts[:, 1] < -tol) or np.any(pts[:, 1] > plate.L2 + tol):
        raise InputError("constraint point outside the plate")
    # Near-coincident points guarantee a rank-deficient response map.
    merge_tol = 1e-9 * min(plate.L1, plate.L2)
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if np.hypot(*(pts[i] - pts[j])) < merge_tol:
                raise DegenerateConstraintsError(
                    f"constraint points {i} and {j} coincide")
    return pts


def assemble_response_map(basis, constraints):
    """Dense P x N^2 map from moment coefficients to point displacements.

    The load map (padded with three zero multiplier rows) is pushed through
    one factorization of the saddle matrix; the multiplier rows are dropped
    and the remaining columns are sampled at the constraint points.
    """
    constraints = tuple(constraints)
    if not constraints:
        raise InputError("at least one displacement constraint is required")
    if len(constraints) > basis.size:
        raise OverConstrainedError(
            f"{len(constraints)} constraints exceed the {basis.size} moment "
            "degrees of freedom")
    pts = _check_points(basis, constraints)
    stiffness = assemble_stiffness(basis)
    moment_map = assemble_moment_map(basis)
    corner = assemble_constraints(basis)
    system = saddle_matrix(stiffness, corner)
    gamma = np.vstack([-moment_map.T.transpose(), np.zeros((3, basis.size))])
    coeffs = equilibrated_solve(system, gamma)[: basis.size]
    q = basis.eval_matrix(pts[:, 0], pts[:, 1])
    return ResponseMap(basis, constraints, q @ coeffs)


def _dependent_rows(a, rank):
    # Pivoted QR on A^T orders rows by independence; the trailing pivots
    # name the rows that add no rank.
    _, _, pivots = qr(a.T, mode="economic", pivoting=True)
    return sorted(int(i) for i in pivots[rank:])


def solve_inverse(reg, response):
    """Moment coefficients minimizing the smoothness measure under the
    point displacement constraints.

    Solves the KKT system [[H, A^T], [A, 0]] [t; lambda] = [0; u] and
    discards the multipliers.

    Constraints whose response row is structurally zero are handled before
    the solve. Displacements at the three pinned corners are zero rows by
    construction, and so is the fourth corner: the twist shape x1 x2 is
    harmonic (a moment load never excites it) and vanishes at the pinned
    corners, which forces u(L1, L2) = 0 for every moment field. A zero row
    with a zero target is vacuously satisfied and dropped; a zero row with
    a nonzero target is unsatisfiable and raises.
    """
    if reg.basis != response.basis:
        raise InputError("regularization and response map use different bases")
    a = response.A
    targets = response.targets
    row_scale = np.abs(a).max(axis=1)
    overall = row_scale.max()
    zero_rows = row_scale <= 1e-10 * overall if overall > 0.0 else np.ones(len(targets), bool)
    target_tol = 1e-9 * max(np.abs(targets).max(), np.finfo(float).tiny)
    bad = [int(i) for i in np.nonzero(zero_rows & (np.abs(targets) > target_tol))[0]]
    if bad:
        raise DegenerateConstraintsError(
            f"constraints {bad} demand nonzero displacement at points the "
            "corner pinning already forces to zero")
    keep = ~zero_rows
    a_active = a[keep]
    u_active = targets[keep]
    n = reg.H.shape[0]
    p = a_active.shape[0]
    if p == 0:
        return MomentField(reg.basis, np.zeros(n))
    rank = np.linalg.matrix_rank(a_active)
    if rank < p:
        original = np.nonzero(keep)[0]
        rows = [int(original[i]) for i in _dependent_rows(a_active, rank)]
        raise DegenerateConstraintsError(
            f"constraints are rank deficient; dependent rows: {rows}")
    kkt = np.zeros((n + p, n + p))
    kkt[:n, :n] = reg.H
    kkt[:n, n:] = a_active.T
    kkt[n:, :n] = a_active
    rhs = np.concatenate([np.zeros(n), u_active])
    solution = equilibrated_solve(kkt, rhs)
    return MomentField(reg.basis, solution[:n])


@dataclass(frozen=True, eq=False)
class IntensityGrid:
    """Recovered intensity sampled on a rectangular grid.

    Negative samples are reported as-is with the flag set: they mean "peen
    the opposite face", and clamping them would break the linear model.
    """

    x1: np.ndarray
    x2: np.ndarray
    values: np.ndarray
    has_negative: bool


def recover_intensity(field, model, x1s, x2s):
    """Pointwise intensity tau(x) / K on the grid x1s x x2s."""
    x1s = np.asarray(x1s, dtype=float)
    x2s = np.asarray(x2s, dtype=float)
    values = eval_moment_grid(field.basis, field, x1s, x2s) / model.slope_K
    return IntensityGrid(x1s, x2s, values, bool(np.any(values < 0.0)))
