"""Galerkin assembly for the fully free plate and the corner-pinned solve.

Every entry of the stiffness matrix and moment map factorizes into 1-D
integrals of shifted Legendre products, so assembly is a handful of outer
products over cached tables; the derivative-free factors are exact
orthogonality deltas, which zeroes the decoupled entries without quadrature.
The three rigid-body modes of the free plate are removed by zeroing the
displacement at three corners through Lagrange multipliers, giving a small
symmetric indefinite saddle system solved by dense LU with partial pivoting
after symmetric equilibration.
"""

from dataclasses import dataclass

import numpy as np

from . import legendre
from .errors import InputError, SolverFailureError
from .model import DisplacementField, TensorBasis


@dataclass(frozen=True, eq=False)
class StiffnessMatrix:
    """Symmetrized bending stiffness on the tensor basis (units force * length)."""

    basis: TensorBasis
    K: np.ndarray


@dataclass(frozen=True, eq=False)
class MomentMap:
    """Matrix T taking moment coefficients to the load vector: F = T^T t.

    The thermal coupling modulus D2 is absorbed into the entries. The
    orthogonality deltas in the derivative-free factors make most entries
    exactly zero.
    """

    basis: TensorBasis
    T: np.ndarray

    def force(self, t):
        """Load vector F = T^T t."""
        return self.T.transpose() @ np.asarray(t, dtype=float)


@dataclass(frozen=True, eq=False)
class ConstraintMatrix:
    """Corner-evaluation sign vectors g1, g2, g3 as columns of G.

    g1 pins u(0, 0), g2 pins u(L1, 0), g3 pins u(0, L2); entries are the
    endpoint values (+/-1) of the shifted Legendre factors.
    """

    basis: TensorBasis
    G: np.ndarray


@dataclass(frozen=True, eq=False)
class SaddleSolution:
    """Constrained minimizer: displacement coefficients plus multipliers."""

    a: DisplacementField
    multipliers: np.ndarray


def _factor_tables(basis, axis):
    length = basis.plate.L1 if axis == 1 else basis.plate.L2
    return lambda da, db: legendre.shifted_products(da, db, length, basis.N)


def assemble_stiffness(basis):
    """Bending stiffness; symmetric, PSD, with exactly the three rigid modes
    {1, x1, x2} in its nullspace."""
    plate = basis.plate
    x1 = _factor_tables(basis, 1)
    x2 = _factor_tables(basis, 2)
    v = plate.v
    terms = (
        np.einsum("pr,qs->pqrs", x1(2, 2), x2(0, 0))
        + np.einsum("pr,qs->pqrs", x1(0, 0), x2(2, 2))
        + 2.0 * (1.0 - v) * np.einsum("pr,qs->pqrs", x1(1, 1), x2(1, 1))
        + 2.0 * v * np.einsum("pr,qs->pqrs", x1(2, 0), x2(0, 2))
    )
    kprime = plate.D1 * terms.reshape(basis.size, basis.size)
    return StiffnessMatrix(basis, 0.5 * (kprime + kprime.T))


def assemble_moment_map(basis):
    """Moment-to-load map T with entries D2 ((Phi_j, Phi_i,11) + (Phi_j, Phi_i,22))."""
    x1 = _factor_tables(basis, 1)
    x2 = _factor_tables(basis, 2)
    entries = (
        np.einsum("pr,qs->pqrs", x1(0, 2), x2(0, 0))
        + np.einsum("pr,qs->pqrs", x1(0, 0), x2(0, 2))
    )
    return MomentMap(basis, basis.plate.D2 * entries.reshape(basis.size, basis.size))


def assemble_constraints(basis):
    """Sign-pattern matrix G = [g1, g2, g3] for the three zeroed corners."""
    signs = (-1.0) ** np.arange(basis.N)
    ones = np.ones(basis.N)
    g1 = np.outer(signs, signs).reshape(-1)
    g2 = np.outer(ones, signs).reshape(-1)
    g3 = np.outer(signs, ones).reshape(-1)
    return ConstraintMatrix(basis, np.column_stack([g1, g2, g3]))


def saddle_matrix(stiffness, constraints):
    """Symmetric indefinite block system [[K, G], [G^T, 0]]."""
    k = stiffness.K
    g = constraints.G
    n = k.shape[0]
    m = np.zeros((n + 3, n + 3))
    m[:n, :n] = k
    m[:n, n:] = g
    m[n:, :n] = g.T
    return m


def equilibrated_solve(matrix, rhs):
    """Dense LU solve after symmetric Ruiz equilibration.

    Stiffness entries span many orders of magnitude across polynomial
    degrees; rescaling rows and columns symmetrically keeps the
    factorization accurate to near machine precision. rhs may be a vector
    or a matrix of stacked right-hand sides.
    """
    a = np.array(matrix, dtype=float)
    d = np.ones(a.shape[0])
    for _ in range(3):
        r = np.sqrt(np.abs(a).max(axis=1))
        r[r == 0.0] = 1.0
        a /= r[:, None]
        a /= r[None, :]
        d /= r
    b = np.asarray(rhs, dtype=float)
    scaled = d * b if b.ndim == 1 else d[:, None] * b
    try:
        y = np.linalg.solve(a, scaled)
    except np.linalg.LinAlgError as exc:
        estimate = np.linalg.cond(np.asarray(matrix, dtype=float))
        raise SolverFailureError(
            f"saddle factorization failed (condition estimate {estimate:.3e})") from exc
    return d * y if y.ndim == 1 else d[:, None] * y


def forward_solve(basis, tau):
    """Displacement of the fully free plate under a projected thermal moment.

    Solves [[K, G], [G^T, 0]] [a; lambda] = [-F; 0] with F = T^T t. The
    negated load fixes the sign convention so a uniform positive moment
    bows the plate upward into the corner-zeroed paraboloid of
    analytic_uniform_solution.
    """
    if tau.basis != basis:
        raise InputError("moment field was built on a different basis")
    stiffness = assemble_stiffness(basis)
    moment_map = assemble_moment_map(basis)
    constraints = assemble_constraints(basis)
    system = saddle_matrix(stiffness, constraints)
    rhs = np.concatenate([-moment_map.force(tau.t), np.zeros(3)])
    solution = equilibrated_solve(system, rhs)
    return SaddleSolution(
        DisplacementField(basis, solution[: basis.size]), solution[basis.size:])


def condition_estimate(basis):
    """2-norm condition number of the saddle matrix; diagnostic only."""
    system = saddle_matrix(assemble_stiffness(basis), assemble_constraints(basis))
    return float(np.linalg.cond(system))
