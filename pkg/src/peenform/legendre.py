"""Univariate Legendre kernels.

Evaluation of Legendre polynomials and their first two derivatives on
[-1, 1], shifts onto [0, L], orthogonality constants, and Gauss-Legendre
quadrature. Every integral assembled downstream (stiffness, moment map,
regularization, projection) reduces to products of these 1-D pieces.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InputError, UnsupportedDegreeError

# Highest 1-D polynomial degree available to the tensor discretization.
MAX_DEGREE = 12

_X_TOL = 1e-12


def _check_degree(n):
    if n < 0:
        raise InputError(f"polynomial degree must be nonnegative, got {n}")
    if n > MAX_DEGREE:
        raise UnsupportedDegreeError(
            f"degree {n} above supported maximum {MAX_DEGREE}")


def eval_legendre(n, x):
    """Value of the degree-n Legendre polynomial at x in [-1, 1]."""
    return eval_legendre_deriv(n, x, 0)


def eval_degrees(count, x, order=0):
    """Derivative of order 0, 1 or 2 of P_0 .. P_{count-1} at x.

    One sweep of the three-term recurrence (k+1) P_{k+1} = (2k+1) x P_k -
    k P_{k-1}, differentiated term by term, fills all rows; derivatives are
    exact (no finite differences). Returns shape (count,) + x.shape.
    """
    _check_degree(count - 1)
    if order not in (0, 1, 2):
        raise InputError(f"derivative order must be 0, 1 or 2, got {order}")
    xa = np.asarray(x, dtype=float)
    if np.any(np.abs(xa) > 1.0 + _X_TOL):
        raise InputError("evaluation point outside [-1, 1]")
    flat = np.atleast_1d(xa)
    rows = np.empty((count, flat.size))
    p = np.ones_like(flat)
    dp = np.zeros_like(flat)
    ddp = np.zeros_like(flat)
    p_prev = np.zeros_like(flat)
    dp_prev = np.zeros_like(flat)
    ddp_prev = np.zeros_like(flat)
    rows[0] = (p, dp, ddp)[order]
    for k in range(1, count):
        a = (2.0 * k - 1.0) / k
        b = (k - 1.0) / k
        p_next = a * flat * p - b * p_prev
        dp_next = a * (p + flat * dp) - b * dp_prev
        ddp_next = a * (2.0 * dp + flat * ddp) - b * ddp_prev
        p_prev, dp_prev, ddp_prev = p, dp, ddp
        p, dp, ddp = p_next, dp_next, ddp_next
        rows[k] = (p, dp, ddp)[order]
    return rows.reshape((count,) + xa.shape)


def eval_legendre_deriv(n, x, order):
    """Derivative of order 0, 1 or 2 of P_n at x (scalar or array)."""
    out = eval_degrees(n + 1, x, order)[n]
    return out if out.ndim else float(out)


def _shift_argument(x, length):
    if length <= 0:
        raise InputError(f"interval length must be positive, got {length}")
    xa = np.asarray(x, dtype=float)
    tol = _X_TOL * length
    if np.any(xa < -tol) or np.any(xa > length + tol):
        raise InputError(f"coordinate outside [0, {length}]")
    return np.clip((2.0 * xa - length) / length, -1.0, 1.0)


def eval_shifted(n, x, length, order=0):
    """Derivative of the degree-n polynomial shifted onto [0, length].

    The argument map is u = (x - L/2)/(L/2); each derivative order picks up
    a chain-rule factor 2/L.
    """
    u = _shift_argument(x, length)
    return (2.0 / length) ** order * eval_legendre_deriv(n, u, order)


def eval_shifted_degrees(count, x, length, order=0):
    """All shifted polynomials 0 .. count-1 at once, shape (count,) + x.shape."""
    u = _shift_argument(x, length)
    return (2.0 / length) ** order * eval_degrees(count, u, order)


def orthogonality_delta(n, m, length):
    """Integral of the shifted product P_n P_m over [0, length].

    Equals length/(2n+1) when n == m and exactly zero otherwise.
    """
    if n < 0 or m < 0:
        raise InputError("degrees must be nonnegative")
    if length <= 0:
        raise InputError(f"interval length must be positive, got {length}")
    return length / (2.0 * n + 1.0) if n == m else 0.0


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Gauss-Legendre rule on [-1, 1]."""

    nodes: np.ndarray
    weights: np.ndarray

    @property
    def point_count(self):
        return len(self.nodes)

    def mapped(self, a, b):
        """Nodes and weights transplanted to [a, b]."""
        half = 0.5 * (b - a)
        return a + half * (self.nodes + 1.0), half * self.weights


@lru_cache(maxsize=None)
def gauss_rule(m):
    """Gauss-Legendre rule with m points; exact through degree 2m - 1."""
    if not 1 <= m <= 64:
        raise InputError(f"quadrature point count must be in [1, 64], got {m}")
    nodes, weights = np.polynomial.legendre.leggauss(m)
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return QuadratureRule(nodes, weights)


def points_for_degree(degree):
    """Gauss point count for a 1-D polynomial integrand of the given degree.

    One point beyond the exactness minimum, as a margin against roundoff in
    shifted coordinates.
    """
    if degree < 0:
        raise InputError("integrand degree must be nonnegative")
    return (degree + 2) // 2 + 1


@lru_cache(maxsize=None)
def _reference_products(da, db):
    """R[p, q] = integral over [-1, 1] of P_p^(da) P_q^(db), degrees <= MAX_DEGREE.

    The derivative-free table is the exact orthogonality diagonal; the rest
    are filled by quadrature sized for the worst-case degree pair.
    """
    count = MAX_DEGREE + 1
    if da == 0 and db == 0:
        table = np.diag([2.0 / (2.0 * p + 1.0) for p in range(count)])
    else:
        rule = gauss_rule(points_for_degree(2 * MAX_DEGREE))
        va = eval_degrees(count, rule.nodes, da)
        vb = eval_degrees(count, rule.nodes, db)
        table = (va * rule.weights) @ vb.T
    table.flags.writeable = False
    return table


def shifted_products(da, db, length, size):
    """S[p, q] = integral over [0, L] of phi_p^(da) phi_q^(db) dx.

    phi are the shifted polynomials; the table is the reference one scaled
    by (L/2) (2/L)^(da+db).
    """
    if not 1 <= size <= MAX_DEGREE + 1:
        raise InputError(f"table size must be in [1, {MAX_DEGREE + 1}]")
    scale = (length / 2.0) * (2.0 / length) ** (da + db)
    return scale * _reference_products(da, db)[:size, :size]
