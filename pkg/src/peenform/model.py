"""Plate model: geometry and material spec, tensor-product Legendre basis,
coefficient fields, piecewise-constant intensity maps, moment projection,
and pointwise evaluation of displacement and bending moment resultants.

Coordinates are corner based throughout: the plate occupies [0, L1] x [0, L2].
"""

import warnings
from dataclasses import dataclass

import numpy as np

from . import legendre
from .errors import InputError


@dataclass(frozen=True)
class PlateSpec:
    """Rectangular plate geometry and material constants.

    All lengths share one unit (inches in the shipped documents) and E is a
    pressure in the matching unit system. alpha, the coefficient of thermal
    expansion, is optional: the bending solver never needs it, only the
    equivalent-temperature export does.
    """

    L1: float
    L2: float
    h: float
    E: float
    v: float
    alpha: float | None = None

    def __post_init__(self):
        for name in ("L1", "L2", "h", "E"):
            if getattr(self, name) <= 0:
                raise InputError(f"plate {name} must be positive")
        if not 0.0 < self.v < 0.5:
            raise InputError(f"Poisson ratio must lie in (0, 0.5), got {self.v}")
        if self.h > 0.1 * min(self.L1, self.L2):
            warnings.warn(
                "plate thickness is not small against the side lengths; "
                "thin-plate kinematics may be inaccurate",
                stacklevel=2,
            )

    @property
    def D1(self):
        """Bending rigidity E h^3 / (12 (1 - v^2))."""
        return self.E * self.h**3 / (12.0 * (1.0 - self.v**2))

    @property
    def D2(self):
        """Thermal coupling modulus E / (1 - v)."""
        return self.E / (1.0 - self.v)


@dataclass(frozen=True)
class TensorBasis:
    """Tensor product of N shifted Legendre polynomials per direction.

    Global index n splits into 1-D degrees (n // N, n % N) for the x1 and
    x2 factors respectively.
    """

    plate: PlateSpec
    N: int

    def __post_init__(self):
        if not 2 <= self.N <= legendre.MAX_DEGREE + 1:
            raise InputError(
                f"basis size N must be in [2, {legendre.MAX_DEGREE + 1}], got {self.N}")

    @property
    def size(self):
        return self.N * self.N

    def index_pair(self, n):
        """Global index -> (x1 degree, x2 degree)."""
        if not 0 <= n < self.size:
            raise InputError(f"basis index {n} out of range for N={self.N}")
        return n // self.N, n % self.N

    def factor_values(self, axis, x, order=0):
        """Matrix of 1-D factor values: entry (p, k) is phi_p at point k."""
        length = self.plate.L1 if axis == 1 else self.plate.L2
        pts = np.atleast_1d(np.asarray(x, dtype=float))
        return legendre.eval_shifted_degrees(self.N, pts, length, order)

    def eval_matrix(self, x1, x2, d1=0, d2=0):
        """Pointwise shape-function values: entry (k, n) is Phi_n at point k.

        x1 and x2 are equal-length coordinate arrays (one row per point,
        not an outer grid).
        """
        b1 = self.factor_values(1, x1, d1)
        b2 = self.factor_values(2, x2, d2)
        return (b1[:, None, :] * b2[None, :, :]).reshape(self.size, -1).T


def _coeff_vector(basis, values, name):
    arr = np.asarray(values, dtype=float)
    if arr.shape != (basis.size,):
        raise InputError(
            f"{name} needs {basis.size} coefficients for N={basis.N}, got shape {arr.shape}")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class MomentField:
    """Coefficients of the thermal moment on a tensor basis."""

    basis: TensorBasis
    t: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "t", _coeff_vector(self.basis, self.t, "moment field"))


@dataclass(frozen=True, eq=False)
class DisplacementField:
    """Coefficients of the transverse displacement on a tensor basis."""

    basis: TensorBasis
    a: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", _coeff_vector(self.basis, self.a, "displacement field"))


@dataclass(frozen=True)
class MaskRect:
    """Axis-aligned rectangle receiving zero intensity (taped region)."""

    x1_min: float
    x1_max: float
    x2_min: float
    x2_max: float

    def __post_init__(self):
        if self.x1_min > self.x1_max or self.x2_min > self.x2_max:
            raise InputError("mask rectangle has inverted bounds")

    def clipped(self, plate):
        """Intersection with the plate, or None if nothing remains."""
        lo1, hi1 = max(self.x1_min, 0.0), min(self.x1_max, plate.L1)
        lo2, hi2 = max(self.x2_min, 0.0), min(self.x2_max, plate.L2)
        if lo1 >= hi1 or lo2 >= hi2:
            return None
        return MaskRect(lo1, hi1, lo2, hi2)

    def grown(self, delta):
        """Rectangle with every edge moved outward by delta (inward if
        negative), or None if it collapses."""
        lo1, hi1 = self.x1_min - delta, self.x1_max + delta
        lo2, hi2 = self.x2_min - delta, self.x2_max + delta
        if lo1 >= hi1 or lo2 >= hi2:
            return None
        return MaskRect(lo1, hi1, lo2, hi2)

    def contains(self, x1, x2):
        return (
            (x1 >= self.x1_min) & (x1 <= self.x1_max)
            & (x2 >= self.x2_min) & (x2 <= self.x2_max))


@dataclass(frozen=True)
class IntensityMap:
    """Piecewise-constant shot peen intensity: one base level plus masks.

    Masked rectangles receive zero intensity; overlaps behave as a union.
    sign +1/-1 selects which face is peened and therefore the sign of the
    thermal moment.
    """

    base_intensity: float
    masked_regions: tuple = ()
    sign: int = 1

    def __post_init__(self):
        if self.base_intensity < 0:
            raise InputError("base intensity must be nonnegative")
        if self.sign not in (1, -1):
            raise InputError(f"sign must be +1 or -1, got {self.sign}")
        object.__setattr__(self, "masked_regions", tuple(self.masked_regions))

    def intensity_at(self, x1, x2):
        """Intensity at a point (or arrays of points); zero inside any mask."""
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        masked = np.zeros(np.broadcast(x1, x2).shape, dtype=bool)
        for rect in self.masked_regions:
            masked |= rect.contains(x1, x2)
        out = np.where(masked, 0.0, self.base_intensity)
        return out if out.ndim else float(out)

    def offset(self, delta):
        """Map with every mask edge moved outward by delta.

        Rectangles that collapse to nothing are dropped. Used by the Monte
        Carlo masking perturbation.
        """
        if delta == 0.0:
            return self
        grown = [r for r in (rect.grown(delta) for rect in self.masked_regions) if r is not None]
        return IntensityMap(self.base_intensity, tuple(grown), self.sign)


@dataclass(frozen=True)
class Recipe:
    """Forward-problem bundle: plate, basis size, and intensity layout."""

    plate: PlateSpec
    basis_n: int
    intensity: IntensityMap


def basis_function(basis, n, x, d1=0, d2=0):
    """One tensor shape function (or mixed derivative) at one point."""
    if d1 not in (0, 1, 2) or d2 not in (0, 1, 2) or d1 + d2 > 2:
        raise InputError("derivative orders must satisfy d1, d2 in {0,1,2}, d1+d2 <= 2")
    p, q = basis.index_pair(n)
    x1, x2 = x
    f1 = legendre.eval_shifted(p, x1, basis.plate.L1, d1)
    f2 = legendre.eval_shifted(q, x2, basis.plate.L2, d2)
    return f1 * f2


def _eval_series(basis, coeffs, x, d1=0, d2=0):
    x1, x2 = x
    c = coeffs.reshape(basis.N, basis.N)
    b1 = basis.factor_values(1, x1, d1)[:, 0]
    b2 = basis.factor_values(2, x2, d2)[:, 0]
    return float(b1 @ c @ b2)


def _eval_series_grid(basis, coeffs, x1s, x2s, d1=0, d2=0):
    c = coeffs.reshape(basis.N, basis.N)
    b1 = basis.factor_values(1, x1s, d1)
    b2 = basis.factor_values(2, x2s, d2)
    return b1.T @ c @ b2


def eval_displacement(basis, field, x):
    """Series value of the transverse displacement at a point."""
    return _eval_series(basis, field.a, x)


def eval_displacement_grid(basis, field, x1s, x2s):
    """Displacement on the outer grid x1s x x2s, shape (len(x1s), len(x2s))."""
    return _eval_series_grid(basis, field.a, x1s, x2s)


def eval_moment(basis, field, x):
    """Series value of the thermal moment at a point."""
    return _eval_series(basis, field.t, x)


def eval_moment_grid(basis, field, x1s, x2s):
    """Thermal moment on the outer grid x1s x x2s."""
    return _eval_series_grid(basis, field.t, x1s, x2s)


def moment_resultants(basis, u, tau, spec, x):
    """Bending moment resultants (M1, M2, M12) at a point.

    The exact fully-free solution carries zero resultants, so nonzero
    values measure discretization error.
    """
    u11 = _eval_series(basis, u.a, x, 2, 0)
    u22 = _eval_series(basis, u.a, x, 0, 2)
    u12 = _eval_series(basis, u.a, x, 1, 1)
    tau_x = _eval_series(basis, tau.t, x)
    m1 = spec.D1 * (u22 + spec.v * u11) + spec.D2 * tau_x
    m2 = -spec.D1 * (u11 + spec.v * u22) - spec.D2 * tau_x
    m12 = spec.D1 * (1.0 - spec.v) * u12
    return m1, m2, m12


def _warn_on_coupon_mismatch(cal, plate):
    coupon = getattr(cal, "coupon", None)
    if coupon is None:
        return
    # The fitted slope is specific to material and thickness; small
    # manufacturing scatter (< 5% on h) is not worth a warning.
    h_off = abs(plate.h - coupon.h) > 0.05 * coupon.h
    material_off = plate.E != coupon.E or plate.v != coupon.v
    if h_off or material_off:
        warnings.warn(
            "calibration coupon thickness/material differ from the target plate; "
            "the moment-intensity slope may not transfer",
            stacklevel=3,
        )


def _segment_integrals(basis, axis, cuts):
    """1-D integrals of each shifted factor over each cut interval.

    Returns shape (len(cuts) - 1, N); the integrand degree is at most
    MAX_DEGREE so one fixed Gauss rule is exact on every segment.
    """
    rule = legendre.gauss_rule(legendre.points_for_degree(legendre.MAX_DEGREE))
    out = np.empty((len(cuts) - 1, basis.N))
    for k in range(len(cuts) - 1):
        pts, wts = rule.mapped(cuts[k], cuts[k + 1])
        out[k] = basis.factor_values(axis, pts) @ wts
    return out


def project_moment(basis, intensity, cal=None, cells=16):
    """Project a thermal moment onto the tensor basis.

    For an IntensityMap the moment is sign * K * I(x) with K the calibrated
    slope; the plate is cut along every mask edge so each sub-rectangle has
    a polynomial integrand and the projection integrals are exact. A bare
    callable tau(x1, x2) is accepted as an advanced path and integrated per
    cell on a cells x cells partition.

    Coefficients are the L2 projection t_n = (tau, Phi_n) / (Phi_n, Phi_n)
    with the denominator taken from the orthogonality constants.
    """
    plate = basis.plate
    if callable(intensity):
        numerator = _project_callable(basis, intensity, cells)
    else:
        if cal is None:
            raise InputError("projecting an intensity map requires a calibration model")
        _warn_on_coupon_mismatch(cal, plate)
        numerator = _project_map(basis, intensity, cal)
    den1 = np.array(
        [legendre.orthogonality_delta(p, p, plate.L1) for p in range(basis.N)])
    den2 = np.array(
        [legendre.orthogonality_delta(q, q, plate.L2) for q in range(basis.N)])
    coeffs = numerator / np.outer(den1, den2)
    return MomentField(basis, coeffs.reshape(-1))


def _project_map(basis, imap, cal):
    plate = basis.plate
    tau_base = imap.sign * cal.slope_K * imap.base_intensity
    # A constant integrates exactly against the basis: only the (0, 0) mode.
    numerator = np.zeros((basis.N, basis.N))
    numerator[0, 0] = tau_base * plate.L1 * plate.L2
    rects = [r for r in (m.clipped(plate) for m in imap.masked_regions) if r is not None]
    if not rects or tau_base == 0.0:
        return numerator
    cuts1 = sorted({0.0, plate.L1, *(r.x1_min for r in rects), *(r.x1_max for r in rects)})
    cuts2 = sorted({0.0, plate.L2, *(r.x2_min for r in rects), *(r.x2_max for r in rects)})
    seg1 = _segment_integrals(basis, 1, cuts1)
    seg2 = _segment_integrals(basis, 2, cuts2)
    mid1 = 0.5 * (np.asarray(cuts1[:-1]) + np.asarray(cuts1[1:]))
    mid2 = 0.5 * (np.asarray(cuts2[:-1]) + np.asarray(cuts2[1:]))
    masked = np.zeros((len(mid1), len(mid2)), dtype=bool)
    for r in rects:
        masked |= r.contains(mid1[:, None], mid2[None, :])
    # Subtract the masked union cell by cell (overlaps appear once).
    numerator -= tau_base * seg1.T @ masked @ seg2
    return numerator


def _project_callable(basis, tau, cells):
    plate = basis.plate
    rule = legendre.gauss_rule(legendre.points_for_degree(legendre.MAX_DEGREE))
    edges1 = np.linspace(0.0, plate.L1, cells + 1)
    edges2 = np.linspace(0.0, plate.L2, cells + 1)
    pts1, wts1 = [], []
    for k in range(cells):
        p, w = rule.mapped(edges1[k], edges1[k + 1])
        pts1.append(p)
        wts1.append(w)
    pts1 = np.concatenate(pts1)
    wts1 = np.concatenate(wts1)
    pts2, wts2 = [], []
    for k in range(cells):
        p, w = rule.mapped(edges2[k], edges2[k + 1])
        pts2.append(p)
        wts2.append(w)
    pts2 = np.concatenate(pts2)
    wts2 = np.concatenate(wts2)
    values = np.asarray(tau(pts1[:, None], pts2[None, :]), dtype=float)
    b1 = basis.factor_values(1, pts1) * wts1
    b2 = basis.factor_values(2, pts2) * wts2
    return b1 @ values @ b2.T


def analytic_uniform_solution(spec, tau, basis):
    """Corner-zeroed paraboloid response to a spatially uniform thermal moment.

    The uniform-moment solution family is quadratic; fixing the rigid-body
    terms so the three pinned corners vanish gives

        u = (6 tau / h^3) [ (L1^2 + L2^2)/4 - (x1 - L1/2)^2 - (x2 - L2/2)^2 ],

    whose fourth corner is zero by symmetry. The N >= 3 basis represents it
    exactly: only the (0,0), (2,0) and (0,2) modes are populated.
    """
    if basis.N < 3:
        raise InputError("the uniform solution needs a basis with N >= 3")
    scale = tau / spec.h**3
    coeffs = np.zeros((basis.N, basis.N))
    coeffs[0, 0] = scale * (spec.L1**2 + spec.L2**2)
    coeffs[2, 0] = -scale * spec.L1**2
    coeffs[0, 2] = -scale * spec.L2**2
    return DisplacementField(basis, coeffs.reshape(-1))
