"""Parameter bundle, weighted grids and quadrature on the half ball and half sphere.

Geometry conventions used throughout the package:

* Points of the upper half space are z = (x, t) with x in R^N and t > 0;
  the degenerate measure is t^b dz with b in (-1, 1).
* For N >= 2 a point of the unit half sphere S^N_+ is (sin(psi) w, cos(psi))
  with w in S^{N-1} and polar angle psi in [0, pi/2], so the vertical
  coordinate is theta_{N+1} = cos(psi) and the equator is {psi = pi/2}.
* For N = 1 the half circle is parameterized by a single angle phi in (0, pi),
  the point being (cos(phi), sin(phi)); the weight along the arc is sin(phi)^b.

All grid and rule objects are immutable after construction and every
operation in this module is pure, so values can be shared freely between
threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

DEFAULT_RADIAL_NODES = 128
DEFAULT_ANGULAR_NODES = 256
GRADING_RATIO = 0.85


class AlmgrenLabError(Exception):
    """Base class for library errors."""


class DomainError(AlmgrenLabError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class InputError(AlmgrenLabError, ValueError):
    """Malformed input (non-finite samples, inconsistent shapes, ...)."""


class RegimeError(DomainError):
    """Operation requires the dimensional regime N > 2s."""


class ResolutionError(AlmgrenLabError):
    """Requested output needs a finer discretization; message suggests one."""


class SolverError(AlmgrenLabError):
    """A linear or eigen solve failed; message carries a condition estimate."""


class DegenerateResonanceError(AlmgrenLabError):
    """The resonance denominator K is numerically zero; refusing to divide."""


class VanishingDenominatorError(AlmgrenLabError):
    """H(r) is not positive at the requested radius."""


class ClassificationError(AlmgrenLabError):
    """No candidate exponent explains the data within tolerance."""


class UnmatchedExponentError(AlmgrenLabError):
    """Extrapolated vanishing order matches no spectral exponent."""


class TraceProportionalityError(AlmgrenLabError):
    """Frequency-wise trace ratio is not constant within tolerance."""


@dataclass(frozen=True)
class WeightParams:
    """Parameter bundle (s, b, N, R) for the degenerate weight t^b, b = 3 - 2s.

    The weight exponent is derived, so ``b == 3 - 2*s`` holds exactly.  The
    flag `paper_regime` is true iff N > 2s; computations are permitted outside
    that regime but several estimates only hold inside it.
    """

    s: float
    N: int
    R: float = 1.0

    def __post_init__(self):
        if not (1.0 < self.s < 2.0):
            raise DomainError(f"order s must lie in (1, 2), got {self.s}")
        if int(self.N) != self.N or self.N < 1:
            raise DomainError(f"dimension N must be an integer >= 1, got {self.N}")
        if not (self.R > 0 and math.isfinite(self.R)):
            raise DomainError(f"reference radius R must be positive, got {self.R}")
        object.__setattr__(self, "N", int(self.N))

    @classmethod
    def from_b(cls, b: float, N: int, R: float = 1.0) -> "WeightParams":
        if not (-1.0 < b < 1.0):
            raise DomainError(f"weight exponent b must lie in (-1, 1), got {b}")
        return cls(s=(3.0 - b) / 2.0, N=N, R=R)

    @property
    def b(self) -> float:
        return 3.0 - 2.0 * self.s

    @property
    def alpha(self) -> float:
        """Bessel-order parameter alpha = (1 - b)/2 = s - 1, in (0, 1)."""
        return (1.0 - self.b) / 2.0

    @property
    def paper_regime(self) -> bool:
        return self.N > 2.0 * self.s

    @property
    def dim_weight(self) -> float:
        """Effective weighted dimension offset N + b."""
        return self.N + self.b


def unit_sphere_area(dim: int) -> float:
    """Surface measure of the unit sphere S^dim embedded in R^{dim+1}."""
    if dim < 0:
        raise DomainError("sphere dimension must be >= 0")
    return 2.0 * math.pi ** ((dim + 1) / 2.0) / math.exp(gammaln((dim + 1) / 2.0))


def weighted_angular_moment(exp_sin: float, exp_cos: float) -> float:
    """Closed form of the quarter-period moment int_0^{pi/2} sin^a cos^c dpsi."""
    if exp_sin <= -1 or exp_cos <= -1:
        raise DomainError("moment exponents must exceed -1")
    return 0.5 * math.exp(
        gammaln((exp_sin + 1) / 2.0)
        + gammaln((exp_cos + 1) / 2.0)
        - gammaln((exp_sin + exp_cos + 2) / 2.0)
    )


def graded_breaks(
    length: float,
    n_cells: int,
    *,
    ratio: float = GRADING_RATIO,
    grade_start: bool = True,
    grade_end: bool = False,
    depth: float = 1e-12,
) -> np.ndarray:
    """Cell breakpoints on [0, length], geometrically graded toward chosen ends.

    Cell widths shrink by `ratio` per cell when approaching a graded end, down
    to roughly `depth` times the bulk width; the remaining cells are uniform.
    """
    if n_cells < 4:
        raise DomainError("need at least 4 cells")
    m = int(math.ceil(math.log(depth) / math.log(ratio)))
    n_start = min(n_cells // 3, m) if grade_start else 0
    n_end = min(n_cells // 3, m) if grade_end else 0
    n_uniform = n_cells - n_start - n_end
    widths = np.concatenate([
        ratio ** np.arange(n_start, 0, -1),
        np.ones(n_uniform),
        ratio ** np.arange(1, n_end + 1),
    ])
    breaks = np.concatenate([[0.0], np.cumsum(widths)])
    breaks *= length / breaks[-1]
    breaks[-1] = length
    return breaks


def power_rule(breaks: np.ndarray, p: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights approximating int x^p f(x) dx over [breaks0, breaks-1].

    The moments of x^p are integrated exactly against a piecewise-linear
    interpolant of f, so the singular/degenerate factor is never evaluated at
    a break point; f is sampled at the breaks themselves.  Weights are
    nonnegative.  Requires p > -1 when the interval starts at 0.
    """
    breaks = np.asarray(breaks, dtype=float)
    a, c = breaks[:-1], breaks[1:]
    if breaks[0] == 0.0 and p <= -1.0:
        raise DomainError(f"exponent p = {p} is not integrable at 0")
    m0 = (c ** (p + 1) - a ** (p + 1)) / (p + 1)
    m1 = (c ** (p + 2) - a ** (p + 2)) / (p + 2)
    h = c - a
    w_left = (c * m0 - m1) / h
    w_right = (m1 - a * m0) / h
    weights = np.zeros_like(breaks)
    weights[:-1] += w_left
    weights[1:] += w_right
    return breaks.copy(), weights


def _sinc_ratio(u: np.ndarray) -> np.ndarray:
    """sin(u)/u with the removable singularity filled in."""
    u = np.asarray(u, dtype=float)
    out = np.ones_like(u)
    nz = u != 0.0
    out[nz] = np.sin(u[nz]) / u[nz]
    return out


@dataclass(frozen=True)
class AngularGrid1D:
    """Composite quadrature nodes for the polar interval with weight theta^b.

    For N >= 2 the nodes live on (0, pi/2] and `weights` integrate
    int_0^{pi/2} g(psi) sin^{N-1}(psi) cos^b(psi) dpsi (the "bare" integral;
    multiply by `area_factor` for the full integral of an axisymmetric g over
    S^N_+).  For N = 1 the nodes cover (0, pi) with weight sin^b(phi) and
    `area_factor` is 1.  Endpoint cells integrate the degenerate factor u^b
    in closed form; the factor is never evaluated at u = 0.
    """

    N: int
    b: float
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.nodes.flags.writeable = False
        self.weights.flags.writeable = False

    @property
    def area_factor(self) -> float:
        return 1.0 if self.N == 1 else unit_sphere_area(self.N - 1)

    @classmethod
    @lru_cache(maxsize=64)
    def build(cls, N: int, b: float, n: int = DEFAULT_ANGULAR_NODES) -> "AngularGrid1D":
        if n < 16:
            raise DomainError("angular resolution too low; use n >= 16")
        if N == 1:
            # phi in (0, pi); weight sin^b(phi) degenerates at both ends.
            half = math.pi / 2.0
            br = graded_breaks(half, n // 2, grade_start=True)
            u_nodes, u_weights = power_rule(br, b)
            fold = _sinc_ratio(u_nodes) ** b
            # left half: phi = u; right half: phi = pi - u (mirror image).
            phi = np.concatenate([u_nodes, math.pi - u_nodes[::-1]])
            wts = np.concatenate([u_weights * fold, (u_weights * fold)[::-1]])
            phi, inverse = np.unique(phi, return_inverse=True)
            weights = np.zeros_like(phi)
            np.add.at(weights, inverse, wts)
            return cls(N=N, b=b, nodes=phi, weights=weights)
        # N >= 2: u = pi/2 - psi measures distance to the degenerate equator.
        br = graded_breaks(math.pi / 2.0, n, grade_start=True)
        u_nodes, u_weights = power_rule(br, b)
        psi = math.pi / 2.0 - u_nodes
        fold = _sinc_ratio(u_nodes) ** b * np.sin(psi) ** (N - 1)
        order = np.argsort(psi)
        return cls(N=N, b=b, nodes=psi[order], weights=(u_weights * fold)[order])

    @classmethod
    def for_params(cls, params: WeightParams, n: int = DEFAULT_ANGULAR_NODES) -> "AngularGrid1D":
        return cls.build(params.N, params.b, n)

    def integrate_bare(self, values: np.ndarray) -> float:
        values = np.asarray(values, dtype=float)
        if values.shape != self.nodes.shape:
            raise InputError("sample shape does not match angular grid")
        if not np.all(np.isfinite(values)):
            raise InputError("non-finite angular sample")
        return float(self.weights @ values)

    def sample(self, g) -> np.ndarray:
        values = np.asarray(g(self.nodes), dtype=float)
        if values.shape != self.nodes.shape:
            values = np.broadcast_to(values, self.nodes.shape).astype(float)
        return values


@dataclass(frozen=True)
class HalfBallGrid:
    """Tensor quadrature grid for the half ball B_R^+ with measure t^b dz.

    In polar coordinates z = rho * theta the measure splits into
    rho^{N+b} d(rho) x theta_{N+1}^b dS(theta); the radial rule carries the
    rho^{N+b} moments exactly per cell and is geometrically graded toward 0,
    the angular factor is an `AngularGrid1D`.  Fields are sampled
    axisymmetrically as f(rho, angle).
    """

    params: WeightParams
    R: float
    radial_nodes: np.ndarray   # normalized to (0, 1]
    radial_weights: np.ndarray  # for int_0^1 x^{N+b} f dx
    angular: AngularGrid1D

    def __post_init__(self):
        self.radial_nodes.flags.writeable = False
        self.radial_weights.flags.writeable = False

    @classmethod
    def build(
        cls,
        params: WeightParams,
        *,
        n_radial: int = DEFAULT_RADIAL_NODES,
        n_angular: int = DEFAULT_ANGULAR_NODES,
        R: float | None = None,
    ) -> "HalfBallGrid":
        if n_radial < 8:
            raise DomainError("radial resolution too low; use n_radial >= 8")
        breaks = graded_breaks(1.0, n_radial, grade_start=True)
        nodes, weights = power_rule(breaks, params.N + params.b)
        ang = AngularGrid1D.for_params(params, n_angular)
        return cls(params=params, R=params.R if R is None else R,
                   radial_nodes=nodes, radial_weights=weights, angular=ang)

    def radial_rule(self, r: float) -> tuple[np.ndarray, np.ndarray]:
        """Scaled nodes/weights for int_0^r rho^{N+b} g(rho) drho."""
        scale = r ** (self.params.N + self.params.b + 1)
        return self.radial_nodes * r, self.radial_weights * scale

    def integrate(self, f, r: float) -> float:
        """Integral of t^b f over B_r^+ for an axisymmetric field f(rho, angle)."""
        if not (0 < r <= self.R * (1 + 1e-12)):
            raise DomainError(f"radius {r} outside grid coverage (0, {self.R}]")
        rho, wr = self.radial_rule(r)
        values = np.asarray(f(rho[:, None], self.angular.nodes[None, :]), dtype=float)
        if values.shape != (rho.size, self.angular.nodes.size):
            raise InputError("field sample has wrong shape")
        if not np.all(np.isfinite(values)):
            raise InputError("non-finite field sample")
        inner = values @ self.angular.weights
        return float(self.angular.area_factor * (wr @ inner))


def integrate_halfball(
    f,
    params: WeightParams,
    r: float,
    *,
    grid: HalfBallGrid | None = None,
    n_radial: int = DEFAULT_RADIAL_NODES,
    n_angular: int = DEFAULT_ANGULAR_NODES,
) -> float:
    """Approximate int_{B_r^+} t^b f dz for an axisymmetric field f(rho, angle).

    `f` is a callable receiving broadcastable arrays (rho, angle); the angle
    is the polar angle psi for N >= 2 and the arc angle phi for N = 1.
    """
    if grid is None:
        grid = HalfBallGrid.build(params, n_radial=n_radial, n_angular=n_angular,
                                  R=max(params.R, r))
    return grid.integrate(f, r)


def integrate_halfsphere(
    g,
    params: WeightParams,
    r: float,
    *,
    grid: AngularGrid1D | None = None,
    n_angular: int = DEFAULT_ANGULAR_NODES,
) -> float:
    """Approximate int_{S_r^+} t^b g dS for g given as a function of the angle.

    The point associated with angle a on the sphere of radius r is
    r*(sin(a) w, cos(a)) for N >= 2 and r*(cos(a), sin(a)) for N = 1.
    """
    if not (r > 0 and math.isfinite(r)):
        raise DomainError(f"radius must be positive and finite, got {r}")
    if grid is None:
        grid = AngularGrid1D.for_params(params, n_angular)
    values = grid.sample(g)
    bare = grid.integrate_bare(values)
    return float(r ** (params.N + params.b) * grid.area_factor * bare)


def angle_to_xt(params: WeightParams, r, angle):
    """Cartesian-like coordinates (q, t) of the point at (r, angle).

    q is the signed horizontal coordinate for N = 1 and the horizontal radius
    |x| for N >= 2; t is the vertical coordinate.
    """
    r = np.asarray(r, dtype=float)
    angle = np.asarray(angle, dtype=float)
    if params.N == 1:
        return r * np.cos(angle), r * np.sin(angle)
    return r * np.sin(angle), r * np.cos(angle)
