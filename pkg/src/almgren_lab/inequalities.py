"""Numerical verification of the weighted Hardy, Rellich and trace inequalities.

Test fields are axisymmetric, built from primitives whose derivatives are
coded in closed form (axis-centered Gaussians, closed-form separable modes,
quadratic polynomials under a smooth radial cutoff), so the quadrature is the
only approximation entering a margin.  Families are generated reproducibly
from a seed.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import (
    AngularGrid1D,
    DomainError,
    RegimeError,
    WeightParams,
    angle_to_xt,
    graded_breaks,
    power_rule,
    unit_sphere_area,
)
from .hemisphere import polynomial_mode


class GaussianBumps:
    """Sum of axis-centered Gaussians, optionally mirrored evenly across t = 0."""

    def __init__(self, components, mirrored: bool = False):
        self.components = [(float(a), float(c), float(w)) for a, c, w in components]
        self.mirrored = mirrored

    def value(self, q, t):
        q = np.asarray(q, dtype=float)
        t = np.asarray(t, dtype=float)
        out = np.zeros(np.broadcast(q, t).shape)
        for a, c, w in self.components:
            out += a * np.exp(-(q ** 2 + (t - c) ** 2) / w ** 2)
            if self.mirrored:
                out += a * np.exp(-(q ** 2 + (t + c) ** 2) / w ** 2)
        return out

    def grad(self, q, t):
        q = np.asarray(q, dtype=float)
        t = np.asarray(t, dtype=float)
        gq = np.zeros(np.broadcast(q, t).shape)
        gt = np.zeros_like(gq)
        for a, c, w in self.components:
            g = a * np.exp(-(q ** 2 + (t - c) ** 2) / w ** 2)
            gq += -2.0 * q / w ** 2 * g
            gt += -2.0 * (t - c) / w ** 2 * g
            if self.mirrored:
                gp = a * np.exp(-(q ** 2 + (t + c) ** 2) / w ** 2)
                gq += -2.0 * q / w ** 2 * gp
                gt += -2.0 * (t + c) / w ** 2 * gp
        return gq, gt

    def lap_b(self, q, t, params: WeightParams):
        q = np.asarray(q, dtype=float)
        t = np.asarray(t, dtype=float)
        N, b = params.N, params.b
        out = np.zeros(np.broadcast(q, t).shape)
        tpos = t > 0
        if np.any(~tpos) and not self.mirrored:
            raise DomainError("lap_b at t = 0 requires a mirrored (even) field")
        for a, c, w in self.components:
            g = a * np.exp(-(q ** 2 + (t - c) ** 2) / w ** 2)
            lap = (-2.0 * N / w ** 2 + 4.0 * q ** 2 / w ** 4) * g \
                + (-2.0 / w ** 2 + 4.0 * (t - c) ** 2 / w ** 4) * g
            drift = -2.0 * (t - c) / w ** 2 * g
            if self.mirrored:
                gp = a * np.exp(-(q ** 2 + (t + c) ** 2) / w ** 2)
                lap += (-2.0 * N / w ** 2 + 4.0 * q ** 2 / w ** 4) * gp \
                    + (-2.0 / w ** 2 + 4.0 * (t + c) ** 2 / w ** 4) * gp
                drift = drift + (-2.0 * (t + c) / w ** 2 * gp)
                # even pair: drift/t has the finite limit below at t = 0
                g0 = a * np.exp(-(q ** 2 + c ** 2) / w ** 2)
                limit = -4.0 / w ** 2 * g0 * (1.0 - 2.0 * c ** 2 / w ** 2)
                ratio = np.where(tpos, drift / np.where(tpos, t, 1.0), limit)
            else:
                ratio = drift / t
            out += lap + b * ratio
        return out


def _chi(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = s < 1.0 - 1e-12
    si = s[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - si ** 2))
    return out


def _chi_ratio(s):
    """chi'(s)/s, analytic: -2 chi(s) / (1 - s^2)^2."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = s < 1.0 - 1e-12
    si = s[inside]
    out[inside] = -2.0 * np.exp(1.0 - 1.0 / (1.0 - si ** 2)) / (1.0 - si ** 2) ** 2
    return out


def _chi_second(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = s < 1.0 - 1e-12
    si = s[inside]
    c = np.exp(1.0 - 1.0 / (1.0 - si ** 2))
    one = 1.0 - si ** 2
    out[inside] = c * (4.0 * si ** 2 / one ** 4 - 2.0 / one ** 2 - 8.0 * si ** 2 / one ** 3)
    return out


class CutoffField:
    """Inner field times the smooth radial cutoff chi(|z| / rho0)."""

    def __init__(self, inner, rho0: float):
        self.inner = inner
        self.rho0 = float(rho0)

    def value(self, q, t):
        rho = np.sqrt(np.asarray(q, dtype=float) ** 2 + np.asarray(t, dtype=float) ** 2)
        return self.inner.value(q, t) * _chi(rho / self.rho0)

    def grad(self, q, t):
        q = np.asarray(q, dtype=float)
        t = np.asarray(t, dtype=float)
        rho = np.sqrt(q ** 2 + t ** 2)
        s = rho / self.rho0
        chi = _chi(s)
        ratio = _chi_ratio(s) / self.rho0 ** 2   # chi'(s) / (s rho0^2)
        f = self.inner.value(q, t)
        fq, ft = self.inner.grad(q, t)
        return chi * fq + f * ratio * q, chi * ft + f * ratio * t

    def lap_b(self, q, t, params: WeightParams):
        q = np.asarray(q, dtype=float)
        t = np.asarray(t, dtype=float)
        rho = np.sqrt(q ** 2 + t ** 2)
        s = rho / self.rho0
        chi = _chi(s)
        ratio = _chi_ratio(s) / self.rho0 ** 2
        second = _chi_second(s) / self.rho0 ** 2
        f = self.inner.value(q, t)
        fq, ft = self.inner.grad(q, t)
        lap_f = self.inner.lap_b(q, t, params)
        lap_chi = second + (params.N + params.b) * ratio
        cross = 2.0 * ratio * (fq * q + ft * t)
        return chi * lap_f + cross + f * lap_chi


class SeparableModeField:
    """Closed-form axisymmetric separable harmonic c1 r^sigma P(psi)."""

    def __init__(self, params: WeightParams, sigma: int, c1: float = 1.0):
        if params.N >= 2 and sigma == 1:
            raise DomainError("sigma = 1 is not axisymmetric for N >= 2")
        self.params = params
        self.mode = polynomial_mode(params, sigma)
        self.sigma = float(sigma)
        self.c1 = float(c1)

    def _polar(self, q, t):
        q = np.asarray(q, dtype=float)
        t = np.asarray(t, dtype=float)
        r = np.sqrt(q ** 2 + t ** 2)
        if self.params.N == 1:
            ang = np.arctan2(t, q)
        else:
            ang = np.arctan2(q, t)
        return r, ang

    def value(self, q, t):
        r, ang = self._polar(q, t)
        return self.c1 * r ** self.sigma * self.mode.profile(ang)

    def grad(self, q, t):
        r, ang = self._polar(q, t)
        safe = np.where(r > 0, r, 1.0)
        fr = self.c1 * self.sigma * safe ** (self.sigma - 1.0) * self.mode.profile(ang)
        fa = self.c1 * safe ** (self.sigma - 1.0) * self.mode.profile.deriv(ang)
        fr = np.where(r > 0, fr, 0.0)
        fa = np.where(r > 0, fa, 0.0)
        if self.params.N == 1:
            return fr * np.cos(ang) - fa * np.sin(ang), fr * np.sin(ang) + fa * np.cos(ang)
        return fr * np.sin(ang) + fa * np.cos(ang), fr * np.cos(ang) - fa * np.sin(ang)

    def lap_b(self, q, t, params: WeightParams):
        r, _ = self._polar(q, t)
        return np.zeros_like(r)


@dataclass(frozen=True)
class TestFamily:
    """Reproducible generator of axisymmetric test fields.

    kind: "bumps" (random Gaussian sums), "modes" (closed-form separable
    harmonics) or "poly" (quadratic polynomial under a smooth cutoff).
    """

    __test__ = False  # keep pytest from collecting the library type

    params: WeightParams
    kind: str = "bumps"
    count: int = 20
    seed: int = 0
    scale: float = 1.0
    mirrored: bool = False
    cutoff_radius: float | None = None

    def fields(self):
        rng = np.random.default_rng(self.seed)
        sigmas = [0, 2] if self.params.N >= 2 else [0, 1, 2]
        for _ in range(self.count):
            if self.kind == "bumps":
                ncomp = int(rng.integers(1, 4))
                comps = [
                    (rng.uniform(-1.0, 1.0),
                     rng.uniform(0.15, 0.6) * self.scale,
                     rng.uniform(0.12, 0.3) * self.scale)
                    for _ in range(ncomp)
                ]
                fld = GaussianBumps(comps, mirrored=self.mirrored)
            elif self.kind == "modes":
                sigma = int(rng.choice(sigmas))
                fld = SeparableModeField(self.params, sigma, c1=rng.uniform(0.5, 2.0))
            elif self.kind == "poly":
                class _Quad:
                    def __init__(self, a0, a1, a2):
                        self.a = (a0, a1, a2)

                    def value(self, q, t):
                        a0, a1, a2 = self.a
                        return a0 + a1 * np.asarray(q, dtype=float) ** 2 + a2 * np.asarray(t, dtype=float) ** 2

                    def grad(self, q, t):
                        _, a1, a2 = self.a
                        return 2 * a1 * np.asarray(q, dtype=float), 2 * a2 * np.asarray(t, dtype=float)

                    def lap_b(self, q, t, params):
                        _, a1, a2 = self.a
                        shape = np.broadcast(np.asarray(q), np.asarray(t)).shape
                        return np.full(shape, 2 * a1 * params.N + a2 * (2 + 2 * params.b))

                inner = _Quad(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1))
                fld = CutoffField(inner, self.cutoff_radius or 0.8 * self.scale)
            else:
                raise DomainError(f"unknown family kind {self.kind!r}")
            if self.cutoff_radius is not None and self.kind == "bumps":
                fld = CutoffField(fld, self.cutoff_radius)
            yield fld


def critical_exponent(params: WeightParams) -> float:
    """Critical trace exponent 2N / (N - 2(s-1))."""
    denom = params.N - 2.0 * (params.s - 1.0)
    if denom <= 0:
        raise DomainError("critical exponent undefined: N <= 2(s-1)")
    return 2.0 * params.N / denom


def _ball_integral(params, sampler, r, extra_power: float,
                   n_radial: int, n_angular: int) -> float:
    """int_0^r rho^{N+b+extra} [bare-angular integral of sampler] drho."""
    ang = AngularGrid1D.for_params(params, n_angular)
    breaks = graded_breaks(1.0, n_radial, grade_start=True)
    p = params.N + params.b + extra_power
    if p <= -1.0:
        raise DomainError(f"radial exponent {p} is not integrable at 0")
    nodes, weights = power_rule(breaks, p)
    rho = nodes * r
    wr = weights * r ** (p + 1.0)
    q, t = angle_to_xt(params, rho[:, None], ang.nodes[None, :])
    vals = sampler(q, t)
    inner = vals @ ang.weights
    return float(ang.area_factor * (wr @ inner))


def check_hardy_trace(params: WeightParams, field, r: float,
                      n_radial: int = 256, n_angular: int = 512) -> float:
    """Margin (RHS - LHS) of the boundary Hardy inequality on B_r^+.

    LHS = ((N+b-1)/(2r))^2 int t^b U^2, RHS = int t^b |grad U|^2 +
    (N+b-1)/(2r) int_{S_r^+} t^b U^2.  A nonnegative margin (up to roundoff)
    verifies the inequality for this field.
    """
    beta1 = params.N + params.b - 1.0
    i_u2 = _ball_integral(params, lambda q, t: field.value(q, t) ** 2, r, 0.0,
                          n_radial, n_angular)
    def grad2(q, t):
        gq, gt = field.grad(q, t)
        return gq ** 2 + gt ** 2
    i_grad = _ball_integral(params, grad2, r, 0.0, n_radial, n_angular)
    ang = AngularGrid1D.for_params(params, n_angular)
    q, t = angle_to_xt(params, r, ang.nodes)
    surf = float(ang.area_factor * (ang.weights @ (field.value(q, t) ** 2)))
    i_surf = r ** (params.N + params.b) * surf
    return i_grad + beta1 / (2.0 * r) * i_surf - (beta1 / (2.0 * r)) ** 2 * i_u2


def check_hardy_rellich(params: WeightParams, field, support_radius: float,
                        n_radial: int = 256, n_angular: int = 512) -> float:
    """Margin of the second-order Hardy-Rellich inequality for a compact field.

    Requires the regime N > 2s and a field with lap_b coded; the field must
    vanish near |z| = support_radius (use a cutoff).
    """
    if not params.paper_regime:
        raise RegimeError(f"Hardy-Rellich requires N > 2s (N = {params.N}, s = {params.s})")
    gap = params.N - 2.0 * params.s
    i_lap = _ball_integral(params, lambda q, t: field.lap_b(q, t, params) ** 2,
                           support_radius, 0.0, n_radial, n_angular)
    i_u2w = _ball_integral(params, lambda q, t: field.value(q, t) ** 2,
                           support_radius, -4.0, n_radial, n_angular)
    def grad2(q, t):
        gq, gt = field.grad(q, t)
        return gq ** 2 + gt ** 2
    i_gradw = _ball_integral(params, grad2, support_radius, -2.0, n_radial, n_angular)
    return i_lap - gap ** 2 * i_u2w - 2.0 * gap * i_gradw


def estimate_sobolev_trace_constant(params: WeightParams, family: TestFamily, r: float,
                                    n_radial: int = 256, n_angular: int = 512,
                                    n_trace: int = 512) -> float:
    """Empirical lower-bound candidate for the Sobolev trace constant.

    Minimum over the family of [int t^b |grad U|^2 + (N+b-1)/(2r) surface term]
    divided by the squared critical trace norm of u = U(., 0); the trace is
    read off by one-sided quadratic extrapolation from the three smallest
    t-levels.  Never the sharp constant, only a certified candidate.
    """
    qstar = critical_exponent(params)
    beta1 = params.N + params.b - 1.0
    eps = 1e-3 * r
    best = math.inf
    skipped = 0
    breaks = graded_breaks(r, n_trace, grade_start=False, grade_end=True)
    xq, xw = power_rule(breaks, float(params.N - 1))
    for field in family.fields():
        def grad2(q, t):
            gq, gt = field.grad(q, t)
            return gq ** 2 + gt ** 2
        i_grad = _ball_integral(params, grad2, r, 0.0, n_radial, n_angular)
        ang = AngularGrid1D.for_params(params, n_angular)
        q, t = angle_to_xt(params, r, ang.nodes)
        i_surf = r ** (params.N + params.b) * float(
            ang.area_factor * (ang.weights @ (field.value(q, t) ** 2)))
        numerator = i_grad + beta1 / (2.0 * r) * i_surf
        # quadratic extrapolation of U to the t = 0 slice
        v1 = field.value(xq, np.full_like(xq, eps))
        v2 = field.value(xq, np.full_like(xq, 2 * eps))
        v3 = field.value(xq, np.full_like(xq, 3 * eps))
        u = 3.0 * v1 - 3.0 * v2 + v3
        mass = float(xw @ np.abs(u) ** qstar)
        if params.N == 1:
            mass *= 2.0  # even coverage of (-r, r) by the axisymmetric family
            denom_area = 1.0
        else:
            denom_area = unit_sphere_area(params.N - 1)
        norm_sq = (denom_area * mass) ** (2.0 / qstar)
        if norm_sq < 1e-28:
            skipped += 1
            warnings.warn("trace vanishes for a family member; skipped", stacklevel=2)
            continue
        best = min(best, numerator / norm_sq)
    if not math.isfinite(best):
        raise DomainError("every family member had vanishing trace")
    return float(best)
