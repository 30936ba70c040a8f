"""Exact separable solutions of the extended system and the blow-up fitter.

A synthesized solution is a finite sum of terms built on hemisphere modes:
for a mode with exponent s = sigma_plus and eigenvalue mu, the radial parts

    phi(r)  = c1 r^s + (d1 / K) r^{s+2},      phi~(r) = d1 r^s,

with K the resonance constant, produce a pair (U, V) satisfying D_b U = V and
D_b V = 0 exactly.  The angular factor is the mode profile times the
normalized representative harmonic of its sector, so modes are orthonormal on
the weighted half sphere and all quadratic functionals decouple into blocks
of equal wavenumber.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    AngularGrid1D,
    ClassificationError,
    DomainError,
    InputError,
    WeightParams,
)
from .hemisphere import SpectralMode, k_constant, sphere_harmonic_value


@dataclass(frozen=True)
class Term:
    """One separable building block (mode, c1, d1) with its radial power laws."""

    mode: SpectralMode
    c1: float
    d1: float

    @property
    def sigma(self) -> float:
        return self.mode.sigma_plus

    @property
    def K(self) -> float:
        return k_constant(self.mode.params, self.mode)

    @property
    def e(self) -> float:
        """Coefficient of the r^{sigma+2} correction in the U radial part."""
        return self.d1 / self.K if self.d1 != 0.0 else 0.0

    def phi(self, r):
        r = np.asarray(r, dtype=float)
        return self.c1 * r ** self.sigma + self.e * r ** (self.sigma + 2.0)

    def dphi(self, r):
        r = np.asarray(r, dtype=float)
        s = self.sigma
        out = np.zeros_like(r)
        if self.c1 != 0.0:
            out = out + self.c1 * s * r ** (s - 1.0)
        if self.e != 0.0:
            out = out + self.e * (s + 2.0) * r ** (s + 1.0)
        return out

    def phi_tilde(self, r):
        r = np.asarray(r, dtype=float)
        return self.d1 * r ** self.sigma

    def dphi_tilde(self, r):
        r = np.asarray(r, dtype=float)
        s = self.sigma
        if self.d1 == 0.0:
            return np.zeros_like(r)
        return self.d1 * s * r ** (s - 1.0)


@dataclass(frozen=True)
class SeparableSolution:
    """Finite list of separable terms, evaluable for radii up to R."""

    params: WeightParams
    terms: tuple[Term, ...]
    R: float

    @property
    def is_zero(self) -> bool:
        return all(t.c1 == 0.0 and t.d1 == 0.0 for t in self.terms) or not self.terms

    def blocks(self) -> dict[int, list[Term]]:
        out: dict[int, list[Term]] = {}
        for term in self.terms:
            out.setdefault(term.mode.block_key(), []).append(term)
        return out

    def exponent_candidates(self) -> list[float]:
        sig = sorted({t.sigma for t in self.terms})
        return sig + [s + 2.0 for s in sig]


def synthesize(params: WeightParams, spec, modes=None, allow_zero: bool = False) -> SeparableSolution:
    """Build an exact solution pair from (mode, c1, d1) triples.

    Entries may reference modes directly or by integer position into `modes`
    (as produced by `hemisphere_eigs`).  Duplicate modes are merged by adding
    coefficients.  The all-zero synthesis is rejected unless `allow_zero`.
    """
    resolved: dict[tuple, Term] = {}
    for entry in spec:
        mode, c1, d1 = entry
        if isinstance(mode, (int, np.integer)):
            if modes is None:
                raise InputError("integer mode references require the modes list")
            mode = modes[int(mode)]
        if mode.params != params:
            raise InputError("mode parameters do not match the synthesis parameters")
        if not (np.isfinite(c1) and np.isfinite(d1)):
            raise InputError("non-finite coefficient")
        key = (mode.block_key(), round(float(mode.mu), 12))
        if key in resolved:
            prev = resolved[key]
            resolved[key] = Term(mode=prev.mode, c1=prev.c1 + float(c1), d1=prev.d1 + float(d1))
        else:
            resolved[key] = Term(mode=mode, c1=float(c1), d1=float(d1))
    terms = tuple(sorted(resolved.values(), key=lambda t: (t.sigma, t.mode.k)))
    sol = SeparableSolution(params=params, terms=terms, R=params.R)
    if sol.is_zero and not allow_zero:
        raise DomainError("all coefficients vanish; pass allow_zero=True for the zero solution")
    for term in terms:
        if term.d1 != 0.0:
            term.K  # noqa: B018 - raises DegenerateResonanceError on a bad mode
    return sol


@dataclass(frozen=True)
class EvalResult:
    U: float
    V: float
    grad_U: tuple[float, float]   # (d/dr, (1/r) d/dpsi)
    grad_V: tuple[float, float]


def eval_solution(sol: SeparableSolution, r: float, psi: float, chi: float = 0.0) -> EvalResult:
    """Point values and in-plane gradients of (U, V) at radius r, angle psi.

    For wavenumber k >= 1 the horizontal factor is evaluated on the meridian
    at angle chi from the representative axis; the returned gradient has the
    radial and polar components only (the meridian at chi = 0 is a critical
    direction of the zonal factor).
    """
    if not (0.0 < r <= sol.R * (1 + 1e-12)):
        raise DomainError(f"radius {r} outside (0, {sol.R}]")
    U = V = dUr = dVr = dUp = dVp = 0.0
    for term in sol.terms:
        omega = sphere_harmonic_value(sol.params.N, term.mode.k, chi)
        p = float(term.mode.profile(psi)) * omega
        dp = float(term.mode.profile.deriv(psi)) * omega
        U += float(term.phi(r)) * p
        V += float(term.phi_tilde(r)) * p
        dUr += float(term.dphi(r)) * p
        dVr += float(term.dphi_tilde(r)) * p
        dUp += float(term.phi(r)) * dp
        dVp += float(term.phi_tilde(r)) * dp
    return EvalResult(U=U, V=V, grad_U=(dUr, dUp / r), grad_V=(dVr, dVp / r))


def fourier_coefficient(
    sol: SeparableSolution,
    mode: SpectralMode,
    lam: float,
    grid: AngularGrid1D | None = None,
) -> tuple[float, float]:
    """Weighted angular coefficients (phi, phi~) of (U, V) against a mode at radius lam.

    Blocks with a wavenumber different from the mode's integrate to zero
    exactly by horizontal-harmonic orthogonality; the polar integral is
    numerical quadrature.
    """
    if not (0.0 < lam <= sol.R * (1 + 1e-12)):
        raise DomainError(f"radius {lam} outside (0, {sol.R}]")
    grid = grid or AngularGrid1D.for_params(sol.params, 2048)
    key = mode.block_key()
    terms = [t for t in sol.terms if t.mode.block_key() == key]
    if not terms:
        return 0.0, 0.0
    p_mode = mode.profile(grid.nodes)
    f_u = np.zeros_like(grid.nodes)
    f_v = np.zeros_like(grid.nodes)
    for t in terms:
        p = t.mode.profile(grid.nodes)
        f_u += float(t.phi(lam)) * p
        f_v += float(t.phi_tilde(lam)) * p
    return (
        float(grid.integrate_bare(f_u * p_mode)),
        float(grid.integrate_bare(f_v * p_mode)),
    )


@dataclass(frozen=True)
class CoefficientFit:
    """Result of fitting radial samples to the two-exponent separable model."""

    sigma_used: float
    c1_hat: float
    d1_hat: float
    residual: float
    delta1: float
    delta2: float | None
    branch: str  # "sigma_plus" or "sigma_plus_two"


def fit_blowup(samples, sigma_candidates, params: WeightParams,
               residual_tol: float = 1e-3) -> CoefficientFit:
    """Least-squares fit of (c1, d1) over candidate exponents; classifies delta.

    `samples` is an iterable of (lambda, phi, phi~) rows covering at least six
    radii spanning a decade.  For each candidate sigma the model is linear in
    (c1, d1/K); the candidate with minimal relative residual wins.  If every
    candidate leaves a relative residual above `residual_tol` a
    ClassificationError reports the failure.
    """
    data = np.asarray(list(samples), dtype=float)
    if data.ndim != 2 or data.shape[1] != 3:
        raise InputError("samples must be rows (lambda, phi, phi_tilde)")
    lam, phi, phit = data[:, 0], data[:, 1], data[:, 2]
    if lam.size < 6:
        raise DomainError("need at least 6 radii")
    if lam.max() / lam.min() < 9.99:
        raise DomainError("radii must span at least a decade")
    if not np.all(np.isfinite(data)):
        raise InputError("non-finite sample")
    scale = float(np.max(np.abs(np.column_stack([phi, phit]))))
    if scale == 0.0:
        raise DomainError("all samples vanish; nothing to classify")

    best = None
    for sigma in sorted(set(float(s) for s in sigma_candidates)):
        K = k_constant(params, sigma * (sigma + params.N + params.b - 1.0))
        keep = np.abs(phi) >= 1e-13 * scale
        A = np.column_stack([lam[keep] ** sigma, lam[keep] ** (sigma + 2.0)])
        sol_u, *_ = np.linalg.lstsq(A, phi[keep], rcond=None)
        res_u = phi[keep] - A @ sol_u
        keep_v = np.abs(phit) >= 1e-13 * scale
        if np.any(keep_v):
            Av = lam[keep_v][:, None] ** sigma
            sol_v, *_ = np.linalg.lstsq(Av, phit[keep_v], rcond=None)
            d1 = float(sol_v[0])
            res_v = phit[keep_v] - Av[:, 0] * d1
        else:
            d1 = float(sol_u[1]) * K
            res_v = np.zeros(0)
        rel = math.sqrt(
            (float(res_u @ res_u) + float(res_v @ res_v))
            / (float(phi @ phi) + float(phit @ phit))
        )
        if best is None or rel < best[0]:
            best = (rel, sigma, float(sol_u[0]), float(sol_u[1]), d1, K)
    rel, sigma, c1, e_coef, d1, K = best
    if rel > residual_tol:
        raise ClassificationError(
            f"no candidate exponent fits the samples; best relative residual {rel:.3e} "
            f"at sigma = {sigma}"
        )
    if d1 == 0.0 and e_coef != 0.0:
        d1 = e_coef * K
    lam_ref = float(np.exp(np.mean(np.log(lam))))
    c1_scale = abs(c1) * lam_ref ** sigma
    e_scale = abs(e_coef) * lam_ref ** (sigma + 2.0)
    if c1_scale >= 1e-7 * max(c1_scale + e_scale, 1e-300):
        branch, delta1 = "sigma_plus", sigma
    else:
        branch, delta1 = "sigma_plus_two", sigma + 2.0
    d_scale = abs(d1) * lam_ref ** sigma
    delta2 = sigma if d_scale > 1e-12 * scale else None
    return CoefficientFit(sigma_used=sigma, c1_hat=c1, d1_hat=d1, residual=rel,
                          delta1=delta1, delta2=delta2, branch=branch)
