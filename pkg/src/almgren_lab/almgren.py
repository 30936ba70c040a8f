"""Frequency function machinery: D, H, N, derivative identities and limits.

Every quantity is available through two independent paths.  The closed-form
path exploits mode orthonormality: each term contributes explicit power laws
whose radial integrals are evaluated analytically.  The quadrature path
reduces the horizontal sphere exactly (harmonic orthogonality is structural)
and integrates the polar angle and the radius numerically on the graded
grids of `core`.  Derivative identities are checked, never used as shortcuts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    DomainError,
    HalfBallGrid,
    UnmatchedExponentError,
    VanishingDenominatorError,
    WeightParams,
)
from .synthesis import SeparableSolution

QUAD_RADIAL = 1024
QUAD_ANGULAR = 2048


# ---------------------------------------------------------------------------
# closed-form path


def _r_power(coef: float, q: float, r: float) -> float:
    """coef * r^q / q, guarding nonpositive exponents of active coefficients."""
    if coef == 0.0:
        return 0.0
    if q <= 0.0:
        raise DomainError(
            f"radial integral of exponent {q - 1} diverges at 0; "
            "this synthesis is outside the integrable range"
        )
    return coef * r ** q / q


@dataclass(frozen=True)
class _TermPieces:
    """Closed-form ingredients of one term at a given radius."""

    ball_grad: float      # int_{B_r^+} t^b (|grad U|^2 + |grad V|^2)
    ball_uv: float        # int_{B_r^+} t^b U V
    ball_v_zgrad: float   # int_{B_r^+} t^b V (z . grad U)
    s_u2: float           # int_{S_r^+} t^b (U^2 + V^2)
    s_uu: float           # int_{S_r^+} t^b (U U_nu + V V_nu)
    s_grad: float         # int_{S_r^+} t^b (|grad U|^2 + |grad V|^2)
    s_nu: float           # int_{S_r^+} t^b (U_nu^2 + V_nu^2)
    s_uv: float           # int_{S_r^+} t^b U V


def _term_pieces(term, r: float) -> _TermPieces:
    p = term.mode.params
    beta = p.N + p.b
    s, mu = term.sigma, term.mode.mu
    c1, e, d1 = term.c1, term.e, term.d1
    ball_grad = (
        _r_power(c1 * c1 * (s * s + mu) + d1 * d1 * (s * s + mu), 2 * s + beta - 1, r)
        + _r_power(2 * c1 * e * (s * (s + 2) + mu), 2 * s + beta + 1, r)
        + _r_power(e * e * ((s + 2) ** 2 + mu), 2 * s + beta + 3, r)
    )
    ball_uv = _r_power(c1 * d1, 2 * s + beta + 1, r) + _r_power(e * d1, 2 * s + beta + 3, r)
    ball_v_zgrad = (
        _r_power(c1 * d1 * s, 2 * s + beta + 1, r)
        + _r_power(e * d1 * (s + 2), 2 * s + beta + 3, r)
    )
    phi = term.phi(r)
    dphi = term.dphi(r)
    phit = term.phi_tilde(r)
    dphit = term.dphi_tilde(r)
    rb = r ** beta
    s_u2 = rb * (phi * phi + phit * phit)
    s_uu = rb * (phi * dphi + phit * dphit)
    s_grad = rb * (dphi * dphi + dphit * dphit + mu * (phi * phi + phit * phit) / r ** 2)
    s_nu = rb * (dphi * dphi + dphit * dphit)
    s_uv = rb * phi * phit
    return _TermPieces(ball_grad, ball_uv, ball_v_zgrad, s_u2, s_uu, s_grad, s_nu, s_uv)


def _closed_pieces(sol: SeparableSolution, r: float) -> _TermPieces:
    acc = np.zeros(8)
    for term in sol.terms:
        pieces = _term_pieces(term, r)
        acc += np.array([
            pieces.ball_grad, pieces.ball_uv, pieces.ball_v_zgrad, pieces.s_u2,
            pieces.s_uu, pieces.s_grad, pieces.s_nu, pieces.s_uv,
        ])
    return _TermPieces(*acc)


# ---------------------------------------------------------------------------
# quadrature path


class _QuadContext:
    """Angular pair integrals per block plus a radial rule, built once per call."""

    def __init__(self, sol: SeparableSolution, n_radial: int, n_angular: int):
        self.sol = sol
        p = sol.params
        self.params = p
        self.ball = HalfBallGrid.build(p, n_radial=n_radial, n_angular=n_angular,
                                       R=sol.R)
        grid = self.ball.angular
        self.grid = grid
        nodes = grid.nodes
        w = grid.weights
        if p.N >= 2:
            sin2 = np.sin(nodes) ** 2
            w_pot = np.where(w > 0, w / np.where(sin2 > 0, sin2, 1.0), 0.0)
            w_pot[sin2 == 0] = 0.0
        else:
            w_pot = None
        self.blocks = []
        for k, terms in sol.blocks().items():
            pvals = [np.asarray(t.mode.profile(nodes), dtype=float) for t in terms]
            dvals = [np.asarray(t.mode.profile.deriv(nodes), dtype=float) for t in terms]
            m = len(terms)
            A = np.empty((m, m))
            E = np.empty((m, m))
            kappa = k * (k + p.N - 2) if p.N >= 2 else 0
            for i in range(m):
                for j in range(i, m):
                    A[i, j] = A[j, i] = float(w @ (pvals[i] * pvals[j]))
                    energy = float(w @ (dvals[i] * dvals[j]))
                    if kappa and w_pot is not None:
                        energy += kappa * float(w_pot @ (pvals[i] * pvals[j]))
                    E[i, j] = E[j, i] = energy
            self.blocks.append((terms, A, E))

    def radial(self, r: float):
        rho, wr = self.ball.radial_rule(r)
        if rho[0] == 0.0:     # drop the origin node; its cell mass is negligible
            rho, wr = rho[1:], wr[1:]
        return rho, wr

    def pieces(self, r: float) -> _TermPieces:
        p = self.params
        beta = p.N + p.b
        rho, wr = self.radial(r)
        acc = np.zeros(8)
        for terms, A, E in self.blocks:
            phi = np.stack([t.phi(rho) for t in terms])
            dphi = np.stack([t.dphi(rho) for t in terms])
            phit = np.stack([t.phi_tilde(rho) for t in terms])
            dphit = np.stack([t.dphi_tilde(rho) for t in terms])
            inv_rho2 = rho ** -2.0
            ball_grad = ball_uv = ball_vz = 0.0
            for i in range(len(terms)):
                for j in range(len(terms)):
                    ball_grad += A[i, j] * float(wr @ (dphi[i] * dphi[j] + dphit[i] * dphit[j]))
                    ball_grad += E[i, j] * float(wr @ ((phi[i] * phi[j] + phit[i] * phit[j]) * inv_rho2))
                    ball_uv += A[i, j] * float(wr @ (phi[i] * phit[j]))
                    ball_vz += A[i, j] * float(wr @ (rho * phit[i] * dphi[j]))
            phi_r = np.array([float(t.phi(r)) for t in terms])
            dphi_r = np.array([float(t.dphi(r)) for t in terms])
            phit_r = np.array([float(t.phi_tilde(r)) for t in terms])
            dphit_r = np.array([float(t.dphi_tilde(r)) for t in terms])
            rb = r ** beta
            s_u2 = rb * (phi_r @ A @ phi_r + phit_r @ A @ phit_r)
            s_uu = rb * (phi_r @ A @ dphi_r + phit_r @ A @ dphit_r)
            s_grad = rb * (
                dphi_r @ A @ dphi_r + dphit_r @ A @ dphit_r
                + (phi_r @ E @ phi_r + phit_r @ E @ phit_r) / r ** 2
            )
            s_nu = rb * (dphi_r @ A @ dphi_r + dphit_r @ A @ dphit_r)
            s_uv = rb * (phi_r @ A @ phit_r)
            acc += np.array([ball_grad, ball_uv, ball_vz, s_u2, s_uu, s_grad, s_nu, s_uv])
        return _TermPieces(*acc)


def _pieces(sol, r, method, n_radial, n_angular, ctx=None) -> _TermPieces:
    if method == "closed":
        return _closed_pieces(sol, r)
    if method == "quadrature":
        context = ctx or _QuadContext(sol, n_radial, n_angular)
        return context.pieces(r)
    raise DomainError(f"unknown method {method!r}; use 'closed' or 'quadrature'")


# ---------------------------------------------------------------------------
# public operations


def compute_DH(sol: SeparableSolution, r: float, method: str = "closed",
               n_radial: int = QUAD_RADIAL, n_angular: int = QUAD_ANGULAR) -> tuple[float, float]:
    """Scaled energy D(r) and boundary mass H(r) of the solution pair."""
    if sol.is_zero:
        return 0.0, 0.0
    if not (0.0 < r <= sol.R * (1 + 1e-12)):
        raise DomainError(f"radius {r} outside (0, {sol.R}]")
    p = sol.params
    beta = p.N + p.b
    pieces = _pieces(sol, r, method, n_radial, n_angular)
    D = r ** (1.0 - beta) * (pieces.ball_grad + pieces.ball_uv)
    H = r ** (-beta) * pieces.s_u2
    return float(D), float(H)


def frequency(sol: SeparableSolution, r: float, method: str = "closed", **kw) -> float:
    """Frequency quotient N(r) = D(r) / H(r)."""
    D, H = compute_DH(sol, r, method, **kw)
    if H <= 0.0:
        raise VanishingDenominatorError(f"H({r}) = {H} is not positive")
    return D / H


@dataclass(frozen=True)
class FrequencyTrace:
    """Sampled (r, D, H, N, nu1, nu2) records along a radius schedule."""

    params: WeightParams
    r: np.ndarray
    D: np.ndarray
    H: np.ndarray
    N: np.ndarray
    nu1: np.ndarray
    nu2: np.ndarray
    provenance: str  # "closed" or "quadrature"

    def __post_init__(self):
        for arr in (self.r, self.D, self.H, self.N, self.nu1, self.nu2):
            arr.flags.writeable = False

    def lower_bound_margin(self) -> float:
        """min over records of N(r) + r^2/(N+b-1); nonnegative in the regime."""
        denom = self.params.N + self.params.b - 1.0
        return float(np.min(self.N + self.r ** 2 / denom))


def radius_schedule(R: float, per_decade: int = 64, decades: float = 3.0,
                    r_max: float | None = None) -> np.ndarray:
    top = r_max if r_max is not None else R / 2.0
    count = int(round(per_decade * decades)) + 1
    return np.geomspace(top, top * 10.0 ** (-decades), count)


def trace(sol: SeparableSolution, radii=None, method: str = "closed",
          n_radial: int = QUAD_RADIAL, n_angular: int = QUAD_ANGULAR) -> FrequencyTrace:
    """Evaluate the frequency records over a (default geometric) schedule."""
    if radii is None:
        radii = radius_schedule(sol.R)
    radii = np.asarray(radii, dtype=float)
    p = sol.params
    beta = p.N + p.b
    ctx = _QuadContext(sol, n_radial, n_angular) if method == "quadrature" else None
    D = np.empty_like(radii)
    H = np.empty_like(radii)
    nu1 = np.empty_like(radii)
    nu2 = np.empty_like(radii)
    for i, r in enumerate(radii):
        pieces = _pieces(sol, r, method, n_radial, n_angular, ctx)
        D[i] = r ** (1.0 - beta) * (pieces.ball_grad + pieces.ball_uv)
        H[i] = r ** (-beta) * pieces.s_u2
        if pieces.s_u2 <= 0.0:
            raise VanishingDenominatorError(f"H({r}) is not positive")
        nu1[i] = 2.0 * r * (pieces.s_nu * pieces.s_u2 - pieces.s_uu ** 2) / pieces.s_u2 ** 2
        nu2[i] = (
            r * pieces.s_uv - 2.0 * pieces.ball_v_zgrad - (beta - 1.0) * pieces.ball_uv
        ) / pieces.s_u2
    return FrequencyTrace(params=p, r=radii, D=D, H=H, N=D / H, nu1=nu1, nu2=nu2,
                          provenance=method)


def nu_decomposition(sol: SeparableSolution, r: float, method: str = "closed",
                     n_radial: int = QUAD_RADIAL, n_angular: int = QUAD_ANGULAR) -> tuple[float, float]:
    """The two components of N'(r): boundary Cauchy-Schwarz bracket and the rest."""
    if not (0.0 < r < sol.R):
        raise DomainError(f"radius {r} outside (0, {sol.R})")
    p = sol.params
    beta = p.N + p.b
    pieces = _pieces(sol, r, method, n_radial, n_angular)
    if pieces.s_u2 <= 0.0:
        raise VanishingDenominatorError(f"H({r}) is not positive")
    nu1 = 2.0 * r * (pieces.s_nu * pieces.s_u2 - pieces.s_uu ** 2) / pieces.s_u2 ** 2
    nu2 = (r * pieces.s_uv - 2.0 * pieces.ball_v_zgrad
           - (beta - 1.0) * pieces.ball_uv) / pieces.s_u2
    return float(nu1), float(nu2)


def check_H_derivative(target, method: str = "closed", delta_rel: float = 3e-3,
                       **kw) -> float:
    """Max relative residual of H'(r) = 2 D(r) / r.

    For a solution the derivative is formed by a local five-point central
    difference (so the closed-form path resolves the identity to roundoff);
    for a recorded trace, by nonuniform central differences on its own
    schedule, which converge at second order under schedule refinement.
    """
    if isinstance(target, FrequencyTrace):
        r, H, D = target.r, target.H, target.D
        if r.size < 5:
            raise DomainError("trace needs at least 5 radii")
        dH = np.empty_like(H)
        dH[1:-1] = (H[2:] - H[:-2]) / (r[2:] - r[:-2])
        dH[0] = (H[1] - H[0]) / (r[1] - r[0])
        dH[-1] = (H[-1] - H[-2]) / (r[-1] - r[-2])
        rhs = 2.0 * D / r
        scale = np.maximum(np.abs(rhs), 1e-300)
        return float(np.max(np.abs(dH - rhs)[1:-1] / scale[1:-1]))
    sol = target
    if sol.is_zero:
        return 0.0
    radii = kw.pop("radii", None)
    if radii is None:
        radii = np.geomspace(sol.R / 2, sol.R / 16, 20)
    worst = 0.0
    for r in radii:
        d = delta_rel * r
        H_at = {}
        for j in (-2, -1, 1, 2):
            _, H_at[j] = compute_DH(sol, r + j * d, method, **kw)
        D, _ = compute_DH(sol, r, method, **kw)
        lhs = (-H_at[2] + 8 * H_at[1] - 8 * H_at[-1] + H_at[-2]) / (12.0 * d)
        rhs = 2.0 * D / r
        worst = max(worst, abs(lhs - rhs) / max(abs(rhs), 1e-300))
    return worst


def check_pohozaev(sol: SeparableSolution, r: float, method: str = "closed",
                   n_radial: int = QUAD_RADIAL, n_angular: int = QUAD_ANGULAR) -> tuple[float, float]:
    """Relative residuals of the two radial-multiplier integral identities."""
    if sol.is_zero:
        return 0.0, 0.0
    if not (0.0 < r <= sol.R * (1 + 1e-12)):
        raise DomainError(f"radius {r} outside (0, {sol.R}]")
    p = sol.params
    beta = p.N + p.b
    pieces = _pieces(sol, r, method, n_radial, n_angular)
    lhs1 = pieces.ball_grad + pieces.ball_uv
    rhs1 = pieces.s_uu
    scale1 = max(abs(lhs1), abs(rhs1), pieces.ball_grad, 1e-300)
    res1 = abs(lhs1 - rhs1) / scale1
    lhs2 = (-(beta - 1.0) / 2.0 * pieces.ball_grad + pieces.ball_v_zgrad
            + 0.5 * r * pieces.s_grad)
    rhs2 = r * pieces.s_nu
    scale2 = max(abs(lhs2), abs(rhs2), 0.5 * r * pieces.s_grad, 1e-300)
    res2 = abs(lhs2 - rhs2) / scale2
    return float(res1), float(res2)


@dataclass(frozen=True)
class MatchedExponent:
    value: float
    kind: str   # "sigma_plus" or "sigma_plus_two"
    gap: float


@dataclass(frozen=True)
class FrequencyLimitResult:
    gamma: float
    matched: MatchedExponent
    h_limit: float
    h_band: tuple[float, float]
    sandwich_min: float


def _extrapolate_geometric(r: np.ndarray, values: np.ndarray) -> tuple[float, float]:
    """Limit at r -> 0 of values on a geometric schedule, assuming a power tail.

    Returns (limit, fitted correction exponent); falls back to the last value
    when the sequence has already converged to roundoff.
    """
    v = values[-64:]
    rr = r[-64:]
    if np.max(np.abs(v - v[-1])) < 1e-11 * max(1.0, abs(v[-1])):
        return float(v[-1]), math.inf
    d = np.diff(v)
    q = rr[1] / rr[0]
    good = np.abs(d) > 1e-14 * max(1.0, abs(v[-1]))
    ratios = d[1:][good[1:] & good[:-1]] / d[:-1][good[1:] & good[:-1]]
    ratios = ratios[ratios > 0]
    if ratios.size == 0:
        return float(v[-1]), math.inf
    p = float(np.clip(np.median(np.log(ratios) / math.log(q)), 0.05, 40.0))
    A = np.column_stack([np.ones_like(rr), rr ** p])
    coef, *_ = np.linalg.lstsq(A, v, rcond=None)
    return float(coef[0]), p


def frequency_limit(target, candidates=None, match_tol: float = 1e-4,
                    method: str = "closed", radii=None) -> FrequencyLimitResult:
    """Vanishing order gamma = lim N(r), matched against spectral exponents.

    Also extrapolates the limit of r^{-2 gamma} H(r), requiring it to be
    positive with the last decade inside [0.9, 1.1] of the limit, and reports
    the minimum of H r^{-2 gamma - sigma} for a small sigma > 0 (the lower
    sandwich).  Raises UnmatchedExponentError when gamma is not within
    `match_tol` of any candidate sigma_plus or sigma_plus + 2.
    """
    if isinstance(target, FrequencyTrace):
        tr = target
        if candidates is None:
            raise DomainError("candidates are required when extrapolating a bare trace")
    else:
        sol = target
        if sol.is_zero:
            raise VanishingDenominatorError("frequency of the zero solution is undefined")
        if radii is None:
            radii = radius_schedule(sol.R, per_decade=64, decades=3.0)
        if np.min(radii) > sol.R / 200:
            raise DomainError("schedule must reach radii below R/200")
        tr = trace(sol, radii, method=method)
        if candidates is None:
            candidates = sorted({t.sigma for t in sol.terms})
    gamma, _ = _extrapolate_geometric(tr.r, tr.N)
    pool = [(float(c), "sigma_plus") for c in candidates]
    pool += [(float(c) + 2.0, "sigma_plus_two") for c in candidates]
    kind_value, kind = min(pool, key=lambda cv: abs(gamma - cv[0]))
    gap = abs(gamma - kind_value)
    if gap > match_tol:
        raise UnmatchedExponentError(
            f"gamma = {gamma:.8f} matches no exponent within {match_tol} "
            f"(closest {kind_value:.8f} [{kind}], gap {gap:.2e})"
        )
    h_scaled = tr.H * tr.r ** (-2.0 * kind_value)
    h_limit, _ = _extrapolate_geometric(tr.r, h_scaled)
    last_decade = h_scaled[tr.r <= tr.r[-1] * 10.0]
    band = (float(last_decade.min() / h_limit), float(last_decade.max() / h_limit))
    if h_limit <= 0.0:
        raise UnmatchedExponentError(f"limit of r^-2gamma H is {h_limit}; not positive")
    sandwich = float(np.min(tr.H * tr.r ** (-2.0 * kind_value - 0.1)))
    return FrequencyLimitResult(
        gamma=gamma,
        matched=MatchedExponent(value=kind_value, kind=kind, gap=gap),
        h_limit=h_limit,
        h_band=band,
        sandwich_min=sandwich,
    )
