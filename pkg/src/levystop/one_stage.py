"""Single-stopping solver: threshold equation, optimal level, value function.

The optimal down-crossing level A* is the unique root of the monotone
first-order-condition function

    Lambda(A) = -(r/phi_r) K + b (r/phi_r^2 + (rA - psi'(0+))/phi_r)
                + sum_i c_i e^{a_i A} varpi_r(a_i) + Psi_f(A),

with A* = -inf (never stop) when Lambda stays nonnegative down to -A_max and
A* = +inf (stop at once) when it stays nonpositive up to +A_max. The expected
value of an arbitrary threshold strategy and the optimal value function are
assembled from the scale-function calculus in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import brentq

from .errors import ConvergenceFailure, DomainError
from .payoffs import (
    RewardSpec,
    RunningPayoff,
    _exp_moment,
    _exp_moment1,
    g_eval,
    psi_f,
    segments,
    theta_f,
    varpi,
)
from .scale_fn import (
    ScaleContext,
    W,
    W_tilted,
    Z,
    Zbar,
    Z_tilted,
    discounted_position_at_passage,
    real_part,
)

DEFAULT_A_MAX = 1e3
ROOT_XTOL = 1e-13


@dataclass(frozen=True)
class StageSpec:
    f: RunningPayoff
    g: RewardSpec


@dataclass(frozen=True)
class ThresholdSolution:
    """Solved threshold. a_star may be +inf (stop now) or -inf (never stop).

    lambda_at_root records |Lambda| at the root for finite solutions, and the
    boundary Lambda value that forced the classification otherwise.
    """

    a_star: float
    lambda_at_root: float
    bracket: tuple[float, float]


def lambda_fn(stage: StageSpec, ctx: ScaleContext, A: float) -> float:
    """The first-order-condition function; nondecreasing in A."""
    sd = ctx.spectral
    phi = sd.phi_r
    g = stage.g
    total = -(ctx.r / phi) * g.K
    if g.b != 0.0:
        total += g.b * (ctx.r / phi**2 + (ctx.r * A - sd.psi_prime_zero) / phi)
    for a, c in g.terms:
        total += c * math.exp(a * A) * varpi(ctx.model, ctx.r, a, phi_r=phi)
    return total + psi_f(stage.f, sd, A)


def solve_threshold(
    stage: StageSpec,
    ctx: ScaleContext,
    a_max: float = DEFAULT_A_MAX,
    xtol: float = ROOT_XTOL,
) -> ThresholdSolution:
    """Root of Lambda by bracket expansion from [-1, 1] plus brentq.

    Classification at the expansion limit: Lambda(-a_max) >= 0 means the root
    lies at -inf (never stop); Lambda(+a_max) <= 0 means +inf (stop at once).
    """
    if a_max <= 1:
        raise DomainError("a_max must exceed the initial bracket [-1, 1]")
    if not 0.0 < xtol <= 1e-3:
        raise DomainError(f"xtol must lie in (0, 1e-3], got {xtol}")

    def lam(A):
        return lambda_fn(stage, ctx, A)

    lo, hi = -1.0, 1.0
    f_lo = lam(lo)
    while f_lo > 0.0:
        if lo <= -a_max:
            return ThresholdSolution(
                a_star=-math.inf, lambda_at_root=f_lo, bracket=(lo, lo)
            )
        lo = max(lo * 2.0, -a_max)
        f_lo = lam(lo)
    f_hi = lam(hi)
    while f_hi < 0.0:
        if hi >= a_max:
            return ThresholdSolution(
                a_star=math.inf, lambda_at_root=f_hi, bracket=(hi, hi)
            )
        hi = min(hi * 2.0, a_max)
        f_hi = lam(hi)

    if f_lo == 0.0:
        root = lo
    elif f_hi == 0.0:
        root = hi
    else:
        try:
            root = brentq(lam, lo, hi, xtol=xtol, maxiter=300)
        except RuntimeError as exc:
            raise ConvergenceFailure(f"threshold bisection failed: {exc}") from exc
    # one secant nudge to push |Lambda| toward machine level
    h = 1e-7 * max(1.0, abs(root))
    f0, f1 = lam(root - h), lam(root + h)
    if f1 != f0:
        candidate = root - (f1 + f0) / 2.0 * (2.0 * h) / (f1 - f0)
        if lo <= candidate <= hi and abs(lam(candidate)) < abs(lam(root)):
            root = candidate
    return ThresholdSolution(
        a_star=float(root), lambda_at_root=abs(lam(root)), bracket=(lo, hi)
    )


def _kernel_piece(weight, rho, x, v0, v1, c0, c1, ce, L):
    """weight * int_{v0}^{v1} e^{rho v} f(v + x) dv for one payoff segment.

    Works in the shifted coordinate v = y - x so the kernel exponentials
    never leave O(1) scale regardless of x.
    """
    total = 0.0 + 0.0j
    mag = 0.0
    if c0 != 0.0:
        val = weight * c0 * _exp_moment(rho, v0, v1)
        total += val
        mag += abs(val)
    if c1 != 0.0:
        val = weight * c1 * (
            x * _exp_moment(rho, v0, v1) + _exp_moment1(rho, v0, v1)
        )
        total += val
        mag += abs(val)
    if ce != 0.0:
        val = weight * ce * math.exp(L * x) * _exp_moment(rho + L, v0, v1)
        total += val
        mag += abs(val)
    return total, mag


def never_stop_value(f: RunningPayoff, ctx: ScaleContext, x: float) -> float:
    """Value of collecting f forever: int (phi_r' e^{-phi_r(y-x)} - W(x-y)) f(y) dy.

    For y < x the growing phi_r mode of W cancels the resolvent kernel
    exactly (the residues satisfy sum_i C_i = phi_r'), leaving only the
    decaying modes; each side is then integrated termwise against the payoff
    segments so no large exponentials ever meet.
    """
    sd = ctx.spectral
    total = 0.0 + 0.0j
    mag = 0.0
    for lo, hi, c0, c1, ce, L in segments(f):
        # left of x: kernel sum_i C_i e^{xi_i (y - x)} over (-inf, x]
        y1 = min(hi, x)
        if y1 > lo:
            for C, xi in zip(sd.coeffs, sd.xis):
                val, m = _kernel_piece(C, xi, x, lo - x, y1 - x, c0, c1, ce, L)
                total += val
                mag += m
        # right of x: kernel phi_r' e^{-phi_r (y - x)} over [x, inf)
        y0 = max(lo, x)
        if hi > y0:
            val, m = _kernel_piece(
                sd.phi_r_prime, -sd.phi_r, x, y0 - x, hi - x, c0, c1, ce, L
            )
            total += val
            mag += m
    return real_part(ctx, total, mag)


def value_at(stage: StageSpec, ctx: ScaleContext, A: float, x: float) -> float:
    """Expected value u_A(x) of stopping at the down-crossing of level A."""
    if A == math.inf or (A != -math.inf and x <= A):
        return float(g_eval(stage.g, x))
    if A == -math.inf:
        return never_stop_value(stage.f, ctx, x)
    sd = ctx.spectral
    phi = sd.phi_r
    g = stage.g
    y = x - A
    total = g.K * (Z(ctx, y) - (ctx.r / phi) * W(ctx, y))
    for a, c in g.terms:
        vp = varpi(ctx.model, ctx.r, a, phi_r=phi)
        total -= c * math.exp(a * x) * (
            Z_tilted(ctx, a, y) - vp * W_tilted(ctx, a, y)
        )
    if g.b != 0.0:
        total -= g.b * discounted_position_at_passage(ctx, x, A)
    total += W(ctx, y) * psi_f(stage.f, sd, A)
    return total - theta_f(stage.f, ctx, x, A)


def value_optimal(
    stage: StageSpec, ctx: ScaleContext, sol: ThresholdSolution, x: float
) -> float:
    """Optimal value function, using the simplified form at the root."""
    a_star = sol.a_star
    if a_star == math.inf or (a_star != -math.inf and x <= a_star):
        return float(g_eval(stage.g, x))
    if a_star == -math.inf:
        return never_stop_value(stage.f, ctx, x)
    sd = ctx.spectral
    g = stage.g
    y = x - a_star
    total = g.K * Z(ctx, y)
    if g.b != 0.0:
        drift = sd.psi_prime_zero
        total -= g.b * (
            Zbar(ctx, y) + (a_star - drift / ctx.r) * Z(ctx, y) + drift / ctx.r
        )
    for a, c in g.terms:
        total -= c * math.exp(a * x) * Z_tilted(ctx, a, y)
    return total - theta_f(stage.f, ctx, x, a_star)
