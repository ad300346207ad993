"""Reward and running-payoff families and their closed-form transforms.

Terminal rewards take the exponential-plus-linear form

    g(x) = K - b x - sum_i c_i e^{a_i x},   a_i > 0 distinct, c_i > 0, b >= 0,

and running payoffs come from three increasing families (piecewise-constant,
linear with a floor, exponential with a cap) plus nonnegative weighted sums.
The solver needs two integral transforms of f,

    Psi_f(A)     = int_0^inf e^{-phi_r y} f(y + A) dy,
    Theta_f(x;A) = int_A^x  W(x - y) f(y) dy,

and the ratio varpi_r(a) = (r - psi(a))/(phi_r - a). All are evaluated in
closed form; the quadrature versions exist only as test oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DegenerateExponent, DomainError, SingularResolvent
from .levy_model import (
    EIGEN_COLLISION_TOL,
    LevyModel,
    SpectralData,
    laplace_exponent,
    psi_derivative,
    solve_phi,
)
from .scale_fn import ScaleContext, _check_range, real_part

VARPI_TIE_TOL = 1e-8     # |a - phi_r| below which the limit branch is used
EXP_TIE_TOL = 1e-8       # |phi_r - L| below which Psi_{exp} is refused
GAMMA_ZERO_TOL = 1e-12   # |a| below which gamma_helper is singular


# ---------------------------------------------------------------------------
# terminal reward


@dataclass(frozen=True)
class RewardSpec:
    """g(x) = K - b x - sum_i c_i e^{a_i x}."""

    K: float
    b: float
    terms: tuple[tuple[float, float], ...]  # (a_i, c_i)


def reward(K: float, b: float = 0.0, terms=()) -> RewardSpec:
    """Validate and freeze a terminal reward."""
    K = float(K)
    b = float(b)
    terms = tuple((float(a), float(c)) for a, c in terms)
    if b < 0:
        raise DomainError("reward slope b must be nonnegative")
    for a, c in terms:
        if a <= 0:
            raise DomainError("reward exponents a_i must be strictly positive")
        if c <= 0:
            raise DomainError("reward coefficients c_i must be strictly positive")
    exps = sorted(a for a, _ in terms)
    for lo, hi in zip(exps, exps[1:]):
        if hi - lo <= 0:
            raise DomainError("reward exponents a_i must be pairwise distinct")
    return RewardSpec(K=K, b=b, terms=terms)


def g_eval(g: RewardSpec, x):
    x = np.asarray(x, dtype=float)
    out = g.K - g.b * x - sum(c * np.exp(a * x) for a, c in g.terms)
    return float(out) if out.ndim == 0 else out


def g_prime(g: RewardSpec, x):
    x = np.asarray(x, dtype=float)
    out = -g.b - sum(a * c * np.exp(a * x) for a, c in g.terms)
    out = out + 0.0 * x  # broadcast when there are no exponential terms
    return float(out) if np.ndim(out) == 0 else out


def g_second(g: RewardSpec, x):
    x = np.asarray(x, dtype=float)
    out = -sum(a * a * c * np.exp(a * x) for a, c in g.terms)
    out = out + 0.0 * x
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# running payoff families


@dataclass(frozen=True)
class Simple:
    """Piecewise constant: value[n] on (l_n, l_{n+1}] with l_0 = -inf."""

    breakpoints: tuple[float, ...]
    values: tuple[float, ...]


@dataclass(frozen=True)
class LinearFloor:
    """f(y) = b1 * max(y + b2, b3); b3 = -inf drops the floor entirely."""

    b1: float
    b2: float
    b3: float


@dataclass(frozen=True)
class ExpCap:
    """f(y) = exp(min(L y, B))."""

    L: float
    B: float


@dataclass(frozen=True)
class WeightedSum:
    parts: tuple[tuple[float, "RunningPayoff"], ...]  # (gamma >= 0, payoff)


RunningPayoff = Union[Simple, LinearFloor, ExpCap, WeightedSum]


def simple(breakpoints, values) -> Simple:
    breakpoints = tuple(float(l) for l in breakpoints)
    values = tuple(float(v) for v in values)
    if len(values) != len(breakpoints) + 1:
        raise DomainError("simple payoff needs len(values) == len(breakpoints) + 1")
    if any(not math.isfinite(l) for l in breakpoints):
        raise DomainError("simple payoff breakpoints must be finite")
    if any(hi <= lo for lo, hi in zip(breakpoints, breakpoints[1:])):
        raise DomainError("simple payoff breakpoints must be strictly increasing")
    if any(hi <= lo for lo, hi in zip(values, values[1:])):
        raise DomainError("simple payoff values must be strictly increasing")
    return Simple(breakpoints=breakpoints, values=values)


def linear_floor(b1: float, b2: float, b3: float) -> LinearFloor:
    b1, b2, b3 = float(b1), float(b2), float(b3)
    if b1 <= 0:
        raise DomainError("linear payoff slope b1 must be strictly positive")
    if math.isnan(b2) or math.isnan(b3) or math.isinf(b2) or b3 == math.inf:
        raise DomainError("linear payoff offsets must be finite (b3 may be -inf)")
    return LinearFloor(b1=b1, b2=b2, b3=b3)


def exp_cap(L: float, B: float) -> ExpCap:
    L, B = float(L), float(B)
    if L <= 0:
        raise DomainError("exponential payoff rate L must be strictly positive")
    if not math.isfinite(B):
        raise DomainError("exponential payoff cap B must be finite")
    return ExpCap(L=L, B=B)


def weighted_sum(parts) -> WeightedSum:
    frozen = []
    for gamma, part in parts:
        gamma = float(gamma)
        if gamma < 0:
            raise DomainError("weighted-sum weights must be nonnegative")
        if not isinstance(part, (Simple, LinearFloor, ExpCap, WeightedSum)):
            raise DomainError(f"unsupported payoff part {type(part).__name__}")
        frozen.append((gamma, part))
    return WeightedSum(parts=tuple(frozen))


def f_eval(f: RunningPayoff, y):
    """Evaluate the running payoff; accepts scalars or arrays."""
    y = np.asarray(y, dtype=float)
    if isinstance(f, Simple):
        idx = np.searchsorted(np.array(f.breakpoints), y, side="left")
        out = np.array(f.values)[idx]
    elif isinstance(f, LinearFloor):
        out = f.b1 * np.maximum(y + f.b2, f.b3)
    elif isinstance(f, ExpCap):
        out = np.exp(np.minimum(f.L * y, f.B))
    elif isinstance(f, WeightedSum):
        out = sum(gamma * f_eval(part, y) for gamma, part in f.parts)
        out = np.asarray(out, dtype=float) + 0.0 * y
    else:
        raise DomainError(f"unsupported payoff {type(f).__name__}")
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# varpi and the exponential-calculus helpers


def varpi(model: LevyModel, r: float, a: float, phi_r: float | None = None) -> float:
    """(r - psi(a)) / (phi_r - a), with the limit psi'(phi_r) at the tie.

    Strictly positive for a > 0 by convexity of psi.
    """
    if a <= 0:
        raise DomainError("varpi requires a > 0")
    if np.min(np.abs(a - model.jump.eigs)) < EIGEN_COLLISION_TOL:
        raise SingularResolvent(f"a = {a} lies on the spectrum of T")
    if phi_r is None:
        phi_r = solve_phi(model, r)
    if abs(a - phi_r) <= VARPI_TIE_TOL:
        return float(psi_derivative(model, phi_r))
    return (r - float(laplace_exponent(model, a))) / (phi_r - a)


def _e1(z):
    """(e^z - 1)/z, stable near zero."""
    if abs(z) < 1e-2:
        return 1.0 + z * (0.5 + z * (1.0 / 6.0 + z * (1.0 / 24.0 + z / 120.0)))
    return (np.exp(z) - 1.0) / z


def _e2(z):
    """int_0^1 u e^{zu} du = (e^z (z - 1) + 1)/z^2, stable near zero."""
    if abs(z) < 1e-2:
        return 0.5 + z * (1.0 / 3.0 + z * (0.125 + z * (1.0 / 30.0 + z / 144.0)))
    return (np.exp(z) * (z - 1.0) + 1.0) / (z * z)


def _exp_moment(s, lo, hi):
    """int_lo^hi e^{s y} dy for complex s; endpoints may be infinite.

    Convergence at an infinite endpoint is the caller's responsibility
    (Re s > 0 with lo = -inf, Re s < 0 with hi = +inf).
    """
    if lo == -math.inf:
        return np.exp(s * hi) / s
    if hi == math.inf:
        return -np.exp(s * lo) / s
    width = hi - lo
    return np.exp(s * lo) * width * _e1(s * width)


def _exp_moment1(s, lo, hi):
    """int_lo^hi y e^{s y} dy for complex s; endpoints may be infinite."""
    if lo == -math.inf:
        return np.exp(s * hi) * (hi / s - 1.0 / s**2)
    if hi == math.inf:
        return -np.exp(s * lo) * (lo / s - 1.0 / s**2)
    width = hi - lo
    z = s * width
    return np.exp(s * lo) * width * (lo * _e1(z) + width * _e2(z))


def gamma_helper(a: float, s: float, t: float) -> float:
    """int_s^t y e^{a y} dy = (t/a - 1/a^2) e^{at} - (s/a - 1/a^2) e^{as}."""
    if abs(a) < GAMMA_ZERO_TOL:
        raise DegenerateExponent("gamma_helper is singular at a = 0")
    if s > t:
        raise DomainError("gamma_helper requires s <= t")
    return float(np.real(_exp_moment1(a, s, t)))


def w_helper(ctx: ScaleContext, k: float, x: float, A: float, s: float, t: float) -> float:
    """int over [s,t] cap [A,x] of e^{-k(x-y)} W(x-y) dy.

    Vanishes when the intersection is empty; infinite s or t simply stop
    clamping on that side.
    """
    if s >= t:
        raise DomainError("w_helper requires s < t")
    zs = max(x - max(s, A), 0.0)
    zt = max(x - max(t, A), 0.0)
    _check_range(ctx, zs)
    if zs == zt:
        return 0.0
    total = 0.0 + 0.0j
    mag = 0.0
    for d, rho in zip(ctx.weights, ctx.rates):
        val = d * _exp_moment(rho - k, zt, zs)
        total += val
        mag += abs(val)
    return real_part(ctx, total, mag)


# ---------------------------------------------------------------------------
# Psi_f


def psi_f(f: RunningPayoff, sd: SpectralData, A: float) -> float:
    """int_0^inf e^{-phi_r y} f(y + A) dy, per payoff family."""
    phi = sd.phi_r
    if isinstance(f, WeightedSum):
        return sum(gamma * psi_f(part, sd, A) for gamma, part in f.parts)
    if isinstance(f, Simple):
        edges = [1.0]
        edges += [math.exp(-phi * max(l - A, 0.0)) for l in f.breakpoints]
        edges.append(0.0)
        return sum(
            v * (edges[j] - edges[j + 1]) for j, v in enumerate(f.values)
        ) / phi
    if isinstance(f, LinearFloor):
        h = max(f.b3 - f.b2 - A, 0.0)  # -inf floor gives h = 0
        decay = math.exp(-phi * h)
        floor_part = 0.0 if h == 0.0 else f.b3 * (1.0 - decay) / phi
        slope_part = decay * ((h + A + f.b2) / phi + 1.0 / phi**2)
        return f.b1 * (floor_part + slope_part)
    if isinstance(f, ExpCap):
        phi_L = phi - f.L
        if abs(phi_L) < EXP_TIE_TOL:
            raise DegenerateExponent(
                f"phi_r = {phi} collides with exponential payoff rate L = {f.L}"
            )
        y_star = max(f.B / f.L - A, 0.0)
        capped = math.exp(f.B - phi * y_star) / phi
        if y_star == 0.0:
            return capped
        # both exponents stay <= B, so deep A cannot overflow
        growing = (math.exp(f.B - phi * y_star) - math.exp(f.L * A)) / -phi_L
        return growing + capped
    raise DomainError(f"unsupported payoff {type(f).__name__}")


# ---------------------------------------------------------------------------
# Theta_f


def theta_f(f: RunningPayoff, ctx: ScaleContext, x: float, A: float) -> float:
    """int_A^x W(x - y) f(y) dy in closed form; zero for x <= A."""
    if x <= A:
        return 0.0
    _check_range(ctx, x - A)
    if isinstance(f, WeightedSum):
        return sum(gamma * theta_f(part, ctx, x, A) for gamma, part in f.parts)
    if isinstance(f, Simple):
        edges = (-math.inf,) + f.breakpoints + (math.inf,)
        return sum(
            v * w_helper(ctx, 0.0, x, A, edges[j], edges[j + 1])
            for j, v in enumerate(f.values)
        )
    if isinstance(f, LinearFloor):
        kappa = min(max(f.b3 - f.b2, A), x)
        total = 0.0
        if math.isfinite(f.b3) and kappa > A:
            total += f.b3 * w_helper(ctx, 0.0, x, A, A, kappa)
        if kappa < x:
            total += f.b2 * w_helper(ctx, 0.0, x, A, kappa, x)
            acc = 0.0 + 0.0j
            mag = 0.0
            for d, rho in zip(ctx.weights, ctx.rates):
                # gamma_helper's closed form continued to the complex roots
                val = d * np.exp(rho * x) * _exp_moment1(-rho, kappa, x)
                acc += val
                mag += abs(val)
            total += real_part(ctx, acc, mag)
        return f.b1 * total
    if isinstance(f, ExpCap):
        kappa = min(max(f.B / f.L, A), x)
        total = 0.0
        if kappa > A:
            total += math.exp(f.L * x) * w_helper(ctx, f.L, x, A, A, kappa)
        if kappa < x:
            total += math.exp(f.B) * w_helper(ctx, 0.0, x, A, kappa, x)
        return total
    raise DomainError(f"unsupported payoff {type(f).__name__}")


# ---------------------------------------------------------------------------
# generalized convolution against arbitrary exponential modes; this powers
# the derivative kernels in the verification module and the never-stop value


def segments(f: RunningPayoff):
    """Decompose f into (lo, hi, const, slope, exp_coef, exp_rate) pieces.

    Each piece represents f(y) = const + slope*y + exp_coef*e^{exp_rate y}
    on (lo, hi]. Weighted sums flatten into scaled pieces.
    """
    if isinstance(f, Simple):
        edges = (-math.inf,) + f.breakpoints + (math.inf,)
        return [
            (edges[j], edges[j + 1], v, 0.0, 0.0, 0.0)
            for j, v in enumerate(f.values)
        ]
    if isinstance(f, LinearFloor):
        knee = f.b3 - f.b2
        if not math.isfinite(knee):
            return [(-math.inf, math.inf, f.b1 * f.b2, f.b1, 0.0, 0.0)]
        return [
            (-math.inf, knee, f.b1 * f.b3, 0.0, 0.0, 0.0),
            (knee, math.inf, f.b1 * f.b2, f.b1, 0.0, 0.0),
        ]
    if isinstance(f, ExpCap):
        knee = f.B / f.L
        return [
            (-math.inf, knee, 0.0, 0.0, 1.0, f.L),
            (knee, math.inf, math.exp(f.B), 0.0, 0.0, 0.0),
        ]
    if isinstance(f, WeightedSum):
        out = []
        for gamma, part in f.parts:
            out += [
                (lo, hi, gamma * c0, gamma * c1, gamma * ce, L)
                for lo, hi, c0, c1, ce, L in segments(part)
            ]
        return out
    raise DomainError(f"unsupported payoff {type(f).__name__}")


def convolve_modes(f: RunningPayoff, weights, rates, x: float, A: float):
    """int_A^x (sum_j weights_j e^{rates_j (x-y)}) f(y) dy, exactly.

    The kernel is an arbitrary exponential mixture; substituting u = x - y
    reduces every payoff segment to first and second exponential moments.
    Returns (total, magnitude) with magnitude the sum of term moduli.
    """
    total = 0.0 + 0.0j
    mag = 0.0
    if x <= A:
        return total, mag
    for lo, hi, c0, c1, ce, L in segments(f):
        y0 = max(lo, A)
        y1 = min(hi, x)
        if y1 <= y0:
            continue
        u0, u1 = x - y1, x - y0
        for d, rho in zip(weights, rates):
            if c0 != 0.0:
                val = d * c0 * _exp_moment(rho, u0, u1)
                total += val
                mag += abs(val)
            if c1 != 0.0:
                val = d * c1 * (
                    x * _exp_moment(rho, u0, u1) - _exp_moment1(rho, u0, u1)
                )
                total += val
                mag += abs(val)
            if ce != 0.0:
                val = d * ce * np.exp(L * x) * _exp_moment(rho - L, u0, u1)
                total += val
                mag += abs(val)
    return total, mag


def theta_prime(f: RunningPayoff, ctx: ScaleContext, x: float, A: float) -> float:
    """d/dx Theta_f(x;A) = int_A^x W'(x-y) f(y) dy (W(0) = 0 kills the rest)."""
    if x <= A:
        return 0.0
    _check_range(ctx, x - A)
    val, mag = convolve_modes(f, ctx.weights * ctx.rates, ctx.rates, x, A)
    return real_part(ctx, val, mag)


def theta_second(f: RunningPayoff, ctx: ScaleContext, x: float, A: float) -> float:
    """d2/dx2 Theta_f(x;A) = (2/sigma^2) f(x) + int_A^x W''(x-y) f(y) dy."""
    if x <= A:
        return 0.0
    _check_range(ctx, x - A)
    val, mag = convolve_modes(f, ctx.weights * ctx.rates**2, ctx.rates, x, A)
    boundary = (2.0 / ctx.model.sigma**2) * float(f_eval(f, x))
    return boundary + real_part(ctx, val, mag)
