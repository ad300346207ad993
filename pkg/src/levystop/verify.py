"""Independent checks of the analytic solver.

Two routes that share nothing with the closed forms they test:

* Monte Carlo simulation of the process and of threshold strategies
  (exact phase-type jumps at exact Poisson epochs, Euler grid for the
  Brownian part, crossing detection at grid points).
* The generator residual (L - r)u + f evaluated with closed-form u, u',
  u'' and adaptive quadrature of the jump integral against the matrix
  exponential density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.linalg import expm

from .errors import (
    DomainError,
    InfeasibleThresholds,
    LevyStopError,
    QuadratureFailure,
)
from .levy_model import LevyModel, PhaseTypeJump, laplace_exponent
from .one_stage import StageSpec, _kernel_piece, value_at
from .payoffs import (
    RunningPayoff,
    f_eval,
    g_eval,
    g_prime,
    g_second,
    psi_f,
    segments,
    theta_prime,
    theta_second,
    varpi,
)
from .scale_fn import (
    ScaleContext,
    W,
    W_prime,
    W_second,
    W_tilted,
    Z,
    Z_tilted,
    _mode_sum,
    real_part,
)

CHUNK = 65536
COMPACT_EVERY = 256


# ---------------------------------------------------------------------------
# simulation plumbing


@dataclass(frozen=True)
class SimConfig:
    n_paths: int
    dt: float
    horizon: float
    seed: int
    antithetic: bool = False


def sim_config(
    n_paths: int,
    dt: float,
    horizon: float,
    seed: int = 0,
    antithetic: bool = False,
) -> SimConfig:
    """Validate and freeze simulation settings."""
    n_paths = int(n_paths)
    if n_paths < 1:
        raise DomainError("n_paths must be a positive integer")
    dt = float(dt)
    horizon = float(horizon)
    if not (dt > 0.0 and math.isfinite(dt)):
        raise DomainError("dt must be a positive real")
    if not (horizon > 0.0 and math.isfinite(horizon)):
        raise DomainError("horizon must be a positive real")
    if dt > horizon:
        raise DomainError("dt must not exceed horizon")
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise DomainError("seed must fit in 64 bits")
    if antithetic and n_paths % 2:
        raise DomainError("antithetic sampling needs an even n_paths")
    return SimConfig(
        n_paths=n_paths, dt=dt, horizon=horizon, seed=seed,
        antithetic=bool(antithetic),
    )


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n: int
    truncation_bound: float


class _Acc:
    """Deterministic mean / standard-error accumulator over chunks."""

    def __init__(self):
        self.sums: list[float] = []
        self.sumsqs: list[float] = []
        self.count = 0

    def add(self, vals: np.ndarray) -> None:
        self.sums.append(float(vals.sum()))
        self.sumsqs.append(float((vals * vals).sum()))
        self.count += vals.size

    def estimate(self, n_report: int, trunc: float) -> McEstimate:
        total = math.fsum(self.sums)
        mean = total / self.count
        var = max(math.fsum(self.sumsqs) - self.count * mean * mean, 0.0)
        var /= max(self.count - 1, 1)
        return McEstimate(
            mean=mean,
            std_error=math.sqrt(var / self.count),
            n=n_report,
            truncation_bound=trunc,
        )


def sample_jump(jump: PhaseTypeJump, rng) -> float:
    """One phase-type draw by walking the absorbing chain.

    Initial phase from alpha (the defect mass maps to a zero jump), then
    exponential holding times at rate -T_jj and embedded transitions until
    absorption; the accumulated time is the jump size.
    """
    u = rng.random()
    acc = 0.0
    phase = -1
    for j, a in enumerate(jump.alpha):
        acc += a
        if u < acc:
            phase = j
            break
    total = 0.0
    T, t = jump.T, jump.t
    m = len(t)
    while phase >= 0:
        rate = -T[phase, phase]
        total += rng.exponential(1.0 / rate)
        u = rng.random() * rate
        if u < t[phase]:
            break
        acc = t[phase]
        nxt = -1
        for j in range(m):
            if j == phase:
                continue
            acc += T[phase, j]
            if u < acc:
                nxt = j
                break
        if nxt < 0:  # row rounding slack: treat as absorption
            break
        phase = nxt
    return total


def _sample_jump_sizes(jump: PhaseTypeJump, rng, n: int) -> np.ndarray:
    """n phase-type draws, vectorized over the surviving walkers."""
    m = jump.m
    rates = -np.diag(jump.T)
    opts = np.zeros((m, m + 1))
    opts[:, 0] = jump.t / rates
    off = jump.T / rates[:, None]
    np.fill_diagonal(off, 0.0)
    opts[:, 1:] = off
    cum = np.cumsum(opts, axis=1)
    cum[:, -1] = 1.0  # close each row against rounding

    total = np.zeros(n)
    alpha_cum = np.cumsum(jump.alpha)
    phase = np.searchsorted(alpha_cum, rng.random(n), side="right")
    alive = np.flatnonzero(phase < m)
    phase = phase[alive]
    while alive.size:
        total[alive] += rng.exponential(1.0, alive.size) / rates[phase]
        opt = (cum[phase] <= rng.random(alive.size)[:, None]).sum(axis=1)
        keep = opt > 0
        alive = alive[keep]
        phase = opt[keep] - 1
    return total


def _presample_jumps(model: LevyModel, horizon: float, size: int, rng):
    """Sorted jump epochs (inf-padded) and sizes for `size` paths."""
    if model.lamb == 0.0:
        return (
            np.full((size, 1), np.inf),
            np.zeros((size, 1)),
        )
    counts = rng.poisson(model.lamb * horizon, size)
    kmax = max(int(counts.max()), 1)
    epochs = rng.random((size, kmax)) * horizon
    epochs[np.arange(kmax) >= counts[:, None]] = np.inf
    epochs.sort(axis=1)
    sizes = np.zeros((size, kmax))
    n_valid = int(counts.sum())
    if n_valid:
        mask = np.arange(kmax) < counts[:, None]
        sizes[mask] = _sample_jump_sizes(model.jump, rng, n_valid)
    # one inf column so a fully consumed pointer still has a target
    epochs = np.column_stack([epochs, np.full(size, np.inf)])
    sizes = np.column_stack([sizes, np.zeros(size)])
    return epochs, sizes


def _chunk_sizes(n: int, even: bool):
    step = CHUNK
    out = []
    while n > 0:
        b = min(step, n)
        if even and b % 2:
            b -= 1
        out.append(b)
        n -= b
    return out


def _running_level(stages, x: np.ndarray, k: np.ndarray) -> np.ndarray:
    """F_{k+1}(x) = sum_{m > k} f_m(x), per path."""
    M = len(stages)
    if x.size == 0:
        return np.zeros(0)
    kmin = int(k.min())
    if kmin == int(k.max()):
        out = np.zeros(x.size)
        for m in range(kmin, M):
            out += f_eval(stages[m].f, x)
        return out
    out = np.zeros(x.size)
    for m in range(kmin, M):
        sel = k <= m
        out[sel] += f_eval(stages[m].f, x[sel])
    return out


def _trigger_count(neg_thr: np.ndarray, state: np.ndarray) -> np.ndarray:
    """Number of thresholds >= state (thresholds stored negated, ascending)."""
    return np.searchsorted(neg_thr, -state, side="right")


# ---------------------------------------------------------------------------
# strategy simulation


def simulate_strategy(
    model: LevyModel,
    r: float,
    stages,
    thresholds,
    x0: float,
    cfg: SimConfig,
) -> McEstimate:
    """Estimate the total discounted payoff of a threshold strategy.

    Stage m is exercised the first time the state falls to or below
    thresholds[m-1]. Jumps land at their exact Poisson epochs (drift
    interpolation inside the step, exact overshoot and discounting);
    diffusion crossings are detected at grid points only, which is the
    documented source of the O(dt) bias controlled by the refinement test.
    """
    stages = tuple(stages)
    M = len(stages)
    thr = np.asarray([float(a) for a in thresholds], dtype=float)
    if thr.size != M:
        raise InfeasibleThresholds(
            f"need {M} thresholds, got {thr.size}"
        )
    if np.any(np.diff(thr) > 0.0):
        raise InfeasibleThresholds(
            f"thresholds must be nonincreasing, got {tuple(thr)}"
        )
    if not (r > 0.0 and math.isfinite(r)):
        raise DomainError("discount rate r must be positive")
    x0 = float(x0)
    if not math.isfinite(x0):
        raise DomainError("starting point must be finite")

    neg_thr = -thr  # nonincreasing thresholds negate to an ascending view
    n_steps = max(int(round(cfg.horizon / cfg.dt)), 1)
    dt = cfg.dt
    h_eff = n_steps * dt
    disc = np.exp(-r * dt * np.arange(n_steps + 1))

    # stages already exercised at time zero
    x0 = float(x0)
    k0 = int(_trigger_count(neg_thr, np.asarray(x0)))
    g0 = float(sum(g_eval(stages[m].g, x0) for m in range(k0)))
    if k0 == M:
        return McEstimate(
            mean=g0, std_error=0.0, n=cfg.n_paths, truncation_bound=0.0
        )

    mu, sig = model.mu, model.sigma
    sqdt = math.sqrt(dt)
    acc = _Acc()
    trunc = 0.0
    children = np.random.SeedSequence(cfg.seed).spawn(
        len(_chunk_sizes(cfg.n_paths, cfg.antithetic))
    )
    for B, child in zip(_chunk_sizes(cfg.n_paths, cfg.antithetic), children):
        rng = np.random.Generator(np.random.Philox(child))
        half = B // 2 if cfg.antithetic else B
        epochs, sizes = _presample_jumps(model, h_eff, half, rng)
        if cfg.antithetic:
            epochs = np.vstack([epochs, epochs])
            sizes = np.vstack([sizes, sizes])

        X = np.full(B, float(x0))
        k = np.full(B, k0, dtype=np.int64)
        ptr = np.zeros(B, dtype=np.int64)
        integral = np.zeros(B)
        gcol = np.full(B, g0)
        y_prev = np.full(B, float(_running_level(stages, np.asarray([x0]), np.asarray([k0]))[0]))
        seg_t = np.zeros(B)
        slot = np.arange(B)
        totals = np.zeros(B)
        rows = np.arange(B)

        for i in range(1, n_steps + 1):
            t_lo = (i - 1) * dt
            t_hi = i * dt
            # exact-epoch jumps first: state carried by drift inside the step
            if model.lamb > 0.0:
                while True:
                    e_next = epochs[rows, ptr]
                    hit = np.flatnonzero(e_next <= t_hi)
                    if hit.size == 0:
                        break
                    e = e_next[hit]
                    sz = sizes[hit, ptr[hit]]
                    drift_gap = e - t_lo
                    x_pre = X[hit] + mu * drift_gap
                    x_post = x_pre - sz
                    X[hit] -= sz
                    ptr[hit] += 1
                    de = np.exp(-r * e)
                    k_old = k[hit]
                    # close the trapezoid strip up to the epoch
                    y_pre = de * _running_level(stages, x_pre, k_old)
                    integral[hit] += 0.5 * (y_prev[hit] + y_pre) * (
                        e - np.maximum(seg_t[hit], t_lo)
                    )
                    new_k = np.maximum(k_old, _trigger_count(neg_thr, x_post))
                    for m in range(M):
                        due = (k_old <= m) & (new_k > m)
                        if due.any():
                            gcol[hit[due]] += de[due] * g_eval(
                                stages[m].g, x_post[due]
                            )
                    k[hit] = new_k
                    y_prev[hit] = de * _running_level(stages, x_post, new_k)
                    seg_t[hit] = e
            # diffusion increment to the grid point; pairs stay adjacent
            # across compaction, so the mirrored draw stays aligned
            if cfg.antithetic:
                zh = rng.standard_normal(X.size // 2)
                z = np.concatenate([zh, -zh])
            else:
                z = rng.standard_normal(X.size)
            X += mu * dt + sig * sqdt * z
            # close the strip at the grid point, then grid-detected triggers
            y_now = disc[i] * _running_level(stages, X, k)
            integral += 0.5 * (y_prev + y_now) * (
                t_hi - np.maximum(seg_t, t_lo)
            )
            y_prev = y_now
            if M == 1:
                crossed = np.flatnonzero((k == 0) & (X <= thr[0]))
            else:
                live = np.flatnonzero(k < M)
                crossed = live[X[live] <= thr[k[live]]]
            if crossed.size:
                k_old = k[crossed]
                new_k = np.maximum(
                    k_old, _trigger_count(neg_thr, X[crossed])
                )
                for m in range(M):
                    due = (k_old <= m) & (new_k > m)
                    if due.any():
                        gcol[crossed[due]] += disc[i] * g_eval(
                            stages[m].g, X[crossed[due]]
                        )
                k[crossed] = new_k
                y_prev[crossed] = disc[i] * _running_level(
                    stages, X[crossed], new_k
                )
            if i % COMPACT_EVERY == 0:
                done = k == M
                if done.any():
                    # finished paths accrue nothing further, so this write is
                    # final even when a live mirror keeps the path around
                    totals[slot[done]] = integral[done] + gcol[done]
                    if cfg.antithetic:
                        hsz = X.size // 2
                        keep_half = ~(done[:hsz] & done[hsz:])
                        keep = np.concatenate([keep_half, keep_half])
                    else:
                        keep = ~done
                    if not keep.all():
                        X, k, ptr = X[keep], k[keep], ptr[keep]
                        integral, gcol = integral[keep], gcol[keep]
                        y_prev, seg_t, slot = (
                            y_prev[keep], seg_t[keep], slot[keep]
                        )
                        epochs, sizes = epochs[keep], sizes[keep]
                        rows = np.arange(X.size)
            if X.size == 0:
                break

        if X.size:
            totals[slot] = integral + gcol
            alive = k < M
            if alive.any():
                # remaining-payoff scale per survivor: perpetuity of the
                # still-active running payoff plus each pending reward at its
                # own trigger level (a future trigger happens at or just
                # below the threshold, never at the current state)
                xa, ka = X[alive], k[alive]
                rem = np.abs(_running_level(stages, xa, ka)) / r
                for m in range(M):
                    sel = ka <= m
                    if sel.any() and math.isfinite(thr[m]):
                        rem[sel] += abs(float(g_eval(stages[m].g, thr[m])))
                trunc = max(trunc, disc[n_steps] * float(rem.max()))

        if cfg.antithetic:
            acc.add(0.5 * (totals[: B // 2] + totals[B // 2:]))
        else:
            acc.add(totals)
    return acc.estimate(cfg.n_paths, trunc)


# ---------------------------------------------------------------------------
# two-sided exit simulation


def simulate_two_sided(
    model: LevyModel, r: float, x0: float, b: float, cfg: SimConfig
):
    """Estimate E[e^{-r tau_b^+}; up first] and E[e^{-r tau_0^-}; down first].

    The process starts at x0 in (0, b); the up estimate collects the
    discount at the first grid point at or above b, the down estimate at
    the first grid point or exact jump epoch at or below 0. Returns the
    pair (up, down) of McEstimate.
    """
    if not (0.0 < x0 < b):
        raise DomainError("two-sided exit needs 0 < x0 < b")
    if not (r > 0.0 and math.isfinite(r)):
        raise DomainError("discount rate r must be positive")

    n_steps = max(int(round(cfg.horizon / cfg.dt)), 1)
    dt = cfg.dt
    h_eff = n_steps * dt
    disc = np.exp(-r * dt * np.arange(n_steps + 1))
    mu, sig = model.mu, model.sigma
    sqdt = math.sqrt(dt)

    acc_up, acc_down = _Acc(), _Acc()
    survive = 0
    children = np.random.SeedSequence(cfg.seed).spawn(
        len(_chunk_sizes(cfg.n_paths, cfg.antithetic))
    )
    for B, child in zip(_chunk_sizes(cfg.n_paths, cfg.antithetic), children):
        rng = np.random.Generator(np.random.Philox(child))
        half = B // 2 if cfg.antithetic else B
        epochs, sizes = _presample_jumps(model, h_eff, half, rng)
        if cfg.antithetic:
            epochs = np.vstack([epochs, epochs])
            sizes = np.vstack([sizes, sizes])

        X = np.full(B, float(x0))
        ptr = np.zeros(B, dtype=np.int64)
        slot = np.arange(B)
        up = np.zeros(B)
        down = np.zeros(B)
        out = np.zeros(B, dtype=bool)
        rows = np.arange(B)

        for i in range(1, n_steps + 1):
            t_lo = (i - 1) * dt
            t_hi = i * dt
            if model.lamb > 0.0:
                while True:
                    e_next = np.where(out, np.inf, epochs[rows, ptr])
                    hit = np.flatnonzero(e_next <= t_hi)
                    if hit.size == 0:
                        break
                    e = e_next[hit]
                    sz = sizes[hit, ptr[hit]]
                    x_post = X[hit] + mu * (e - t_lo) - sz
                    X[hit] -= sz
                    ptr[hit] += 1
                    fell = x_post <= 0.0
                    if fell.any():
                        idx = hit[fell]
                        down[slot[idx]] = np.exp(-r * e[fell])
                        out[idx] = True
            if cfg.antithetic:
                zh = rng.standard_normal(X.size // 2)
                z = np.concatenate([zh, -zh])
            else:
                z = rng.standard_normal(X.size)
            X += mu * dt + sig * sqdt * z
            act = np.flatnonzero(~out)
            if act.size:
                xa = X[act]
                rose = xa >= b
                fell = ~rose & (xa <= 0.0)
                up[slot[act[rose]]] = disc[i]
                down[slot[act[fell]]] = disc[i]
                out[act[rose | fell]] = True
            if i % COMPACT_EVERY == 0 and out.any():
                if cfg.antithetic:
                    hsz = X.size // 2
                    keep_half = ~(out[:hsz] & out[hsz:])
                    keep = np.concatenate([keep_half, keep_half])
                else:
                    keep = ~out
                if not keep.all():
                    X, ptr, slot = X[keep], ptr[keep], slot[keep]
                    epochs, sizes = epochs[keep], sizes[keep]
                    out = out[keep]
                    rows = np.arange(X.size)
            if X.size == 0:
                break

        survive += int((~out).sum()) if X.size else 0
        if cfg.antithetic:
            hB = B // 2
            acc_up.add(0.5 * (up[:hB] + up[hB:]))
            acc_down.add(0.5 * (down[:hB] + down[hB:]))
        else:
            acc_up.add(up)
            acc_down.add(down)

    trunc = disc[n_steps] * survive / cfg.n_paths
    return (
        acc_up.estimate(cfg.n_paths, trunc),
        acc_down.estimate(cfg.n_paths, trunc),
    )


# ---------------------------------------------------------------------------
# generator residual

# quadrature of the jump integral stops where the phase-type density has
# decayed by e^{-60} relative to its slowest mode
_DECAY_BUDGET = 60.0


def _ph_density(jump: PhaseTypeJump, z: float) -> float:
    return float(jump.alpha @ expm(jump.T * z) @ jump.t)


def _quad(fn, lo: float, hi: float) -> float:
    try:
        res = integrate.quad(
            fn, lo, hi, limit=200, epsabs=1e-10, epsrel=1e-8, full_output=1
        )
    except LevyStopError:
        raise
    except Exception as exc:  # pragma: no cover - scipy internal failures
        raise QuadratureFailure(f"quadrature failed on [{lo}, {hi}]: {exc}")
    if len(res) > 3:
        raise QuadratureFailure(
            f"quadrature did not converge on [{lo}, {hi}]: {res[3]}"
        )
    return float(res[0])


def _never_stop_derivatives(f: RunningPayoff, ctx: ScaleContext, x: float):
    """(u', u'') of the never-stop value by kernel differentiation.

    Differentiating the split kernel swaps in rate-scaled weights; the
    boundary f(x) terms of u' cancel exactly by the residue identity
    sum_i C_i = phi_r', so only u'' keeps one.
    """
    sd = ctx.spectral
    phi, phip = sd.phi_r, sd.phi_r_prime
    t1 = 0.0 + 0.0j
    t2 = 0.0 + 0.0j
    m1 = m2 = 0.0
    for lo, hi, c0, c1, ce, L in segments(f):
        y1 = min(hi, x)
        if y1 > lo:
            val, m = _kernel_piece(
                -phip * phi, phi, x, lo - x, y1 - x, c0, c1, ce, L
            )
            t1 += val
            m1 += m
            val, m = _kernel_piece(
                phip * phi**2, phi, x, lo - x, y1 - x, c0, c1, ce, L
            )
            t2 += val
            m2 += m
        y0 = max(lo, x)
        if hi > y0:
            for C, xi in zip(sd.coeffs, sd.xis):
                val, m = _kernel_piece(
                    C * xi, -xi, x, y0 - x, hi - x, c0, c1, ce, L
                )
                t1 += val
                m1 += m
                val, m = _kernel_piece(
                    C * xi**2, -xi, x, y0 - x, hi - x, c0, c1, ce, L
                )
                t2 += val
                m2 += m
    fx = float(f_eval(f, x))
    boundary = -fx * (phip * phi + (sd.coeffs * sd.xis).sum())
    u1 = real_part(ctx, t1, m1)
    u2 = real_part(ctx, t2 + boundary, m2 + abs(boundary))
    return u1, u2


def _value_derivatives(stage: StageSpec, ctx: ScaleContext, A: float, x: float):
    """(u', u'') of the threshold value function, termwise in closed form."""
    g = stage.g
    if A == math.inf or (A != -math.inf and x < A):
        return float(g_prime(g, x)), float(g_second(g, x))
    if A == -math.inf:
        return _never_stop_derivatives(stage.f, ctx, x)
    sd = ctx.spectral
    r = ctx.r
    phi = sd.phi_r
    y = x - A
    W0, W1, W2 = W(ctx, y), W_prime(ctx, y), W_second(ctx, y)
    Z0 = Z(ctx, y)
    u1 = g.K * (r * W0 - (r / phi) * W1)
    u2 = g.K * (r * W1 - (r / phi) * W2)
    for a, c in g.terms:
        vp = varpi(ctx.model, r, a, phi_r=phi)
        ka = r - laplace_exponent(ctx.model, a)
        Za = Z_tilted(ctx, a, y)
        Wa0 = W_tilted(ctx, a, y)
        s1, mg1 = _mode_sum(ctx, y, 1, a)
        Wa1 = real_part(ctx, s1, mg1)
        s2, mg2 = _mode_sum(ctx, y, 2, a)
        Wa2 = real_part(ctx, s2, mg2)
        G0 = Za - vp * Wa0
        G1 = ka * Wa0 - vp * Wa1
        G2 = ka * Wa1 - vp * Wa2
        ex = math.exp(a * x)
        u1 -= c * ex * (a * G0 + G1)
        u2 -= c * ex * (a * a * G0 + 2.0 * a * G1 + G2)
    if g.b != 0.0:
        drift = sd.psi_prime_zero
        corner = (r - drift * phi + r * A * phi) / phi**2
        u1 -= g.b * (Z0 + (A - drift / r) * r * W0 - corner * W1)
        u2 -= g.b * (r * W0 + (A - drift / r) * r * W1 - corner * W2)
    pf = psi_f(stage.f, sd, A)
    u1 += W1 * pf - theta_prime(stage.f, ctx, x, A)
    u2 += W2 * pf - theta_second(stage.f, ctx, x, A)
    return u1, u2


def generator_residual(
    stage: StageSpec, ctx: ScaleContext, A: float, x: float
) -> float:
    """(L - r)u_A(x) + f(x) with the truncation-compensated generator.

    L u = c u' + (sigma^2/2) u'' + lambda * int [u(x-z) - u(x) + u'(x) z 1_{z<1}]
    f_Z(z) dz with c = mu - lambda * int_0^1 z f_Z(z) dz; zero on the
    continuation side of A for an optimal threshold, nonpositive below it.
    """
    if x == A:
        raise DomainError("generator residual is undefined at the threshold")
    model = ctx.model
    r = ctx.r
    u0 = value_at(stage, ctx, A, x)
    u1, u2 = _value_derivatives(stage, ctx, A, x)
    lam = model.lamb
    jump_part = 0.0
    c = model.mu
    if lam > 0.0:
        jump = model.jump
        c -= lam * _quad(lambda z: z * _ph_density(jump, z), 0.0, 1.0)
        zcap = _DECAY_BUDGET / float(np.min(np.abs(jump.eigs.real)))

        def integrand(z):
            comp = u1 * z if z < 1.0 else 0.0
            return (
                value_at(stage, ctx, A, x - z) - u0 + comp
            ) * _ph_density(jump, z)

        cuts = {1.0}
        if A != -math.inf and 0.0 < x - A < zcap:
            cuts.add(x - A)
        edges = [0.0] + sorted(c_ for c_ in cuts if c_ < zcap) + [zcap]
        jump_part = lam * math.fsum(
            _quad(integrand, lo, hi) for lo, hi in zip(edges, edges[1:])
        )
    return (
        c * u1
        + 0.5 * model.sigma**2 * u2
        + jump_part
        - r * u0
        + float(f_eval(stage.f, x))
    )
