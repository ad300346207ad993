"""Closed-form scale functions and the first-passage functionals they yield.

With the root structure (phi_r, xi_i, C_i) of psi(s) = r, the scale function
is a finite mixture of exponentials,

    W(x) = sum_i C_i (e^{phi_r x} - e^{-xi_i x}),  x >= 0,

and everything else here (Z, its antiderivative, tilted variants, two-sided
exit functionals, the discounted position at first passage) follows by
termwise calculus on the same modes. No quadrature appears on any code path.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DomainError, ImaginaryResidual, RangeError
from .levy_model import (
    IMAG_TOL,
    LevyModel,
    SpectralData,
    laplace_exponent,
    spectral_data,
)

X_MAX_FACTOR = 50.0  # default overflow guard: x <= 50 / phi_r


@dataclass(frozen=True)
class ScaleContext:
    """A model paired with its spectral data at one discount rate.

    weights/rates are the exponential modes of W: W(x) = Re sum_j
    weights_j e^{rates_j x} with rates = (phi_r, -xi_1, ..., -xi_{m+1}).
    """

    model: LevyModel
    spectral: SpectralData
    x_max: float
    imag_tol: float
    weights: np.ndarray = field(repr=False)
    rates: np.ndarray = field(repr=False)

    @property
    def r(self) -> float:
        return self.spectral.r


def make_context(
    model: LevyModel,
    spectral: SpectralData | None = None,
    r: float | None = None,
    x_max: float | None = None,
    imag_tol: float = IMAG_TOL,
) -> ScaleContext:
    """Bind a model to spectral data, validating they belong together."""
    if spectral is None:
        if r is None:
            raise DomainError("make_context needs spectral data or a rate r")
        spectral = spectral_data(model, r)
    mismatch = abs(laplace_exponent(model, spectral.phi_r) - spectral.r)
    if mismatch > 1e-9 * max(1.0, spectral.r):
        raise DomainError(
            f"spectral data does not match model: |psi(phi_r) - r| = {mismatch:.3e}"
        )
    weights = np.concatenate(([spectral.coeffs.sum()], -spectral.coeffs))
    rates = np.concatenate(([spectral.phi_r + 0j], -spectral.xis))
    weights.setflags(write=False)
    rates.setflags(write=False)
    if x_max is None:
        x_max = X_MAX_FACTOR / spectral.phi_r
    return ScaleContext(
        model=model,
        spectral=spectral,
        x_max=float(x_max),
        imag_tol=float(imag_tol),
        weights=weights,
        rates=rates,
    )


def _check_range(ctx: ScaleContext, x: float) -> None:
    if x > ctx.x_max:
        raise RangeError(
            f"x = {x} beyond overflow guard x_max = {ctx.x_max:.6g}"
        )


def real_part(ctx: ScaleContext, value: complex, magnitude: float) -> float:
    """Extract the real part, bounding the conjugate-cancellation residue."""
    if abs(value.imag) > ctx.imag_tol * max(1.0, magnitude):
        raise ImaginaryResidual(
            f"imaginary residual {value.imag:.3e} exceeds tolerance "
            f"at magnitude {magnitude:.3e}"
        )
    return float(value.real)


def _mode_sum(ctx: ScaleContext, x: float, power: int = 0, shift: float = 0.0):
    """sum_j w_j rho_j^power e^{(rho_j - shift) x} and its term magnitude."""
    rho = ctx.rates - shift
    terms = ctx.weights * (ctx.rates - shift) ** power if power else ctx.weights
    vals = terms * np.exp(rho * x)
    return vals.sum(), float(np.abs(vals).sum())


def W(ctx: ScaleContext, x: float) -> float:
    """The scale function; zero on the negative half line.

    sigma > 0 forces unbounded variation, so W(0) = 0 exactly rather than
    through mode cancellation."""
    if x <= 0:
        return 0.0
    _check_range(ctx, x)
    total, mag = _mode_sum(ctx, x)
    return real_part(ctx, total, mag)


def W_prime(ctx: ScaleContext, x: float) -> float:
    """Termwise derivative of W; valid for x > 0."""
    if x <= 0:
        raise DomainError("W_prime requires x > 0")
    _check_range(ctx, x)
    total, mag = _mode_sum(ctx, x, power=1)
    return real_part(ctx, total, mag)


def W_second(ctx: ScaleContext, x: float) -> float:
    """Termwise second derivative of W; valid for x > 0."""
    if x <= 0:
        raise DomainError("W_second requires x > 0")
    _check_range(ctx, x)
    total, mag = _mode_sum(ctx, x, power=2)
    return real_part(ctx, total, mag)


def Z(ctx: ScaleContext, x: float) -> float:
    """Z(x) = 1 + r * integral of W over [0, x]; identically 1 below zero."""
    if x <= 0:
        return 1.0
    _check_range(ctx, x)
    vals = ctx.weights * (np.exp(ctx.rates * x) - 1.0) / ctx.rates
    total = 1.0 + ctx.r * vals.sum()
    return real_part(ctx, total, 1.0 + ctx.r * float(np.abs(vals).sum()))


def Zbar(ctx: ScaleContext, x: float) -> float:
    """Antiderivative of Z from 0; equals x on the negative half line."""
    if x <= 0:
        return float(x)
    _check_range(ctx, x)
    rho = ctx.rates
    vals = ctx.weights * ((np.exp(rho * x) - 1.0) / rho**2 - x / rho)
    total = x + ctx.r * vals.sum()
    return real_part(ctx, total, abs(x) + ctx.r * float(np.abs(vals).sum()))


def _safe_expm1_ratio(rho: np.ndarray, x: float) -> np.ndarray:
    """(e^{rho x} - 1) / rho with a series branch near rho = 0."""
    out = np.empty_like(rho)
    small = np.abs(rho) < 1e-12
    out[~small] = (np.exp(rho[~small] * x) - 1.0) / rho[~small]
    out[small] = x + rho[small] * x * x / 2.0
    return out


def W_tilted(ctx: ScaleContext, c: float, x: float) -> float:
    """Scale function of the exponentially tilted process at rate r - psi(c).

    Identical to e^{-c x} W(x); evaluated directly on the shifted modes
    phi_r - c and -(xi_i + c).
    """
    if c < 0:
        raise DomainError("tilt parameter c must be nonnegative")
    if x < 0:
        return 0.0
    _check_range(ctx, x)
    vals = ctx.weights * np.exp((ctx.rates - c) * x)
    return real_part(ctx, vals.sum(), float(np.abs(vals).sum()))


def Z_tilted(ctx: ScaleContext, c: float, x: float) -> float:
    """Z of the tilted process: 1 + (r - psi(c)) * integral of W_tilted."""
    if c < 0:
        raise DomainError("tilt parameter c must be nonnegative")
    if x <= 0:
        return 1.0
    _check_range(ctx, x)
    factor = ctx.r - laplace_exponent(ctx.model, c)
    vals = ctx.weights * _safe_expm1_ratio(ctx.rates - c, x)
    total = 1.0 + factor * vals.sum()
    return real_part(ctx, total, 1.0 + abs(factor) * float(np.abs(vals).sum()))


class FirstPassage(NamedTuple):
    up: float
    down: float
    tau0: float


def first_passage_functionals(ctx: ScaleContext, x: float, b: float) -> FirstPassage:
    """Discounted two-sided exit functionals from [0, b] started at x.

    up   = E^x[e^{-r tau_b^+}; tau_b^+ < tau_0]   = W(x)/W(b)
    down = E^x[e^{-r tau_0};   tau_0 < tau_b^+]   = Z(x) - Z(b) W(x)/W(b)
    tau0 = E^x[e^{-r tau_0}]                       = Z(x) - (r/phi_r) W(x)
    """
    if b <= 0 or x < 0 or x > b:
        raise DomainError(f"need 0 <= x <= b with b > 0, got x={x}, b={b}")
    wx, wb = W(ctx, x), W(ctx, b)
    zx, zb = Z(ctx, x), Z(ctx, b)
    up = wx / wb
    down = zx - zb * up
    tau0 = zx - (ctx.r / ctx.spectral.phi_r) * wx
    return FirstPassage(up=up, down=down, tau0=tau0)


def discounted_position_at_passage(ctx: ScaleContext, x: float, A: float) -> float:
    """E^x[e^{-r tau_A} X_{tau_A}] for the down-crossing time of level A."""
    if x <= A:
        return float(x)
    sd = ctx.spectral
    y = x - A
    phi = sd.phi_r
    drift = sd.psi_prime_zero
    corner = (ctx.r - drift * phi + ctx.r * A * phi) / phi**2
    return (
        Zbar(ctx, y)
        + (A - drift / ctx.r) * Z(ctx, y)
        + drift / ctx.r
        - corner * W(ctx, y)
    )
