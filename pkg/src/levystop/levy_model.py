"""Spectrally negative Levy process with phase-type downward jumps.

The state process is X_t = X_0 + mu*t + sigma*B_t - sum_{n <= N_t} Z_n, where
B is a standard Brownian motion, N a Poisson process with rate lamb, and the
Z_n are i.i.d. phase-type(alpha, T) jump sizes. Everything downstream (scale
functions, thresholds, value functions) is driven by the Laplace exponent

    psi(s) = mu*s + sigma^2*s^2/2 + lamb*(alpha (sI - T)^{-1} t - 1),

its derivative, and the root structure of psi(s) = r: one positive root phi_r
and m+1 roots -xi_i with negative real parts, obtained here from the
cleared-denominator polynomial det(sI - T)*(psi(s) - r).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import (
    ConvergenceFailure,
    DomainError,
    ImaginaryResidual,
    InvalidInitialDistribution,
    InvalidSubgenerator,
    RootMultiplicity,
    SingularResolvent,
    UnsupportedModel,
)

SEPARATION_TOL = 1e-7       # relative pairwise root distance; below it we refuse
IMAG_TOL = 1e-9             # relative imaginary residual allowed in real output
EIGEN_COLLISION_TOL = 1e-9  # evaluation points may not sit on spec(T)
ALPHA_SUM_TOL = 1e-9
ROOT_RESIDUAL_TOL = 1e-8    # |psi(root) - r| <= tol * max(1, r) after polish
PHI_TOL = 1e-12             # |psi(phi_r) - r| <= tol * max(1, r)


@dataclass(frozen=True)
class PhaseTypeJump:
    """Phase-type representation (alpha, T) of the jump sizes.

    t = -T 1 is the absorption-rate vector; eigs caches spec(T) for the
    singularity guard on resolvent evaluations.
    """

    alpha: np.ndarray
    T: np.ndarray
    t: np.ndarray
    eigs: np.ndarray

    @property
    def m(self) -> int:
        return self.alpha.shape[0]

    def mean(self) -> float:
        """E[Z] = alpha (-T)^{-1} 1."""
        return float(self.alpha @ np.linalg.solve(-self.T, np.ones(self.m)))


@dataclass(frozen=True)
class LevyModel:
    mu: float
    sigma: float
    lamb: float
    jump: PhaseTypeJump


@dataclass(frozen=True)
class SpectralData:
    """Root structure of psi(s) = r.

    xis holds the m+1 values xi_i with positive real parts (the roots in the
    negative half plane are -xi_i), coeffs the residues C_i = -1/psi'(-xi_i),
    and phi_r_prime = 1/psi'(phi_r) the derivative of phi_r in r.
    """

    r: float
    phi_r: float
    xis: np.ndarray
    coeffs: np.ndarray
    phi_r_prime: float
    psi_prime_zero: float


def build_jump(alpha, T) -> PhaseTypeJump:
    """Validate and freeze a phase-type representation."""
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    T = np.atleast_2d(np.asarray(T, dtype=float))
    if alpha.ndim != 1:
        raise InvalidInitialDistribution("alpha must be a one-dimensional vector")
    m = alpha.shape[0]
    if T.shape != (m, m):
        raise InvalidSubgenerator(
            f"T must be {m}x{m} to match alpha, got {T.shape}"
        )
    if np.any(alpha < 0):
        raise InvalidInitialDistribution("alpha entries must be nonnegative")
    total = float(alpha.sum())
    if total > 1.0 + ALPHA_SUM_TOL:
        raise InvalidInitialDistribution(f"alpha sums to {total}, above 1")
    diag = np.diag(T)
    if np.any(diag >= 0):
        raise InvalidSubgenerator("diagonal entries of T must be strictly negative")
    off = T - np.diag(diag)
    if np.any(off < 0):
        raise InvalidSubgenerator("off-diagonal entries of T must be nonnegative")
    # published matrices carry per-entry rounding, so a row sum may stick out
    # above zero by a few units in the last printed digit; admit that dust
    # while still rejecting genuinely positive exit-rate violations
    row_scale = np.abs(T).sum(axis=1)
    if np.any(T.sum(axis=1) > 1e-4 * np.maximum(row_scale, 1.0)):
        raise InvalidSubgenerator("row sums of T must be nonpositive")
    eigs = np.linalg.eigvals(T)
    if np.any(eigs.real >= 0):
        raise InvalidSubgenerator(
            "T must have all eigenvalues with strictly negative real parts"
        )
    t = np.maximum(-T @ np.ones(m), 0.0)  # clip rounding dust on zero rows
    if not np.any(t > 0):
        raise InvalidSubgenerator("T admits no absorption (t = -T 1 vanishes)")
    alpha.setflags(write=False)
    T.setflags(write=False)
    t.setflags(write=False)
    eigs.setflags(write=False)
    return PhaseTypeJump(alpha=alpha, T=T, t=t, eigs=eigs)


def build_model(mu, sigma, lamb, alpha, T) -> LevyModel:
    """Validate parameters and assemble the process model.

    sigma must be strictly positive: every closed form here relies on the
    unbounded-variation root structure.
    """
    mu = float(mu)
    sigma = float(sigma)
    lamb = float(lamb)
    if not np.isfinite([mu, sigma, lamb]).all():
        raise DomainError("model parameters must be finite")
    if sigma <= 0:
        raise UnsupportedModel("sigma must be strictly positive")
    if lamb < 0:
        raise DomainError("lamb must be nonnegative")
    return LevyModel(mu=mu, sigma=sigma, lamb=lamb, jump=build_jump(alpha, T))


def _resolvent_apply(jump: PhaseTypeJump, s, vec):
    """(sI - T)^{-1} vec with a spectrum-proximity guard."""
    if np.min(np.abs(s - jump.eigs)) < EIGEN_COLLISION_TOL:
        raise SingularResolvent(f"s = {s} lies on the spectrum of T")
    m = jump.m
    mat = s * np.eye(m, dtype=np.result_type(type(s), float)) - jump.T
    try:
        return np.linalg.solve(mat, vec)
    except np.linalg.LinAlgError as exc:
        raise SingularResolvent(f"sI - T singular at s = {s}") from exc


def laplace_exponent(model: LevyModel, s):
    """psi(s) = mu*s + sigma^2 s^2 / 2 + lamb*(alpha (sI-T)^{-1} t - 1)."""
    base = model.mu * s + 0.5 * model.sigma**2 * s * s
    if model.lamb == 0.0:
        return base
    jump = model.jump
    resolved = _resolvent_apply(jump, s, jump.t)
    return base + model.lamb * (jump.alpha @ resolved - 1.0)


def psi_derivative(model: LevyModel, s):
    """psi'(s) = mu + sigma^2 s - lamb * alpha (sI-T)^{-2} t."""
    base = model.mu + model.sigma**2 * s
    if model.lamb == 0.0:
        return base
    jump = model.jump
    once = _resolvent_apply(jump, s, jump.t)
    twice = _resolvent_apply(jump, s, once)
    return base - model.lamb * (jump.alpha @ twice)


def psi_prime_zero(model: LevyModel) -> float:
    """psi'(0+) = mu - lamb * E[Z], the long-run drift E^0[X_1]."""
    if model.lamb == 0.0:
        return model.mu
    return model.mu - model.lamb * model.jump.mean()


def solve_phi(model: LevyModel, r: float) -> float:
    """The positive root phi_r of psi(s) = r.

    psi is convex with psi(0) = 0, so for r > 0 the equation has exactly one
    root on (0, infinity); bracket by doubling, then brentq plus a Newton
    polish down to |psi(phi_r) - r| <= 1e-12 * max(1, r).
    """
    r = float(r)
    if r <= 0:
        raise DomainError("discount rate r must be strictly positive")

    def excess(s):
        return float(laplace_exponent(model, s)) - r

    hi = 1.0
    for _ in range(200):
        val = excess(hi)
        if not np.isfinite(val):
            raise ConvergenceFailure("psi overflowed during bracket expansion")
        if val >= 0:
            break
        hi *= 2.0
    else:
        raise ConvergenceFailure("bracket expansion for phi_r exceeded its limit")
    phi = brentq(excess, 0.0, hi, xtol=1e-15, rtol=8.9e-16, maxiter=200)

    tol = PHI_TOL * max(1.0, r)
    for _ in range(10):
        err = excess(phi)
        if abs(err) <= tol:
            break
        slope = float(psi_derivative(model, phi))
        step = err / slope
        if not np.isfinite(step):
            break
        phi -= step
    if abs(excess(phi)) > tol:
        raise ConvergenceFailure(
            f"phi_r polish stalled at residual {abs(excess(phi)):.3e}"
        )
    if phi <= 0 or float(psi_derivative(model, phi)) <= 0:
        raise ConvergenceFailure("phi_r classification failed (psi not increasing)")
    return float(phi)


def _characteristic_data(jump: PhaseTypeJump):
    """Faddeev-LeVerrier pass over T.

    Returns (q, n): q the monic coefficients of det(sI - T) (highest power
    first, length m+1) and n the coefficients of alpha adj(sI - T) t (length
    m, degree m-1).
    """
    m = jump.m
    T = jump.T
    eye = np.eye(m)
    M = eye.copy()
    q = np.empty(m + 1)
    q[0] = 1.0
    n = np.empty(m)
    for k in range(1, m + 1):
        n[k - 1] = jump.alpha @ M @ jump.t
        AM = T @ M
        c = -np.trace(AM) / k
        q[k] = c
        M = AM + c * eye
    return q, n


def char_poly(model: LevyModel, r: float) -> np.ndarray:
    """Coefficients (highest first) of det(sI - T)*(psi(s) - r).

    Degree m+2 for lamb > 0; with lamb = 0 the rational part drops and the
    polynomial is the bare quadratic sigma^2 s^2/2 + mu s - r.
    """
    quad = np.array([0.5 * model.sigma**2, model.mu, -(model.lamb + r)])
    if model.lamb == 0.0:
        return quad
    q, n = _characteristic_data(model.jump)
    return np.polyadd(np.polymul(q, quad), model.lamb * n)


def _polish_root(model: LevyModel, r: float, z: complex) -> complex:
    """Newton iterations on psi(s) - r from a companion-matrix seed.

    Seeds sitting on a pole of psi (spurious roots of the cleared polynomial
    from reducible phase representations) are pushed off the pole and then
    migrate to a genuine root; the duplicate is caught by the separation
    check afterwards.
    """
    for _ in range(80):
        try:
            err = laplace_exponent(model, z) - r
            slope = psi_derivative(model, z)
        except SingularResolvent:
            z = z * (1.0 + 1e-9) + 1e-12
            continue
        step = err / slope
        if not np.isfinite(step):
            break
        z = z - step
        if abs(step) <= 1e-15 * max(1.0, abs(z)):
            break
    return z


def _pair_conjugates(roots, scale):
    """Snap near-real roots to the axis and force exact conjugate pairs."""
    out = []
    used = np.zeros(len(roots), dtype=bool)
    for i, z in enumerate(roots):
        if used[i]:
            continue
        used[i] = True
        if abs(z.imag) <= 1e-10 * max(1.0, abs(z)):
            out.append(complex(z.real, 0.0))
            continue
        target = np.conj(z)
        best, dist = -1, np.inf
        for j in range(len(roots)):
            if used[j] or j == i:
                continue
            d = abs(roots[j] - target)
            if d < dist:
                best, dist = j, d
        if best < 0 or dist > 1e-6 * scale:
            raise ImaginaryResidual(
                f"root {z} has no conjugate partner within tolerance"
            )
        used[best] = True
        w = 0.5 * (z + np.conj(roots[best]))
        out.append(w)
        out.append(np.conj(w))
    return out


def spectral_data(model: LevyModel, r: float) -> SpectralData:
    """Solve the full root structure of psi(s) = r.

    Companion-matrix roots of the cleared polynomial, Newton-polished on psi
    directly, classified into phi_r and the negative-half-plane set, with
    residual, separation, and conjugate-closure checks.
    """
    phi = solve_phi(model, r)
    poly = char_poly(model, r)
    raw = np.roots(poly)
    polished = [_polish_root(model, r, complex(z)) for z in raw]
    scale = max(abs(z) for z in polished)
    roots = _pair_conjugates(polished, scale)

    pairs = [(i, j) for i in range(len(roots)) for j in range(i + 1, len(roots))]
    min_sep = min(abs(roots[i] - roots[j]) for i, j in pairs)
    if min_sep <= SEPARATION_TOL * scale:
        raise RootMultiplicity(
            f"root separation {min_sep:.3e} below {SEPARATION_TOL:.0e} * {scale:.3e}"
        )

    pos = [z for z in roots if z.real > 0]
    neg = [z for z in roots if z.real < 0]
    if len(pos) != 1 or len(neg) != len(roots) - 1:
        raise ConvergenceFailure(
            f"expected one positive-half-plane root, found {len(pos)}"
        )
    if abs(pos[0] - phi) > 1e-9 * max(1.0, phi):
        raise ConvergenceFailure(
            f"polynomial root {pos[0]} disagrees with phi_r = {phi}"
        )

    resid_tol = ROOT_RESIDUAL_TOL * max(1.0, r)
    for z in neg:
        resid = abs(laplace_exponent(model, z) - r)
        if resid > resid_tol:
            raise ConvergenceFailure(
                f"root {z} has residual {resid:.3e} above {resid_tol:.3e}"
            )

    order = np.lexsort((
        [z.imag for z in neg],
        [z.real for z in neg],
    ))
    xis = np.array([-neg[k] for k in order])
    coeffs = np.array([-1.0 / psi_derivative(model, -xi) for xi in xis])

    total = coeffs.sum()
    if abs(total.imag) > IMAG_TOL * max(1.0, abs(total)):
        raise ImaginaryResidual(
            f"residue sum carries imaginary part {total.imag:.3e}"
        )
    xis.setflags(write=False)
    coeffs.setflags(write=False)
    return SpectralData(
        r=r,
        phi_r=phi,
        xis=xis,
        coeffs=coeffs,
        phi_r_prime=1.0 / float(psi_derivative(model, phi)),
        psi_prime_zero=psi_prime_zero(model),
    )
