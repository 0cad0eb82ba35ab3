"""Entropy frontier: maximal entropy at prescribed row entropy.

``psi(z) = max{h(p) : h_r(p) = z}``.  A maximizer is uniform inside every
column, so only the row marginal matters, and on the decreasing branch the
optimal row marginal is the exponential tilt ``T_a^beta / sum T^beta``.
Along the tilt family

    z(beta)    = log Z(beta) - beta * E_beta[log T]
    psi(beta)  = z(beta) + E_beta[log T]
    dz/dbeta   = -beta * Var_beta[log T]
    dpsi/dbeta = (1 - beta) * Var_beta[log T]

so ``beta = 0`` gives ``p_R``, ``beta = 1/tau`` gives ``p_d`` and
``beta = 1`` gives ``p_D``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .carpet import CarpetSpec, ProbVector, shannon
from .errors import DomainError

BETA_MAX = 512.0
DOMAIN_TOL = 1e-12
MATCH_TOL = 1e-10


@dataclass(frozen=True)
class FrontierPoint:
    z: float
    beta: float
    psi: float
    row_dist: np.ndarray


def tilted_rows(spec: CarpetSpec, beta) -> np.ndarray:
    """Row weights proportional to ``T_a^beta``; vectorized over ``beta``."""
    beta = np.asarray(beta, dtype=float)
    logits = beta[..., None] * spec.log_T
    w = np.exp(logits - logits.max(axis=-1, keepdims=True))
    return w / w.sum(axis=-1, keepdims=True)


def tilt_stats(spec: CarpetSpec, beta):
    """Return ``(z, psi, dz/dbeta, dpsi/dbeta)`` along the tilt family."""
    rows = tilted_rows(spec, beta)
    lt = spec.log_T
    mean = rows @ lt
    var = np.maximum(rows @ (lt * lt) - mean * mean, 0.0)
    z = shannon(rows)
    beta = np.asarray(beta, dtype=float)
    return z, z + mean, -beta * var, (1.0 - beta) * var


def _row_entropy_at(spec: CarpetSpec, beta: float) -> float:
    return float(shannon(tilted_rows(spec, beta)))


def reference_row_entropies(spec: CarpetSpec) -> tuple[float, float, float]:
    """``(h_r(p_D), h_r(p_d), log R)``."""
    return (_row_entropy_at(spec, 1.0), _row_entropy_at(spec, 1.0 / spec.tau), math.log(spec.R))


def _n_max_rows(spec: CarpetSpec) -> int:
    return int(np.sum(spec.T == spec.T.max()))


def beta_for_row_entropy(spec: CarpetSpec, z: float) -> float:
    """Tilt ``beta >= 0`` whose row marginal has entropy ``z``.

    Returns ``inf`` when ``z`` is at or below ``log(#rows with max T)``, where
    the entropy constraint no longer binds.
    """
    log_R = math.log(spec.R)
    if z >= log_R:
        return 0.0
    if spec.uniform_fibers:
        # every row marginal has the same entropy gain; beta is irrelevant
        return 0.0
    if z <= math.log(_n_max_rows(spec)) or _row_entropy_at(spec, BETA_MAX) >= z:
        return math.inf
    beta = brentq(lambda b: _row_entropy_at(spec, b) - z, 0.0, BETA_MAX, xtol=1e-15, rtol=1e-15, maxiter=500)
    if abs(_row_entropy_at(spec, beta) - z) > MATCH_TOL:
        # brentq stops on beta; finish on the entropy residual
        lo, hi = 0.0, BETA_MAX
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if _row_entropy_at(spec, mid) > z:
                lo = mid
            else:
                hi = mid
        beta = 0.5 * (lo + hi)
    return beta


def _check_row_domain(spec: CarpetSpec, z: float) -> float:
    log_R = math.log(spec.R)
    if not (-DOMAIN_TOL <= z <= log_R + DOMAIN_TOL) or math.isnan(z):
        raise DomainError(f"row entropy {z} outside [0, log R={log_R}]")
    return min(max(z, 0.0), log_R)


def frontier_point(spec: CarpetSpec, z: float) -> FrontierPoint:
    z = _check_row_domain(spec, z)
    if spec.uniform_fibers:
        return FrontierPoint(z, 0.0, z + float(spec.log_T[0]), tilted_rows(spec, 0.0))
    beta = beta_for_row_entropy(spec, z)
    if math.isinf(beta):
        top = (spec.T == spec.T.max()).astype(float)
        return FrontierPoint(z, beta, z + float(spec.log_T.max()), top / top.sum())
    rows = tilted_rows(spec, beta)
    return FrontierPoint(z, beta, z + float(rows @ spec.log_T), rows)


def psi(spec: CarpetSpec, z: float) -> float:
    """Maximal entropy among probability vectors with row entropy ``z``."""
    return frontier_point(spec, z).psi


def phi(spec: CarpetSpec, h: float) -> float:
    """Maximal row entropy among probability vectors with entropy ``h``.

    Three pieces: the diagonal ``h`` up to ``log R``, the plateau ``log R`` up
    to ``h(p_R)``, then the inverse of ``psi`` on ``[h_r(p_D), log R]``.
    """
    log_D, log_R = math.log(spec.D), math.log(spec.R)
    if not (-DOMAIN_TOL <= h <= log_D + DOMAIN_TOL) or math.isnan(h):
        raise DomainError(f"entropy {h} outside [0, log D={log_D}]")
    h = min(max(h, 0.0), log_D)
    if h <= log_R:
        return h
    h_R = log_R + float(spec.log_T.mean())
    if h <= h_R:
        return log_R
    # psi(beta) increases from h(p_R) at beta=0 to log D at beta=1
    if float(tilt_stats(spec, 1.0)[1]) <= h:
        return _row_entropy_at(spec, 1.0)
    beta = brentq(lambda b: float(tilt_stats(spec, b)[1]) - h, 0.0, 1.0, xtol=1e-15, rtol=1e-15, maxiter=500)
    return _row_entropy_at(spec, beta)


def lift(spec: CarpetSpec, z: float) -> ProbVector:
    """Frontier probability vector with row entropy ``z`` on ``[h_r(p_D), log R]``."""
    hr_D = _row_entropy_at(spec, 1.0)
    log_R = math.log(spec.R)
    if not (hr_D - DOMAIN_TOL <= z <= log_R + DOMAIN_TOL):
        raise DomainError(f"row entropy {z} outside the frontier branch [{hr_D}, {log_R}]")
    if spec.uniform_fibers:
        return ProbVector.uniform(spec)
    beta = min(beta_for_row_entropy(spec, min(max(z, hr_D), log_R)), 1.0)
    return lift_beta(spec, beta)


def lift_beta(spec: CarpetSpec, beta: float) -> ProbVector:
    return ProbVector.from_rows(spec, tilted_rows(spec, beta))


def frontier_samples(spec: CarpetSpec, n_points: int = 101) -> list[FrontierPoint]:
    """Points of the decreasing branch, evenly spaced in ``z``."""
    hr_D, _, log_R = reference_row_entropies(spec)
    return [frontier_point(spec, z) for z in np.linspace(hr_D, log_R, n_points)]
