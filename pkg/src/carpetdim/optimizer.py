"""Maximization of the min of the six dimension functions.

The maximum over four probability vectors reduces to four row entropies
``(z-, z1, z2, z+)`` on the frontier (each vector replaced by its frontier
lift), constrained to

    z-  in [h_r(p_D), h_r(p_d)]     z1 in [z-, log R]
    z2  in [h_r(p_D), log R]        z+ in [h_r(p_d), log R]

Each ``d_i`` is a nonnegative combination of the concave frontier values
``psi(z_j)`` and the linear ``z_j``, so the objective is concave on this
polytope.  We solve the epigraph problem ``max t s.t. t <= d_i`` with SLSQP in
tilt coordinates ``beta_j`` (``z`` is a decreasing function of ``beta``, and
``psi`` is smooth in ``beta`` even where ``dpsi/dz`` blows up at ``log R``),
from a grid of feasible starts.  The starts must agree; disagreement means a
bug or a nonconcave input and raises :class:`ConvergenceFailure`.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy.optimize import minimize

from .carpet import (
    CarpetSpec,
    DimBreakdown,
    DimParams,
    EntropyProfile,
    ProbVector,
    bernoulli_dimension,
    dim_functions,
    dim_values,
    distinguished_measures,
    mcmullen_dimension,
    shannon,
)
from .errors import CertificationFailure, ConvergenceFailure, DomainError, ResourceLimit
from .frontier import lift, lift_beta, psi, reference_row_entropies, tilt_stats

THETA_TOL = 1e-9
AGREE_TOL = 1e-6
TIE_TOL = 1e-8


@dataclass(frozen=True)
class ThetaPoint:
    z_minus: float
    z1: float
    z2: float
    z_plus: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.z_minus, self.z1, self.z2, self.z_plus)

    def check(self, spec: CarpetSpec, tol: float = THETA_TOL) -> None:
        hr_D, hr_d, log_R = reference_row_entropies(spec)
        z_m, z1, z2, z_p = self.as_tuple()
        ok = (hr_D - tol <= z_m <= hr_d + tol and z_m - tol <= z1 <= log_R + tol
              and hr_D - tol <= z2 <= log_R + tol and hr_d - tol <= z_p <= log_R + tol)
        if not ok:
            raise DomainError(f"{self} is outside Theta [h_r(p_D)={hr_D}, h_r(p_d)={hr_d}, log R={log_R}]")


@dataclass(frozen=True)
class OptResult:
    value: float
    argmax: ThetaPoint
    breakdown: DimBreakdown
    vectors: tuple[ProbVector, ProbVector, ProbVector, ProbVector]
    diagnostics: dict = field(default_factory=dict)


def objective(spec: CarpetSpec, params: DimParams, theta: ThetaPoint) -> DimBreakdown:
    """Dimension functions at the frontier lifts of ``theta``."""
    theta.check(spec)
    profiles = [EntropyProfile(psi(spec, z), z) for z in theta.as_tuple()]
    return dim_functions(spec, params, profiles)


def _linear_form(spec: CarpetSpec, params: DimParams) -> tuple[np.ndarray, np.ndarray]:
    """``(A, c)`` with ``d = A @ v + c`` for ``v = (h-, hr-, h1, hr1, h2, hr2, h+, hr+)``."""
    c = dim_values(spec, params.alpha, params.H, *np.zeros(8))
    A = np.empty((6, 8))
    for k in range(8):
        e = np.zeros(8)
        e[k] = 1.0
        A[:, k] = dim_values(spec, params.alpha, params.H, *e) - c
    return A, c


class _TiltProblem:
    """Epigraph problem in tilt coordinates; ``x = (beta-, beta1, beta2, beta+, t)``."""

    def __init__(self, spec: CarpetSpec, params: DimParams):
        self.spec = spec
        self.A, self.c = _linear_form(spec, params)
        self.uses_p1 = bool(np.any(self.A[:, 2:4] != 0))
        self.n_evals = 0

    def _stats(self, betas):
        z, ps, dz, dps = tilt_stats(self.spec, np.asarray(betas, dtype=float))
        return z, ps, dz, dps

    def values(self, betas) -> np.ndarray:
        z, ps, _, _ = self._stats(betas)
        v = np.empty(8)
        v[0::2], v[1::2] = ps, z
        return self.A @ v + self.c

    def constraints(self, x):
        self.n_evals += 1
        return self.values(x[:4]) - x[4]

    def constraints_jac(self, x):
        _, _, dz, dps = self._stats(x[:4])
        J = np.empty((6, 5))
        J[:, :4] = self.A[:, 0::2] * dps + self.A[:, 1::2] * dz
        J[:, 4] = -1.0
        return J


def _reference_result(spec, params, z, vec, diagnostics) -> OptResult:
    theta = ThetaPoint(z, z, z, z)
    bd = objective(spec, params, theta)
    return OptResult(bd.dj, theta, bd, (vec, vec, vec, vec), diagnostics)


def maximize(spec: CarpetSpec, params: DimParams, grid_starts: int = 2, coord_tol: float = 1e-7,
             max_iters: int = 200) -> OptResult:
    """Maximum of the min of d1..d6 over four probability vectors.

    ``grid_starts`` points per tilt coordinate seed the multistart; the
    reported argmax is the lexicographically smallest ``(z-, z1, z2, z+)``
    among starts within ``1e-8`` of the best value.
    """
    params.check(spec)
    p_D, p_R, p_d = distinguished_measures(spec)
    if spec.uniform_fibers:
        # Theta collapses to the single point z = log R
        return _reference_result(spec, params, math.log(spec.R), p_D, {"restarts": 0, "degenerate": True})
    if params.alpha == 0:
        return _reference_result(spec, params, p_d.h_r, p_d, {"restarts": 0, "alpha_zero": True})

    prob = _TiltProblem(spec, params)
    inv_tau = 1.0 / spec.tau
    bounds = [(inv_tau, 1.0), (0.0, 1.0), (0.0, 1.0), (0.0, inv_tau), (None, None)]
    cons = [{"type": "ineq", "fun": prob.constraints, "jac": prob.constraints_jac}]
    if prob.uses_p1:
        # z1 >= z-  <=>  beta1 <= beta-
        cons.append({"type": "ineq", "fun": lambda x: x[0] - x[1],
                     "jac": lambda x: np.array([1.0, -1.0, 0.0, 0.0, 0.0])})
    fracs = (np.arange(grid_starts) + 0.5) / grid_starts

    candidates = []
    iters = 0
    for f_m, f_1, f_2, f_p in itertools.product(fracs, fracs if prob.uses_p1 else [1.0], fracs, fracs):
        b_m = inv_tau + f_m * (1.0 - inv_tau)
        b0 = np.array([b_m, f_1 * b_m, f_2, f_p * inv_tau])
        x0 = np.append(b0, prob.values(b0).min())
        res = minimize(lambda x: -x[4], x0, jac=lambda x: np.array([0, 0, 0, 0, -1.0]), method="SLSQP",
                       bounds=bounds, constraints=cons,
                       options={"maxiter": max_iters, "ftol": 1e-15})
        iters += res.nit
        b = np.clip(res.x[:4], [inv_tau, 0.0, 0.0, 0.0], [1.0, 1.0, 1.0, inv_tau])
        if prob.uses_p1:
            b[1] = min(b[1], b[0])
        else:
            b[1] = b[0]
        val = float(prob.values(b).min())
        candidates.append((val, b))

    vals = np.array([v for v, _ in candidates])
    best = vals.max()
    spread = float(best - vals.min())
    if spread > AGREE_TOL:
        raise ConvergenceFailure(f"multistart values disagree by {spread:.3g} (alpha={params.alpha})")

    def theta_of(b):
        z = tilt_stats(spec, b)[0]
        return ThetaPoint(*(float(x) for x in z))

    winners = [theta_of(b) for v, b in candidates if v >= best - TIE_TOL]
    theta = min(winners, key=ThetaPoint.as_tuple)
    b_win = next(b for v, b in candidates if theta_of(b) == theta)
    bd = DimBreakdown.from_values(prob.values(b_win))
    vectors = tuple(lift_beta(spec, float(x)) for x in b_win)

    dim_pd = bernoulli_dimension(spec, p_d)
    if bd.dj > dim_pd + 1e-9 or (params.alpha >= 1e-3 and bd.dj >= dim_pd - 1e-12):
        raise ConvergenceFailure(f"value {bd.dj} does not drop below dim(p_d)={dim_pd} at alpha={params.alpha}")
    diagnostics = {"restarts": len(candidates), "iterations": iters, "spread": spread,
                   "evaluations": prob.n_evals, "betas": tuple(float(x) for x in b_win)}
    return OptResult(bd.dj, theta, bd, vectors, diagnostics)


def sweep(spec: CarpetSpec, params: DimParams, alphas, **options) -> list[OptResult]:
    """``maximize`` at every alpha in ``alphas`` with the other parameters fixed."""
    return [maximize(spec, params.with_alpha(a), **options) for a in alphas]


def closed_form_torus(N: int, M: int, alpha: float) -> float:
    """Shrinking-target dimension for the full ``N x M`` torus with ball targets."""
    tau = math.log(M) / math.log(N)
    return min((tau + 1.0) / (alpha + 1.0), 2.0 * tau / (tau + alpha))


def large_alpha_value(spec: CarpetSpec, alpha: float) -> float:
    """``log D / ((1 + alpha) log N)``."""
    return math.log(spec.D) / ((1.0 + alpha) * spec.log_N)


def large_alpha_threshold(spec: CarpetSpec, n_scan: int = 24, tol: float = 1e-8) -> float:
    """Threshold beyond which the dimension is ``log D / ((1 + alpha) log N)``.

    Starts from ``max(tau - 1, log D / log R - 1)`` and confirms the identity
    with cylinder targets on a log grid up to ten times that value.  Ball
    targets only raise d4 and d5, and the identity is an upper bound for both
    kinds once ``alpha >= tau - 1``, so confirming cylinders covers balls.
    """
    if spec.R < 2:
        raise ValueError("large_alpha_threshold needs at least two columns")
    A = max(spec.tau - 1.0, math.log(spec.D) / math.log(spec.R) - 1.0)
    for a in np.geomspace(A * (1 + 1e-6), 10.0 * A, n_scan):
        got = maximize(spec, DimParams.cylinder(float(a))).value
        want = large_alpha_value(spec, float(a))
        if abs(got - want) > tol:
            raise CertificationFailure(f"alpha={a}: dimension {got} differs from log D/((1+alpha) log N)={want}")
    return A


def _lattice(K: int, D: int) -> np.ndarray:
    """All vectors of nonnegative integers of length D summing to K."""
    if D == 1:
        return np.array([[K]])
    rows = []
    for bars in itertools.combinations(range(K + D - 1), D - 1):
        prev = -1
        row = []
        for b in bars:
            row.append(b - prev - 1)
            prev = b
        row.append(K + D - 2 - prev)
        rows.append(row)
    return np.array(rows)


def _pareto(points: np.ndarray) -> np.ndarray:
    """Rows of ``points`` (h, h_r) not dominated coordinatewise by another row."""
    order = np.lexsort((-points[:, 1], -points[:, 0]))
    keep = []
    best_hr = -np.inf
    for i in order:
        if points[i, 1] > best_hr:
            keep.append(i)
            best_hr = points[i, 1]
    return points[keep]


def brute_force(spec: CarpetSpec, params: DimParams, resolution: int = 30,
                max_lattice: int = 2_000_000, max_evaluations: float = 5e9) -> float:
    """Max of the min of d1..d6 over lattice vectors with denominator ``resolution``.

    Every lattice 4-tuple is feasible, so this is a lower bound on the true
    maximum.  The dimension functions are nondecreasing in every entropy
    argument, so only lattice vectors whose ``(h, h_r)`` pair is not
    dominated need to be combined.
    """
    K = int(resolution)
    if K < 1:
        raise ValueError("resolution must be positive")
    n_lattice = comb(K + spec.D - 1, spec.D - 1)
    if n_lattice > max_lattice:
        raise ResourceLimit(f"{n_lattice} lattice vectors exceed the cap {max_lattice}")
    params.check(spec)
    P = _lattice(K, spec.D) / K
    prof = np.column_stack([shannon(P), shannon(spec.row_marginal(P))])
    front = _pareto(prof)
    n = len(front)
    if float(n) ** 4 > max_evaluations:
        raise ResourceLimit(f"{n}^4 profile combinations exceed the cap {max_evaluations:g}")
    h, hr = front[:, 0], front[:, 1]
    # d1 depends on p- only, d6 on p+ only, d2 on (p-, p1)
    h2, hp = h[:, None], h[None, :]
    hr2, hrp = hr[:, None], hr[None, :]
    d6 = dim_values(spec, params.alpha, params.H, 0, 0, 0, 0, 0, 0, hp, hrp)[5]
    best = -np.inf
    for i in range(n):
        for j in range(n):
            d = dim_values(spec, params.alpha, params.H, h[i], hr[i], h[j], hr[j], h2, hr2, hp, hrp)
            d[5] = d6
            best = max(best, float(d.min(axis=0).max()))
    return best
