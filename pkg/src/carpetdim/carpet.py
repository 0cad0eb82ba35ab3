"""Carpet data model, entropies and the six dimension functions.

A Bedford-McMullen carpet is described by integers ``M > N >= 2``, a set of
columns ``S`` in ``{1..N}`` and for every column ``a`` a set of rows
``P_a`` in ``{1..M}``.  The alphabet ``Q`` is the set of pairs ``(a, b)``
with ``b`` in ``P_a``; it is stored in lexicographic order, so the symbols
of one column form a contiguous block.

All entropies are in nats.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.special import entr

from .errors import MalformedCarpet

SUM_TOL = 1e-12
ACTIVE_TOL = 1e-9


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class CarpetSpec:
    N: int
    M: int
    rows: tuple[tuple[int, tuple[int, ...]], ...]

    @cached_property
    def columns(self) -> tuple[int, ...]:
        return tuple(a for a, _ in self.rows)

    @cached_property
    def fibers(self) -> dict[int, tuple[int, ...]]:
        return {a: fib for a, fib in self.rows}

    @cached_property
    def T(self) -> np.ndarray:
        """Fiber counts ``T_a`` in column order."""
        return _frozen(np.array([len(fib) for _, fib in self.rows], dtype=float))

    @cached_property
    def log_T(self) -> np.ndarray:
        return _frozen(np.log(self.T))

    @cached_property
    def symbols(self) -> tuple[tuple[int, int], ...]:
        return tuple((a, b) for a, fib in self.rows for b in fib)

    @cached_property
    def symbol_index(self) -> dict[tuple[int, int], int]:
        return {s: i for i, s in enumerate(self.symbols)}

    @cached_property
    def symbol_row(self) -> np.ndarray:
        """Position in ``columns`` of the column of every symbol."""
        return _frozen(np.repeat(np.arange(self.R), self.T.astype(int)))

    @cached_property
    def row_start(self) -> np.ndarray:
        """Index of the first symbol of every column."""
        counts = self.T.astype(int)
        return _frozen(np.concatenate([[0], np.cumsum(counts)[:-1]]))

    @property
    def D(self) -> int:
        return len(self.symbols)

    @property
    def R(self) -> int:
        return len(self.rows)

    @cached_property
    def log_N(self) -> float:
        return math.log(self.N)

    @cached_property
    def log_M(self) -> float:
        return math.log(self.M)

    @cached_property
    def tau(self) -> float:
        return self.log_M / self.log_N

    @property
    def uniform_fibers(self) -> bool:
        """True when every column has the same number of fibers."""
        return bool(np.all(self.T == self.T[0]))

    def row_marginal(self, weights: np.ndarray) -> np.ndarray:
        """Sum symbol weights (last axis) within each column."""
        return np.add.reduceat(weights, self.row_start, axis=-1)

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "M": self.M,
            "rows": [{"column": a, "fibers": list(fib)} for a, fib in self.rows],
        }


def validate_carpet(raw) -> CarpetSpec:
    """Build a :class:`CarpetSpec` from a carpet description.

    ``raw`` is either a mapping in the carpet-file layout
    ``{"N": 3, "M": 8, "rows": [{"column": 1, "fibers": [1, 2]}, ...]}``
    or one with a ``"P"`` mapping ``{column: fibers}``.  Columns and fibers
    must be strictly increasing and in range.
    """
    if isinstance(raw, CarpetSpec):
        raw = raw.to_dict()
    if not isinstance(raw, Mapping):
        raise MalformedCarpet(f"carpet description must be a mapping, got {type(raw).__name__}")
    try:
        N = raw["N"]
        M = raw["M"]
    except KeyError as exc:
        raise MalformedCarpet(f"missing field {exc}") from None
    for name, v in (("N", N), ("M", M)):
        if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
            raise MalformedCarpet(f"{name} must be an integer, got {v!r}")
    N, M = int(N), int(M)
    if N < 2:
        raise MalformedCarpet(f"N must be >= 2, got {N}")
    if M <= N:
        raise MalformedCarpet(f"M must exceed N, got N={N}, M={M}")

    if "rows" in raw:
        entries = []
        for r in raw["rows"]:
            if not isinstance(r, Mapping) or "column" not in r or "fibers" not in r:
                raise MalformedCarpet(f"row entry must have 'column' and 'fibers': {r!r}")
            entries.append((r["column"], r["fibers"]))
    elif "P" in raw:
        entries = [(int(a), fib) for a, fib in raw["P"].items()]
    else:
        raise MalformedCarpet("carpet needs a 'rows' list or a 'P' mapping")

    if not entries:
        raise MalformedCarpet("column set S is empty")
    rows = []
    prev_a = 0
    for a, fib in entries:
        if isinstance(a, bool) or not isinstance(a, (int, np.integer)):
            raise MalformedCarpet(f"column index must be an integer, got {a!r}")
        a = int(a)
        if not 1 <= a <= N:
            raise MalformedCarpet(f"column {a} outside 1..{N}")
        if a <= prev_a:
            raise MalformedCarpet("columns must be strictly increasing (no duplicates)")
        prev_a = a
        fib = list(fib)
        if not fib:
            raise MalformedCarpet(f"column {a} has no fibers")
        prev_b = 0
        for b in fib:
            if isinstance(b, bool) or not isinstance(b, (int, np.integer)):
                raise MalformedCarpet(f"fiber index must be an integer, got {b!r}")
            if not 1 <= b <= M:
                raise MalformedCarpet(f"fiber {b} of column {a} outside 1..{M}")
            if b <= prev_b:
                raise MalformedCarpet(f"fibers of column {a} must be strictly increasing")
            prev_b = b
        rows.append((a, tuple(int(b) for b in fib)))
    return CarpetSpec(N, M, tuple(rows))


def carpet_from_counts(N: int, M: int, T: Sequence[int]) -> CarpetSpec:
    """Carpet with columns ``1..len(T)`` and fibers ``1..T_a``."""
    return validate_carpet(
        {"N": N, "M": M, "rows": [{"column": a + 1, "fibers": list(range(1, t + 1))} for a, t in enumerate(T)]}
    )


def full_torus(N: int, M: int) -> CarpetSpec:
    return carpet_from_counts(N, M, [M] * N)


def load_carpet(path) -> CarpetSpec:
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MalformedCarpet(f"{path}: not valid JSON ({exc})") from None
    return validate_carpet(raw)


def shannon(w) -> np.ndarray:
    """Entropy of the weights along the last axis, with 0 log 0 = 0."""
    return entr(np.asarray(w, dtype=float)).sum(axis=-1)


@dataclass(frozen=True, eq=False)
class ProbVector:
    """Probability vector on the alphabet ``Q`` of ``spec``."""

    spec: CarpetSpec
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.shape != (self.spec.D,):
            raise ValueError(f"expected {self.spec.D} weights, got shape {w.shape}")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValueError("weights must be finite and nonnegative")
        if abs(w.sum() - 1.0) > SUM_TOL:
            raise ValueError(f"weights sum to {w.sum()!r}, not 1")
        object.__setattr__(self, "weights", _frozen(w))

    @classmethod
    def uniform(cls, spec: CarpetSpec) -> ProbVector:
        return cls(spec, np.full(spec.D, 1.0 / spec.D))

    @classmethod
    def point_mass(cls, spec: CarpetSpec, symbol: tuple[int, int]) -> ProbVector:
        w = np.zeros(spec.D)
        w[spec.symbol_index[tuple(symbol)]] = 1.0
        return cls(spec, w)

    @classmethod
    def from_mapping(cls, spec: CarpetSpec, weights: Mapping[tuple[int, int], float]) -> ProbVector:
        w = np.zeros(spec.D)
        for sym, v in weights.items():
            if tuple(sym) not in spec.symbol_index:
                raise ValueError(f"symbol {sym} not in Q")
            w[spec.symbol_index[tuple(sym)]] = v
        return cls(spec, w)

    @classmethod
    def from_rows(cls, spec: CarpetSpec, rows) -> ProbVector:
        """Vector with the given row marginal, uniform within each column."""
        rows = np.asarray(rows, dtype=float)
        return cls(spec, (rows / spec.T)[spec.symbol_row])

    @cached_property
    def rows(self) -> np.ndarray:
        return _frozen(self.spec.row_marginal(self.weights))

    @property
    def h(self) -> float:
        return entropy(self)

    @property
    def h_r(self) -> float:
        return row_entropy(self)

    def profile(self) -> EntropyProfile:
        return EntropyProfile(self.h, self.h_r)

    def allclose(self, other: ProbVector, atol: float = 1e-9) -> bool:
        return bool(np.allclose(self.weights, other.weights, rtol=0, atol=atol))


@dataclass(frozen=True)
class EntropyProfile:
    h: float
    h_r: float

    def check(self, spec: CarpetSpec, tol: float = 1e-9) -> None:
        """Raise ValueError unless ``0 <= h_r <= h <= log D`` and ``h_r <= log R``."""
        if not (-tol <= self.h_r <= self.h + tol and self.h <= math.log(spec.D) + tol
                and self.h_r <= math.log(spec.R) + tol):
            raise ValueError(f"infeasible entropy profile {self} for D={spec.D}, R={spec.R}")


@dataclass(frozen=True)
class DimParams:
    """Target parameters: growth rate ``alpha`` and row-average ``H``.

    ``H`` is the limiting average of ``log T_a`` along the target sequence;
    it is 0 for cylinder targets.
    """

    alpha: float
    H: float = 0.0
    target_kind: str = "cylinder"

    def __post_init__(self):
        if self.target_kind not in ("cylinder", "ball"):
            raise ValueError(f"target_kind must be 'cylinder' or 'ball', got {self.target_kind!r}")
        if not (math.isfinite(self.alpha) and self.alpha >= 0):
            raise ValueError(f"alpha must be a finite nonnegative number, got {self.alpha}")
        if self.target_kind == "cylinder" and self.H != 0:
            raise ValueError("cylinder targets have H = 0")

    @classmethod
    def cylinder(cls, alpha: float) -> DimParams:
        return cls(float(alpha), 0.0, "cylinder")

    @classmethod
    def ball(cls, alpha: float, H: float) -> DimParams:
        return cls(float(alpha), float(H), "ball")

    def check(self, spec: CarpetSpec, tol: float = 1e-12) -> None:
        if self.target_kind == "ball":
            lo, hi = float(spec.log_T.min()), float(spec.log_T.max())
            if not lo - tol <= self.H <= hi + tol:
                raise ValueError(f"H={self.H} outside [{lo}, {hi}] for this carpet")

    def with_alpha(self, alpha: float) -> DimParams:
        return DimParams(float(alpha), self.H, self.target_kind)


@dataclass(frozen=True)
class DimBreakdown:
    """The six dimension values, their minimum and the indices attaining it."""

    d: tuple[float, ...]
    dj: float
    active: frozenset[int]

    @classmethod
    def from_values(cls, d: Iterable[float], tol: float = ACTIVE_TOL) -> DimBreakdown:
        d = tuple(float(x) for x in d)
        dj = min(d)
        return cls(d, dj, frozenset(i + 1 for i, x in enumerate(d) if x - dj <= tol))

    def active_within(self, tol: float) -> frozenset[int]:
        return frozenset(i + 1 for i, x in enumerate(self.d) if x - self.dj <= tol)


def entropy(p: ProbVector) -> float:
    return float(shannon(p.weights))


def row_entropy(p: ProbVector) -> float:
    return float(shannon(p.rows))


def bernoulli_dimension(spec: CarpetSpec, p: ProbVector) -> float:
    """``(h(p) + (tau - 1) h_r(p)) / log M``, the dimension of the Bernoulli measure."""
    return (entropy(p) + (spec.tau - 1.0) * row_entropy(p)) / spec.log_M


def mcmullen_dimension(spec: CarpetSpec) -> float:
    """``log_N sum_a T_a^(1/tau)``, the Hausdorff dimension of the carpet."""
    return math.log(float(np.sum(spec.T ** (1.0 / spec.tau)))) / spec.log_N


def distinguished_measures(spec: CarpetSpec) -> tuple[ProbVector, ProbVector, ProbVector]:
    """Return ``(p_D, p_R, p_d)``.

    ``p_D`` is uniform on ``Q``, ``p_R`` is uniform on columns and then on
    fibers, ``p_d`` gives each symbol of column ``a`` the weight
    ``T_a^(1/tau - 1) / sum T^(1/tau)`` and maximizes the Bernoulli dimension.
    """
    T = spec.T
    p_D = ProbVector.uniform(spec)
    p_R = ProbVector(spec, (1.0 / (T * spec.R))[spec.symbol_row])
    pw = T ** (1.0 / spec.tau)
    p_d = ProbVector(spec, (pw / T / pw.sum())[spec.symbol_row])
    return p_D, p_R, p_d


def h_from_bernoulli(spec: CarpetSpec, nu: ProbVector) -> float:
    """``H = sum_a nu_a log T_a`` for a Bernoulli target distribution."""
    return float(nu.rows @ spec.log_T)


def scale_weights(alpha: float, tau: float) -> tuple[float, float]:
    """``(m, 1 - m)`` with ``m = min(1, (1 + alpha) / tau)``."""
    m = min(1.0, (1.0 + alpha) / tau)
    return m, 1.0 - m


def dim_values(spec: CarpetSpec, alpha: float, H: float,
               h_m, hr_m, h_1, hr_1, h_2, hr_2, h_p, hr_p) -> np.ndarray:
    """Six dimension values from raw entropies; arguments broadcast.

    The suffixes ``m, 1, 2, p`` stand for the four measures in order
    ``(p-, p1, p2, p+)``.  Result has the six values on the leading axis.
    """
    tau, lN = spec.tau, spec.log_N
    m, Mb = scale_weights(alpha, tau)
    base3 = m * h_m + Mb * h_1 + (tau - 1.0) * hr_2
    extra = alpha * (1.0 - 1.0 / tau) * H
    d1 = (h_m + (tau - 1.0) * hr_m) / spec.log_M
    d2 = (m * h_m + Mb * hr_1) / ((1.0 + alpha) * lN)
    d3 = base3 / ((tau + alpha) * lN)
    d4 = (base3 + alpha * (tau - 1.0) * hr_p + extra) / (tau * (1.0 + alpha) * lN)
    d5 = (m * h_m + Mb * h_1 + (tau - 1.0) * h_2 + (tau + alpha) * (tau - 1.0) * hr_p + extra) / (
        tau * (tau + alpha) * lN)
    d6 = (h_p + (tau - 1.0) * hr_p) / spec.log_M
    return np.array(np.broadcast_arrays(d1, d2, d3, d4, d5, d6))


def dim_functions(spec: CarpetSpec, params: DimParams, profiles: Sequence[EntropyProfile]) -> DimBreakdown:
    """Evaluate d1..d6 for the profiles of ``(p-, p1, p2, p+)``."""
    if len(profiles) != 4:
        raise ValueError("need four entropy profiles (p-, p1, p2, p+)")
    for pr in profiles:
        pr.check(spec)
    params.check(spec)
    flat = [x for pr in profiles for x in (pr.h, pr.h_r)]
    return DimBreakdown.from_values(dim_values(spec, params.alpha, params.H, *flat))
