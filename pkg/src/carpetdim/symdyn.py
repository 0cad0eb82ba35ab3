"""Symbolic dynamics on the carpet alphabet.

Words are finite sequences of symbols ``(a, b)`` of ``Q``, stored as integer
indices into ``spec.symbols``.  Positions are 1-based in every public
function, matching the usual notation ``i|_m^n``; fractional positions such as
``q / tau`` are always floored.

Measures are piecewise Bernoulli: a sequence of blocks, each with its own
per-position distribution, followed by an optional Bernoulli tail.  Measure
values are kept in log space; a zero-probability square has log measure
``-inf``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .carpet import CarpetSpec, DimParams, EntropyProfile, ProbVector, dim_functions, shannon
from .errors import LengthMismatch, ResourceLimit, ScheduleTooShort, TargetTooShort, WordTooShort

MAX_TYPES = 10 ** 7


# --------------------------------------------------------------------------
# integer parts of q / tau and q * tau

@lru_cache(maxsize=None)
def _rational_tau(N: int, M: int, max_exp: int = 64) -> Fraction | None:
    """``tau`` as a fraction ``p/r`` when ``M^r = N^p`` for small exponents."""
    for r in range(1, max_exp + 1):
        for p in range(r + 1, r * max_exp + 1):
            v = N ** p
            if v == M ** r:
                return Fraction(p, r)
            if v > M ** r:
                break
    return None


def floor_over_tau(spec: CarpetSpec, q):
    """``floor(q / tau)``, exact when ``tau`` is rational."""
    q = np.asarray(q, dtype=np.int64)
    fr = _rational_tau(spec.N, spec.M)
    if fr is not None:
        return q * fr.denominator // fr.numerator
    return np.floor(q * (spec.log_N / spec.log_M)).astype(np.int64)


def floor_times_tau(spec: CarpetSpec, q):
    """``floor(q * tau)``, exact when ``tau`` is rational."""
    q = np.asarray(q, dtype=np.int64)
    fr = _rational_tau(spec.N, spec.M)
    if fr is not None:
        return q * fr.numerator // fr.denominator
    return np.floor(q * spec.tau).astype(np.int64)


# --------------------------------------------------------------------------
# words

@dataclass(frozen=True, eq=False)
class SymbolicWord:
    spec: CarpetSpec
    idx: np.ndarray

    def __post_init__(self):
        idx = np.array(self.idx, dtype=np.int64).reshape(-1)
        if idx.size and (idx.min() < 0 or idx.max() >= self.spec.D):
            raise ValueError("symbol index outside Q")
        idx.setflags(write=False)
        object.__setattr__(self, "idx", idx)

    @classmethod
    def from_pairs(cls, spec: CarpetSpec, pairs: Iterable[tuple[int, int]]) -> SymbolicWord:
        try:
            return cls(spec, [spec.symbol_index[(int(a), int(b))] for a, b in pairs])
        except KeyError as exc:
            raise ValueError(f"symbol {exc.args[0]} is not in Q") from None

    @classmethod
    def parse(cls, spec: CarpetSpec, text: str) -> SymbolicWord:
        """Parse whitespace-separated ``a:b`` pairs."""
        pairs = []
        for tok in text.split():
            a, sep, b = tok.partition(":")
            if not sep:
                raise ValueError(f"bad symbol token {tok!r}; expected a:b")
            pairs.append((int(a), int(b)))
        return cls.from_pairs(spec, pairs)

    @classmethod
    def constant(cls, spec: CarpetSpec, symbol: tuple[int, int], length: int) -> SymbolicWord:
        return cls(spec, np.full(length, spec.symbol_index[tuple(symbol)]))

    def format(self) -> str:
        return " ".join(f"{a}:{b}" for a, b in self.pairs)

    def __len__(self) -> int:
        return len(self.idx)

    def __add__(self, other: SymbolicWord) -> SymbolicWord:
        return SymbolicWord(self.spec, np.concatenate([self.idx, other.idx]))

    def __eq__(self, other) -> bool:
        return isinstance(other, SymbolicWord) and self.spec == other.spec and np.array_equal(self.idx, other.idx)

    __hash__ = None

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return [self.spec.symbols[i] for i in self.idx]

    @property
    def row_idx(self) -> np.ndarray:
        """Position in ``spec.columns`` of the column of every symbol."""
        return self.spec.symbol_row[self.idx]

    @property
    def columns(self) -> tuple[int, ...]:
        cols = self.spec.columns
        return tuple(cols[r] for r in self.row_idx)

    def sub(self, m: int, n: int) -> SymbolicWord:
        """Positions ``m..n`` inclusive (1-based)."""
        return SymbolicWord(self.spec, self.idx[m - 1:n])

    def shift(self, k: int = 1) -> SymbolicWord:
        """Drop the first ``k`` symbols."""
        return SymbolicWord(self.spec, self.idx[k:])


def project(spec: CarpetSpec, word: SymbolicWord) -> tuple[float, float]:
    """``F_word(0, 0)``: the lower-left corner of the level-``|word|`` rectangle."""
    if len(word) == 0:
        raise ValueError("cannot project the empty word")
    x = y = 0.0
    for a, b in reversed(word.pairs):
        x = (x + a - 1) / spec.N
        y = (y + b - 1) / spec.M
    return x, y


def cylinder_box(spec: CarpetSpec, word: SymbolicWord) -> tuple[float, float, float, float]:
    """``F_word([0,1]^2)`` as ``(x0, x1, y0, y1)``."""
    x, y = project(spec, word)
    n = len(word)
    return x, x + spec.N ** -float(n), y, y + spec.M ** -float(n)


@dataclass(frozen=True)
class ApproxSquare:
    n: int
    column_prefix: tuple[int, ...]
    pair_prefix: tuple[tuple[int, int], ...]


def approx_square(word: SymbolicWord, n: int) -> ApproxSquare:
    """Approximate square of side ``N^-n`` containing ``word``.

    Fixes all ``n`` columns and the first ``floor(n / tau)`` full symbols.
    """
    if n < 0:
        raise ValueError("depth must be nonnegative")
    if len(word) < n:
        raise WordTooShort(f"word of length {len(word)} has no depth-{n} approximate square")
    k = int(floor_over_tau(word.spec, n))
    head = word.sub(1, n)
    return ApproxSquare(n, head.columns, tuple(head.pairs[:k]))


def word_entropy(word: SymbolicWord) -> EntropyProfile:
    """Entropy and row entropy of the empirical symbol frequencies."""
    if len(word) == 0:
        raise ValueError("empty word")
    freq = np.bincount(word.idx, minlength=word.spec.D) / len(word)
    return EntropyProfile(float(shannon(freq)), float(shannon(word.spec.row_marginal(freq))))


# --------------------------------------------------------------------------
# piecewise Bernoulli measures

@dataclass(frozen=True, eq=False)
class Block:
    """One block of a piecewise Bernoulli schedule.

    ``kind`` is ``"bernoulli"`` (i.i.d. from ``probs``), ``"point"`` (position
    ``k`` is the symbol ``targets[k]``) or ``"column"`` (position ``k`` has
    column ``targets[k]``, a row index, and a uniformly chosen fiber).
    """

    kind: str
    length: int
    probs: ProbVector | None = None
    targets: np.ndarray | None = None


def bernoulli_block(p: ProbVector, length: int) -> Block:
    return Block("bernoulli", int(length), probs=p)


def point_block(word: SymbolicWord) -> Block:
    return Block("point", len(word), targets=word.idx)


def column_block(word: SymbolicWord) -> Block:
    return Block("column", len(word), targets=word.row_idx)


@dataclass(frozen=True, eq=False)
class PiecewiseBernoulliSchedule:
    spec: CarpetSpec
    blocks: tuple[Block, ...]
    tail: ProbVector | None = None

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        for b in self.blocks:
            if b.length <= 0:
                raise ValueError("block lengths must be positive")
            if b.kind == "bernoulli" and b.probs is None:
                raise ValueError("bernoulli block needs a probability vector")
            if b.kind in ("point", "column") and (b.targets is None or len(b.targets) != b.length):
                raise ValueError(f"{b.kind} block needs one target per position")
            if b.kind not in ("bernoulli", "point", "column"):
                raise ValueError(f"unknown block kind {b.kind!r}")

    @property
    def boundaries(self) -> np.ndarray:
        """Partial sums ``S_k`` of the block lengths (``S_0 = 0`` included)."""
        return np.concatenate([[0], np.cumsum([b.length for b in self.blocks])]).astype(np.int64)

    @property
    def finite_length(self) -> int:
        return int(self.boundaries[-1])

    def covers(self, length: int) -> bool:
        return self.tail is not None or length <= self.finite_length

    def _pieces(self, length: int):
        """Yield ``(block_or_None, start, stop)`` (0-based, stop exclusive) covering ``length``."""
        if not self.covers(length):
            raise ScheduleTooShort(f"schedule covers {self.finite_length} positions, {length} needed")
        start = 0
        for b in self.blocks:
            if start >= length:
                return
            stop = min(start + b.length, length)
            yield b, start, stop
            start += b.length
        if start < length:
            yield None, start, length

    def log_weights(self, word: SymbolicWord, length: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Per-position log probabilities of the word's symbols and of its columns."""
        spec = self.spec
        length = len(word) if length is None else length
        if len(word) < length:
            raise WordTooShort(f"word of length {len(word)} shorter than {length}")
        idx = word.idx[:length]
        row = spec.symbol_row[idx]
        pair_lw = np.empty(length)
        row_lw = np.empty(length)
        with np.errstate(divide="ignore"):
            for b, s, e in self._pieces(length):
                if b is None or b.kind == "bernoulli":
                    p = self.tail if b is None else b.probs
                    # clamp: row sums may exceed 1 by an ulp
                    pair_lw[s:e] = np.minimum(np.log(p.weights), 0.0)[idx[s:e]]
                    row_lw[s:e] = np.minimum(np.log(p.rows), 0.0)[row[s:e]]
                elif b.kind == "point":
                    t = b.targets[: e - s]
                    hit = idx[s:e] == t
                    pair_lw[s:e] = np.where(hit, 0.0, -np.inf)
                    row_lw[s:e] = np.where(row[s:e] == spec.symbol_row[t], 0.0, -np.inf)
                else:
                    t = b.targets[: e - s]
                    hit = row[s:e] == t
                    pair_lw[s:e] = np.where(hit, -spec.log_T[row[s:e]], -np.inf)
                    row_lw[s:e] = np.where(hit, 0.0, -np.inf)
        return pair_lw, row_lw

    def sample(self, length: int, rng: np.random.Generator) -> np.ndarray:
        spec = self.spec
        out = np.empty(length, dtype=np.int64)
        for b, s, e in self._pieces(length):
            m = e - s
            if b is None or b.kind == "bernoulli":
                p = (self.tail if b is None else b.probs).weights
                cdf = np.cumsum(p)
                last = int(np.flatnonzero(p > 0)[-1])
                out[s:e] = np.minimum(np.searchsorted(cdf, rng.random(m), side="right"), last)
            elif b.kind == "point":
                out[s:e] = b.targets[:m]
            else:
                rows = b.targets[:m]
                T = spec.T.astype(np.int64)[rows]
                out[s:e] = spec.row_start[rows] + np.minimum((rng.random(m) * T).astype(np.int64), T - 1)
        return out


def bernoulli_schedule(p: ProbVector) -> PiecewiseBernoulliSchedule:
    return PiecewiseBernoulliSchedule(p.spec, (), tail=p)


def word_rng(seed: int, index: int = 0) -> np.random.Generator:
    """Philox stream for word ``index`` of run ``seed``.

    The key comes from ``SeedSequence(seed, spawn_key=(index,))``, so word
    ``i`` is the same whether it is drawn alone or as part of a batch.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def sample_word(schedule: PiecewiseBernoulliSchedule, length: int, seed: int, index: int = 0) -> SymbolicWord:
    """Draw every position independently from its block distribution."""
    if length < 1:
        raise ValueError("length must be positive")
    return SymbolicWord(schedule.spec, schedule.sample(length, word_rng(seed, index)))


def log_measure_squares(schedule: PiecewiseBernoulliSchedule, word: SymbolicWord, qs) -> np.ndarray:
    """``log mu(B_q(word))`` for every depth ``q`` in ``qs``."""
    qs = np.asarray(qs, dtype=np.int64)
    if qs.size == 0:
        return np.empty(0)
    if qs.min() < 0:
        raise ValueError("depths must be nonnegative")
    q_max = int(qs.max())
    if len(word) < q_max:
        raise WordTooShort(f"word of length {len(word)} shorter than depth {q_max}")
    pair_lw, row_lw = schedule.log_weights(word, q_max)
    ks = floor_over_tau(schedule.spec, qs)
    # partial sums only at the needed breakpoints; -inf factors propagate
    cuts = np.unique(np.concatenate([[0], ks, qs]))
    pos = {int(c): i for i, c in enumerate(cuts)}

    def partial(lw):
        seg = np.add.reduceat(lw, cuts[:-1]) if len(cuts) > 1 else np.empty(0)
        return np.concatenate([[0.0], np.cumsum(seg)])

    cp, cr = partial(pair_lw), partial(row_lw)
    ik = np.array([pos[int(k)] for k in ks])
    iq = np.array([pos[int(q)] for q in qs])
    with np.errstate(invalid="ignore"):
        out = cp[ik] + (cr[iq] - cr[ik])
    # -inf - (-inf) is nan: the row factor on (k, q] may be finite while the prefix is not
    bad = np.isnan(out)
    if bad.any():
        row_seg = np.array([row_lw[k:q].sum() for k, q in zip(ks[bad], qs[bad])])
        out[bad] = cp[ik[bad]] + row_seg
    return out


def log_measure_square(schedule: PiecewiseBernoulliSchedule, word: SymbolicWord, q: int) -> float:
    """``log mu(B_q(word))``: full symbol weights up to ``q/tau``, column weights up to ``q``."""
    return float(log_measure_squares(schedule, word, [q])[0])


def local_dimension_curve(schedule: PiecewiseBernoulliSchedule, word: SymbolicWord,
                          scales: Sequence[int]) -> list[tuple[int, float]]:
    scales = [int(m) for m in scales]
    if any(m < 1 for m in scales):
        raise ValueError("scales must be positive")
    lm = log_measure_squares(schedule, word, scales)
    log_N = schedule.spec.log_N
    return [(m, float(-v / (m * log_N))) for m, v in zip(scales, lm)]


# --------------------------------------------------------------------------
# the measure mu_n and its scale table

def target_word(spec: CarpetSpec, length: int, H: float | None = None) -> SymbolicWord:
    """Deterministic target word whose columns average ``log T`` to ``H``.

    Alternates the columns with smallest and largest ``T_a`` in a balanced
    (Bresenham) pattern so that every window has close to the requested
    average.  ``H=None`` gives the constant word on the first symbol.
    """
    if H is None:
        return SymbolicWord(spec, np.zeros(length, dtype=np.int64))
    lt = spec.log_T
    lo, hi = int(np.argmin(lt)), int(np.argmax(lt))
    if lt[hi] - lt[lo] < 1e-15:
        rows = np.full(length, lo)
    else:
        w = (H - lt[lo]) / (lt[hi] - lt[lo])
        if not -1e-12 <= w <= 1 + 1e-12:
            raise ValueError(f"H={H} outside [{lt[lo]}, {lt[hi]}]")
        k = np.arange(length + 1)
        steps = np.diff(np.floor(k * w + 0.5))
        rows = np.where(steps > 0, hi, lo)
    return SymbolicWord(spec, spec.row_start[rows])


def heuristic_schedule(spec: CarpetSpec, n: int, f_n: int, target: SymbolicWord,
                       quadruple: Sequence[ProbVector], kind: str = "cylinder") -> PiecewiseBernoulliSchedule:
    """Piecewise Bernoulli measure concentrated on points hitting the target at time ``n``.

    ``p-`` up to ``min(n, (n+f)/tau)``, ``p1`` up to ``n``, the target on
    ``(n, n+f]`` (point masses, or for balls point masses up to ``n + f/tau``
    and then prescribed columns with uniform fibers), ``p2`` up to
    ``tau n + f`` and ``p+`` afterwards.
    """
    if kind not in ("cylinder", "ball"):
        raise ValueError(f"kind must be 'cylinder' or 'ball', got {kind!r}")
    if len(target) < f_n:
        raise TargetTooShort(f"target of length {len(target)} shorter than f(n)={f_n}")
    p_m, p_1, p_2, p_p = quadruple
    edge = int(floor_over_tau(spec, n + f_n))
    blocks = [bernoulli_block(p_m, min(n, edge)), bernoulli_block(p_1, n - edge)]
    if kind == "cylinder":
        blocks.append(point_block(target.sub(1, f_n)))
    else:
        k = int(floor_over_tau(spec, f_n))
        blocks += [point_block(target.sub(1, k)), column_block(target.sub(k + 1, f_n))]
    blocks.append(bernoulli_block(p_2, int(floor_times_tau(spec, n)) - n))
    return PiecewiseBernoulliSchedule(spec, tuple(b for b in blocks if b.length > 0), tail=p_p)


def table_scales(spec: CarpetSpec, n: int, f_n: int, tail_factor: int = 32) -> list[int]:
    """The six scales ``m1..m6`` at which the local dimensions of ``mu_n`` are read."""
    tn = int(floor_times_tau(spec, n))
    return [
        n // 4,
        n + f_n,
        tn + f_n,
        int(floor_times_tau(spec, n + f_n)),
        int(floor_times_tau(spec, tn + f_n)),
        tail_factor * math.ceil(spec.tau * (tn + f_n)),
    ]


@dataclass(frozen=True)
class ScaleRow:
    index: int
    m: int
    predicted: float
    simulated: float
    stderr: float


def mean_local_dimensions(schedule: PiecewiseBernoulliSchedule, scales: Sequence[int], n_words: int,
                          seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Monte-Carlo mean and standard error of ``d_m`` over sampled words."""
    scales = np.asarray(scales, dtype=np.int64)
    length = int(scales.max())
    log_N = schedule.spec.log_N
    vals = np.empty((n_words, len(scales)))
    for i in range(n_words):
        word = sample_word(schedule, length, seed, i)
        vals[i] = -log_measure_squares(schedule, word, scales) / (scales * log_N)
    err = vals.std(axis=0, ddof=1) / math.sqrt(n_words) if n_words > 1 else np.zeros(len(scales))
    return vals.mean(axis=0), err


def scale_table(spec: CarpetSpec, params: DimParams, quadruple: Sequence[ProbVector], n: int,
                n_words: int = 200, seed: int = 0, target: SymbolicWord | None = None,
                tail_factor: int = 32) -> list[ScaleRow]:
    """Predicted ``d1..d6`` against simulated local dimensions of ``mu_n`` at ``m1..m6``."""
    f_n = int(round(params.alpha * n))
    if target is None:
        target = target_word(spec, f_n, params.H if params.target_kind == "ball" else None)
    schedule = heuristic_schedule(spec, n, f_n, target, quadruple, params.target_kind)
    scales = table_scales(spec, n, f_n, tail_factor)
    if len(set(scales)) != 6 or scales[0] < 1:
        raise ValueError(f"n={n} too small: scales {scales} are not six distinct positive integers")
    predicted = dim_functions(spec, params, [p.profile() for p in quadruple]).d
    mean, err = mean_local_dimensions(schedule, scales, n_words, seed)
    return [ScaleRow(i + 1, m, predicted[i], float(mean[i]), float(err[i])) for i, m in enumerate(scales)]


# --------------------------------------------------------------------------
# counting by types

def compositions(n: int, parts: int):
    """All tuples of ``parts`` nonnegative integers summing to ``n``."""
    for bars in itertools.combinations(range(n + parts - 1), parts - 1):
        prev = -1
        out = []
        for b in bars:
            out.append(b - prev - 1)
            prev = b
        out.append(n + parts - 2 - prev)
        yield tuple(out)


def _multinomial(counts: Sequence[int]) -> int:
    out = math.factorial(sum(counts))
    for k in counts:
        out //= math.factorial(k)
    return out


def _type_entropy(counts: Sequence[int], n: int) -> float:
    return -sum(k / n * math.log(k / n) for k in counts if k)


def _check_types(n: int, parts: int, max_types: int) -> None:
    if n < 1:
        raise ValueError("word length must be positive")
    n_types = math.comb(n + parts - 1, parts - 1)
    if n_types > max_types:
        raise ResourceLimit(f"{n_types} type classes exceed the cap {max_types}")


def count_entropy_bounded(spec: CarpetSpec, n: int, h: float, max_types: int = MAX_TYPES,
                          tol: float = 1e-12) -> int:
    """Number of words in ``Q^n`` whose empirical entropy is at most ``h``."""
    _check_types(n, spec.D, max_types)
    return sum(_multinomial(c) for c in compositions(n, spec.D) if _type_entropy(c, n) <= h + tol)


def count_rowentropy_above(spec: CarpetSpec, n: int, z: float, max_types: int = MAX_TYPES,
                           tol: float = 1e-12) -> int:
    """Number of words in ``Q^n`` whose empirical row entropy is at least ``z``."""
    _check_types(n, spec.R, max_types)
    T = [int(t) for t in spec.T]
    total = 0
    for c in compositions(n, spec.R):
        if _type_entropy(c, n) >= z - tol:
            w = _multinomial(c)
            for t, k in zip(T, c):
                w *= t ** k
            total += w
    return total


def types_bound(spec: CarpetSpec, n: int, h: float) -> float:
    """``(n+1)^D e^(n h)``, the method-of-types bound on ``count_entropy_bounded``."""
    return (n + 1) ** spec.D * math.exp(n * h)


def type_profiles(spec: CarpetSpec, n: int, max_types: int = MAX_TYPES):
    """Yield ``(counts, h, h_r)`` for every type class of ``Q^n``."""
    _check_types(n, spec.D, max_types)
    for c in compositions(n, spec.D):
        freq = np.array(c, dtype=float) / n
        yield c, float(shannon(freq)), float(shannon(spec.row_marginal(freq)))


def _uniform_length(words: Sequence[SymbolicWord]) -> int:
    lengths = {len(w) for w in words}
    if len(lengths) > 1:
        raise LengthMismatch(f"words have different lengths {sorted(lengths)}")
    return lengths.pop() if lengths else 0


def cover_count(spec: CarpetSpec, words: Sequence[SymbolicWord]) -> int:
    """Number of distinct depth-``n`` approximate squares met by words of length ``n``."""
    n = _uniform_length(words)
    return len({approx_square(w, n) for w in words})


def cover_bound(spec: CarpetSpec, words: Sequence[SymbolicWord]) -> int:
    """Distinct symbol prefixes to ``n/tau`` times distinct column suffixes after it."""
    n = _uniform_length(words)
    k = int(floor_over_tau(spec, n))
    heads = {tuple(w.idx[:k]) for w in words}
    tails = {tuple(w.row_idx[k:n]) for w in words}
    return len(heads) * len(tails)
