"""Quantitative probability at desk scale.

Exact binomial comparisons against the normal law (with the published
explicit constant), small-ball bounds for centered coin sums, dyadic
block-hit statistics calibrating iterated-logarithm rates along
subsequences, monotone selection rules with empirical frequency
reports, and the iterated majority-refinement of traced strings.

Everything that can be exact is exact: binomial masses and tails are
big integers, probabilities are fractions with power-of-two
denominators; only the normal CDF and the log statistics are floats
(math.erfc is correct to ~1 ulp, far inside the 1e-12 error budget the
comparisons allow).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, NamedTuple, Optional

import numpy as np

from .bits import as_bits
from .errors import ContractError, DimensionError, DomainError, ResourceError

#: the upper explicit constant in the quantitative CLT bound d*rho/(sigma^3 sqrt(n));
#: for centered fair coins rho = sigma^3 = 1/8, so the bound is just 0.71/sqrt(n).
BERRY_ESSEEN_D = 0.71

CDF_GAP_CEILING = 10 ** 5


def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def berry_esseen_bound(n: int) -> float:
    """0.71/sqrt(n): the explicit CLT error bound for fair coin sums."""
    if n < 1:
        raise DomainError("n must be positive")
    return BERRY_ESSEEN_D / math.sqrt(n)


def binomial_cdf_gap(n: int) -> float:
    """sup over lattice points of |Binomial(n,1/2) CDF - normal CDF|.

    The binomial CDF is an exact big-integer partial sum divided by 2^n
    (one correctly-rounded float per lattice point x_j = (j-n/2)/(sqrt(n)/2)).
    """
    if not 1 <= n <= CDF_GAP_CEILING:
        raise ResourceError(f"binomial_cdf_gap handles 1 <= n <= {CDF_GAP_CEILING}")
    coeff = 1
    cdf = 0
    denom = 1 << n
    scale = 2.0 / math.sqrt(n)
    half = n / 2.0
    worst = 0.0
    for j in range(n + 1):
        cdf += coeff
        gap = abs(cdf / denom - normal_cdf((j - half) * scale))
        if gap > worst:
            worst = gap
        coeff = coeff * (n - j) // (j + 1)
    return worst


def small_ball_probability(n: int, g_of_n: int) -> Fraction:
    """Exact P(|S_n| <= g) for S_n = ones - n/2 over n fair bits."""
    if n < 1 or g_of_n < 0:
        raise DomainError("need n >= 1 and g >= 0")
    # |ones - n/2| <= g  <=>  ceil(n/2 - g) <= ones <= floor(n/2 + g)
    lo = max(0, -(-(n - 2 * g_of_n) // 2))
    hi = min(n, (n + 2 * g_of_n) // 2)
    total = sum(math.comb(n, j) for j in range(lo, hi + 1))
    return Fraction(total, 1 << n)


def small_ball_bound(n: int, g_of_n: int) -> float:
    """The explicit envelope 4g/sqrt(2 pi n) + 2*0.71/sqrt(n)."""
    if n < 1 or g_of_n < 0:
        raise DomainError("need n >= 1 and g >= 0")
    return 4.0 * g_of_n / math.sqrt(2.0 * math.pi * n) + 2.0 * BERRY_ESSEEN_D / math.sqrt(n)


# ---------------------------------------------------------------------------
# dyadic block hit counts along a subsequence

def _block_of(v: int) -> int:
    """Index m >= 1 of the dyadic block (2^(m-1), 2^m] containing v >= 2."""
    return (v - 1).bit_length()


@dataclass(frozen=True)
class WeberSeries:
    """Hit counts of a subsequence across dyadic blocks.

    p_count(n) = how many of the blocks (2^(m-1), 2^m], m <= n, meet the
    subsequence; the log statistic is constant on each block.
    """

    nu: tuple[int, ...]
    n_max: int
    hit_blocks: frozenset[int]

    def p_count(self, n: int) -> int:
        if not 1 <= n <= self.n_max:
            raise DomainError(f"p_count defined for 1 <= n <= {self.n_max}")
        return sum(1 for m in self.hit_blocks if m <= n)

    @property
    def p_counts(self) -> list[int]:
        out, acc = [], 0
        for m in range(1, self.n_max + 1):
            acc += 1 if m in self.hit_blocks else 0
            out.append(acc)
        return out

    def log_rate(self, k: int) -> float:
        """ln p_n for k in the block (2^(n-1), 2^n]; -inf while no hits."""
        if k < 2 or k > 1 << self.n_max:
            raise DomainError(f"log rate defined for 2 <= k <= 2^{self.n_max}")
        p = self.p_count(_block_of(k))
        return math.log(p) if p else float("-inf")


def weber_series(nu, n_max: int) -> WeberSeries:
    seq = [int(v) for v in nu]
    if any(b <= a for a, b in zip(seq, seq[1:])) or (seq and seq[0] < 1):
        raise DomainError("subsequence must be strictly increasing positive integers")
    hits = {m for m in (_block_of(v) for v in seq if v >= 2) if 1 <= m <= n_max}
    return WeberSeries(tuple(seq), n_max, frozenset(hits))


class SparseResult(NamedTuple):
    nu: list[int]
    threshold: int


def sparse_subsequence(f: Callable[[int], float], n_max: int) -> SparseResult:
    """A subsequence whose dyadic log statistic stays at or under f.

    Scans blocks m = 1..n_max and admits block m (adding its top point
    2^m) only once ln(hits so far + 1) <= f(2^(m-1)); f nondecreasing
    then keeps every k in admitted and skipped blocks alike under f, so
    the reported violation threshold is 0 for genuine order functions.
    """
    nu: list[int] = []
    hits = 0
    for m in range(1, n_max + 1):
        if math.log(hits + 1) <= f(1 << (m - 1)):
            nu.append(1 << m)
            hits += 1
    series = weber_series(nu, n_max)
    threshold = 0
    for m in range(1, n_max + 1):
        p = series.p_count(m)
        rate = math.log(p) if p else float("-inf")
        low = (1 << (m - 1)) + 1
        if rate > f(low):
            threshold = 1 << m
    return SparseResult(nu, threshold)


# ---------------------------------------------------------------------------
# monotone selection rules and frequency tests

@dataclass
class FrequencyReport:
    positions_examined: int
    ones_count: int
    relative_frequency: Optional[float]
    deviation_from_half: Optional[float]
    checkpoint: Optional[int] = None

    @classmethod
    def of(cls, examined: int, ones: int, checkpoint: Optional[int] = None) -> "FrequencyReport":
        if examined:
            freq = ones / examined
            return cls(examined, ones, freq, freq - 0.5, checkpoint)
        return cls(0, 0, None, None, checkpoint)


@dataclass
class SelectionRule:
    """Monotonic selection: decide(prefix) says whether the next
    position is counted, before its bit is revealed."""

    decide: Callable[[np.ndarray], bool]
    description: str
    mask_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def selected_mask(self, x: np.ndarray) -> np.ndarray:
        if self.mask_fn is not None:
            return self.mask_fn(x)
        mask = np.zeros(x.size, dtype=np.bool_)
        for i in range(x.size):
            mask[i] = bool(self.decide(x[:i]))
        return mask


def select_all() -> SelectionRule:
    return SelectionRule(lambda prefix: True, "select every position",
                         mask_fn=lambda x: np.ones(x.size, dtype=np.bool_))


def select_evens() -> SelectionRule:
    return SelectionRule(lambda prefix: prefix.size % 2 == 0, "select even indices",
                         mask_fn=lambda x: np.arange(x.size) % 2 == 0)


def select_even_parity_prefix() -> SelectionRule:
    def mask(x: np.ndarray) -> np.ndarray:
        cums = np.concatenate(([0], np.cumsum(x, dtype=np.int64)[:-1]))
        return (cums % 2) == 0
    return SelectionRule(lambda prefix: int(prefix.sum()) % 2 == 0,
                         "select positions whose prefix has even parity",
                         mask_fn=mask)


def apply_selection(rule: SelectionRule, X) -> FrequencyReport:
    """Stream X through the rule; report the ones-frequency among the
    selected positions."""
    x = as_bits(X)
    mask = rule.selected_mask(x)
    examined = int(np.count_nonzero(mask))
    ones = int(x[mask].sum())
    return FrequencyReport.of(examined, ones)


def frequency_on_set(X, N, checkpoints) -> list[FrequencyReport]:
    """Ones-frequency of X restricted to the position set N, reported
    at each checkpoint n (undefined, not an error, while N∩n is empty)."""
    x = as_bits(X)
    pos = np.asarray(sorted(int(i) for i in N), dtype=np.int64)
    if pos.size and (pos[0] < 0 or pos[-1] >= x.size):
        raise DomainError("position set outside the input")
    out = []
    for n in checkpoints:
        n = int(n)
        upto = pos[pos < n]
        out.append(FrequencyReport.of(upto.size, int(x[upto].sum()), checkpoint=n))
    return out


# ---------------------------------------------------------------------------
# iterated majority refinement

def majority_refinement(strings) -> tuple[list[int], list[int]]:
    """Iteratively restrict to majority-agreeing positions.

    Starting from all positions of the first string, each step keeps
    the positions where the next string equals its majority value on
    the surviving set (ties keep the ones side). With q strings of
    length L the surviving set has at least L/2^q positions, so the
    precondition L*2^-q >= 1 guarantees it never empties.
    """
    arrs = [as_bits(s) for s in strings]
    if not arrs:
        raise DomainError("need at least one string")
    length = arrs[0].size
    if any(a.size != length for a in arrs):
        raise DimensionError("strings must share one length")
    if length * 2 ** -len(arrs) < 1:
        raise ContractError(
            f"{len(arrs)} strings of length {length} cannot guarantee a survivor")
    surviving = np.arange(length)
    constants: list[int] = []
    for a in arrs:
        vals = a[surviving]
        ones = int(vals.sum())
        maj = 1 if 2 * ones >= vals.size else 0
        constants.append(maj)
        surviving = surviving[vals == maj]
        if surviving.size == 0:
            raise ContractError("refinement emptied despite the size precondition")
    return [int(i) for i in surviving], constants
