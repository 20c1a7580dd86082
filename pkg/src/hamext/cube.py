"""Exact combinatorics of the finite Hamming cube.

Distances, binomial ball sizes, d-neighborhoods, canonical spheres
(pinched between consecutive balls), and an exhaustive isoperimetric
minimizer. Points of {0,1}^n travel either as bit strings (see
hamext.bits) or as integer vertex masks with bit i = position i;
set-valued results use the printable string form so they stay hashable.

All cardinalities are exact python integers; probabilities are
fractions with power-of-two denominators.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb

import numpy as np

from . import kernels
from .bits import as_bits, bits_to_mask, to_text
from .errors import DimensionError, DomainError, ResourceError

HARPER_DEFAULT_CEILING = 4


def hamming_distance(sigma, tau) -> int:
    """Number of positions where two equal-length bit strings differ."""
    a, b = as_bits(sigma), as_bits(tau)
    if a.size != b.size:
        raise DimensionError(f"length mismatch: {a.size} vs {b.size}")
    return int(np.count_nonzero(a != b))


def binomial_tail(n: int, k: int) -> int:
    """b(n,k) = C(n,0)+...+C(n,k), exact; 0 for k<0, 2^n for k>=n."""
    if n < 0:
        raise DomainError("n must be nonnegative")
    if k < 0:
        return 0
    if k >= n:
        return 1 << n
    return sum(comb(n, i) for i in range(k + 1))


def vertex_of(s) -> int:
    """Integer vertex mask of a bit string (bit i = position i)."""
    return bits_to_mask(as_bits(s))


def vertex_text(v: int, n: int) -> str:
    return "".join("1" if (v >> i) & 1 else "0" for i in range(n))


def _indicator(vertices, n: int) -> np.ndarray:
    ind = np.zeros(1 << n, dtype=np.bool_)
    for v in vertices:
        ind[v] = True
    return ind


def neighborhood(A, d: int) -> set[str]:
    """All strings within distance d of the set A (as printable strings).

    A is any iterable of equal-length bit strings. The empty set has an
    empty neighborhood for every d (distance to the empty set is +inf).
    """
    members = [as_bits(a) for a in A]
    if not members:
        return set()
    n = members[0].size
    if any(m.size != n for m in members):
        raise DimensionError("neighborhood members must share one dimension")
    if not 0 <= d <= n:
        raise DomainError(f"need 0 <= d <= {n}, got {d}")
    ind = _indicator((bits_to_mask(m) for m in members), n)
    for _ in range(d):
        ind = kernels.dilate(ind, n)
    return {vertex_text(int(v), n) for v in np.flatnonzero(ind)}


def shell_vertices(n: int, level: int, center_vertex: int = 0) -> list[int]:
    """Vertices at distance exactly `level` from the center, in the
    canonical shell order: descending value of (vertex XOR center).

    Initial segments of this order minimize iterated upper shadows, so
    canonical spheres built from them attain the exhaustive
    isoperimetric minimum (the lexicographic order does not).
    """
    offs = [v for v in range(1 << n) if v.bit_count() == level]
    offs.sort(reverse=True)
    return [off ^ center_vertex for off in offs]


@dataclass(frozen=True)
class SphereSpec:
    """Canonical sphere: full ball of inner_radius plus shell_count
    canonical points of the next shell."""

    dimension: int
    center: str
    inner_radius: int
    shell_count: int

    def __post_init__(self):
        n, k, t = self.dimension, self.inner_radius, self.shell_count
        if len(self.center) != n:
            raise DimensionError("center length must equal dimension")
        if not -1 <= k <= n:
            raise DomainError(f"inner radius {k} out of range for n={n}")
        shell_capacity = comb(n, k + 1) if k < n else 0
        if not 0 <= t <= shell_capacity:
            raise DomainError(f"shell count {t} exceeds shell size {shell_capacity}")

    @property
    def size(self) -> int:
        return binomial_tail(self.dimension, self.inner_radius) + self.shell_count

    def members(self) -> list[int]:
        n, c = self.dimension, vertex_of(self.center)
        out = [v for v in range(1 << n)
               if (v ^ c).bit_count() <= self.inner_radius]
        out.extend(shell_vertices(n, self.inner_radius + 1, c)[: self.shell_count])
        return out

    def indicator(self) -> np.ndarray:
        return _indicator(self.members(), self.dimension)

    def gamma_size(self, d: int) -> int:
        """|Γ_d(S)| by exact expansion."""
        if self.size == 0:
            return 0
        ind = self.indicator()
        for _ in range(d):
            ind = kernels.dilate(ind, self.dimension)
        return int(np.count_nonzero(ind))


def make_sphere(n: int, size: int, center) -> SphereSpec:
    """The canonical sphere of exactly `size` points around `center`."""
    cbits = as_bits(center)
    if cbits.size != n:
        raise DimensionError(f"center has length {cbits.size}, want {n}")
    if not 0 <= size <= 1 << n:
        raise DomainError(f"size {size} out of range for n={n}")
    k = -1
    while k < n and binomial_tail(n, k + 1) <= size:
        k += 1
    return SphereSpec(n, to_text(cbits), k, size - binomial_tail(n, k))


@lru_cache(maxsize=None)
def _ball_masks(n: int, d: int) -> tuple[int, ...]:
    """d-ball of each vertex as a vertex-set mask (for subset sweeps)."""
    balls = [1 << v for v in range(1 << n)]
    for _ in range(d):
        prev = balls
        balls = []
        for v in range(1 << n):
            m = prev[v]
            grown = m
            for w in range(1 << n):
                if (m >> w) & 1:
                    for i in range(n):
                        grown |= 1 << (w ^ (1 << i))
            balls.append(grown)
    return tuple(balls)


@lru_cache(maxsize=None)
def _harper_mins(n: int, d: int) -> tuple[int, ...]:
    ball = np.array(_ball_masks(n, d), dtype=np.uint64)
    return tuple(int(x) for x in kernels.subset_min_gamma(ball))


def harper_min_neighborhood(n: int, size: int, d: int,
                            ceiling: int = HARPER_DEFAULT_CEILING) -> tuple[int, int]:
    """(exhaustive min of |Γ_d(A)| over |A|=size, canonical-sphere value).

    The isoperimetric theorem says the two agree. Exhaustive search over
    all C(2^n, size) subsets, so n is capped (default 4); larger n
    raises rather than approximating.
    """
    if n > ceiling:
        raise ResourceError(
            f"exhaustive search needs n <= {ceiling} (2^2^n subsets), got n={n}")
    if not 0 <= size <= 1 << n:
        raise DomainError(f"size {size} out of range for n={n}")
    if not 0 <= d <= n:
        raise DomainError(f"need 0 <= d <= {n}, got {d}")
    exhaustive = _harper_mins(n, d)[size]
    sphere = make_sphere(n, size, "0" * n)
    return exhaustive, sphere.gamma_size(d)


@dataclass(frozen=True)
class EventFamily:
    """An explicit event E inside {0,1}^n with its exact probability."""

    dimension: int
    members: frozenset[int]

    def __post_init__(self):
        if any(not 0 <= v < 1 << self.dimension for v in self.members):
            raise DomainError("event member outside the cube")

    @classmethod
    def from_strings(cls, strings) -> "EventFamily":
        bit_arrays = [as_bits(s) for s in strings]
        if not bit_arrays:
            raise DomainError("cannot infer dimension of an empty family; use EventFamily(n, frozenset())")
        n = bit_arrays[0].size
        if any(b.size != n for b in bit_arrays):
            raise DimensionError("family members must share one dimension")
        return cls(n, frozenset(bits_to_mask(b) for b in bit_arrays))

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def probability(self) -> Fraction:
        return Fraction(self.size, 1 << self.dimension)

    def indicator(self) -> np.ndarray:
        return _indicator(self.members, self.dimension)
