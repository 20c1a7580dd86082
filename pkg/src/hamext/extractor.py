"""Majority truth-table reduction over a disjoint block schedule.

A BlockSchedule partitions an initial segment of positions into
contiguous, consecutive blocks of nondecreasing sizes. Every block is
odd-trimmed (drop its top index when the size is even) before the
majority vote, so votes never tie. The extractor's outputs, per-block
margins, and robustness flags come back in an ExtractionTrace.

make_schedule builds the smallest schedule whose blocks satisfy the
geometric-decay constraint g(n_k)/sqrt(n_k) <= 2^-k plus
superadditivity, optionally pinning every partial sum into a prescribed
checkpoint set; check_schedule re-verifies those constraints through an
independent code path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .bits import as_bits
from .budgets import BudgetFunction
from .errors import ConfigError, ContractError, DimensionError, DomainError, ResourceError

MAKE_SCHEDULE_SCAN_BOUND = 1 << 28


def odd_trim(block) -> set[int]:
    """The block itself if its size is odd, else the block minus its max."""
    s = sorted(set(int(i) for i in block))
    if not s:
        raise DomainError("cannot odd-trim an empty block")
    if len(s) % 2 == 0:
        s.pop()
    return set(s)


def majority_bit(X, core) -> int:
    """1 iff strictly more ones than zeros on the (odd-size) core."""
    x = as_bits(X)
    idx = sorted(int(i) for i in core)
    if not idx or len(idx) % 2 == 0:
        raise ContractError(f"majority core must have odd size, got {len(idx)}")
    if idx[-1] >= x.size or idx[0] < 0:
        raise DimensionError(f"core index {idx[-1]} outside input of length {x.size}")
    ones = int(x[idx].sum())
    return 1 if 2 * ones > len(idx) else 0


@dataclass(frozen=True)
class BlockSchedule:
    """Contiguous consecutive index intervals [start_k, end_k)."""

    blocks: tuple[tuple[int, int], ...]
    output_index_map: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        prev_end = None
        prev_size = 0
        for k, (start, end) in enumerate(self.blocks):
            size = end - start
            if size < 1:
                raise ConfigError(f"block {k} is empty")
            if prev_end is not None and start != prev_end:
                raise ConfigError(f"block {k} must start at {prev_end}, starts at {start}")
            if size < prev_size:
                raise ConfigError(f"block sizes must be nondecreasing, block {k} shrinks")
            prev_end, prev_size = end, size
        for k, _ in self.output_index_map:
            if not 0 <= k < len(self.blocks):
                raise ConfigError(f"output_index_map references missing block {k}")

    @classmethod
    def from_sizes(cls, sizes, start: int = 0, output_index_map=()) -> "BlockSchedule":
        blocks = []
        pos = start
        for s in sizes:
            blocks.append((pos, pos + int(s)))
            pos += int(s)
        return cls(tuple(blocks), tuple(output_index_map))

    def __len__(self):
        return len(self.blocks)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(e - s for s, e in self.blocks)

    @property
    def odd_cores(self) -> tuple[tuple[int, int], ...]:
        """Per block, the interval [start, odd_end) actually voted on."""
        return tuple((s, e if (e - s) % 2 else e - 1) for s, e in self.blocks)

    @property
    def partial_sums(self) -> tuple[int, ...]:
        sums, acc = [], 0
        for s in self.sizes:
            acc += s
            sums.append(acc)
        return tuple(sums)

    @property
    def total_length(self) -> int:
        return self.blocks[-1][1] if self.blocks else 0

    def to_text(self) -> str:
        targets = dict(self.output_index_map)
        lines = []
        for k, ((s, e), (_, oe)) in enumerate(zip(self.blocks, self.odd_cores)):
            line = f"{k} {s} {e} {oe}"
            if k in targets:
                line += f" {targets[k]}"
            lines.append(line)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "BlockSchedule":
        blocks, targets = [], []
        for raw in text.splitlines():
            raw = raw.strip()
            if not raw or raw.startswith("#"):
                continue
            parts = raw.split()
            if len(parts) not in (4, 5):
                raise ConfigError(f"bad schedule line {raw!r}")
            k, s, e, oe = (int(p) for p in parts[:4])
            if k != len(blocks):
                raise ConfigError(f"schedule lines out of order at block {k}")
            expected_oe = e if (e - s) % 2 else e - 1
            if oe != expected_oe:
                raise ConfigError(f"block {k}: odd_end {oe} inconsistent with [{s},{e})")
            blocks.append((s, e))
            if len(parts) == 5:
                targets.append((k, int(parts[4])))
        return cls(tuple(blocks), tuple(targets))


@dataclass
class ExtractionTrace:
    """Outputs plus per-block vote margins (stored as 2*S^(k), an odd
    integer, so the sign decides the bit and ties are impossible)."""

    outputs: np.ndarray
    margins: np.ndarray
    robust_flags: Optional[np.ndarray] = None


def _cores_of(schedule) -> list[np.ndarray]:
    if isinstance(schedule, BlockSchedule):
        return [np.arange(s, oe) for s, oe in schedule.odd_cores]
    cores = []
    seen: set[int] = set()
    for block in schedule:
        idx = sorted(odd_trim(block))
        if seen.intersection(idx):
            raise ConfigError("extractor blocks must be disjoint")
        seen.update(idx)
        cores.append(np.asarray(idx))
    return cores


def extract(X, schedule, budget: BudgetFunction | None = None) -> ExtractionTrace:
    """Majority-vote every block's odd core of X.

    `schedule` is a BlockSchedule or any sequence of disjoint index
    sets. With a budget g, robust_flags marks blocks whose margin
    magnitude exceeds g(n_k) (n_k the full block size): flips of at
    most g(n_k) bits inside block k cannot change those output bits.
    """
    x = as_bits(X)
    if isinstance(schedule, BlockSchedule):
        if schedule.total_length > x.size:
            missing = [k for k, (_, e) in enumerate(schedule.blocks) if e > x.size]
            raise DimensionError(
                f"input of length {x.size} does not cover blocks {missing}")
        cs = np.concatenate(([0], np.cumsum(x, dtype=np.int64)))
        starts = np.array([s for s, _ in schedule.odd_cores])
        ends = np.array([e for _, e in schedule.odd_cores])
        ones = cs[ends] - cs[starts]
        margins = 2 * ones - (ends - starts)
        full_sizes = np.array(schedule.sizes)
    else:
        cores = _cores_of(schedule)
        for k, core in enumerate(cores):
            if core.size and core[-1] >= x.size:
                raise DimensionError(f"input of length {x.size} does not cover block {k}")
        margins = np.array([2 * int(x[c].sum()) - c.size for c in cores], dtype=np.int64)
        full_sizes = np.array([len(set(int(i) for i in b)) for b in schedule])
    outputs = (margins > 0).astype(np.uint8)
    robust = None
    if budget is not None:
        allow = np.array([budget(int(n)) for n in full_sizes], dtype=np.int64)
        robust = np.abs(margins) > 2 * allow
    return ExtractionTrace(outputs=outputs, margins=margins.astype(np.int64),
                           robust_flags=robust)


def _decay_ok(g: BudgetFunction, n: int, k: int) -> bool:
    # g(n)/sqrt(n) <= 2^-k, exactly: g(n)^2 * 4^k <= n
    return g(n) ** 2 << (2 * k) <= n


def make_schedule(g: BudgetFunction, block_count: int,
                  N_constraint=None,
                  max_scan: int = MAKE_SCHEDULE_SCAN_BOUND) -> BlockSchedule:
    """Smallest admissible schedule for the budget g.

    Block k gets the least size n_k (scanned in increasing order) with
    g(n_k)^2 * 4^k <= n_k, n_k >= n_{k-1}, and n_k >= sum of earlier
    sizes; when N_constraint is given every partial sum must land in
    it. A bounded budget falls back to the identity schedule (all
    blocks singletons) and ignores N_constraint.
    """
    if block_count < 1:
        raise DomainError("need at least one block")
    if g.is_bounded:
        return BlockSchedule.from_sizes([1] * block_count)
    sizes: list[int] = []
    total = 0
    checkpoints = sorted(set(int(n) for n in N_constraint)) if N_constraint is not None else None
    for k in range(block_count):
        lower = max(sizes[-1] if sizes else 1, total, 1)
        if checkpoints is not None:
            chosen = None
            for s in checkpoints:
                n = s - total
                if n < lower:
                    continue
                if _decay_ok(g, n, k):
                    chosen = n
                    break
            if chosen is None:
                raise ResourceError(
                    f"no checkpoint admits block {k} (need partial sum in "
                    f"{checkpoints} with size >= {lower} passing decay)")
            sizes.append(chosen)
        else:
            n = lower
            while True:
                if n > max_scan:
                    raise ResourceError(
                        f"block {k}: no admissible size below scan bound {max_scan}")
                jump = g(n) ** 2 << (2 * k)
                if jump <= n:
                    break
                n = jump  # every size in [n, jump) fails too: g is nondecreasing
            sizes.append(n)
        total += sizes[-1]
    return BlockSchedule.from_sizes(sizes)


def check_schedule(schedule: BlockSchedule, g: BudgetFunction,
                   N_constraint=None) -> list[str]:
    """Independent re-check of every schedule constraint; returns the
    list of violations (empty means admissible)."""
    bad = []
    sizes = schedule.sizes
    for k in range(1, len(sizes)):
        if sizes[k] < sizes[k - 1]:
            bad.append(f"sizes decrease at block {k}")
    for k, (s, e) in enumerate(schedule.blocks):
        if k and s != schedule.blocks[k - 1][1]:
            bad.append(f"gap before block {k}")
        if e <= s:
            bad.append(f"block {k} empty")
    running = 0
    for k, n in enumerate(sizes):
        if n < running:
            bad.append(f"block {k} smaller than sum of earlier blocks")
        running += n
        if not g.is_bounded:
            ratio_sq_num = g(n) ** 2 * (1 << (2 * k))
            if ratio_sq_num > n:
                bad.append(f"block {k}: g(n_k)/sqrt(n_k) exceeds 2^-{k}")
    if N_constraint is not None and not g.is_bounded:
        allowed = set(int(x) for x in N_constraint)
        for m, s in enumerate(schedule.partial_sums):
            if s not in allowed:
                bad.append(f"partial sum {s} (through block {m}) not a checkpoint")
    return bad


def similar_p_N(X, Y, p: BudgetFunction, N, n0: int = 0) -> bool:
    """Prefix Hamming distances at the checkpoints N (past n0) all obey
    the budget: d(X|n, Y|n) <= p(n)."""
    x, y = as_bits(X), as_bits(Y)
    if x.size != y.size:
        raise DimensionError(f"length mismatch: {x.size} vs {y.size}")
    cum = np.concatenate(([0], np.cumsum(x != y, dtype=np.int64)))
    for n in N:
        n = int(n)
        if n < n0:
            continue
        if not 1 <= n <= x.size:
            raise DomainError(f"checkpoint {n} outside 1..{x.size}")
        if cum[n] > p(n):
            return False
    return True


def similar_g_phi(X, Y, g: BudgetFunction, schedule: BlockSchedule) -> bool:
    """Per-block disagreement counts all within g of the block size."""
    x, y = as_bits(X), as_bits(Y)
    if x.size != y.size:
        raise DimensionError(f"length mismatch: {x.size} vs {y.size}")
    if schedule.total_length > x.size:
        raise DimensionError("inputs do not cover the schedule")
    diff = (x != y)
    for (s, e) in schedule.blocks:
        if int(diff[s:e].sum()) > g(e - s):
            return False
    return True


class PsiPoint(NamedTuple):
    n: int
    statistic: float
    within_envelope: bool


def default_lambda(n: int) -> float:
    """ln ln n, clamped below 16 to dodge the n <= e singularity."""
    return math.log(math.log(max(n, 16)))


def psi_deviation(X, A, Lambda: Callable[[int], float] = default_lambda,
                  epsilon: float = 0.0,
                  checkpoints: Sequence[int] | None = None) -> list[PsiPoint]:
    """Normalized prefix-distance deviations from the sqrt(2 n L(n))
    envelope: statistic(n) = (d(X|n,A|n) - n/2) / sqrt(2 n L(n)), plus
    whether the distance stays at or under n/2 + (1-eps) sqrt(2 n L(n)).
    """
    x, a = as_bits(X), as_bits(A)
    if x.size != a.size:
        raise DimensionError(f"length mismatch: {x.size} vs {a.size}")
    if checkpoints is None:
        checkpoints = [1 << j for j in range(4, x.size.bit_length()) if 1 << j <= x.size]
        if not checkpoints:
            checkpoints = [x.size]
    cum = np.concatenate(([0], np.cumsum(x != a, dtype=np.int64)))
    out = []
    for n in checkpoints:
        n = int(n)
        if not 1 <= n <= x.size:
            raise DomainError(f"checkpoint {n} outside 1..{x.size}")
        lam = Lambda(n)
        if lam <= 0:
            raise DomainError(f"Lambda({n}) = {lam} must be positive")
        dist = int(cum[n])
        scale = math.sqrt(2.0 * n * lam)
        out.append(PsiPoint(n, (dist - n / 2.0) / scale,
                            dist <= n / 2.0 + (1.0 - epsilon) * scale))
    return out
