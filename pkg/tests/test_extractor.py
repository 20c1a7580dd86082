import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hamext.bits import as_bits, to_text
from hamext.budgets import parse_budget
from hamext.errors import (ConfigError, ContractError, DimensionError,
                           DomainError, ResourceError)
from hamext.extractor import (BlockSchedule, check_schedule, default_lambda,
                              extract, majority_bit, make_schedule, odd_trim,
                              psi_deviation, similar_g_phi, similar_p_N)
from hamext.rng import bit_stream


def majority_oracle(x: str, core) -> int:
    ones = sum(int(x[i]) for i in core)
    return 1 if 2 * ones > len(core) else 0


class TestOddTrim:
    def test_drop_max_of_even(self):
        assert odd_trim({3, 4, 5, 6}) == {3, 4, 5}

    def test_odd_unchanged(self):
        assert odd_trim({0, 1, 2}) == {0, 1, 2}

    def test_singleton(self):
        assert odd_trim({7}) == {7}

    def test_empty(self):
        with pytest.raises(DomainError):
            odd_trim(set())

    @given(st.sets(st.integers(0, 100), min_size=1, max_size=30))
    def test_always_odd_and_contained(self, block):
        core = odd_trim(block)
        assert len(core) % 2 == 1
        assert core <= block
        assert len(core) >= len(block) - 1


class TestMajorityBit:
    def test_two_of_three(self):
        assert majority_bit("110", {0, 1, 2}) == 1

    def test_all_zeros(self):
        assert majority_bit("0" * 9, {1, 3, 5}) == 0

    def test_hand_trace(self):
        # bits at 3,4,5,6,7 of 11001101 are 0,1,1,0,1 -> three ones
        assert majority_oracle("11001101", [3, 4, 5, 6, 7]) == 1
        assert majority_bit("11001101", {3, 4, 5, 6, 7}) == 1

    def test_even_core_rejected(self):
        with pytest.raises(ContractError):
            majority_bit("1100", {0, 1})

    def test_out_of_range(self):
        with pytest.raises(DimensionError):
            majority_bit("11", {0, 1, 2})


class TestExtract:
    def test_hand_trace_two_blocks(self):
        trace = extract("11001101", BlockSchedule.from_sizes((3, 5)))
        assert to_text(trace.outputs) == "11"

    def test_all_ones(self):
        trace = extract("1" * 12, BlockSchedule.from_sizes((3, 4, 5)))
        assert to_text(trace.outputs) == "111"

    def test_singleton_identity(self):
        for b in "01":
            trace = extract(b, BlockSchedule.from_sizes((1,)))
            assert int(trace.outputs[0]) == int(b)

    def test_too_short(self):
        with pytest.raises(DimensionError) as err:
            extract("110", BlockSchedule.from_sizes((3, 5)))
        assert "1" in str(err.value)

    def test_matches_majority_oracle(self):
        sched = BlockSchedule.from_sizes((3, 5, 6))
        cores = [range(s, e) for s, e in sched.odd_cores]
        for seed in range(20):
            x = to_text(bit_stream(seed, 14))
            trace = extract(x, sched)
            assert [int(v) for v in trace.outputs] == [majority_oracle(x, c) for c in cores]

    def test_accepts_raw_disjoint_cores(self):
        trace = extract("1101100", [{0, 2, 4}, {1, 5, 6}])
        assert [int(v) for v in trace.outputs] == [majority_oracle("1101100", [0, 2, 4]),
                                                   majority_oracle("1101100", [1, 5, 6])]

    def test_rejects_overlapping_cores(self):
        with pytest.raises(ConfigError):
            extract("1101100", [{0, 2, 4}, {4, 5, 6}])

    @given(st.integers(0, (1 << 14) - 1))
    @settings(max_examples=300)
    def test_margins_always_odd(self, value):
        x = np.array([(value >> i) & 1 for i in range(14)], dtype=np.uint8)
        trace = extract(x, BlockSchedule.from_sizes((3, 5, 6)))
        assert all(int(m) % 2 == 1 for m in np.abs(trace.margins))
        assert all((m > 0) == bool(o) for m, o in zip(trace.margins, trace.outputs))

    def test_robust_flags(self):
        g1 = parse_budget("table:1")
        trace = extract("111" + "10101" + "111111", BlockSchedule.from_sizes((3, 5, 6)),
                        budget=g1)
        # margins: 3, 1, 5 -> |m| > 2 means blocks 0 and 2
        assert trace.robust_flags.tolist() == [True, False, True]


class TestDistributionPreservation:
    def test_exhaustive_l15(self):
        # independent path: run extract() itself on every input
        sched = BlockSchedule.from_sizes((3, 5, 7))
        L = sched.total_length
        counts = np.zeros(8, dtype=np.int64)
        for v in range(1 << L):
            bits = np.array([(v >> i) & 1 for i in range(L)], dtype=np.uint8)
            word = 0
            for k, bit in enumerate(extract(bits, sched).outputs):
                word |= int(bit) << k
            counts[word] += 1
        assert counts.tolist() == [1 << (L - 3)] * 8


class TestDistributionPreservationL20:
    def test_kernel_sweep_prefix_patterns(self):
        # blocks totalling 20 bits; every output-prefix pattern of j bits
        # must occur exactly 2^(20-j) times over all inputs
        import numpy as np
        from hamext import kernels
        sched = BlockSchedule.from_sizes((3, 5, 5, 7))
        cores = np.array([(1 << e) - (1 << s) for s, e in sched.odd_cores],
                         dtype=np.uint64)
        sizes = np.array([e - s for s, e in sched.odd_cores], dtype=np.int64)
        words = kernels.all_outputs(cores, sizes, 20)
        for j in range(1, 5):
            counts = np.bincount(words & ((1 << j) - 1), minlength=1 << j)
            assert counts.tolist() == [1 << (20 - j)] * (1 << j)


class TestRobustnessRandomized:
    def test_beyond_exhaustive_scale(self):
        sched = BlockSchedule.from_sizes((9, 11, 15))
        g = parse_budget("table:2")
        rng = np.random.Generator(np.random.Philox(key=99))
        for _ in range(200):
            x = rng.integers(0, 2, sched.total_length).astype(np.uint8)
            base = extract(x, sched, budget=g)
            y = x.copy()
            for s, e in sched.blocks:
                flip_count = int(rng.integers(0, g(e - s) + 1))
                pos = rng.choice(np.arange(s, e), size=flip_count, replace=False)
                y[pos] ^= 1
            after = extract(y, sched)
            for k in range(len(sched)):
                if base.robust_flags[k]:
                    assert after.outputs[k] == base.outputs[k]


class TestMakeSchedule:
    def test_minimal_blocks_for_cube_root(self):
        g = parse_budget("power:1/3")
        sched = make_schedule(g, 3)
        assert sched.sizes == (1, 64, 4096)
        assert check_schedule(sched, g) == []

    def test_known_admissible_sizes(self):
        # ceil(n^(1/3))/sqrt(n) <= 2^-(k+2) <= 2^-k at these sizes, sums superadditive
        g = parse_budget("power:1/3")
        sizes = (16384, 1048576, 67108864)
        for k, n in enumerate(sizes):
            assert g(n) ** 2 * 4 ** (k + 2) <= n
        assert sizes[1] >= sizes[0] and sizes[2] >= sizes[0] + sizes[1]
        assert check_schedule(BlockSchedule.from_sizes(sizes), g) == []

    def test_bounded_budget_identity_schedule(self):
        sched = make_schedule(parse_budget("table:3"), 4)
        assert sched.sizes == (1, 1, 1, 1)

    def test_budget_at_sqrt_scale_fails(self):
        with pytest.raises(ResourceError):
            make_schedule(parse_budget("power:1"), 2, max_scan=10 ** 6)

    def test_checkpoint_constraint(self):
        g = parse_budget("power:1/3")
        N = [1, 65, 70, 4161, 4200]
        sched = make_schedule(g, 3, N_constraint=N)
        assert all(s in N for s in sched.partial_sums)
        assert check_schedule(sched, g, N_constraint=N) == []

    def test_checkpoint_constraint_unsatisfiable(self):
        g = parse_budget("power:1/3")
        with pytest.raises(ResourceError):
            make_schedule(g, 3, N_constraint=[1, 65, 100])

    def test_rechecker_catches_bad_schedules(self):
        g = parse_budget("power:1/3")
        bad = BlockSchedule.from_sizes((1, 64, 4096))
        assert check_schedule(bad, parse_budget("power:1/2")) != []
        assert "partial sum" in ";".join(check_schedule(bad, g, N_constraint=[1, 65]))


class TestSchedaleSerialization:
    def test_round_trip_with_targets(self):
        sched = BlockSchedule.from_sizes((3, 5, 6), output_index_map=((0, 2), (2, 5)))
        assert BlockSchedule.from_text(sched.to_text()) == sched

    def test_rejects_inconsistent_odd_end(self):
        with pytest.raises(ConfigError):
            BlockSchedule.from_text("0 0 4 4\n")


class TestSimilarity:
    def test_reflexive(self):
        x = to_text(bit_stream(3, 40))
        assert similar_p_N(x, x, parse_budget("table:0"), [10, 20, 40])

    def test_distance_four_exceeds_one(self):
        assert not similar_p_N("1111", "0000", parse_budget("table:1"), [4])

    def test_sqrt_budget_example(self):
        # d(10110, 00111) = 2 <= ceil(sqrt(5)) = 3
        p = parse_budget("affine_sqrt:0:1")
        assert p(5) == 3
        assert similar_p_N("10110", "00111", p, [5])

    def test_n0_cutoff(self):
        assert similar_p_N("1111", "0000", parse_budget("table:1"), [4], n0=5)

    def test_monotone_in_p_and_antitone_in_N(self):
        rng = np.random.Generator(np.random.Philox(key=17))
        small, big = parse_budget("table:2"), parse_budget("table:4")
        for _ in range(50):
            x = rng.integers(0, 2, 64).astype(np.uint8)
            y = x.copy()
            pos = rng.choice(64, size=6, replace=False)
            y[pos] ^= 1
            N = sorted(set(int(v) for v in rng.integers(1, 65, size=8)))
            if similar_p_N(x, y, small, N):
                assert similar_p_N(x, y, big, N)
                assert similar_p_N(x, y, small, N[::2])

    def test_per_block_budget(self):
        sched = BlockSchedule.from_sizes((3, 5))
        g = parse_budget("table:1")
        x = as_bits("11001101")
        assert similar_g_phi(x, x, g, sched)
        y = x.copy()
        y[0] ^= 1
        y[4] ^= 1
        assert similar_g_phi(x, y, g, sched)
        y[1] ^= 1  # second flip in block 0
        assert not similar_g_phi(x, y, g, sched)

    def test_prefix_similarity_transfers_to_blocks(self):
        # p(n) = g(n/2) with checkpoint sums and superadditive sizes
        g = parse_budget("power:1/3")
        sched = make_schedule(g, 3)
        N = sched.partial_sums
        p = lambda n: g(-(-n // 2))
        rng = np.random.Generator(np.random.Philox(key=23))
        produced = 0
        while produced < 100:
            x = rng.integers(0, 2, sched.total_length).astype(np.uint8)
            y = x.copy()
            budget_left = [p(n) for n in N]
            flips = 0
            for m, (s, e) in enumerate(sched.blocks):
                allowed = min(b for b in budget_left[m:]) - flips
                take = int(rng.integers(0, max(allowed, 0) + 1))
                if take:
                    pos = rng.choice(np.arange(s, e), size=min(take, e - s), replace=False)
                    y[pos] ^= 1
                    flips += len(pos)
            dist = np.cumsum(x != y)
            if any(dist[n - 1] > p(n) for n in N):
                continue
            produced += 1
            assert similar_g_phi(x, y, g, sched)


class TestPsiDeviation:
    def test_self_distance_negative(self):
        x = bit_stream(2, 256)
        for point in psi_deviation(x, x, checkpoints=[16, 64, 256]):
            assert point.statistic < 0
            expect = -(point.n / 2) / math.sqrt(2 * point.n * default_lambda(point.n))
            assert point.statistic == pytest.approx(expect, rel=1e-12)

    def test_complement_statistic_exact_arithmetic(self):
        ones = np.ones(100, dtype=np.uint8)
        zeros = np.zeros(100, dtype=np.uint8)
        lam = math.log(math.log(100))  # 1.52718...
        [point] = psi_deviation(ones, zeros, Lambda=lambda n: math.log(math.log(n)),
                                checkpoints=[100])
        assert point.statistic == pytest.approx(50 / math.sqrt(200 * lam), rel=1e-12)
        assert point.statistic == pytest.approx(2.861, abs=5e-4)
        assert not point.within_envelope

    def test_monte_carlo_smoke(self):
        hits = 0
        for seed in range(64):
            x = bit_stream(seed, 1 << 20)
            [point] = psi_deviation(x, np.zeros(1 << 20, dtype=np.uint8),
                                    checkpoints=[1 << 20])
            if -3 <= point.statistic <= 3:
                hits += 1
        assert hits >= 63

    def test_rejects_nonpositive_lambda(self):
        with pytest.raises(DomainError):
            psi_deviation("1010", "0000", Lambda=lambda n: 0.0, checkpoints=[4])
