import math
import random

import numpy as np
import pytest

from acsbm import (AssortativityMode, EmptyBlockMoveError, FitConfig, Graph,
                   Partition, block_stats, delta_relocation, fit, is_feasible,
                   log_likelihood, modularity, multi_start, nmi,
                   profile_log_likelihood, profile_offset)
from helpers import legal_moves, random_graph, random_partition

TRIANGLE_OPT = 6 * math.log(2) - 6


class TestDeltaRelocation:
    def test_matches_full_recomputation(self):
        rng = random.Random(61)
        checked = 0
        while checked < 200:
            n = rng.randint(3, 20)
            g = random_graph(rng, n, loops=True)
            p = random_partition(rng, n, rng.randint(2, 4))
            moves = legal_moves(p)
            if not moves:
                continue
            i, b = rng.choice(moves)
            before = profile_log_likelihood(block_stats(g, p))
            q = p.copy()
            q.assign[i] = b
            after = profile_log_likelihood(block_stats(g, q))
            delta = delta_relocation(block_stats(g, p), g, p, i, b)
            assert abs(delta - (after - before)) <= 1e-9 * max(1.0, abs(delta))
            checked += 1

    def test_reverse_move_cancels(self, triangle_pair, triangle_split):
        st = block_stats(triangle_pair, triangle_split)
        d1 = delta_relocation(st, triangle_pair, triangle_split, 0, 1)
        moved = triangle_split.copy()
        moved.assign[0] = 1
        d2 = delta_relocation(block_stats(triangle_pair, moved),
                              triangle_pair, moved, 0, 0)
        assert d1 + d2 == pytest.approx(0.0, abs=1e-12)

    def test_isolated_node_zero_delta(self):
        g = Graph(4, [(0, 1, 2)])
        p = Partition(2, [0, 0, 1, 1])
        assert delta_relocation(block_stats(g, p), g, p, 3, 0) == pytest.approx(0.0)

    def test_emptying_move_signalled(self):
        g = Graph(3, [(0, 1, 1), (1, 2, 1)])
        p = Partition(2, [0, 0, 1])
        with pytest.raises(EmptyBlockMoveError):
            delta_relocation(block_stats(g, p), g, p, 2, 0)


class TestFit:
    def test_triangle_pair_strong_reaches_global_optimum(self, triangle_pair):
        result = multi_start(
            triangle_pair,
            FitConfig(k=2, mode=AssortativityMode.STRONG, seed=3), runs=20)[0]
        assert result.log_likelihood == pytest.approx(TRIANGLE_OPT, abs=1e-9)
        np.testing.assert_allclose(result.omega, [[2, 0], [0, 2]], atol=1e-9)
        assert sorted(result.partition.block_sizes()) == [3, 3]
        assert nmi(result.partition, [0, 0, 0, 1, 1, 1]) == pytest.approx(1.0)

    def test_strong_matches_none_when_optimum_feasible(self, triangle_pair):
        r_none = multi_start(triangle_pair, FitConfig(k=2, seed=1), runs=10)[0]
        r_strong = multi_start(
            triangle_pair,
            FitConfig(k=2, mode=AssortativityMode.STRONG, seed=1), runs=10)[0]
        assert r_strong.log_likelihood == pytest.approx(
            r_none.log_likelihood, abs=1e-9)

    def test_single_block_no_moves(self, triangle_pair):
        result = fit(triangle_pair, FitConfig(k=1, seed=0))
        assert result.partition.assign == [0] * 6
        assert len(result.trace) == 1
        assert result.log_likelihood == pytest.approx(
            profile_log_likelihood(block_stats(triangle_pair, result.partition))
            + profile_offset(12))

    def test_k_equals_n(self):
        g = Graph(3, [(0, 1, 1), (1, 2, 1)])
        result = fit(g, FitConfig(k=3, seed=0))
        assert sorted(result.partition.block_sizes()) == [1, 1, 1]

    def test_trace_strictly_increasing(self):
        rng = random.Random(71)
        for trial in range(10):
            g = random_graph(rng, rng.randint(8, 25), p=0.3, loops=True)
            mode = (AssortativityMode.STRONG, AssortativityMode.WEAK,
                    AssortativityMode.NONE)[trial % 3]
            result = fit(g, FitConfig(k=3, mode=mode, seed=trial))
            assert all(b > a for a, b in zip(result.trace, result.trace[1:]))
            assert result.trace[-1] == result.log_likelihood

    def test_final_omega_feasible_and_consistent(self):
        rng = random.Random(73)
        for trial in range(8):
            g = random_graph(rng, 20, p=0.25, loops=True)
            mode = (AssortativityMode.STRONG, AssortativityMode.WEAK)[trial % 2]
            result = fit(g, FitConfig(k=3, mode=mode, seed=trial))
            assert is_feasible(result.omega, mode, 1e-6)
            recomputed = log_likelihood(
                block_stats(g, result.partition), result.omega)
            assert abs(result.log_likelihood - recomputed) \
                <= 1e-9 * (1 + abs(recomputed))

    def test_mode_none_log_likelihood_is_profile_value(self):
        rng = random.Random(79)
        g = random_graph(rng, 15, p=0.3)
        result = fit(g, FitConfig(k=2, seed=0))
        st = block_stats(g, result.partition)
        assert result.log_likelihood == pytest.approx(
            profile_log_likelihood(st) + profile_offset(st.two_m), abs=1e-9)

    def test_preconditions(self, triangle_pair):
        with pytest.raises(ValueError):
            fit(triangle_pair, FitConfig(k=7, seed=0))
        with pytest.raises(ValueError):
            fit(Graph(3, []), FitConfig(k=2, seed=0))

    def test_fixed_scan_order(self, triangle_pair):
        result = fit(triangle_pair, FitConfig(k=2, seed=5, scan_order="fixed"))
        assert all(b > a for a, b in zip(result.trace, result.trace[1:]))

    def test_max_sweeps_caps_search(self):
        rng = random.Random(101)
        g = random_graph(rng, 30, p=0.3)
        result = fit(g, FitConfig(k=4, seed=0, max_sweeps=1))
        assert result.sweeps == 1

    def test_mode_accepts_strings(self, triangle_pair):
        result = fit(triangle_pair, FitConfig(k=2, mode="strong", seed=3))
        assert result.mode is AssortativityMode.STRONG


class TestModularityObjective:
    def test_triangle_pair_reaches_q_half(self, triangle_pair):
        best = multi_start(triangle_pair,
                           FitConfig(k=2, seed=0, objective="modularity"),
                           runs=10)[0]
        assert best.modularity == pytest.approx(0.5, abs=1e-12)
        assert best.trace[-1] == best.modularity

    def test_blocks_may_empty(self, triangle_pair):
        # with k=3 on two cliques the best Q still uses two blocks
        best = multi_start(triangle_pair,
                           FitConfig(k=3, seed=0, objective="modularity"),
                           runs=20)[0]
        assert best.modularity == pytest.approx(0.5, abs=1e-12)
        assert sorted(best.partition.block_sizes()) == [0, 3, 3]

    def test_reported_likelihood_consistent(self, triangle_pair):
        best = multi_start(triangle_pair,
                           FitConfig(k=3, seed=0, objective="modularity"),
                           runs=20)[0]
        st = block_stats(triangle_pair, best.partition)
        assert best.log_likelihood == pytest.approx(
            log_likelihood(st, best.omega), abs=1e-9)
        assert best.modularity == pytest.approx(modularity(st), abs=1e-12)


class TestMultiStart:
    def test_single_run_equals_fit(self, triangle_pair):
        cfg = FitConfig(k=2, seed=9)
        single = fit(triangle_pair, cfg)
        multi = multi_start(triangle_pair, cfg, runs=1)
        assert len(multi) == 1
        assert multi[0].partition.assign == single.partition.assign
        assert multi[0].trace == single.trace

    def test_deterministic_repeat(self):
        rng = random.Random(83)
        g = random_graph(rng, 20, p=0.3)
        cfg = FitConfig(k=3, mode=AssortativityMode.STRONG, seed=100)
        a = multi_start(g, cfg, runs=5)
        b = multi_start(g, cfg, runs=5)
        for ra, rb in zip(a, b):
            assert ra.seed == rb.seed
            assert ra.partition.assign == rb.partition.assign
            assert ra.trace == rb.trace
            np.testing.assert_array_equal(ra.omega, rb.omega)

    def test_parallel_matches_sequential(self):
        rng = random.Random(89)
        g = random_graph(rng, 18, p=0.3)
        cfg = FitConfig(k=2, mode=AssortativityMode.STRONG, seed=7)
        seq = multi_start(g, cfg, runs=4, workers=1)
        par = multi_start(g, cfg, runs=4, workers=2)
        for rs, rp in zip(seq, par):
            assert rs.seed == rp.seed
            assert rs.trace == rp.trace
            assert rs.partition.assign == rp.partition.assign

    def test_sorted_by_objective_then_seed(self):
        rng = random.Random(97)
        g = random_graph(rng, 20, p=0.25)
        results = multi_start(g, FitConfig(k=3, seed=0), runs=8)
        keys = [(-r.log_likelihood, r.seed) for r in results]
        assert keys == sorted(keys)
        assert {r.seed for r in results} == set(range(8))

    def test_seeds_are_offsets(self, triangle_pair):
        results = multi_start(triangle_pair, FitConfig(k=2, seed=40), runs=3)
        assert {r.seed for r in results} == {40, 41, 42}

    def test_runs_validation(self, triangle_pair):
        with pytest.raises(ValueError):
            multi_start(triangle_pair, FitConfig(k=2, seed=0), runs=0)
