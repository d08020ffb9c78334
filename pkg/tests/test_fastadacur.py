"""Tests for the sketch-free fast driver."""

import numpy as np
import pytest

from adacur.errors import InvalidInput
from adacur.fast import FastConfig, fastadacur_run
from adacur.oracles import DenseOracle, ParamMatrixSequence
from adacur.problems import (
    make_adversarial,
    make_synthetic_expm,
    true_relative_error,
)

from conftest import assert_traces_match


def read_budget(tr_prev, tr, b, p, m, n):
    """Entry-read ceiling for one tracked step."""
    r_in, r_out = tr_prev.rank, tr.rank
    return (r_in + b + p) * (r_in + b) + (m + n) * (r_out + p)


class TestFastConfig:
    def test_tol_range(self):
        with pytest.raises(InvalidInput):
            FastConfig(tol=2.0)

    def test_negative_buffer_rejected(self):
        with pytest.raises(InvalidInput):
            FastConfig(tol=1e-6, buffer=-1)


class TestTracking:
    def test_constant_sequence_stays_put(self):
        rng = np.random.default_rng(0)
        a = rng.standard_normal((50, 6)) @ rng.standard_normal((6, 40))
        seq = ParamMatrixSequence(np.arange(5, dtype=float),
                                  lambda j: DenseOracle(a), (50, 40))
        res = fastadacur_run(seq, FastConfig(tol=1e-8, buffer=3,
                                             oversample=2, seed=0))
        traces = [t for _, t in res]
        assert traces[0].action == "RECOMPUTE"
        assert all(t.rank == 6 for t in traces)
        assert traces[-1].h2_cum == 0
        for fac, _ in res:
            err = true_relative_error(DenseOracle(a), fac.operator())
            assert err <= 1e-10

    def test_no_error_estimation(self):
        seq = make_synthetic_expm(n=50, q=7, seed=0)
        res = fastadacur_run(seq, FastConfig(tol=1e-6, buffer=3, seed=0))
        for _, tr in res:
            assert tr.est_rel_err is None
            assert tr.true_rel_err is None
            assert tr.matvecs == 0 or tr.step == 0

    def test_rank_increase_capped_by_buffer(self):
        # the core block exposes only r+b columns, so the revealed rank
        # can grow by at most b per step
        b = 4
        seq = make_adversarial(seed=0, q=41)
        res = fastadacur_run(seq, FastConfig(tol=1e-4, buffer=b,
                                             oversample=2, seed=0))
        ranks = [t.rank for _, t in res]
        for r_prev, r_next in zip(ranks, ranks[1:]):
            assert r_next - r_prev <= b

    def test_tracked_set_sizes(self):
        b, p = 3, 2
        seq = make_synthetic_expm(n=60, q=9, seed=1)
        res = fastadacur_run(seq, FastConfig(tol=1e-6, buffer=b,
                                             oversample=p, seed=0))
        for fac, tr in res:
            sel = fac.selection
            assert sel.cols.size == tr.rank
            assert sel.rows.size == tr.rank
            assert sel.extra_rows.size == min(p, 60 - tr.rank)

    def test_truncate_and_expand_counted(self):
        # the synthetic spectrum grows like e^t, so the revealed core
        # rank crosses the threshold at least once during the sweep
        seq = make_synthetic_expm(n=80, q=21, seed=0)
        res = fastadacur_run(seq, FastConfig(tol=1e-6, buffer=5,
                                             oversample=2, seed=0))
        traces = [t for _, t in res]
        n_trunc = sum(t.action == "TRUNCATE" for t in traces)
        n_expand = sum(t.action == "EXPAND" for t in traces)
        assert traces[-1].h1_cum == n_trunc
        assert traces[-1].h2_cum == n_expand
        assert n_expand >= 1

    def test_blind_to_off_index_growth(self):
        # the adversarial ramp appears in rows and columns the tracked
        # set never reads, so the fast driver misses it entirely: no
        # expansion, and the final approximation error is large
        seq = make_adversarial(seed=0, q=41)
        res = fastadacur_run(seq, FastConfig(tol=1e-4, buffer=5,
                                             oversample=5, seed=0))
        assert res[-1][1].h2_cum == 0
        final_err = true_relative_error(seq.oracle(len(seq) - 1),
                                        res[-1][0].operator())
        assert final_err >= 100 * 1e-4


class TestReadBudget:
    def test_per_step_reads_bounded(self):
        b, p = 5, 5
        for seq in [make_synthetic_expm(n=60, q=9, seed=0),
                    make_adversarial(seed=0, q=21)]:
            m, n = seq.shape
            res = fastadacur_run(seq, FastConfig(tol=1e-5, buffer=b,
                                                 oversample=p, seed=0))
            traces = [t for _, t in res]
            for tr_prev, tr in zip(traces[1:], traces[2:]):
                cap = read_budget(tr_prev, tr, b, p, m, n)
                assert tr.entries_read <= cap, (
                    f"step {tr.step}: read {tr.entries_read} > {cap}")

    def test_skipping_factors_reads_less(self):
        seq = make_synthetic_expm(n=60, q=9, seed=0)
        full = fastadacur_run(seq, FastConfig(tol=1e-6, buffer=3, seed=0))
        slim = fastadacur_run(seq, FastConfig(tol=1e-6, buffer=3, seed=0,
                                              store_factors=False))
        reads_full = sum(t.entries_read for _, t in full)
        reads_slim = sum(t.entries_read for _, t in slim)
        assert reads_slim < reads_full
        for fac, _ in slim:
            assert fac.c is None
            with pytest.raises(InvalidInput):
                fac.operator()


class TestFactors:
    def test_cross_consistency_bitwise(self):
        seq = make_synthetic_expm(n=50, q=6, seed=2)
        res = fastadacur_run(seq, FastConfig(tol=1e-6, buffer=3,
                                             oversample=2, seed=0))
        for fac, tr in res:
            np.testing.assert_array_equal(fac.u, fac.r[:, fac.selection.cols])
            np.testing.assert_array_equal(fac.c[fac.selection.all_rows],
                                          fac.u)

    def test_accuracy_on_smooth_problem(self):
        seq = make_synthetic_expm(n=80, q=21, seed=0)
        res = fastadacur_run(seq, FastConfig(tol=1e-6, buffer=5,
                                             oversample=5, seed=0))
        worst = 0.0
        for j, (fac, _) in enumerate(res):
            worst = max(worst, true_relative_error(seq.oracle(j),
                                                   fac.operator()))
        assert worst <= 100 * 1e-6

    def test_deterministic(self):
        seq = make_synthetic_expm(n=50, q=8, seed=3)
        cfg = FastConfig(tol=1e-6, buffer=4, oversample=3, seed=5)
        r1 = fastadacur_run(seq, cfg)
        r2 = fastadacur_run(seq, cfg)
        assert_traces_match([t for _, t in r1], [t for _, t in r2])
        for (f1, _), (f2, _) in zip(r1, r2):
            np.testing.assert_array_equal(f1.c, f2.c)
            np.testing.assert_array_equal(f1.r, f2.r)

    def test_partial_trace_on_failure(self):
        rng = np.random.default_rng(1)
        a = rng.standard_normal((30, 5)) @ rng.standard_normal((5, 25))

        def provider(j):
            if j == 2:
                raise RuntimeError("snapshot unavailable")
            return DenseOracle(a)

        seq = ParamMatrixSequence(np.arange(5, dtype=float), provider,
                                  (30, 25))
        with pytest.raises(RuntimeError) as info:
            fastadacur_run(seq, FastConfig(tol=1e-6, buffer=2, seed=0))
        assert len(info.value.partial_trace) == 2
