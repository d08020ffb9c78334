"""Tests for randomized pivot selection."""

import numpy as np
import pytest

from adacur.linalg import stable_cur_eval
from adacur.oracles import DenseOracle
from adacur.pivoting import IndexSelection, rand_pivot, rand_pivot_rankest


def rank_r_matrix(rng, m, n, r):
    return rng.standard_normal((m, r)) @ rng.standard_normal((r, n))


class TestIndexSelection:
    def test_all_rows_concatenates_extras(self):
        sel = IndexSelection(np.array([3, 1]), np.array([2]),
                             np.array([7, 9]))
        assert list(sel.all_rows) == [3, 1, 7, 9]

    def test_empty(self):
        sel = IndexSelection.empty()
        assert sel.is_empty
        assert len(sel.rows) == 0 and len(sel.cols) == 0

    def test_nonempty_flag(self):
        sel = IndexSelection(np.array([0]), np.array([0]),
                             np.array([], dtype=np.intp))
        assert not sel.is_empty


class TestRandPivot:
    def test_exact_recovery(self, rng):
        # indices chosen on a rank-r matrix reproduce it through CUR
        for trial in range(10):
            m, n, r = 60, 45, 7
            a = rank_r_matrix(rng, m, n, r)
            sel = rand_pivot(DenseOracle(a), r, seed=trial)
            assert len(sel.rows) == r and len(sel.cols) == r
            op = stable_cur_eval(a[:, sel.cols],
                                 a[np.ix_(sel.rows, sel.cols)],
                                 a[sel.rows, :])
            err = np.linalg.norm(a - op.left @ op.right)
            assert err <= 1e-10 * np.linalg.norm(a)

    def test_identity_selects_distinct_indices(self):
        sel = rand_pivot(DenseOracle(np.eye(10)), 10, seed=0)
        assert sorted(sel.rows) == list(range(10))
        assert sorted(sel.cols) == list(range(10))

    def test_deterministic(self, rng):
        a = rng.standard_normal((40, 30))
        s1 = rand_pivot(DenseOracle(a), 5, seed=9)
        s2 = rand_pivot(DenseOracle(a), 5, seed=9)
        np.testing.assert_array_equal(s1.rows, s2.rows)
        np.testing.assert_array_equal(s1.cols, s2.cols)

    def test_seed_matters(self, rng):
        a = rng.standard_normal((200, 150))
        s1 = rand_pivot(DenseOracle(a), 5, seed=1)
        s2 = rand_pivot(DenseOracle(a), 5, seed=2)
        assert (not np.array_equal(s1.rows, s2.rows)
                or not np.array_equal(s1.cols, s2.cols))

    def test_presketch_avoids_new_matvecs(self, rng):
        a = rank_r_matrix(rng, 50, 40, 6)
        orc = DenseOracle(a)
        sketch = orc.rmatmat(rng.standard_normal((50, 12))).T
        before = orc.counters.rmatvecs
        rand_pivot(orc, 6, seed=3, presketch=sketch)
        assert orc.counters.rmatvecs == before


class TestRandPivotRankest:
    def test_rank_two(self, rng):
        a = rank_r_matrix(rng, 50, 40, 2)
        sel = rand_pivot_rankest(DenseOracle(a), 1e-8, seed=0)
        assert len(sel.rows) == 2 and len(sel.cols) == 2

    def test_zero_matrix_gives_empty_selection(self):
        sel = rand_pivot_rankest(DenseOracle(np.zeros((20, 20))), 1e-8,
                                 seed=0)
        assert sel.is_empty

    def test_single_sketch_pass(self, rng):
        # pivoting reuses the rank estimator's sketch: the adjoint matvec
        # count equals the accumulated sketch size, nothing more
        a = rank_r_matrix(rng, 80, 60, 5)
        orc = DenseOracle(a)
        sel = rand_pivot_rankest(orc, 1e-8, seed=1)
        assert len(sel.rows) == 5
        assert orc.counters.rmatvecs == 8  # initial sketch already enough

    def test_recovery_through_driver_tolerance(self, rng):
        for trial in range(5):
            a = rank_r_matrix(rng, 70, 50, 9)
            orc = DenseOracle(a)
            sel = rand_pivot_rankest(orc, 1e-9 * np.linalg.norm(a, 2),
                                     seed=trial)
            op = stable_cur_eval(a[:, sel.cols],
                                 a[np.ix_(sel.rows, sel.cols)],
                                 a[sel.rows, :])
            err = np.linalg.norm(a - op.left @ op.right)
            assert err <= 1e-9 * np.linalg.norm(a)
