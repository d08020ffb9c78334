"""Shared test configuration.

BLAS thread pinning must happen before numpy is imported anywhere in
the process, otherwise the timing comparisons in the acceptance suite
measure thread-pool scheduling instead of algorithm cost.  pytest
imports conftest before any test module, so this is the one reliable
place to do it.
"""

import os

for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
             "NUMEXPR_NUM_THREADS", "VECLIB_MAXIMUM_THREADS"):
    os.environ.setdefault(_var, "1")

import numpy as np
import pytest


@pytest.fixture
def rng():
    """Fresh deterministic generator for tests that just need noise."""
    return np.random.default_rng(1234)


def assert_traces_match(t1, t2):
    """Two step traces agree on everything except wall time."""
    assert len(t1) == len(t2)
    for a, b in zip(t1, t2):
        assert a.step == b.step
        assert a.t == b.t
        assert a.rank == b.rank
        assert a.est_rel_err == b.est_rel_err
        assert a.action == b.action
        assert a.h1_cum == b.h1_cum
        assert a.h2_cum == b.h2_cum
        assert a.matvecs == b.matvecs
        assert a.entries_read == b.entries_read
