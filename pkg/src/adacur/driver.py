"""Certified rank-adaptive CUR tracking of a matrix sequence.

Per parameter value the driver first tries to reuse the previous
step's row/column indices, certifying them with a sketched relative
error estimate. If the estimate exceeds the tolerance it refines the
index sets in place (append residual-guided pivots, reorder by strong
rank-revealing QR, truncate to the new rank); if even that fails it
recomputes the indices from scratch. The counters h1 and h2 track how
often the two repair paths fire after the first step.
"""

import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput, ZeroMatrixSketch
from .linalg import cpqr, eps_rank_from_rdiag, srrqr, stable_cur_eval
from .normest import estimate_cur_error
from .oversample import oversample_rows_multi
from .pivoting import IndexSelection, rand_pivot_rankest
from .problems import true_relative_error
from .sketch import SketchPack, derive_seed

__all__ = ["AdaCurConfig", "StepTrace", "CURFactors", "adacur_run",
           "refine_indices", "recompute_baseline_run"]


@dataclass
class AdaCurConfig:
    """Settings for the certified adaptive driver.

    ``tol`` is the relative Frobenius error target; ``err_samples`` the
    sketch rows used for certification; ``oversample`` the number of
    extra rows kept beyond the square cross. ``rank_safety`` scales the
    rank-truncation tolerance, applied as rank_safety * tol / sqrt(n).
    ``escalate_s`` retries a failed refinement with a doubled sketch
    (up to four doublings) before falling back to recomputation.
    ``true_error`` additionally records the exact relative error per
    step (reads the full matrix; for reporting only). With
    ``store_factors`` off the returned factors carry indices only,
    which keeps long large runs from pinning memory.
    """

    tol: float
    err_samples: int = 5
    oversample: int = 0
    seed: int = 0
    rank_safety: float = 0.5
    srrqr_f: float = 2.0
    escalate_s: bool = False
    true_error: bool = False
    store_factors: bool = True

    def __post_init__(self):
        if not (0.0 < self.tol < 1.0):
            raise InvalidInput(f"tol must be in (0, 1), got {self.tol}")
        if self.err_samples < 1:
            raise InvalidInput("err_samples must be >= 1")
        if self.oversample < 0:
            raise InvalidInput("oversample must be >= 0")
        if not (0.0 < self.rank_safety <= 1.0):
            raise InvalidInput("rank_safety must be in (0, 1]")


@dataclass
class StepTrace:
    """Per-step record of what the driver did and what it cost."""

    step: int
    t: float
    rank: int
    est_rel_err: float | None
    true_rel_err: float | None
    action: str
    h1_cum: int
    h2_cum: int
    matvecs: int
    wall_ms: float
    entries_read: int = 0


@dataclass
class CURFactors:
    """Explicit CUR factors tied to an index selection.

    ``u`` equals ``c`` restricted to the selected (+extra) rows and
    ``r`` restricted to the selected columns, elementwise. When a run
    is configured not to store factors the three arrays are None and
    only ``selection`` is meaningful.
    """

    c: np.ndarray | None
    u: np.ndarray | None
    r: np.ndarray | None
    selection: IndexSelection
    trunc_tol: float | None = None

    @property
    def rank(self):
        return int(self.selection.cols.size)

    def operator(self):
        """Stable factored evaluation of C pinv(U) R."""
        if self.c is None:
            raise InvalidInput("factors were not stored for this step")
        return stable_cur_eval(self.c, self.u, self.r, self.trunc_tol)


def _rank_tol(cfg, n):
    return cfg.rank_safety * cfg.tol / np.sqrt(n)


def _scratch_selection(oracle, cfg, seed):
    """Indices from scratch: sketched rank estimate, pivots, extra rows."""
    sel = rand_pivot_rankest(oracle, _rank_tol(cfg, oracle.ncols), seed)
    p = min(cfg.oversample, oracle.nrows - sel.rows.size)
    if p > 0 and not sel.is_empty:
        extra = oversample_rows_multi(oracle, sel.rows, sel.cols, p)
        sel = IndexSelection(sel.rows, sel.cols, extra)
    return sel


def _extract_factors(oracle, sel, keep=True):
    """Fetch C and R for ``sel`` and slice U out of the shared entries.

    U is taken from the fetched row block and written back into the
    column block so the factor cross-consistency is exact even when an
    oracle's row and column fetches round intermediate products
    differently.
    """
    if not keep:
        return CURFactors(None, None, None, sel)
    m, n = oracle.shape
    if sel.is_empty:
        return CURFactors(np.zeros((m, 0)), np.zeros((0, 0)),
                          np.zeros((0, n)), sel)
    rows = sel.all_rows
    rfac = oracle.row_block(rows)
    c = oracle.col_block(sel.cols)
    u = rfac[:, sel.cols].copy()
    c[rows, :] = u
    return CURFactors(c, u, rfac, sel)


def refine_indices(oracle, sel, pack, cfg):
    """Minor modification of an index selection against the residual.

    Appends residual-guided column pivots and matching row pivots from
    the unchosen index sets, reorders the enlarged cross by strong
    rank-revealing QR in both directions, truncates to the revealed
    rank (keeping ``oversample`` extra rows), and re-estimates the
    error reusing the pack's matrix sketch.

    Returns the refined selection, the new error estimate, and whether
    the estimate meets the tolerance.
    """
    if pack.residual_sketch is None:
        raise InvalidInput("pack must carry a residual sketch")
    m, n = oracle.shape
    es = pack.residual_sketch
    s_piv = es.shape[0]

    chosen_rows = sel.all_rows
    unchosen_cols = np.setdiff1d(np.arange(n), sel.cols)
    j1 = np.array([], dtype=np.intp)
    if unchosen_cols.size:
        piv = cpqr(es[:, unchosen_cols]).pivots
        j1 = unchosen_cols[piv[:min(s_piv, unchosen_cols.size)]]
    unchosen_rows = np.setdiff1d(np.arange(m), chosen_rows)
    i1 = np.array([], dtype=np.intp)
    if unchosen_rows.size and j1.size:
        blk = oracle.submatrix(unchosen_rows, j1)
        piv = cpqr(blk.T).pivots
        i1 = unchosen_rows[piv[:min(s_piv, unchosen_rows.size)]]

    rows2 = np.concatenate([chosen_rows, i1])
    cols2 = np.concatenate([sel.cols, j1])
    g = oracle.submatrix(rows2, cols2)
    col_qr = srrqr(g, f=cfg.srrqr_f)
    row_qr = srrqr(g.T, f=cfg.srrqr_f)
    r_new = eps_rank_from_rdiag(col_qr.r, _rank_tol(cfg, n))

    p_eff = cfg.oversample
    if r_new + p_eff > rows2.size:
        p_eff = rows2.size - r_new
        warnings.warn(
            f"refinement has only {rows2.size} candidate rows; "
            f"shrinking oversampling to {p_eff} for this step",
            stacklevel=2)
    sel_new = IndexSelection(rows2[row_qr.pivots[:r_new]],
                             cols2[col_qr.pivots[:r_new]],
                             rows2[row_qr.pivots[r_new:r_new + p_eff]])
    est = estimate_cur_error(oracle, sel_new, reuse=pack)
    return sel_new, est, est.rel_error <= cfg.tol


def _grow_pack(oracle, pack, new_rows, operator):
    """Double-size replacement pack; only the fresh rows touch the oracle."""
    emb = pack.embedding.grown(new_rows)
    fresh = emb.raw[pack.embedding.sketch_rows:]
    xs_new = oracle.rmatmat(fresh.T).T
    xs = np.vstack([pack.row_sketch, xs_new])
    es = xs - (emb.raw @ operator.left) @ operator.right
    return SketchPack(embedding=emb, row_sketch=xs, residual_sketch=es)


def _counters_mark(oracle):
    c = oracle.counters
    return c.matvecs + c.rmatvecs, c.entries_read


def _counters_delta(oracle, mark):
    c = oracle.counters
    return c.matvecs + c.rmatvecs - mark[0], c.entries_read - mark[1]


def adacur_run(seq, cfg):
    """Track ``seq`` with certified accuracy; one (factors, trace) per step.

    The first step computes indices from scratch and is labeled
    RECOMPUTE, but does not count toward h2: the cumulative h1/h2
    fields count minor modifications and recomputations from step 2 on.
    If an exception escapes mid-run the traces produced so far are
    attached to it as ``partial_trace``.
    """
    if len(seq) == 0:
        raise InvalidInput("sequence is empty")
    results = []
    h1 = h2 = 0
    sel = IndexSelection.empty()
    try:
        for j in range(len(seq)):
            oracle = seq.oracle(j)
            mark = _counters_mark(oracle)
            t0 = time.perf_counter()
            est_seed = derive_seed(cfg.seed, j, 0xE5)
            scratch_seed = derive_seed(cfg.seed, j, 0x5C)

            if j == 0:
                sel = _scratch_selection(oracle, cfg, scratch_seed)
                fac = _extract_factors(oracle, sel)
                action = "RECOMPUTE"
                try:
                    est_val = estimate_cur_error(
                        oracle, s=cfg.err_samples, seed=est_seed,
                        operator=fac.operator()).rel_error
                except ZeroMatrixSketch:
                    est_val = 0.0
            else:
                fac = _extract_factors(oracle, sel)
                try:
                    est = estimate_cur_error(
                        oracle, s=cfg.err_samples, seed=est_seed,
                        operator=fac.operator())
                except ZeroMatrixSketch:
                    was_empty = sel.is_empty
                    sel = IndexSelection.empty()
                    fac = _extract_factors(oracle, sel)
                    est_val = 0.0
                    action = "REUSE" if was_empty else "RECOMPUTE"
                    if action == "RECOMPUTE":
                        h2 += 1
                else:
                    if est.rel_error <= cfg.tol:
                        action = "REUSE"
                        est_val = est.rel_error
                    else:
                        sel_new, est_new, ok = refine_indices(
                            oracle, sel, est.pack, cfg)
                        if not ok and cfg.escalate_s:
                            pack = est.pack
                            op = fac.operator()
                            for _ in range(4):
                                pack = _grow_pack(
                                    oracle, pack,
                                    2 * pack.embedding.sketch_rows, op)
                                sel_new, est_new, ok = refine_indices(
                                    oracle, sel, pack, cfg)
                                if ok:
                                    break
                        if ok:
                            sel = sel_new
                            action = "MINOR_MOD"
                            h1 += 1
                            est_val = est_new.rel_error
                            fac = _extract_factors(oracle, sel)
                        else:
                            sel = _scratch_selection(oracle, cfg,
                                                     scratch_seed)
                            fac = _extract_factors(oracle, sel)
                            action = "RECOMPUTE"
                            h2 += 1
                            try:
                                est_val = estimate_cur_error(
                                    oracle, reuse=est.pack,
                                    operator=fac.operator()).rel_error
                            except ZeroMatrixSketch:
                                est_val = 0.0

            matvecs, entries = _counters_delta(oracle, mark)
            wall_ms = 1e3 * (time.perf_counter() - t0)
            true_val = None
            if cfg.true_error:
                true_val = true_relative_error(oracle, fac.operator())
            trace = StepTrace(step=j, t=float(seq.params[j]), rank=fac.rank,
                              est_rel_err=est_val, true_rel_err=true_val,
                              action=action, h1_cum=h1, h2_cum=h2,
                              matvecs=matvecs, wall_ms=wall_ms,
                              entries_read=entries)
            if not cfg.store_factors:
                fac = CURFactors(None, None, None, sel)
            results.append((fac, trace))
    except Exception as exc:
        exc.partial_trace = [tr for _, tr in results]
        raise
    return results


def recompute_baseline_run(seq, cfg):
    """From-scratch index computation at every step, for comparison runs.

    Every step behaves like the adaptive driver's first step; h2 counts
    the recomputations from step 2 on (h1 stays zero).
    """
    if len(seq) == 0:
        raise InvalidInput("sequence is empty")
    results = []
    h2 = 0
    try:
        for j in range(len(seq)):
            oracle = seq.oracle(j)
            mark = _counters_mark(oracle)
            t0 = time.perf_counter()
            sel = _scratch_selection(oracle, cfg,
                                     derive_seed(cfg.seed, j, 0x5C))
            fac = _extract_factors(oracle, sel)
            try:
                est_val = estimate_cur_error(
                    oracle, s=cfg.err_samples,
                    seed=derive_seed(cfg.seed, j, 0xE5),
                    operator=fac.operator()).rel_error
            except ZeroMatrixSketch:
                est_val = 0.0
            if j > 0:
                h2 += 1
            matvecs, entries = _counters_delta(oracle, mark)
            wall_ms = 1e3 * (time.perf_counter() - t0)
            true_val = None
            if cfg.true_error:
                true_val = true_relative_error(oracle, fac.operator())
            trace = StepTrace(step=j, t=float(seq.params[j]), rank=fac.rank,
                              est_rel_err=est_val, true_rel_err=true_val,
                              action="RECOMPUTE", h1_cum=0, h2_cum=h2,
                              matvecs=matvecs, wall_ms=wall_ms,
                              entries_read=entries)
            if not cfg.store_factors:
                fac = CURFactors(None, None, None, sel)
            results.append((fac, trace))
    except Exception as exc:
        exc.partial_trace = [tr for _, tr in results]
        raise
    return results
