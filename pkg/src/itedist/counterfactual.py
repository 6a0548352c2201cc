"""Counterfactual outcome maps and pseudo treatment effects.

For a covariate cell and a target treatment ``d``, the counterfactual map
sends an outcome observed under treatment ``1 - d`` to the outcome the same
individual would have had under ``d``.  Its sample estimate minimizes, over
the known outcome support, a leave-one-out objective that contrasts the two
instrument arms of the cell:

* rows with treatment ``d`` contribute absolute deviations ``|Y - t|``,
* rows with treatment ``1 - d`` contribute a sign term linear in ``t``,
* each instrument arm is normalized by its own (leave-one-out) row count.

The objective is piecewise linear in ``t`` with kinks only at the outcomes of
treatment-``d`` rows, so the exact global minimum over the closed support is
attained on the kink set plus the endpoints.  We enumerate those candidates
and return the smallest minimizer, which is deterministic and, for positive
scale factors, affine equivariant.

The sample objective is a difference of convex piecewise-linear functions and
need not be convex, so derivative or grid searches are unsafe; candidate
enumeration is both exact and cheap.

All contexts are immutable; evaluation is pure, so batches may run in
parallel without affecting results.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .data_model import Bounds, Cell, EstimabilityError, Sample

# Queries are evaluated against the candidate grid in blocks of this many
# rows, which bounds the scratch matrix at a few megabytes.
_QUERY_CHUNK = 2048

# Candidates whose float objective lies within a small window of the row
# minimum are re-compared in exact rational arithmetic.  The window sits a
# factor 64 above the accumulated prefix-sum rounding bound (~ n * eps *
# scale), so every exact tie lands inside it while clear winners stay out;
# exact resolution makes the smallest-minimizer tie-break deterministic and
# affine equivariant even on flat objective segments.
_EPS = float(np.finfo(np.float64).eps)


def _tie_window(scale: float, n_terms: int) -> float:
    return 64.0 * max(n_terms, 64) * _EPS * scale


def sign_left(u):
    """Left-continuous sign: +1 for u > 0, -1 for u <= 0 (so sign_left(0) == -1)."""
    if np.isscalar(u):
        return 1 if u > 0 else -1
    u = np.asarray(u)
    return np.where(u > 0, 1, -1)


def _prefix_sums(sorted_values: np.ndarray) -> np.ndarray:
    out = np.zeros(len(sorted_values) + 1, dtype=np.float64)
    np.cumsum(sorted_values, out=out[1:])
    return out


def _abs_sum(sorted_values: np.ndarray, prefix: np.ndarray, t):
    """Sum of |value - t| over the group via binary search and prefix sums.

    ``t`` may be a scalar or an array.  The scalar and batched minimization
    paths share this helper (and the same arithmetic tree downstream) so both
    produce bit-identical objective values.
    """
    m = len(sorted_values)
    k = np.searchsorted(sorted_values, t, side="right")
    return (t * k - prefix[k]) + ((prefix[m] - prefix[k]) - t * (m - k))


def _sign_sum(sorted_values: np.ndarray, y):
    """Sum of sign_left(value - y) over the group; ties at y count as -1."""
    m = len(sorted_values)
    return m - 2 * np.searchsorted(sorted_values, y, side="right")


@dataclass(frozen=True, eq=False)
class ObjectiveContext:
    """Preprocessed arrays for one (cell, target treatment) objective.

    ``match`` refers to the instrument arm equal to the target treatment,
    ``other`` to the opposite arm.  ``abs_*`` hold the sorted outcomes of the
    treatment-``target`` rows (the absolute-deviation groups) with prefix
    sums; ``sgn_*`` hold the sorted outcomes of the remaining rows (the sign
    groups).  Row-level arrays allow leave-one-out queries by row id.
    """

    cell: Cell
    target: int
    lower: float
    upper: float
    abs_match: np.ndarray
    abs_match_prefix: np.ndarray
    abs_other: np.ndarray
    abs_other_prefix: np.ndarray
    sgn_match: np.ndarray
    sgn_other: np.ndarray
    n_match: int
    n_other: int
    row_ids: np.ndarray
    row_y: np.ndarray
    row_d: np.ndarray
    row_z: np.ndarray

    def _locate(self, i: int) -> int:
        pos = int(np.searchsorted(self.row_ids, i))
        if pos >= len(self.row_ids) or self.row_ids[pos] != i:
            raise ValueError(f"row {i} does not belong to cell x={self.cell}")
        return pos


def build_context(sample: Sample, cell: Cell, d: int, bounds: Bounds) -> ObjectiveContext:
    """Objective context for the map onto treatment ``d`` within ``cell``.

    Requires both instrument arms of the cell to be populated; evaluation and
    sign sums then cost O(log n_x) per query via binary search.
    """
    if d not in (0, 1):
        raise ValueError(f"target treatment must be 0 or 1, got {d}")
    if cell not in sample.cell_index:
        raise ValueError(f"cell x={cell} not present in the sample")
    rows = sample.cell_index[cell]
    y = sample.outcomes[rows]
    dv = sample.treatments[rows]
    zv = sample.instruments[rows]
    n_match = int((zv == d).sum())
    n_other = len(rows) - n_match
    if n_match == 0 or n_other == 0:
        raise EstimabilityError(
            f"cell x={cell} has an empty instrument arm "
            f"(z-counts: {n_match} with z={d}, {n_other} with z={1 - d})")
    abs_mask = dv == d
    abs_match = np.sort(y[abs_mask & (zv == d)])
    abs_other = np.sort(y[abs_mask & (zv != d)])
    lo, hi = bounds.for_group(d, cell)
    return ObjectiveContext(
        cell=cell, target=d, lower=float(lo), upper=float(hi),
        abs_match=abs_match, abs_match_prefix=_prefix_sums(abs_match),
        abs_other=abs_other, abs_other_prefix=_prefix_sums(abs_other),
        sgn_match=np.sort(y[~abs_mask & (zv == d)]),
        sgn_other=np.sort(y[~abs_mask & (zv != d)]),
        n_match=n_match, n_other=n_other,
        row_ids=rows, row_y=y, row_d=dv, row_z=zv)


def _loo_terms(ctx: ObjectiveContext, i, t, y):
    """Objective ingredients after removing row ``i`` (``i`` may be None).

    Returns ``(s_match, s_other, g_match, g_other, n_match, n_other)`` where
    the ``s`` terms are absolute-deviation sums evaluated at ``t`` (scalar or
    vector), the ``g`` terms are integer sign sums at ``y``, and the counts
    are the leave-one-out instrument-arm sizes.
    """
    s_match = _abs_sum(ctx.abs_match, ctx.abs_match_prefix, t)
    s_other = _abs_sum(ctx.abs_other, ctx.abs_other_prefix, t)
    g_match = _sign_sum(ctx.sgn_match, y)
    g_other = _sign_sum(ctx.sgn_other, y)
    n_match, n_other = ctx.n_match, ctx.n_other
    if i is not None:
        pos = ctx._locate(i)
        y_i = ctx.row_y[pos]
        d_i = int(ctx.row_d[pos])
        z_i = int(ctx.row_z[pos])
        in_match = z_i == ctx.target
        if in_match:
            n_match -= 1
        else:
            n_other -= 1
        if d_i == ctx.target:
            if in_match:
                s_match = s_match - np.abs(y_i - t)
            else:
                s_other = s_other - np.abs(y_i - t)
        else:
            if in_match:
                g_match = g_match - sign_left(y_i - y)
            else:
                g_other = g_other - sign_left(y_i - y)
    if n_match < 1 or n_other < 1:
        raise EstimabilityError(
            f"removing row {i} empties an instrument arm of cell x={ctx.cell}")
    return s_match, s_other, g_match, g_other, n_match, n_other


def objective_value(ctx: ObjectiveContext, i, t: float, y: float) -> float:
    """Leave-``i``-out objective at location ``t`` and reference outcome ``y``.

    ``i=None`` evaluates the full-sample analogue.  ``t`` must lie within the
    context's outcome bounds.
    """
    if not ctx.lower <= t <= ctx.upper:
        raise ValueError(
            f"t={t} outside the outcome bounds [{ctx.lower}, {ctx.upper}]")
    s_match, s_other, g_match, g_other, n_match, n_other = _loo_terms(ctx, i, t, y)
    return float((s_match - g_match * t) / n_match - (s_other - g_other * t) / n_other)


def _candidates(ctx: ObjectiveContext, i) -> np.ndarray:
    mask = ctx.row_d == ctx.target
    if i is not None:
        mask = mask & (ctx.row_ids != i)
    vals = ctx.row_y[mask]
    vals = vals[(vals >= ctx.lower) & (vals <= ctx.upper)]
    return np.unique(np.concatenate((np.array([ctx.lower, ctx.upper]), vals)))


def _exact_score(t, abs_match, abs_other, g_match, g_other,
                 n_match, n_other) -> Fraction:
    """Objective at ``t`` times the positive factor n_match * n_other, exact.

    Floats are dyadic rationals, so every term carries a power-of-two
    denominator and the whole score reduces to integer arithmetic.
    """
    t_num, t_den = float(t).as_integer_ratio()

    def abs_sum(group):
        num, den = 0, 1
        for v in group:
            v_num, v_den = float(v).as_integer_ratio()
            term_num = abs(v_num * t_den - t_num * v_den)
            term_den = v_den * t_den
            if term_den > den:
                num = num * (term_den // den) + term_num
                den = term_den
            else:
                num += term_num * (den // term_den)
        return num, den

    s_match_num, s_match_den = abs_sum(abs_match)
    s_other_num, s_other_den = abs_sum(abs_other)
    den = max(s_match_den, s_other_den, t_den)
    s_match = s_match_num * (den // s_match_den)
    s_other = s_other_num * (den // s_other_den)
    loc = t_num * (den // t_den)
    return Fraction((s_match - int(g_match) * loc) * int(n_other)
                    - (s_other - int(g_other) * loc) * int(n_match), den)


def _pick_minimizer(cands, values, abs_match, abs_other, g_match, g_other,
                    n_match, n_other) -> int:
    """Index of the smallest candidate attaining the minimum.

    The float scan settles all clear cases; candidates within the tie window
    of the minimum are re-ranked exactly so that flat segments always resolve
    to their leftmost point.
    """
    v_min = float(values.min())
    scale = max(1.0, float(np.max(np.abs(values))))
    window = _tie_window(scale, len(abs_match) + len(abs_other))
    near = np.flatnonzero(values <= v_min + window)
    if len(near) == 1:
        return int(near[0])
    scores = [_exact_score(cands[k], abs_match, abs_other, g_match, g_other,
                           n_match, n_other) for k in near]
    return int(near[scores.index(min(scores))])


def _loo_abs_groups(ctx: ObjectiveContext, i) -> tuple[np.ndarray, np.ndarray]:
    """Absolute-deviation groups with row ``i`` removed when it belongs."""
    abs_match, abs_other = ctx.abs_match, ctx.abs_other
    if i is not None:
        pos = ctx._locate(i)
        if int(ctx.row_d[pos]) == ctx.target:
            y_i = ctx.row_y[pos]
            if int(ctx.row_z[pos]) == ctx.target:
                abs_match = np.delete(abs_match, np.searchsorted(abs_match, y_i))
            else:
                abs_other = np.delete(abs_other, np.searchsorted(abs_other, y_i))
    return abs_match, abs_other


def minimize_objective(ctx: ObjectiveContext, i, y: float) -> float:
    """Exact global minimizer of the leave-``i``-out objective over the bounds.

    The objective is piecewise linear in ``t`` with kinks only at outcomes of
    treatment-``target`` rows, so the minimum over the closed interval is
    attained on those kinks or the interval endpoints; all candidates are
    evaluated and the smallest minimizer is returned (ties resolved exactly).
    """
    cands = _candidates(ctx, i)
    s_match, s_other, g_match, g_other, n_match, n_other = _loo_terms(ctx, i, cands, y)
    values = (s_match - g_match * cands) / n_match - (s_other - g_other * cands) / n_other
    abs_match, abs_other = _loo_abs_groups(ctx, i)
    pick = _pick_minimizer(cands, values, abs_match, abs_other,
                           g_match, g_other, n_match, n_other)
    return float(cands[pick])


@dataclass(frozen=True, eq=False)
class PseudoIteVector:
    """Estimated treatment effects aligned with sample rows.

    ``map_treatment[i]`` is the treatment the counterfactual map produced
    (the opposite of the row's own treatment) and ``minimizers[i]`` the
    minimizer found, always inside its group's outcome bounds.
    """

    values: np.ndarray
    map_treatment: np.ndarray
    minimizers: np.ndarray

    def __post_init__(self):
        for arr in (self.values, self.map_treatment, self.minimizers):
            arr.setflags(write=False)

    def __len__(self) -> int:
        return len(self.values)


def _batch_minimizers(cell_y, cell_d, cell_z, d, lo, hi, query_pos) -> np.ndarray:
    """Smallest exact minimizers for many leave-one-out queries of one cell.

    All query rows carry treatment ``1 - d``, so leaving one out only touches
    the sign sums and arm counts; the absolute-deviation sums and the
    candidate grid are shared across queries.  The arithmetic mirrors
    :func:`objective_value` term by term, so the two paths agree bitwise.
    """
    abs_mask = cell_d == d
    abs_y = cell_y[abs_mask]
    abs_z = cell_z[abs_mask]
    abs_match_sorted = np.sort(abs_y[abs_z == d])
    abs_other_sorted = np.sort(abs_y[abs_z != d])
    p_match = _prefix_sums(abs_match_sorted)
    p_other = _prefix_sums(abs_other_sorted)
    sgn_match = np.sort(cell_y[~abs_mask & (cell_z == d)])
    sgn_other = np.sort(cell_y[~abs_mask & (cell_z != d)])
    n_match_full = int((cell_z == d).sum())
    n_other_full = len(cell_y) - n_match_full

    in_support = abs_y[(abs_y >= lo) & (abs_y <= hi)]
    cands = np.unique(np.concatenate((np.array([lo, hi]), in_support)))
    s_match = _abs_sum(abs_match_sorted, p_match, cands)
    s_other = _abs_sum(abs_other_sorted, p_other, cands)

    y_q = cell_y[query_pos]
    in_match = cell_z[query_pos] == d
    # Query rows have treatment 1 - d, so each belongs to one sign group and
    # its own contribution there is sign_left(0) = -1; removing it adds 1.
    g_match = _sign_sum(sgn_match, y_q) + in_match
    g_other = _sign_sum(sgn_other, y_q) + ~in_match
    n_match = n_match_full - in_match.astype(np.int64)
    n_other = n_other_full - (~in_match).astype(np.int64)

    out = np.empty(len(query_pos), dtype=np.float64)
    for start in range(0, len(query_pos), _QUERY_CHUNK):
        stop = min(start + _QUERY_CHUNK, len(query_pos))
        block = slice(start, stop)
        values = ((s_match[None, :] - g_match[block, None] * cands[None, :])
                  / n_match[block, None]
                  - (s_other[None, :] - g_other[block, None] * cands[None, :])
                  / n_other[block, None])
        picks = np.argmin(values, axis=1)
        v_min = values[np.arange(values.shape[0]), picks]
        scales = np.maximum(1.0, np.abs(values).max(axis=1))
        n_terms = len(abs_match_sorted) + len(abs_other_sorted)
        windows = _tie_window(1.0, n_terms) * scales
        ambiguous = np.flatnonzero(
            (values <= (v_min + windows)[:, None]).sum(axis=1) > 1)
        for r in ambiguous:
            q = start + r
            picks[r] = _pick_minimizer(cands, values[r], abs_match_sorted,
                                       abs_other_sorted, g_match[q], g_other[q],
                                       int(n_match[q]), int(n_other[q]))
        out[block] = cands[picks]
    return out


def pseudo_ites(sample: Sample, bounds: Bounds) -> PseudoIteVector:
    """Leave-one-out treatment effect estimates for every row of the sample.

    For a treated row the effect is the outcome minus its mapped untreated
    counterfactual; for an untreated row it is the mapped treated
    counterfactual minus the outcome.  Deterministic given the sample.

    Raises :class:`EstimabilityError` if any cell has an instrument arm with
    fewer than two observations (leaving that row out would empty the arm).
    """
    values = np.empty(sample.n, dtype=np.float64)
    maps = np.empty(sample.n, dtype=np.int8)
    minimizers = np.empty(sample.n, dtype=np.float64)
    for cell, rows in sample.cell_index.items():
        cell_y = sample.outcomes[rows]
        cell_d = sample.treatments[rows]
        cell_z = sample.instruments[rows]
        n_z1 = int(cell_z.sum())
        if min(n_z1, len(rows) - n_z1) < 2:
            raise EstimabilityError(
                f"cell x={cell} needs at least 2 observations in each instrument arm "
                f"for leave-one-out estimation (z-counts: {len(rows) - n_z1}, {n_z1})")
        for d in (0, 1):
            query_pos = np.flatnonzero(cell_d == 1 - d)
            if len(query_pos) == 0:
                continue
            lo, hi = bounds.for_group(d, cell)
            phi = _batch_minimizers(cell_y, cell_d, cell_z, d, float(lo), float(hi),
                                    query_pos)
            targets = rows[query_pos]
            if d == 1:
                values[targets] = phi - cell_y[query_pos]
            else:
                values[targets] = cell_y[query_pos] - phi
            maps[targets] = d
            minimizers[targets] = phi
    return PseudoIteVector(values=values, map_treatment=maps, minimizers=minimizers)
