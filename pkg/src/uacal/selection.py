"""Action selection over probability fields.

Five modes:

* ``greedy``       - argmax of the probabilities.
* ``ua_exact``     - argmax of the summed probability over each action's
                     tau-neighborhood (strict ``d < tau``), evaluated
                     exactly for any metric via a translation-invariant
                     stencil.
* ``ua_fast``      - same result for the chebyshev metric, computed with
                     inclusive prefix-sum (summed-area/volume) tables.
* ``ua_restricted``- thresholded variant: keep actions above a probability
                     floor (top-k capped), search a window around their
                     mean coordinate, score each window cell against the
                     retained actions only.
* ``gaussian``     - separable truncated-Gaussian blur of the field
                     (1-2 axes), then argmax.

Every mode breaks ties by lowest flat index and is bit-deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .action_space import ActionGrid, Metric, ball_offsets
from .calibration import ProbField
from .errors import ParameterError, UnsupportedConfigError

MODES = ("greedy", "ua_exact", "ua_fast", "ua_restricted", "gaussian")

DEFAULT_K = 4000          # top-k cap on retained actions in restricted search
DEFAULT_WINDOW = 16       # restricted-search window edge length, cells


@dataclass(frozen=True)
class SelectionConfig:
    metric: Metric = Metric("euclidean")
    tau: float = 1.5
    alpha: float | None = None   # None -> 1/|A| at call time
    k: int = DEFAULT_K
    window: int = DEFAULT_WINDOW
    sigma: float = 1.0
    mode: str = "ua_exact"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ParameterError(f"unknown mode {self.mode!r}")
        if self.tau < 0:
            raise ParameterError("tau must be nonnegative")
        if self.alpha is not None and not 0.0 <= self.alpha <= 1.0:
            raise ParameterError("alpha must lie in [0, 1]")
        if self.k < 1:
            raise ParameterError("k must be >= 1")
        if self.window < 1:
            raise ParameterError("window must be >= 1")
        if self.mode == "gaussian" and not self.sigma > 0:
            raise ParameterError("sigma must be positive for gaussian mode")


@dataclass(frozen=True)
class SelectionResult:
    action: int
    aggregated_score: float
    runner_up_gap: float
    candidates_evaluated: int
    flags: tuple[str, ...] = ()


def _result_from_scores(scores: np.ndarray, actions: np.ndarray | None = None,
                        flags: tuple[str, ...] = ()) -> SelectionResult:
    """Lowest-first argmax plus margin; ``actions`` maps positions to flat ids."""
    pos = int(np.argmax(scores))
    best = float(scores[pos])
    if scores.size > 1:
        top2 = np.partition(scores, -2)[-2:]
        gap = float(top2[1] - top2[0])
    else:
        gap = 0.0
    action = pos if actions is None else int(actions[pos])
    return SelectionResult(action, best, gap, int(scores.size), flags)


def greedy_select(p: ProbField) -> SelectionResult:
    """Pick the action with maximum probability (lowest index on ties)."""
    return _result_from_scores(p.values)


def _shifted_sums(field: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """sums[x] = sum of field[x + off] over in-bounds offsets."""
    out = np.zeros_like(field)
    shape = field.shape
    for off in offsets:
        src, dst = [], []
        empty = False
        for o, n in zip(off, shape):
            o = int(o)
            if abs(o) >= n:
                empty = True
                break
            if o >= 0:
                src.append(slice(o, n))
                dst.append(slice(0, n - o))
            else:
                src.append(slice(0, n + o))
                dst.append(slice(-o, n))
        if not empty:
            out[tuple(dst)] += field[tuple(src)]
    return out


def neighborhood_sums(grid: ActionGrid, values: np.ndarray, metric: Metric,
                      tau: float) -> np.ndarray:
    """Exact per-action sum of ``values`` over the strict tau-ball, flat order."""
    offs = ball_offsets(grid, metric, tau)
    field = np.asarray(values, dtype=np.float64).reshape(grid.dims)
    return _shifted_sums(field, offs).ravel()


def ua_select(p: ProbField, cfg: SelectionConfig) -> SelectionResult:
    """Exact neighborhood-aggregation selection (any metric)."""
    if cfg.tau == 0.0:
        # strict < makes every neighborhood empty
        return SelectionResult(0, 0.0, 0.0, p.grid.size,
                               ("degenerate_neighborhood",))
    sums = neighborhood_sums(p.grid, p.values, cfg.metric, cfg.tau)
    return _result_from_scores(sums)


def _chebyshev_half_widths(grid: ActionGrid, metric: Metric, tau: float) -> list[int]:
    units = metric.axis_units(grid)
    return [max(0, math.ceil(tau / u) - 1) for u in units]


def box_sums(grid: ActionGrid, values: np.ndarray, half_widths) -> np.ndarray:
    """Boundary-clipped box sums via padded inclusive prefix tables, flat order."""
    field = np.asarray(values, dtype=np.float64).reshape(grid.dims)
    pref = field
    for ax in range(field.ndim):
        pref = np.cumsum(pref, axis=ax)
        pad = [(0, 0)] * field.ndim
        pad[ax] = (1, 0)
        pref = np.pad(pref, pad)
    # pref[i0+1, ...] = inclusive prefix; box sum by inclusion-exclusion
    los, his = [], []
    for ax, (n, h) in enumerate(zip(field.shape, half_widths)):
        idx = np.arange(n)
        los.append(np.clip(idx - h, 0, n))
        his.append(np.clip(idx + h + 1, 0, n))
    out = np.zeros(field.shape)
    ndim = field.ndim
    for corner in range(1 << ndim):
        pick = []
        sign = 1
        for ax in range(ndim):
            if corner >> ax & 1:
                pick.append(los[ax])
                sign = -sign
            else:
                pick.append(his[ax])
        ix = np.ix_(*pick)
        out += sign * pref[ix]
    return out.ravel()


def ua_select_fast(p: ProbField, cfg: SelectionConfig) -> SelectionResult:
    """Prefix-sum path for chebyshev neighborhoods on 1-3 axis grids."""
    if cfg.metric.kind != "chebyshev":
        raise UnsupportedConfigError(
            f"ua_select_fast requires the chebyshev metric, got {cfg.metric.kind!r}")
    if p.grid.ndim > 3:
        raise UnsupportedConfigError("ua_select_fast supports 1-3 axis grids")
    if cfg.tau == 0.0:
        return SelectionResult(0, 0.0, 0.0, p.grid.size,
                               ("degenerate_neighborhood",))
    h = _chebyshev_half_widths(p.grid, cfg.metric, cfg.tau)
    sums = box_sums(p.grid, p.values, h)
    # Prefix-sum differencing carries ~1e-16 relative noise, which would
    # break lowest-index tie-breaking on exactly tied scores. Re-score the
    # near-max candidates with direct clipped box sums and pick among those.
    near = np.flatnonzero(sums >= sums.max() - 1e-9)
    if near.size > 1:
        field = p.values.reshape(p.grid.dims)
        exact = np.empty(near.size)
        for i, flat in enumerate(near):
            c = np.unravel_index(int(flat), p.grid.dims)
            sl = tuple(slice(max(0, ci - hi), min(n, ci + hi + 1))
                       for ci, hi, n in zip(c, h, p.grid.dims))
            exact[i] = field[sl].sum()
        res = _result_from_scores(exact, actions=near)
        return SelectionResult(res.action, res.aggregated_score,
                               res.runner_up_gap, p.grid.size)
    return _result_from_scores(sums)


def ua_select_restricted(p: ProbField, cfg: SelectionConfig) -> SelectionResult:
    """Restricted-search aggregation around the high-probability region."""
    grid = p.grid
    values = p.values
    alpha = cfg.alpha if cfg.alpha is not None else 1.0 / grid.size
    retained = np.flatnonzero(values > alpha)
    if retained.size == 0:
        res = greedy_select(p)
        return replace(res, flags=res.flags + ("empty_retained_fallback",))
    if retained.size > cfg.k:
        # k highest probabilities, ties by lowest flat index
        order = np.lexsort((retained, -values[retained]))
        retained = np.sort(retained[order[:cfg.k]])

    dims = np.asarray(grid.dims, dtype=np.int64)
    r_coords = np.stack(np.unravel_index(retained, grid.dims), axis=-1)
    center = np.floor(r_coords.mean(axis=0) + 0.5).astype(np.int64)
    center = np.minimum(np.maximum(center, 0), dims - 1)

    half = cfg.window // 2
    axes = [np.arange(max(0, c - half), min(n, c + half + 1))
            for c, n in zip(center, dims)]
    mesh = np.meshgrid(*axes, indexing="ij")
    h_coords = np.stack([g.ravel() for g in mesh], axis=-1)  # ascending flat order
    h_flat = np.ravel_multi_index(tuple(h_coords.T), grid.dims)

    units = cfg.metric.axis_units(grid)
    r_scaled = r_coords * units
    r_probs = values[retained]
    scores = np.empty(h_coords.shape[0])
    chunk = 4096
    for start in range(0, h_coords.shape[0], chunk):
        block = h_coords[start:start + chunk] * units
        delta = np.abs(block[:, None, :] - r_scaled[None, :, :])
        if cfg.metric.kind == "euclidean":
            dist = np.sqrt(np.sum(delta * delta, axis=2))
        elif cfg.metric.kind == "chebyshev":
            dist = np.max(delta, axis=2)
        else:
            dist = np.sum(delta, axis=2)
        scores[start:start + chunk] = (dist < cfg.tau) @ r_probs
    return _result_from_scores(scores, actions=h_flat)


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Sampled Gaussian truncated at radius ceil(3*sigma), normalized to sum 1."""
    if not sigma > 0:
        raise ParameterError("sigma must be positive")
    r = math.ceil(3.0 * sigma)
    x = np.arange(-r, r + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def gaussian_blur(grid: ActionGrid, values: np.ndarray, sigma: float) -> np.ndarray:
    """Separable per-axis blur with zero padding, flat order."""
    kernel = gaussian_kernel(sigma)
    r = len(kernel) // 2
    field = np.asarray(values, dtype=np.float64).reshape(grid.dims)
    for ax in range(field.ndim):
        out = np.zeros_like(field)
        offsets = np.arange(-r, r + 1)
        for w, o in zip(kernel, offsets):
            off = np.zeros(field.ndim, dtype=np.int64)
            off[ax] = o
            out += w * _shifted_sums(field, off[None, :])
        field = out
    return field.ravel()


def gaussian_select(p: ProbField, cfg: SelectionConfig) -> SelectionResult:
    """Argmax of the Gaussian-blurred field (1-2 axis grids)."""
    if p.grid.ndim > 2:
        raise UnsupportedConfigError("gaussian_select supports 1-2 axis grids")
    blurred = gaussian_blur(p.grid, p.values, cfg.sigma)
    return _result_from_scores(blurred)


def select(p: ProbField, cfg: SelectionConfig) -> SelectionResult:
    """Dispatch on cfg.mode."""
    if cfg.mode == "greedy":
        return greedy_select(p)
    if cfg.mode == "ua_exact":
        return ua_select(p, cfg)
    if cfg.mode == "ua_fast":
        return ua_select_fast(p, cfg)
    if cfg.mode == "ua_restricted":
        return ua_select_restricted(p, cfg)
    return gaussian_select(p, cfg)
