"""Exact rearrangement operators on step functions.

The symmetric decreasing rearrangement of an N-cell step function is again a
step function once the grid is refined by 2: every superlevel set has measure
k*h for an integer k, and the centered interval of that measure has endpoints
on the half-cell lattice.  All 1D operators below therefore return exact
outputs on the 2N-cell grid; the only approximate operator in this module is
the d >= 2 discrete Schwarz rearrangement, which is plain sorting by distance
to the origin and is documented as O(h) accurate in level-set symmetric
difference.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError, NotIndicator, NotInterval, NotPeriodic
from .grid import Grid1D, GridFunctionND, StepFunction

_placement_cache: dict[int, np.ndarray] = {}


def placement_order(n_refined: int) -> np.ndarray:
    """Cell visit order on a refined centered grid: by distance to 0, right first.

    The grid has ``n_refined`` cells (even) on a centered domain, so 0 is the
    boundary between cells n/2 - 1 and n/2.  Mirror cells are equidistant and
    the tie goes to the right cell; distances are nondecreasing along the
    returned permutation.
    """
    if n_refined % 2 != 0:
        raise ConfigError("placement order needs an even cell count")
    order = _placement_cache.get(n_refined)
    if order is None:
        half = n_refined // 2
        out = np.empty(n_refined, dtype=np.intp)
        out[0::2] = half + np.arange(half)       # right cells: half, half+1, ...
        out[1::2] = half - 1 - np.arange(half)   # left mirrors
        out.flags.writeable = False
        _placement_cache[n_refined] = out
        order = out
    return order


def _sorted_desc(values: np.ndarray) -> np.ndarray:
    # stable (value desc, original index asc) so equal values stay reproducible
    idx = np.argsort(-values, kind="stable")
    return values[idx]


def _rearranged_values(values: np.ndarray) -> np.ndarray:
    """Core step: duplicate onto half cells, sort, walk the placement order."""
    doubled = np.repeat(values, 2)
    out = np.empty_like(doubled)
    out[placement_order(doubled.size)] = _sorted_desc(doubled)
    return out


def symmetric_decreasing_1d(u: StepFunction) -> StepFunction:
    """Symmetric decreasing rearrangement of u, exact on the half-cell grid.

    The output lives on the centered interval of the same length (already the
    case for periodic input), refined by 2.  Every strict superlevel set of
    the output is a centered interval whose measure equals that of the
    corresponding superlevel set of u.
    """
    grid = u.grid
    if grid.periodic:
        out_grid = grid.refined(2)
    else:
        out_grid = Grid1D.centered_interval(2 * grid.n, grid.length)
    return StepFunction(out_grid, _rearranged_values(u.values))


def periodic_rearrange_1d(u: StepFunction) -> StepFunction:
    """Rearrangement of one period about 0, extended by periodic indexing."""
    if not u.grid.periodic:
        raise NotPeriodic("periodic rearrangement needs a periodic grid")
    return symmetric_decreasing_1d(u)


def periodic_rearrange_nd(u: GridFunctionND) -> GridFunctionND:
    """Rearrange every perpendicular slice along the periodic axis."""
    n1 = u.axis1.n
    flat = u.values.reshape(n1, -1)
    doubled = np.repeat(flat, 2, axis=0)
    srt = -np.sort(-doubled, axis=0)  # descending per column
    out = np.empty_like(doubled)
    out[placement_order(2 * n1), :] = srt
    return GridFunctionND(
        u.axis1.refined(2),
        u.axes_perp,
        out.reshape((2 * n1,) + u.values.shape[1:]),
        require_compact=u.require_compact,
    )


def schwarz_discrete_nd(values: np.ndarray, grids: tuple[Grid1D, ...]) -> np.ndarray:
    """Discrete Schwarz rearrangement for d >= 2: sort cells by center distance.

    Values sorted descending are written into cells sorted by distance of the
    cell center to the origin, ties broken lexicographically on the index
    tuple.  Exactly equimeasurable as a grid function; approximates the
    continuum ball rearrangement to O(h) in level-set symmetric difference.
    """
    arr = np.asarray(values, dtype=float)
    if arr.ndim < 2:
        raise ConfigError("schwarz_discrete_nd needs d >= 2; use symmetric_decreasing_1d")
    if len(grids) != arr.ndim or any(g.periodic for g in grids):
        raise NotInterval("schwarz_discrete_nd acts on interval-grid boxes")
    dist2 = np.zeros(arr.shape)
    for ax, g in enumerate(grids):
        c = g.centers() ** 2
        dist2 = dist2 + c.reshape((-1,) + (1,) * (arr.ndim - 1 - ax))
    flat_dist = dist2.ravel()
    order = np.lexsort((np.arange(flat_dist.size), flat_dist))
    out = np.empty(arr.size)
    out[order] = _sorted_desc(arr.ravel())
    return out.reshape(arr.shape)


def cylindrical_rearrange(u: GridFunctionND) -> GridFunctionND:
    """Rearrange every frozen-x1 slice over the perpendicular box.

    One perpendicular axis: exact 1D symmetric decreasing rearrangement, so
    that axis is refined by 2 and re-centered.  Two or more: the approximate
    discrete Schwarz operator, same shape; its output may touch the box
    boundary for tight supports, hence ``require_compact=False``.
    """
    if not u.axes_perp:
        raise ConfigError("cylindrical rearrangement needs at least one perpendicular axis")
    if len(u.axes_perp) == 1:
        g = u.axes_perp[0]
        doubled = np.repeat(u.values, 2, axis=1)
        srt = -np.sort(-doubled, axis=1)
        out = np.empty_like(doubled)
        out[:, placement_order(2 * g.n)] = srt
        return GridFunctionND(
            u.axis1,
            (Grid1D.centered_interval(2 * g.n, g.length),),
            out,
            require_compact=u.require_compact,
        )
    slices = [schwarz_discrete_nd(u.values[i], u.axes_perp) for i in range(u.axis1.n)]
    return GridFunctionND(u.axis1, u.axes_perp, np.stack(slices), require_compact=False)


def _check_indicator(values: np.ndarray) -> None:
    if not np.all((values == 0.0) | (values == 1.0)):
        raise NotIndicator("set rearrangement needs values in {0, 1}")


def rearrange_set_periodic(e: StepFunction) -> StepFunction:
    """Rearranged set as the indicator of {(chi_E)^* > 0}."""
    _check_indicator(e.values)
    return periodic_rearrange_1d(e)


def rearrange_set_cylindrical(e: GridFunctionND) -> GridFunctionND:
    _check_indicator(e.values)
    return cylindrical_rearrange(e)


def composition_commutes_check(g_monotone, u: StepFunction) -> bool:
    """Check (G o u)^* == G o (u^*) cellwise for a nondecreasing G >= 0.

    ``g_monotone`` is a vectorized callable; monotonicity is verified on the
    values of u, which is all the composition can see.
    """
    vals = np.asarray(g_monotone(u.values), dtype=float)
    order = np.argsort(u.values, kind="stable")
    if np.any(np.diff(vals[order]) < -1e-15 * (1 + np.abs(vals).max())):
        raise ConfigError("G must be nondecreasing on the values of u")
    lhs = symmetric_decreasing_1d(u.with_values(vals))
    rhs_vals = np.asarray(g_monotone(symmetric_decreasing_1d(u).values), dtype=float)
    return bool(np.array_equal(lhs.values, rhs_vals))
