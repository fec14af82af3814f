"""Property-test harness: inequality margins, equality classes, brute force.

Every check here is an exact theorem instance: step functions are genuine
measurable functions, their rearrangements are computed exactly on the
half-cell grid, and kernels are either exactly tabulated step kernels or
erf-closed-form Gaussian families.  Margins are therefore nonnegative up to
the weight-table accuracy, and the zero-margin set can be compared against
the structural equality classes:

* constant (circle) or zero (line) function;
* a common translate: both functions are the same half-cell translate of
  their rearrangements;
* levelwise translates (cost |t| or exponent p = 1): every shared strict
  superlevel is a translated centered interval, the translate shared by
  both functions per level but free to vary across levels.

Translates are detected on the half-cell grid, which is complete for exact
step inputs: a non-constant step function equals a translate of its
rearrangement only if the translate aligns the two breakpoint lattices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetExceeded, ConfigError, KernelNotMonotone, NotNormalized
from .functionals import (
    ConvexJ,
    energy_circle,
    energy_euclidean,
    j_library,
    level_interaction_term,
    level_source_term,
    normalize,
    split_plus_minus,
)
from .grid import Grid1D, GridFunctionND, StepFunction, refine
from .kernels import (
    CircleKernel,
    GaussianKernel,
    HeatKernel,
    KernelWeights,
    LineKernel,
    StepKernelCircle,
    check_kernel_monotone,
)
from .rearrange import (
    cylindrical_rearrange,
    periodic_rearrange_1d,
    periodic_rearrange_nd,
    symmetric_decreasing_1d,
)
from .seminorm import (
    SeminormParams,
    gagliardo_periodic_direct,
    gagliardo_periodic_laplace,
)

EXACT_TOL = 1e-12


# ---------------------------------------------------------------------------
# equality classification


@dataclass(frozen=True)
class EqualityClass:
    """Structural class of a (pair of) function(s) for the equality cases."""

    tag: str  # constant | zero | common-translate | levelwise-translate | neither
    shift: float | None = None
    level_shifts: tuple = ()

    @property
    def predicts_equality(self) -> bool:
        return self.tag != "neither"


def _translate_set_circle(u: StepFunction) -> int:
    """Bitmask of half-cell shifts z with u(x) = u*(x + z) cellwise."""
    ur = refine(u, 2).values
    star = periodic_rearrange_1d(u).values
    n2 = star.size
    mask = 0
    for z in range(n2):
        if np.array_equal(ur, np.roll(star, -z)):
            mask |= 1 << z
    return mask


def _level_translate_set_circle(mask_u: np.ndarray, mask_star: np.ndarray) -> int:
    n2 = mask_u.size
    out = 0
    for z in range(n2):
        if np.array_equal(mask_u, np.roll(mask_star, -z)):
            out |= 1 << z
    return out


def _shared_levels(u: StepFunction, v: StepFunction) -> np.ndarray:
    lo = max(float(u.values.min()), float(v.values.min()))
    hi = min(float(u.values.max()), float(v.values.max()))
    levels = np.unique(np.concatenate((u.values, v.values)))
    return levels[(levels >= lo) & (levels < hi)]


def _classify_circle_pair(u: StepFunction, v: StepFunction) -> EqualityClass:
    if u.is_constant() or v.is_constant():
        return EqualityClass("constant")
    zu = _translate_set_circle(u)
    zv = _translate_set_circle(v)
    common = zu & zv
    if common:
        return EqualityClass("common-translate", shift=float((common & -common).bit_length() - 1))
    # levelwise: every shared strict superlevel pair admits one shift
    ur, vr = refine(u, 2), refine(v, 2)
    su, sv = periodic_rearrange_1d(u), periodic_rearrange_1d(v)
    shifts = []
    for tau in _shared_levels(u, v):
        zs = _level_translate_set_circle(
            ur.values > tau, su.values > tau
        ) & _level_translate_set_circle(vr.values > tau, sv.values > tau)
        if not zs:
            return EqualityClass("neither")
        shifts.append((float(tau), float((zs & -zs).bit_length() - 1)))
    return EqualityClass("levelwise-translate", level_shifts=tuple(shifts))


def _strip(vals: np.ndarray):
    nz = np.flatnonzero(vals)
    if nz.size == 0:
        return None, np.empty(0)
    return int(nz[0]), vals[nz[0] : nz[-1] + 1]


def _line_translate(u: StepFunction) -> float | None:
    """Translate a with u = u*(. - a) as functions on the line, if any."""
    ur = refine(u, 2)
    star = symmetric_decreasing_1d(u)
    i_u, core_u = _strip(ur.values)
    i_s, core_s = _strip(star.values)
    if i_u is None or not np.array_equal(core_u, core_s):
        return None
    pos_u = ur.grid.lo + i_u * ur.grid.h
    pos_s = star.grid.lo + i_s * star.grid.h
    return pos_u - pos_s


def _run_center(mask: np.ndarray, grid: Grid1D) -> float | None:
    """Center coordinate of a contiguous run of cells, None if not a run."""
    nz = np.flatnonzero(mask)
    if nz.size == 0:
        return None
    if not np.all(np.diff(nz) == 1):
        return None
    return grid.lo + 0.5 * (nz[0] + nz[-1] + 1) * grid.h


def _classify_line_pair(u: StepFunction, v: StepFunction) -> EqualityClass:
    if not u.values.any() or not v.values.any():
        return EqualityClass("zero")
    au, av = _line_translate(u), _line_translate(v)
    if au is not None and av is not None and math.isclose(au, av, abs_tol=1e-9):
        return EqualityClass("common-translate", shift=au)
    hi = min(float(u.values.max()), float(v.values.max()))
    levels = np.unique(np.concatenate((u.values, v.values)))
    levels = levels[(levels >= 0.0) & (levels < hi)]
    ur, vr = refine(u, 2), refine(v, 2)
    shifts = []
    for tau in levels:
        cu = _run_center(ur.values > tau, ur.grid)
        cv = _run_center(vr.values > tau, vr.grid)
        if cu is None or cv is None or not math.isclose(cu, cv, abs_tol=1e-9):
            return EqualityClass("neither")
        shifts.append((float(tau), cu))
    return EqualityClass("levelwise-translate", level_shifts=tuple(shifts))


def _slice_translate_mask(row: StepFunction) -> int:
    """All-shifts mask for slices constant in x1, else their translate set."""
    if row.is_constant():
        return (1 << (2 * row.grid.n)) - 1
    return _translate_set_circle(row)


def _classify_periodic_nd(u: GridFunctionND) -> EqualityClass:
    """Classes for slicewise rearrangement along the periodic axis (n = 2).

    Common translate: one half-cell shift works for every perpendicular
    slice (slices constant in x1 accept any).  Levelwise: each 2D strict
    superlevel set is a single x1-translate of its rearrangement.
    """
    g1 = u.axis1
    full = (1 << (2 * g1.n)) - 1
    common = full
    rows = [StepFunction(g1, u.values[:, i2]) for i2 in range(u.values.shape[1])]
    for row in rows:
        common &= _slice_translate_mask(row)
        if not common:
            break
    if common:
        return EqualityClass(
            "common-translate", shift=float((common & -common).bit_length() - 1)
        )
    levels = np.unique(u.values)
    levels = levels[levels < float(u.values.max())]
    shifts = []
    for tau in levels:
        mask = full
        for row in rows:
            sup = row.values > tau
            if sup.all() or not sup.any():
                continue  # slice unconstrained at this level
            mask &= _level_translate_set_circle(
                np.repeat(sup, 2), periodic_rearrange_1d(row).values > tau
            )
            if not mask:
                return EqualityClass("neither")
        shifts.append((float(tau), float((mask & -mask).bit_length() - 1)))
    return EqualityClass("levelwise-translate", level_shifts=tuple(shifts))


def _classify_cylindrical(u: GridFunctionND) -> EqualityClass:
    """n = 2 classes for slicewise rearrangement in the interval axis."""
    if not u.values.any():
        return EqualityClass("zero")
    g2 = u.axes_perp[0]
    shift = None
    for i in range(u.axis1.n):
        row = StepFunction(g2, u.values[i])
        if not row.values.any():
            continue
        a = _line_translate(row)
        if a is None:
            shift = math.nan
        elif shift is None:
            shift = a
        elif not math.isclose(shift, a, abs_tol=1e-9):
            shift = math.nan
    if shift is not None and not math.isnan(shift):
        return EqualityClass("common-translate", shift=shift)
    # levelwise: per level, one x2-shift shared by all slices
    levels = np.unique(u.values)
    levels = levels[levels < float(u.values.max())]
    shifts = []
    rgrid = g2.refined(2)
    for tau in levels:
        centers = []
        for i in range(u.axis1.n):
            mask = np.repeat(u.values[i] > tau, 2)
            if not mask.any():
                continue
            c = _run_center(mask, Grid1D.interval(rgrid.n, g2.lo, g2.hi))
            if c is None:
                return EqualityClass("neither")
            centers.append(c)
        if centers and np.ptp(centers) > 1e-9:
            return EqualityClass("neither")
        if centers:
            shifts.append((float(tau), centers[0]))
    return EqualityClass("levelwise-translate", level_shifts=tuple(shifts))


def classify_equality(
    u,
    v=None,
    context: str = "circle",
    j: ConvexJ | None = None,
    w: KernelWeights | None = None,
) -> EqualityClass:
    """Detect the structural equality class of a pair (or single function).

    Context ``circle`` and ``euclidean`` classify pairs for the
    nonexpansivity and bilinear checks; ``periodic-ps`` and
    ``cylindrical-ps`` classify a single function for the seminorm checks.
    The cost and weights arguments are accepted for symmetry with the check
    signatures; classification itself is structural.
    """
    if context == "circle":
        return _classify_circle_pair(u, v if v is not None else u)
    if context == "euclidean":
        return _classify_line_pair(u, v if v is not None else u)
    if context == "periodic-ps":
        if isinstance(u, GridFunctionND):
            return _classify_periodic_nd(u)
        return _classify_circle_pair(u, u)
    if context == "cylindrical-ps":
        return _classify_cylindrical(u)
    raise ConfigError(f"unknown context {context!r}")


# ---------------------------------------------------------------------------
# individual checks


@dataclass(frozen=True)
class CheckResult:
    margin: float
    lhs: float
    rhs: float
    bound: float
    extra: dict = field(default_factory=dict)


def _bilinear(f: StepFunction, h: StepFunction, w: KernelWeights) -> float:
    return float(f.values @ w.matrix() @ h.values)


def check_riesz_circle(
    f: StepFunction,
    h: StepFunction,
    kernel: CircleKernel,
    equality_analysis: bool = False,
) -> CheckResult:
    """Margin of the circle convolution inequality under rearrangement.

    margin = (rearranged bilinear form) - (original) >= 0; the rearranged
    side pairs f*, h* with the rearranged kernel's own table on the
    half-cell grid.
    """
    if f.grid != h.grid or not f.grid.periodic:
        raise ConfigError("f and h must share one periodic grid")
    w = kernel.weights(f.grid)
    if equality_analysis and not check_kernel_monotone(w):
        raise KernelNotMonotone(f"{kernel.name} is not strictly decreasing")
    lhs = _bilinear(f, h, w)
    w2 = kernel.rearranged().weights(f.grid.refined(2))
    rhs = _bilinear(periodic_rearrange_1d(f), periodic_rearrange_1d(h), w2)
    bound = 4.0 * (w.accuracy + w2.accuracy) * max(abs(lhs), abs(rhs), 1.0)
    return CheckResult(rhs - lhs, lhs, rhs, max(bound, EXACT_TOL))


def _internal_layer_checks(
    u: StepFunction,
    v: StepFunction,
    j: ConvexJ,
    w: KernelWeights,
    w2: KernelWeights,
    bound: float,
) -> None:
    """Re-assert source invariance and interaction monotonicity on this run."""
    if not j.min_attained:
        return
    jn = normalize(j)
    jp, _ = split_plus_minus(jn)
    su, sv = periodic_rearrange_1d(u), periodic_rearrange_1d(v)
    taus = np.quantile(np.concatenate((u.values, v.values)), [0.25, 0.75])
    for tau in taus:
        a0 = level_source_term(u, jp, w, tau)
        a1 = level_source_term(su, jp, w2, tau)
        if abs(a0 - a1) > bound * max(1.0, abs(a0)):
            raise AssertionError(f"source term moved under rearrangement: {a0} -> {a1}")
        b0 = level_interaction_term(u, v, jp, w, tau)
        b1 = level_interaction_term(su, sv, jp, w2, tau)
        if b1 < b0 - bound * max(1.0, abs(b0)):
            raise AssertionError(f"interaction term decreased: {b0} -> {b1}")


def check_nonexpansivity_circle(
    u: StepFunction,
    v: StepFunction,
    j: ConvexJ,
    kernel: CircleKernel,
    internal_checks: bool = False,
) -> CheckResult:
    """Margin of the circle energy under simultaneous rearrangement.

    margin = E[u, v, g] - E[u*, v*, g*] >= 0 for every nonnegative convex
    cost; the rearranged side is evaluated exactly on the half-cell grid
    against the rearranged kernel's table.
    """
    if u.grid != v.grid or not u.grid.periodic:
        raise ConfigError("u and v must share one periodic grid")
    w = kernel.weights(u.grid)
    w2 = kernel.rearranged().weights(u.grid.refined(2))
    lhs = energy_circle(u, v, j, w).value
    rhs = energy_circle(
        periodic_rearrange_1d(u), periodic_rearrange_1d(v), j, w2
    ).value
    bound = 4.0 * (w.accuracy + w2.accuracy) * max(abs(lhs), abs(rhs), 1.0)
    bound = max(bound, EXACT_TOL)
    if internal_checks:
        _internal_layer_checks(u, v, j, w, w2, bound)
    return CheckResult(lhs - rhs, lhs, rhs, bound)


def check_nonexpansivity_euclidean(
    u: StepFunction, v: StepFunction, j: ConvexJ, kernel: LineKernel
) -> CheckResult:
    """Margin of the whole-line energy under Schwarz rearrangement (n = 1)."""
    if u.grid != v.grid or u.grid.periodic:
        raise ConfigError("u and v must share one interval grid")
    if abs(float(j(0.0))) > 1e-14:
        raise NotNormalized(f"{j.name}: whole-line energies need J(0) = 0")
    w = kernel.weights(u.grid)
    su, sv = symmetric_decreasing_1d(u), symmetric_decreasing_1d(v)
    w2 = kernel.rearranged().weights(su.grid)
    lhs = energy_euclidean(u, v, j, w).value
    rhs = energy_euclidean(su, sv, j, w2).value
    bound = 4.0 * (w.accuracy + w2.accuracy) * max(abs(lhs), abs(rhs), 1.0)
    return CheckResult(lhs - rhs, lhs, rhs, max(bound, EXACT_TOL))


@dataclass(frozen=True)
class PolyaResult:
    margin: float
    margin_laplace: float
    value: float
    value_rearranged: float
    bound: float


def _seminorm_both(u, params):
    d = gagliardo_periodic_direct(u, params)
    l = gagliardo_periodic_laplace(u, params)
    return d, l


def check_polya_periodic(
    u: StepFunction | GridFunctionND, params: SeminormParams
) -> PolyaResult:
    """Seminorm margin under periodic rearrangement, both routes reported."""
    star = (
        periodic_rearrange_nd(u)
        if isinstance(u, GridFunctionND)
        else periodic_rearrange_1d(u)
    )
    d0, l0 = _seminorm_both(u, params)
    d1, l1 = _seminorm_both(star, params)
    bound = 4.0 * (d0.accuracy + d1.accuracy) * max(d0.value, 1.0)
    return PolyaResult(
        d0.value - d1.value, l0.value - l1.value, d0.value, d1.value, max(bound, EXACT_TOL)
    )


def check_polya_cylindrical(u: GridFunctionND, params: SeminormParams) -> PolyaResult:
    """Seminorm margin under slicewise rearrangement in the interval axis."""
    star = cylindrical_rearrange(u)
    d0, l0 = _seminorm_both(u, params)
    d1, l1 = _seminorm_both(star, params)
    bound = 4.0 * (d0.accuracy + d1.accuracy) * max(d0.value, 1.0)
    return PolyaResult(
        d0.value - d1.value, l0.value - l1.value, d0.value, d1.value, max(bound, EXACT_TOL)
    )


# ---------------------------------------------------------------------------
# exhaustive small-instance oracle


@dataclass
class CaseRecord:
    suite: str
    case_id: str
    margin: float
    class_predicted: str
    class_observed: str
    status: str


@dataclass
class VerificationReport:
    suite: str
    cases_run: int = 0
    min_margin: float = math.inf
    bound: float = EXACT_TOL
    rows: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    indeterminate: int = 0
    confusion: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.failures

    def record(self, case: CaseRecord) -> None:
        self.cases_run += 1
        self.min_margin = min(self.min_margin, case.margin)
        self.rows.append(case)
        key = (case.class_predicted, case.class_observed)
        self.confusion[key] = self.confusion.get(key, 0) + 1
        if case.status == "fail":
            self.failures.append(case)
        elif case.status == "indeterminate":
            self.indeterminate += 1

    def merge(self, other: "VerificationReport") -> None:
        self.cases_run += other.cases_run
        self.min_margin = min(self.min_margin, other.min_margin)
        self.bound = max(self.bound, other.bound)
        self.rows.extend(other.rows)
        self.failures.extend(other.failures)
        self.indeterminate += other.indeterminate
        for k, c in other.confusion.items():
            self.confusion[k] = self.confusion.get(k, 0) + c


def _all_quantized(n: int, levels: int) -> np.ndarray:
    """All level-quantized value vectors on n cells, shape (levels^n, n)."""
    grids = np.indices((levels,) * n).reshape(n, -1).T
    return grids.astype(float)


def exhaustive_oracle_circle(
    n: int,
    levels: int,
    j: ConvexJ,
    kernel: CircleKernel,
    budget: int = 200_000,
    zero_tol: float = 1e-11,
    indeterminate_tol: float = 1e-8,
) -> VerificationReport:
    """Enumerate all quantized pairs; compare margins with predicted classes.

    For strictly convex costs and a strictly decreasing kernel the zero
    margin set must coincide with the constant/common-translate classes;
    for the |t| cost with the levelwise-translate criterion.  Margins in
    (zero_tol, indeterminate_tol) are flagged, not classified.
    """
    funcs = _all_quantized(n, levels)
    m = funcs.shape[0]
    if m * m > budget:
        raise BudgetExceeded(f"{m * m} pairs exceed budget {budget}")
    grid = Grid1D.circle(n)
    w = kernel.weights(grid)
    if not check_kernel_monotone(w):
        raise KernelNotMonotone(f"{kernel.name}: oracle needs a decreasing kernel")
    w2 = kernel.rearranged().weights(grid.refined(2))
    mat, mat2 = w.matrix(), w2.matrix()

    stars = np.empty((m, 2 * n))
    masks = np.zeros(m, dtype=np.int64)
    consts = np.zeros(m, dtype=bool)
    level_masks = {}
    sfs = [StepFunction(grid, f) for f in funcs]
    for a, u in enumerate(sfs):
        stars[a] = periodic_rearrange_1d(u).values
        masks[a] = _translate_set_circle(u)
        consts[a] = u.is_constant()
        for tau in range(levels - 1):
            level_masks[(a, tau)] = _level_translate_set_circle(
                refine(u, 2).values > tau, stars[a] > tau
            )

    strict = j.strictly_convex
    is_abs = j.name.startswith("abs")
    report = VerificationReport(
        suite=f"exhaustive:n={n},levels={levels},J={j.name},{kernel.name}"
    )
    for a in range(m):
        diffs = funcs[a][None, :, None] - funcs[:, None, :]
        lhs = np.einsum("bij,ij->b", j(diffs), mat)
        rdiffs = stars[a][None, :, None] - stars[:, None, :]
        rhs = np.einsum("bij,ij->b", j(rdiffs), mat2)
        margins = lhs - rhs
        for b in range(m):
            margin = float(margins[b])
            scale = max(float(lhs[b]), 1.0)
            if is_abs:
                lo = max(funcs[a].min(), funcs[b].min())
                hi = min(funcs[a].max(), funcs[b].max())
                shared = [tau for tau in range(levels - 1) if lo <= tau < hi]
                predicted = all(
                    level_masks[(a, tau)] & level_masks[(b, tau)] for tau in shared
                )
                pred_tag = "levelwise-translate" if predicted else "neither"
            else:
                predicted = bool(consts[a] or consts[b] or (masks[a] & masks[b]))
                pred_tag = "class-i-or-ii" if predicted else "neither"
            observed_zero = abs(margin) <= zero_tol * scale
            if margin < -report.bound * scale:
                status = "fail"
            elif abs(margin) > zero_tol * scale and abs(margin) <= indeterminate_tol * scale:
                status = "indeterminate"
            elif strict or is_abs:
                status = "pass" if observed_zero == predicted else "fail"
            else:
                # no completeness claim without strict convexity: soundness only
                status = "pass" if (not predicted or observed_zero) else "fail"
            report.record(
                CaseRecord(
                    report.suite,
                    f"{a}-{b}",
                    margin,
                    pred_tag,
                    "zero" if observed_zero else "positive",
                    status,
                )
            )
    return report


# ---------------------------------------------------------------------------
# randomized suites


def random_step(rng, grid: Grid1D, levels: int | None = None, vmax: float = 2.0):
    if levels is not None:
        return StepFunction(grid, rng.integers(0, levels, grid.n).astype(float))
    return StepFunction(grid, vmax * rng.random(grid.n))


def symmetric_decreasing_instance(rng, grid: Grid1D, shift: int = 0):
    """A base-grid function equal to a translate of its own rearrangement.

    Mirror-paired descending values make every superlevel set a centered
    interval of even cell count, so at shift 0 the function is exactly its
    own rearrangement; rolling by whole cells realizes the translate class.
    """
    half = grid.n // 2
    vals = np.sort(2.0 * rng.random(half))[::-1]
    full = np.empty(grid.n)
    full[half:] = vals
    full[:half] = vals[::-1]
    return StepFunction(grid, np.roll(full, shift))


def _nested_arc_function(grid: Grid1D, lengths, centers) -> StepFunction:
    """Staircase whose strict superlevel k is the arc of ``lengths[k]`` cells
    centered at half-cell position ``centers[k]`` (lengths and centers even)."""
    vals = np.zeros(grid.n)
    for length, c in zip(lengths, centers):
        start = (c - length) // 2
        vals[(start + np.arange(length)) % grid.n] += 1.0
    return StepFunction(grid, vals)


def levelwise_pair(rng, grid: Grid1D, n_levels: int = 3):
    """Two staircases whose superlevel arcs share per-level centers.

    The shared center may wander level to level within both functions'
    nesting slack, so the pair realizes the levelwise-translate equality
    class without being common translates of their rearrangements.
    """
    n = grid.n

    def draw_lengths():
        # strictly decreasing even cell counts below n
        top = max(2, (n - 1) // 2 * 2)
        ls = sorted(rng.choice(np.arange(1, top // 2 + 1), n_levels, replace=True))
        return [2 * int(v) for v in reversed(ls)]

    lu = draw_lengths()
    lv = draw_lengths()
    centers = [2 * int(rng.integers(0, n))]
    for k in range(1, n_levels):
        room = min(lu[k - 1] - lu[k], lv[k - 1] - lv[k]) // 2
        step = 2 * int(rng.integers(-room, room + 1)) if room > 0 else 0
        centers.append(centers[-1] + step)
    return (
        _nested_arc_function(grid, lu, centers),
        _nested_arc_function(grid, lv, centers),
    )




def _case_rng(seed: int, suite: str, k: int):
    return np.random.default_rng(abs(hash((seed, suite, k))) % (2**63))


def _status(margin: float, bound: float, predicted=None, observed=None) -> str:
    if margin < -bound:
        return "fail"
    if predicted is not None and observed is not None and predicted != observed:
        return "fail"
    return "pass"


def suite_riesz(seed: int, cases: int) -> VerificationReport:
    report = VerificationReport(suite="riesz")
    kernels = [HeatKernel(0.25), HeatKernel(1.0)]
    for k in range(cases):
        rng = _case_rng(seed, "riesz", k)
        n = int(rng.choice([6, 8, 12, 16]))
        grid = Grid1D.circle(n)
        kind = k % 5
        kernel = kernels[k % 2]
        if kind == 3:
            profile = StepFunction(grid, rng.random(n) + 0.05)
            kernel = StepKernelCircle(profile)  # generally not monotone
        if kind == 0:
            f = StepFunction.constant(grid, float(rng.random() * 2))
            h = random_step(rng, grid)
            expect_zero = True
        elif kind == 1:
            shift = int(rng.integers(0, n))
            f = symmetric_decreasing_instance(rng, grid, shift)
            h = symmetric_decreasing_instance(rng, grid, shift)
            expect_zero = True
        else:
            f = random_step(rng, grid, levels=4 if kind == 2 else None)
            h = random_step(rng, grid, levels=4 if kind == 2 else None)
            expect_zero = None
        res = check_riesz_circle(f, h, kernel)
        observed = abs(res.margin) <= res.bound
        status = _status(res.margin, res.bound, expect_zero, observed if expect_zero else None)
        cls = classify_equality(f, h, "circle")
        report.bound = max(report.bound, res.bound)
        report.record(
            CaseRecord(
                "riesz",
                f"riesz-{seed}-{k}",
                res.margin,
                cls.tag,
                "zero" if observed else "positive",
                status,
            )
        )
    return report


_CIRCLE_COSTS = [
    j_library("abs"),
    j_library("power", p=1.5),
    j_library("power", p=2),
    j_library("power", p=4),
    j_library("shifted_power", p=2, t0=0.8),
    j_library("exp_increasing"),
    j_library("one_sided"),
]


def suite_nonexp_circle(seed: int, cases: int) -> VerificationReport:
    report = VerificationReport(suite="nonexp-circle")
    for k in range(cases):
        rng = _case_rng(seed, "nonexp-circle", k)
        n = int(rng.choice([6, 8, 12, 16]))
        grid = Grid1D.circle(n)
        j = _CIRCLE_COSTS[k % len(_CIRCLE_COSTS)]
        kernel = HeatKernel(float(rng.choice([0.25, 0.5, 1.0])))
        kind = k % 4
        if kind == 0:
            u = random_step(rng, grid)
            v = StepFunction.constant(grid, float(rng.random() * 2))
            expect_zero = True
        elif kind == 1:
            shift = int(rng.integers(0, n))
            u = symmetric_decreasing_instance(rng, grid, shift)
            v = symmetric_decreasing_instance(rng, grid, shift)
            expect_zero = True
        elif kind == 2 and j.name == "abs":
            u, v = levelwise_pair(rng, grid)
            expect_zero = True
        else:
            u = random_step(rng, grid, levels=3 if kind == 2 else None)
            v = random_step(rng, grid, levels=3 if kind == 2 else None)
            expect_zero = None
        res = check_nonexpansivity_circle(u, v, j, kernel, internal_checks=(k % 10 == 0))
        observed = abs(res.margin) <= res.bound
        status = _status(res.margin, res.bound, expect_zero, observed if expect_zero else None)
        cls = classify_equality(u, v, "circle")
        report.bound = max(report.bound, res.bound)
        report.record(
            CaseRecord(
                "nonexp-circle",
                f"nonexp-circle-{seed}-{k}",
                res.margin,
                cls.tag,
                "zero" if observed else "positive",
                status,
            )
        )
    return report


_LINE_COSTS = [j_library("abs"), j_library("power", p=2), j_library("power", p=3)]


def suite_nonexp_euclidean(seed: int, cases: int) -> VerificationReport:
    report = VerificationReport(suite="nonexp-rn")
    for k in range(cases):
        rng = _case_rng(seed, "nonexp-rn", k)
        n = int(rng.choice([6, 8, 12]))
        grid = Grid1D.interval(n, -2.0, 2.0)
        j = _LINE_COSTS[k % len(_LINE_COSTS)]
        kernel = GaussianKernel(float(rng.choice([0.5, 1.0, 2.0])))
        kind = k % 3
        if kind == 0:
            u = random_step(rng, grid)
            v = StepFunction.constant(grid, 0.0)
            expect_zero = True
        elif kind == 1:
            # centered symmetric decreasing pair on the centered box
            u = symmetric_decreasing_instance(rng, grid)
            v = symmetric_decreasing_instance(rng, grid)
            expect_zero = True
        else:
            u = random_step(rng, grid)
            v = random_step(rng, grid)
            expect_zero = None
        res = check_nonexpansivity_euclidean(u, v, j, kernel)
        observed = abs(res.margin) <= res.bound
        status = _status(res.margin, res.bound, expect_zero, observed if expect_zero else None)
        cls = classify_equality(u, v, "euclidean")
        report.bound = max(report.bound, res.bound)
        report.record(
            CaseRecord(
                "nonexp-rn",
                f"nonexp-rn-{seed}-{k}",
                res.margin,
                cls.tag,
                "zero" if observed else "positive",
                status,
            )
        )
    return report


def suite_polya_periodic(seed: int, cases: int, nd_every: int = 8) -> VerificationReport:
    report = VerificationReport(suite="polya-per")
    sp_grid = [(0.2, 1.0), (0.3, 2.0), (0.45, 2.0), (0.7, 1.0), (0.3, 3.0)]
    for k in range(cases):
        rng = _case_rng(seed, "polya-per", k)
        s, p = sp_grid[k % len(sp_grid)]
        if k % nd_every == nd_every - 1:
            if k % (2 * nd_every) == nd_every - 1:
                vals = 2.0 * rng.random((8, 8))
            else:
                # slicewise translate of a rearranged function: margin 0
                shift = int(rng.integers(0, 8))
                cols = [
                    np.roll(symmetric_decreasing_instance(rng, Grid1D.circle(8)).values, shift)
                    for _ in range(8)
                ]
                vals = np.stack(cols, axis=1)
            vals[:, 0] = 0.0
            vals[:, -1] = 0.0
            u = GridFunctionND(
                Grid1D.circle(8), (Grid1D.centered_interval(8, 4.0),), vals
            )
            params = SeminormParams(s, p, 2)
            if not params.step_mode_finite:
                params = SeminormParams(0.3, 1.0, 2)
            expect_zero = None if k % (2 * nd_every) == nd_every - 1 else True
        else:
            n = int(rng.choice([6, 8, 12, 16]))
            grid = Grid1D.circle(n)
            params = SeminormParams(s, p, 1)
            kind = k % 3
            if kind == 0 and p == 1.0:
                u, _ = levelwise_pair(rng, grid)
                expect_zero = True
            elif kind == 1:
                u = symmetric_decreasing_instance(rng, grid)
                expect_zero = True
            else:
                u = random_step(rng, grid, levels=4 if kind == 0 else None)
                expect_zero = None
        res = check_polya_periodic(u, params)
        observed = abs(res.margin) <= res.bound
        status = _status(res.margin, res.bound, expect_zero, observed if expect_zero else None)
        cls = classify_equality(u, context="periodic-ps")
        report.bound = max(report.bound, res.bound)
        report.record(
            CaseRecord(
                "polya-per",
                f"polya-per-{seed}-{k}",
                res.margin,
                cls.tag,
                "zero" if observed else "positive",
                status,
            )
        )
    return report


def suite_polya_cylindrical(seed: int, cases: int) -> VerificationReport:
    report = VerificationReport(suite="polya-cyl")
    for k in range(cases):
        rng = _case_rng(seed, "polya-cyl", k)
        s = float(rng.choice([0.2, 0.4, 0.6]))
        vals = 2.0 * rng.random((6, 8))
        vals[:, 0] = 0.0
        vals[:, -1] = 0.0
        if k % 3 == 0:
            vals = np.round(2 * vals) / 2.0
        u = GridFunctionND(Grid1D.circle(6), (Grid1D.centered_interval(8, 4.0),), vals)
        params = SeminormParams(s, 1.0, 2)
        res = check_polya_cylindrical(u, params)
        cls = classify_equality(u, context="cylindrical-ps")
        observed = abs(res.margin) <= res.bound
        status = _status(res.margin, res.bound)
        report.bound = max(report.bound, res.bound)
        report.record(
            CaseRecord(
                "polya-cyl",
                f"polya-cyl-{seed}-{k}",
                res.margin,
                cls.tag,
                "zero" if observed else "positive",
                status,
            )
        )
    return report


_SUITES = {
    "riesz": suite_riesz,
    "nonexp-circle": suite_nonexp_circle,
    "nonexp-rn": suite_nonexp_euclidean,
    "polya-per": suite_polya_periodic,
    "polya-cyl": suite_polya_cylindrical,
}


def run_suite(
    suites="all", seed: int = 7, cases: int = 200, exhaustive_levels: int = 2
) -> VerificationReport:
    """Run named verification suites deterministically; aggregate reports.

    ``suites`` is a name, a list of names, or "all"; "exhaustive" runs the
    small-instance enumeration with a quadratic cost and |t|.
    """
    if suites == "all":
        names = list(_SUITES) + ["exhaustive"]
    elif isinstance(suites, str):
        names = [suites]
    else:
        names = list(suites)
    total = VerificationReport(suite="+".join(names))
    for name in names:
        if name == "exhaustive":
            for j in (j_library("power", p=2), j_library("abs")):
                rep = exhaustive_oracle_circle(
                    4, exhaustive_levels, j, HeatKernel(1.0)
                )
                total.merge(rep)
            continue
        if name not in _SUITES:
            raise ConfigError(f"unknown suite {name!r}")
        total.merge(_SUITES[name](seed, cases))
    return total
