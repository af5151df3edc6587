"""Type-1 and interval type-2 Mamdani inference for a two-input fuzzy PD law.

Inputs and output live on the normalized universe [-1, 1] and are covered
by five labels NB < N < Z < P < PB. Membership functions are triangles
sharing the label apexes; the outermost labels are shouldered.

A partition is held internally as a ``(3, 5)`` array: row 0 apexes, row 1
left foot distances, row 2 right foot distances. The jitted kernels below
work on those arrays so that the closed-loop simulator can call them per
time step without Python overhead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import NoRuleFired

LABELS = ("NB", "N", "Z", "P", "PB")
N_LABELS = len(LABELS)
CANONICAL_APEXES = (-1.0, -0.5, 0.0, 0.5, 1.0)
GRID_POINTS = 201

# rows: error label, columns: error-derivative label
TABLE2 = (
    ("NB", "NB", "N", "N", "Z"),
    ("NB", "N", "N", "Z", "P"),
    ("N", "N", "Z", "P", "P"),
    ("N", "Z", "P", "P", "PB"),
    ("Z", "P", "P", "PB", "PB"),
)

CENTROID = 0
COS = 1
TYPE_REDUCTIONS = {"centroid": CENTROID, "cos": COS}


def _symmetric_grid(n: int) -> np.ndarray:
    y = np.linspace(-1.0, 1.0, n)
    # exact mirror symmetry y[k] == -y[n-1-k]
    return 0.5 * (y - y[::-1])


OUTPUT_GRID = _symmetric_grid(GRID_POINTS)


def label_index(label) -> int:
    if isinstance(label, str):
        try:
            return LABELS.index(label)
        except ValueError:
            raise ValueError(f"unknown label {label!r}; expected one of {LABELS}") from None
    idx = int(label)
    if not 0 <= idx < N_LABELS:
        raise ValueError(f"label index out of range: {label!r}")
    return idx


@dataclass(frozen=True)
class RuleBase:
    """5x5 map (error label, error-derivative label) -> output label."""

    table: tuple = TABLE2

    def __post_init__(self):
        rows = tuple(tuple(row) for row in self.table)
        if len(rows) != N_LABELS or any(len(r) != N_LABELS for r in rows):
            raise ValueError("rule table must be 5x5")
        for row in rows:
            for lab in row:
                label_index(lab)
        object.__setattr__(self, "table", rows)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[label_index(lab) for lab in row] for row in self.table], dtype=np.int64)

    def rule(self, e_label, de_label) -> str:
        return self.table[label_index(e_label)][label_index(de_label)]

    def to_dict(self) -> dict:
        return {"table": [list(row) for row in self.table]}

    @classmethod
    def from_dict(cls, d: dict) -> "RuleBase":
        return cls(tuple(tuple(row) for row in d["table"]))


def _check_apexes(apexes) -> tuple:
    apexes = tuple(float(a) for a in apexes)
    if len(apexes) != N_LABELS:
        raise ValueError("need exactly five apexes")
    if any(b <= a for a, b in zip(apexes, apexes[1:])):
        raise ValueError("apexes must be strictly increasing")
    return apexes


def _partition_array(apexes, spread: float) -> np.ndarray:
    apex = np.asarray(apexes, dtype=float)
    gaps = np.diff(apex)
    left = np.empty(N_LABELS)
    right = np.empty(N_LABELS)
    # shouldered ends keep the inner gap on their open side
    left[1:] = gaps
    left[0] = gaps[0]
    right[:-1] = gaps
    right[-1] = gaps[-1]
    return np.vstack([apex, spread * left, spread * right])


@dataclass(frozen=True)
class T1Partition:
    """Five triangular MFs; ``spread`` scales every foot distance about its apex."""

    spread: float = 1.0
    apexes: tuple = CANONICAL_APEXES

    def __post_init__(self):
        if not (math.isfinite(self.spread) and self.spread > 0):
            raise ValueError(f"spread must be > 0, got {self.spread!r}")
        object.__setattr__(self, "apexes", _check_apexes(self.apexes))

    def array(self) -> np.ndarray:
        return _partition_array(self.apexes, self.spread)

    def grades(self, u: float) -> np.ndarray:
        g = np.empty(N_LABELS)
        _grades(float(u), self.array(), g)
        return g

    def on_grid(self, grid: np.ndarray = OUTPUT_GRID) -> np.ndarray:
        return _on_grid(self.array(), grid)

    def to_dict(self) -> dict:
        return {"spread": self.spread, "apexes": list(self.apexes)}

    @classmethod
    def from_dict(cls, d: dict) -> "T1Partition":
        return cls(**d)


@dataclass(frozen=True)
class IT2Partition:
    """Interval type-2 counterpart of :class:`T1Partition`.

    Lower and upper MFs share the T1 apexes; their foot distances are the
    T1 ones scaled by ``1 - fou`` and ``1 + fou``.
    """

    spread: float = 1.0
    fou: float = 0.15
    apexes: tuple = CANONICAL_APEXES

    def __post_init__(self):
        if not (math.isfinite(self.spread) and self.spread > 0):
            raise ValueError(f"spread must be > 0, got {self.spread!r}")
        if not (math.isfinite(self.fou) and 0 <= self.fou <= 1):
            raise ValueError(f"fou must lie in [0, 1], got {self.fou!r}")
        object.__setattr__(self, "apexes", _check_apexes(self.apexes))

    def lower(self) -> np.ndarray:
        return _partition_array(self.apexes, self.spread * (1.0 - self.fou))

    def upper(self) -> np.ndarray:
        return _partition_array(self.apexes, self.spread * (1.0 + self.fou))

    def grades(self, u: float) -> tuple[np.ndarray, np.ndarray]:
        lo = np.empty(N_LABELS)
        up = np.empty(N_LABELS)
        _grades(float(u), self.lower(), lo)
        _grades(float(u), self.upper(), up)
        return lo, up

    def to_dict(self) -> dict:
        return {"spread": self.spread, "fou": self.fou, "apexes": list(self.apexes)}

    @classmethod
    def from_dict(cls, d: dict) -> "IT2Partition":
        return cls(**d)


# ---------------------------------------------------------------- kernels


@njit(cache=True)
def _grade(u, i, part):
    a = part[0, i]
    if u < a:
        if i == 0:
            return 1.0
        w = part[1, i]
        if w <= 0.0:
            return 0.0
        g = 1.0 - (a - u) / w
    elif u > a:
        if i == N_LABELS - 1:
            return 1.0
        w = part[2, i]
        if w <= 0.0:
            return 0.0
        g = 1.0 - (u - a) / w
    else:
        return 1.0
    return g if g > 0.0 else 0.0


@njit(cache=True)
def _grades(u, part, out):
    for i in range(N_LABELS):
        out[i] = _grade(u, i, part)


@njit(cache=True)
def _on_grid(part, grid):
    out = np.empty((N_LABELS, grid.shape[0]))
    for i in range(N_LABELS):
        for k in range(grid.shape[0]):
            out[i, k] = _grade(grid[k], i, part)
    return out


@njit(cache=True)
def _clip1(u):
    if u > 1.0:
        return 1.0
    if u < -1.0:
        return -1.0
    return u


@njit(cache=True)
def _label_firing(rules, ge, gd, fire):
    """Max-min firing strength of each output label."""
    for k in range(N_LABELS):
        fire[k] = 0.0
    for i in range(N_LABELS):
        if ge[i] <= 0.0:
            continue
        for j in range(N_LABELS):
            f = min(ge[i], gd[j])
            k = rules[i, j]
            if f > fire[k]:
                fire[k] = f


@njit(cache=True)
def _t1_core(rules, pe, pd, out_grid, grid, e, de):
    ge = np.empty(N_LABELS)
    gd = np.empty(N_LABELS)
    fire = np.empty(N_LABELS)
    _grades(_clip1(e), pe, ge)
    _grades(_clip1(de), pd, gd)
    _label_firing(rules, ge, gd, fire)
    n = grid.shape[0]
    mu = np.empty(n)
    den = 0.0
    for k in range(n):
        a = 0.0
        for lab in range(N_LABELS):
            m = min(fire[lab], out_grid[lab, k])
            if m > a:
                a = m
        mu[k] = a
        den += a
    if den <= 0.0:
        return 0.0
    # the grid is exactly symmetric: fold mirrored pairs so that a symmetric
    # aggregate gives exactly zero
    num = 0.0
    for k in range(n // 2):
        num += grid[n - 1 - k] * (mu[n - 1 - k] - mu[k])
    return num / den


@njit(cache=True)
def _km_left(c, fl, fu):
    """Left end of the type-reduced interval; ``c`` ascending, some fu > 0.

    The minimum is attained with upper weights on the first ``k + 1``
    centroids and lower weights on the rest for some switch point ``k``;
    every switch point is scored from prefix/suffix sums, which avoids the
    fixed-point iteration's sensitivity to ties and tiny weights.
    """
    n = c.shape[0]
    suf_num = np.zeros(n + 1)
    suf_den = np.zeros(n + 1)
    for i in range(n - 1, -1, -1):
        suf_num[i] = suf_num[i + 1] + c[i] * fl[i]
        suf_den[i] = suf_den[i + 1] + fl[i]
    best = np.inf
    num = 0.0
    den = 0.0
    for k in range(-1, n):
        if k >= 0:
            num += c[k] * fu[k]
            den += fu[k]
        d = den + suf_den[k + 1]
        if d > 0.0:
            y = (num + suf_num[k + 1]) / d
            if y < best:
                best = y
    return best


@njit(cache=True)
def _km_right(c, fl, fu):
    """Right end, computed as the mirror image of the left end.

    Mirroring keeps ties at a switch point consistent with ``_km_left`` and
    makes ``y_r = -y_l`` exact for mirror-symmetric inputs.
    """
    return -_km_left(-c[::-1], fl[::-1], fu[::-1])


@njit(cache=True)
def _it2_core(rules, pe_lo, pe_up, pd_lo, pd_up, out_lo, out_up, grid, c_left, c_right, mode, e, de):
    e = _clip1(e)
    de = _clip1(de)
    ge_lo = np.empty(N_LABELS)
    ge_up = np.empty(N_LABELS)
    gd_lo = np.empty(N_LABELS)
    gd_up = np.empty(N_LABELS)
    _grades(e, pe_lo, ge_lo)
    _grades(e, pe_up, ge_up)
    _grades(de, pd_lo, gd_lo)
    _grades(de, pd_up, gd_up)

    if mode == CENTROID:
        fire_lo = np.empty(N_LABELS)
        fire_up = np.empty(N_LABELS)
        _label_firing(rules, ge_lo, gd_lo, fire_lo)
        _label_firing(rules, ge_up, gd_up, fire_up)
        n = grid.shape[0]
        mu_lo = np.zeros(n)
        mu_up = np.zeros(n)
        any_fired = False
        for k in range(n):
            a = 0.0
            b = 0.0
            for lab in range(N_LABELS):
                m = min(fire_lo[lab], out_lo[lab, k])
                if m > a:
                    a = m
                m = min(fire_up[lab], out_up[lab, k])
                if m > b:
                    b = m
            mu_lo[k] = a
            mu_up[k] = b
            if b > 0.0:
                any_fired = True
        if not any_fired:
            return 0.0
        return 0.5 * (_km_left(grid, mu_lo, mu_up) + _km_right(grid, mu_lo, mu_up))

    # center of sets: one interval per rule, consequent centroid interval per label
    nr = N_LABELS * N_LABELS
    fl = np.empty(nr)
    fu = np.empty(nr)
    cl = np.empty(nr)
    cr = np.empty(nr)
    any_fired = False
    r = 0
    for i in range(N_LABELS):
        for j in range(N_LABELS):
            fl[r] = min(ge_lo[i], gd_lo[j])
            fu[r] = min(ge_up[i], gd_up[j])
            cl[r] = c_left[rules[i, j]]
            cr[r] = c_right[rules[i, j]]
            if fu[r] > 0.0:
                any_fired = True
            r += 1
    if not any_fired:
        return 0.0
    ol = np.argsort(cl, kind="mergesort")
    orr = np.argsort(cr, kind="mergesort")
    yl = _km_left(cl[ol], fl[ol], fu[ol])
    yr = _km_right(cr[orr], fl[orr], fu[orr])
    return 0.5 * (yl + yr)


# ---------------------------------------------------------------- public API


def mf_grade(partition: T1Partition, label, u: float) -> float:
    """Membership grade of ``u`` in ``label``; ``u`` is expected in [-1, 1]."""
    return float(_grade(float(u), label_index(label), partition.array()))


def t1_infer(rules: RuleBase, in_part: T1Partition, out_part: T1Partition, e: float, de: float,
             de_part: T1Partition | None = None) -> float:
    """Crisp output of the type-1 controller.

    Min conjunction, max aggregation and centroid defuzzification over a
    201-point grid. Inputs outside [-1, 1] are clipped.
    """
    de_part = in_part if de_part is None else de_part
    return float(_t1_core(rules.matrix, in_part.array(), de_part.array(),
                          out_part.on_grid(OUTPUT_GRID), OUTPUT_GRID, float(e), float(de)))


def it2_infer(rules: RuleBase, in_part: IT2Partition, out_part: IT2Partition, e: float, de: float,
              de_part: IT2Partition | None = None, type_reduction: str = "centroid") -> float:
    """Crisp output of the interval type-2 controller.

    ``type_reduction="centroid"`` (default) forms the lower and upper
    aggregated output sets on the 201-point grid and reduces them with
    Karnik-Mendel; with ``fou = 0`` it coincides with :func:`t1_infer`.
    ``"cos"`` uses center-of-sets reduction over the 25 rule firing
    intervals and the consequent centroid intervals. Either way the crisp
    value is the midpoint of ``[y_l, y_r]``.
    """
    de_part = in_part if de_part is None else de_part
    mode = TYPE_REDUCTIONS[type_reduction]
    tables = it2_output_tables(out_part)
    return float(_it2_core(rules.matrix, in_part.lower(), in_part.upper(), de_part.lower(), de_part.upper(),
                           *tables, mode, float(e), float(de)))


def it2_output_tables(out_part: IT2Partition):
    """Precomputed output tables consumed by the IT2 kernel."""
    out_lo = _on_grid(out_part.lower(), OUTPUT_GRID)
    out_up = _on_grid(out_part.upper(), OUTPUT_GRID)
    c_left = np.empty(N_LABELS)
    c_right = np.empty(N_LABELS)
    for lab in range(N_LABELS):
        c_left[lab], c_right[lab] = _centroid_interval(out_lo[lab], out_up[lab])
    return out_lo, out_up, OUTPUT_GRID, c_left, c_right


def _centroid_interval(mu_lo, mu_up):
    return _km_left(OUTPUT_GRID, mu_lo, mu_up), _km_right(OUTPUT_GRID, mu_lo, mu_up)


def km_type_reduce(firing_intervals, centroids) -> tuple[float, float]:
    """Karnik-Mendel reduction of firing intervals ``[(f_l, f_u), ...]``
    attached to point ``centroids``. Returns ``(y_l, y_r)``."""
    f = np.asarray(firing_intervals, dtype=float).reshape(-1, 2)
    c = np.asarray(centroids, dtype=float).ravel()
    if f.shape[0] != c.shape[0] or c.shape[0] == 0:
        raise ValueError("need one firing interval per centroid and at least one rule")
    fl, fu = f[:, 0], f[:, 1]
    if np.any(fl < 0) or np.any(fl > fu):
        raise ValueError("firing intervals must satisfy 0 <= f_l <= f_u")
    if not np.any(fu > 0):
        raise NoRuleFired("no rule fired")
    order = np.argsort(c, kind="mergesort")
    c, fl, fu = c[order], fl[order].copy(), fu[order].copy()
    return float(_km_left(c, fl, fu)), float(_km_right(c, fl, fu))
