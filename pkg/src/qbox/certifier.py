"""Finite-depth certification of quantum realisability.

A table of depth ``L`` only fixes the grouped values ``F(n, s)`` for
``n < L``, while the realisability conditions involve infinite series.
Every series is therefore evaluated to the available depth and carried as
an interval whose radius bounds the unseen tail.  The tail entries are
bounded by values already in the table, using two facts that hold for any
quantum table: ``F_plus`` is non-increasing along ``(m, r) -> (m+1, r)`` and
``(m, r) -> (m+1, r+1)``, and ``|C1(m, r)| <= sqrt(F_plus(m, r) F_plus(m+1, r))``,
``|C2(m, r)| <= sqrt(F_plus(m, r) F_plus(m+1, r+1))`` (Cauchy-Schwarz).

``tol`` is the slack granted to a check before it counts as failed.  A check
is VIOLATED when it fails by more than ``tol`` for every admissible value
of the truncated tails, SATISFIED when it holds within ``tol`` for all of
them, and UNDECIDED otherwise.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

from . import seqcore
from .moments import c_coeff, c_tail, sqrt_coeff, tail_bound
from .region import nearest_to_origin
from .seqcore import DEFAULT_TOL, FTable, ProbabilityTable, SwitchMismatch

CONSISTENT = "CONSISTENT"
VIOLATION = "VIOLATION"
INCONCLUSIVE = "INCONCLUSIVE"

SATISFIED = "SATISFIED"
VIOLATED = "VIOLATED"
UNDECIDED = "UNDECIDED"

CHECK_ADMISSIBILITY = "admissibility"
CHECK_SWITCH = "switch_dependence"
CHECK_SUM_RULE = "sum_rule"
CHECK_SERIES = "series_inequality"
CHECK_SQRT = "sqrt_argument"
CHECK_REGION = "region"


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __contains__(self, x):
        return self.lo <= x <= self.hi


@dataclass
class Witness:
    check: str
    indices: dict
    value: float
    bound: float
    margin: float

    def __post_init__(self):
        self.value, self.bound, self.margin = float(self.value), float(self.bound), float(self.margin)


@dataclass
class Verdict:
    status: str
    witnesses: list = field(default_factory=list)
    undecided: list = field(default_factory=list)
    depth_used: int = 0
    K_used: int = 0
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------------------
# Truncated series with table-derived tail bounds


def _fp(f: FTable, m: int, r: int) -> float:
    """``F_plus`` usable as a bound on ``|C|``: the larger of the two processes."""
    return max(f.F_plus["a"][m][r], f.F_plus["b"][m][r], 0.0)


def _entry_bound(f: FTable, m: int, r: int, kind: str) -> float:
    plain = _fp(f, m, r)
    if m + 1 > f.n_max:
        return plain
    other = _fp(f, m + 1, r) if kind == "x" else _fp(f, m + 1, r + 1)
    return min(plain, math.sqrt(plain * other))


@dataclass(frozen=True)
class SeriesValue:
    value: float
    error: float
    terms: int  # highest k included


def _sqrt_series(f: FTable, C, start: tuple, step_r: int, kind: str, K: int) -> SeriesValue:
    """``sum_k (-1)^k C(1/2,k) C(m0 + k, r0 + step_r*k)`` using at most ``K`` terms."""
    m0, r0 = start
    k_last = min(K - 1, f.n_max - m0)
    total = 0.0
    bound = math.inf
    for k in range(k_last + 1):
        m, r = m0 + k, r0 + step_r * k
        total += sqrt_coeff(k) * C[m][r]
        bound = min(bound, _entry_bound(f, m, r, kind))
    return SeriesValue(total, tail_bound(k_last) * bound, k_last)


def mx_series(f: FTable, n: int, s: int, K: int) -> SeriesValue:
    """Integer x-moment ``M_x(n, s)`` (``s <= n-1``) from the ``C1`` table."""
    return _sqrt_series(f, f.C1, (n - 1, s), 1, "x", K)


def mz_series(f: FTable, n: int, s: int, K: int) -> SeriesValue:
    """Integer z-moment ``M_z(n, s)`` (``s >= 1``) from the ``C2`` table."""
    return _sqrt_series(f, f.C2, (n - 1, s - 1), 0, "z", K)


def _c_series(f: FTable, C, n: int, K: int, diagonal: bool) -> SeriesValue:
    kc = min(f.n_max, n + K - 1)
    total = 0.0
    bound = math.inf
    for k in range(kc + 1):
        r = k if diagonal else 0
        total += c_coeff(n, k) * C[k][r]
        bound = min(bound, _entry_bound(f, k, r, "x" if diagonal else "z"))
    return SeriesValue(total, c_tail(n, kc) * bound, kc)


def _abs_range(sv: SeriesValue) -> tuple[float, float]:
    return max(abs(sv.value) - sv.error, 0.0), abs(sv.value) + sv.error


# ---------------------------------------------------------------------------
# Individual checks


@dataclass(frozen=True)
class SeriesCheck:
    n: int
    s: int
    lhs: Interval
    rhs: float
    decision: str
    margin: float
    terms: int
    required_depth: int


def series_inequality(f: FTable, n: int, s: int, K: int, tol: float = DEFAULT_TOL) -> SeriesCheck:
    """``M_x(n,s)^2 + M_z(n,s)^2 <= F_plus(n,s)^2`` with both moments as series.

    ``margin`` is ``lhs.lo - (F_plus + tol)^2``; positive means violated.
    """
    if not 1 <= s <= n - 1:
        raise ValueError(f"series inequality needs 1 <= s <= n-1, got n={n}, s={s}")
    if n > f.n_max:
        raise ValueError(f"n={n} beyond table depth (n_max={f.n_max})")
    sx = mx_series(f, n, s, K)
    sz = mz_series(f, n, s, K)
    x_lo, x_hi = _abs_range(sx)
    z_lo, z_hi = _abs_range(sz)
    lhs = Interval(x_lo**2 + z_lo**2, x_hi**2 + z_hi**2)
    rhs = f.F_plus["a"][n][s]
    limit = (rhs + tol) ** 2
    if lhs.lo > limit:
        decision = VIOLATED
    elif lhs.hi <= limit:
        decision = SATISFIED
    else:
        decision = UNDECIDED
    terms = min(sx.terms, sz.terms) + 1
    return SeriesCheck(n, s, lhs, rhs, decision, lhs.lo - limit, terms, n + K)


@dataclass(frozen=True)
class VBounds:
    """Interval enclosures of ``V_{x,-}, V_{x,+}, V_{z,-}, V_{z,+}`` at one ``n``."""

    n: int
    Vx_minus: Interval
    Vx_plus: Interval
    Vz_minus: Interval
    Vz_plus: Interval
    sqrt_x: str
    sqrt_z: str
    sqrt_x_margin: float
    sqrt_z_margin: float


def _radius(F: float, sv: SeriesValue, tol: float):
    """Range of ``sqrt(F^2 - M^2)`` plus the status of its argument."""
    m_lo, m_hi = _abs_range(sv)
    r_lo = math.sqrt(max(F * F - m_hi * m_hi, 0.0))
    r_hi = math.sqrt(max((F + tol) ** 2 - m_lo * m_lo, 0.0))
    margin = m_lo - (F + tol)
    if margin > 0:
        status = VIOLATED
    elif m_hi <= F + tol:
        status = SATISFIED
    else:
        status = UNDECIDED
    return r_lo, r_hi, status, margin


def v_intervals(f: FTable, n: int, K: int, tol: float = DEFAULT_TOL) -> VBounds:
    if not 1 <= n <= f.n_max:
        raise ValueError(f"n={n} outside 1..{f.n_max}")
    cx = _c_series(f, f.C1, n, K, diagonal=True)
    cz = _c_series(f, f.C2, n, K, diagonal=False)
    rx_lo, rx_hi, sqrt_x, mx = _radius(f.F_plus["a"][n][n], mz_series(f, n, n, K), tol)
    rz_lo, rz_hi, sqrt_z, mz = _radius(f.F_plus["a"][n][0], mx_series(f, n, 0, K), tol)
    return VBounds(
        n,
        Interval(cx.value - cx.error - rx_hi, cx.value + cx.error - rx_lo),
        Interval(cx.value - cx.error + rx_lo, cx.value + cx.error + rx_hi),
        Interval(cz.value - cz.error - rz_hi, cz.value + cz.error - rz_lo),
        Interval(cz.value - cz.error + rz_lo, cz.value + cz.error + rz_hi),
        sqrt_x, sqrt_z, mx, mz,
    )


@dataclass(frozen=True)
class RegionCheck:
    outer: tuple  # most permissive (x0, z0, x1, z1) compatible with the data
    inner: tuple  # least permissive
    member: bool
    nearest: tuple | None
    distance: float  # distance of the outer rectangle from the unit disc (0 if it meets it)


def _rect_gap(p) -> float:
    x0, y0, x1, y1 = p
    gap = max(x0 - x1, y0 - y1, 0.0)
    x, y = nearest_to_origin((x0, y0, max(x0, x1), max(y0, y1)))
    return max(gap, math.hypot(x, y) - 1.0)


def region_box(f: FTable, K: int, tol: float = DEFAULT_TOL, bounds=None) -> RegionCheck:
    """Aggregate the V intervals over ``n = 1..n_max`` and test the rectangle.

    The outer rectangle takes the weakest value each sup/inf can have, so it
    contains the rectangle of the infinite table; if even it misses the
    disc the table is not quantum.
    """
    if bounds is None:
        bounds = [v_intervals(f, n, K, tol) for n in range(1, f.n_max + 1)]
    if not bounds:
        return RegionCheck((-math.inf, -math.inf, math.inf, math.inf), (-math.inf, -math.inf, math.inf, math.inf),
                           True, (0.0, 0.0), 0.0)
    outer = (
        max(b.Vx_minus.lo for b in bounds),
        max(b.Vz_minus.lo for b in bounds),
        min(b.Vx_plus.hi for b in bounds),
        min(b.Vz_plus.hi for b in bounds),
    )
    inner = (
        max(b.Vx_minus.hi for b in bounds),
        max(b.Vz_minus.hi for b in bounds),
        min(b.Vx_plus.lo for b in bounds),
        min(b.Vz_plus.lo for b in bounds),
    )
    gap = _rect_gap(outer)
    nearest = nearest_to_origin(outer) if outer[0] <= outer[2] and outer[1] <= outer[3] else None
    return RegionCheck(outer, inner, gap <= tol, nearest, gap)


# ---------------------------------------------------------------------------
# Full pipeline


def _resolve_K(K, depth: int) -> int:
    if K is None or K == "auto":
        return max(depth - 1, 1)
    K = int(K)
    if K < 1:
        raise ValueError("K must be >= 1")
    return K


def certify_F(f: FTable, tol: float = DEFAULT_TOL, K=None) -> Verdict:
    """Sum rule, series inequalities and region test on an already grouped table."""
    depth = f.n_max + 1
    K = _resolve_K(K, depth)
    verdict = Verdict(CONSISTENT, depth_used=depth, K_used=K)
    witnesses, undecided = verdict.witnesses, verdict.undecided

    worst_sum = 0.0
    for n in range(f.n_max + 1):
        for s in range(n + 1):
            res = abs(f.F_plus["a"][n][s] - f.F_plus["b"][n][s])
            worst_sum = max(worst_sum, res)
            if res > tol:
                witnesses.append(Witness(CHECK_SUM_RULE, {"n": n, "s": s},
                                         float(res), tol, float(res - tol)))
    verdict.details["sum_rule_residual"] = float(worst_sum)

    series_checked = 0
    for n in range(2, f.n_max + 1):
        for s in range(1, n):
            chk = series_inequality(f, n, s, K, tol)
            series_checked += 1
            w = Witness(CHECK_SERIES, {"n": n, "s": s}, chk.lhs.lo if chk.decision == VIOLATED else chk.lhs.hi,
                        (chk.rhs + tol) ** 2, chk.margin)
            if chk.decision == VIOLATED:
                witnesses.append(w)
            elif chk.decision == UNDECIDED:
                undecided.append(w)
    verdict.details["series_checked"] = series_checked

    bounds = [v_intervals(f, n, K, tol) for n in range(1, f.n_max + 1)]
    for b in bounds:
        for axis, status, margin in (("x", b.sqrt_x, b.sqrt_x_margin), ("z", b.sqrt_z, b.sqrt_z_margin)):
            w = Witness(CHECK_SQRT, {"n": b.n, "axis": axis}, margin, 0.0, margin)
            if status == VIOLATED:
                witnesses.append(w)
            elif status == UNDECIDED:
                undecided.append(w)
    reg = region_box(f, K, tol, bounds)
    verdict.details["region_outer"] = [float(x) for x in reg.outer]
    verdict.details["region_inner"] = [float(x) for x in reg.inner]
    if reg.nearest is not None:
        verdict.details["anchor"] = [float(x) for x in reg.nearest]
    if not reg.member:
        witnesses.append(Witness(CHECK_REGION, {"point": list(reg.outer)}, reg.distance, tol, reg.distance - tol))

    if witnesses:
        verdict.status = VIOLATION
    elif undecided:
        verdict.status = INCONCLUSIVE
    return verdict


def certify(t: ProbabilityTable, tol: float = DEFAULT_TOL, K=None) -> Verdict:
    """Decide whether a finite table is compatible with a quantum model.

    Runs admissibility, switch-dependence, sum rule, the series
    inequalities and the region test.  Structural errors propagate.
    """
    K = _resolve_K(K, t.depth)
    report = seqcore.validate_admissible(t, tol)
    if not report.ok:
        w = Witness(CHECK_ADMISSIBILITY, {"process": report.process, "string": report.witness},
                    report.residual, tol, report.residual - tol)
        return Verdict(VIOLATION, [w], depth_used=t.depth, K_used=K)
    f = seqcore.table_to_F(t, tol)
    if isinstance(f, SwitchMismatch):
        idx = f.index
        w = Witness(CHECK_SWITCH,
                    {"process": idx.process, "n": idx.n, "s": idx.s, "r1": idx.r1,
                     "strings": [f.low[0], f.high[0]]},
                    f.spread, tol, f.spread - tol)
        return Verdict(VIOLATION, [w], depth_used=t.depth, K_used=K)
    verdict = certify_F(f, tol, K)
    verdict.details["switch_spread"] = float(seqcore.max_switch_spread(t))
    return verdict


# ---------------------------------------------------------------------------
# P_a truncation

GROUP_S = "s"
GROUP_S_R1 = "s_r1"


def _a_probs(table) -> tuple[dict, int]:
    if isinstance(table, ProbabilityTable):
        return dict(table.P_a), table.depth
    probs = dict(table)
    return probs, max(len(r) for r in probs)


def a_truncation_groups(table, tol: float = DEFAULT_TOL, grouping: str = GROUP_S_R1):
    """Largest spread within switch groups of ``P_a`` under the given grouping."""
    probs, _ = _a_probs(table)
    groups: dict = {}
    for r, v in probs.items():
        key = (len(r) - 1, seqcore.switch_count(r))
        if grouping == GROUP_S_R1:
            key += (int(r[0]),)
        elif grouping != GROUP_S:
            raise ValueError(f"unknown grouping {grouping!r}")
        groups.setdefault(key, []).append((r, v))
    worst = (0.0, None, None, None)
    for key, members in groups.items():
        lo = min(members, key=lambda m: m[1])
        hi = max(members, key=lambda m: m[1])
        if hi[1] - lo[1] > worst[0]:
            worst = (hi[1] - lo[1], key, lo[0], hi[0])
    return worst


def certify_a_truncation(table, tol: float = DEFAULT_TOL, grouping: str = GROUP_S_R1) -> Verdict:
    """Quantum realisability of the ``P_a`` probabilities alone.

    With ``grouping="s_r1"`` strings are compared within groups of equal
    length, switch count and first outcome; with ``grouping="s"`` the first
    outcome is ignored.  ``details`` reports the outcome under both.
    """
    probs, depth = _a_probs(table)
    for length in range(1, depth + 1):
        for r in seqcore.all_strings(length):
            if r not in probs:
                raise seqcore.TableStructureError(f"P_a is missing {r!r}", [f"a:{r}"])
    witnesses = []
    residual, where = abs(probs["0"] + probs["1"] - 1.0), ""
    for length in range(1, depth):
        for r in seqcore.all_strings(length):
            res = abs(probs[r] - probs[r + "0"] - probs[r + "1"])
            if res > residual:
                residual, where = res, r
    if residual > tol:
        witnesses.append(Witness(CHECK_ADMISSIBILITY, {"process": "a", "string": where},
                                 residual, tol, residual - tol))
    details = {"grouping": grouping}
    for g in (GROUP_S, GROUP_S_R1):
        spread, key, lo, hi = a_truncation_groups(probs, tol, g)
        details[f"spread_{g}"] = spread
        details[f"status_{g}"] = VIOLATION if (spread > tol or witnesses) else CONSISTENT
        if g == grouping and spread > tol:
            idx = {"n": key[0], "s": key[1], "strings": [lo, hi]}
            if g == GROUP_S_R1:
                idx["r1"] = key[2]
            witnesses.append(Witness(CHECK_SWITCH, idx, spread, tol, spread - tol))
    status = VIOLATION if witnesses else CONSISTENT
    return Verdict(status, witnesses, depth_used=depth, K_used=0, details=details)
