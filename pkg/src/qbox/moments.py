"""Moment tables on [0,1] with 2x2 matrix values.

Integer moments ``M_i(n,s) = rho(t^(n-s) (1-t)^s sigma_i)`` and the
half-integer moments ``M'_x(n,s) = rho(t^(n-s+1/2) (1-t)^s sigma_x)``,
``M'_z(n,s) = rho(t^(n-s) (1-t)^(s+1/2) sigma_z)`` are converted into each
other with the binomial series of ``sqrt(1-x)``.  Every truncated series is
returned together with a rigorous bound on the discarded tail.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

HALF = Fraction(1, 2)


@lru_cache(maxsize=None)
def binom(alpha: Fraction, k: int) -> Fraction:
    """Generalised binomial ``C(alpha, k)``; zero for negative ``k``."""
    if k < 0:
        return Fraction(0)
    if k == 0:
        return Fraction(1)
    return binom(alpha, k - 1) * (alpha - k + 1) / k


def half_binom(k: int) -> float:
    return float(binom(HALF, k))


def neg_half_binom(k: int) -> float:
    return float(binom(-HALF, k))


@lru_cache(maxsize=None)
def _c_exact(n: int, k: int) -> Fraction:
    return (-1) ** k * binom(-HALF, k) - (-1) ** ((k - n) % 2) * binom(-HALF, k - n)


def c_coeff(n: int, k: int) -> float:
    """``c_{n,k} = (-1)^k C(-1/2,k) - (-1)^(k-n) C(-1/2,k-n)``."""
    return float(_c_exact(n, k))


@lru_cache(maxsize=None)
def sqrt_coeff(k: int) -> float:
    """``(-1)^k C(1/2, k)``: coefficient of ``x^k`` in ``sqrt(1-x)``."""
    return float((-1) ** k * binom(HALF, k))


@lru_cache(maxsize=None)
def _tail_exact(K: int) -> Fraction:
    return 1 - sum((abs(binom(HALF, k)) for k in range(1, K + 1)), Fraction(0))


def tail_bound(K: int) -> float:
    """``1 - sum_{k=1..K} |C(1/2,k)|``, which bounds ``sum_{k>K} |C(1/2,k)|``.

    The full sum over ``k >= 1`` equals 1 (``sqrt(1-x)`` at ``x = 1``), so
    this is exactly the remainder.
    """
    if K < 0:
        raise ValueError("K must be >= 0")
    return float(_tail_exact(K))


def c_tail(n: int, K: int) -> float:
    """Bound on ``sum_{k>K} |c_{n,k}|``.

    With ``a_k = |C(-1/2,k)|`` (decreasing to 0), ``c_{n,k} = a_k`` for
    ``k < n`` and ``c_{n,k} = a_k - a_{k-n} <= 0`` for ``k >= n``, so the tail
    telescopes to a finite sum of ``a_j``.
    """
    if n == 0:
        return 0.0
    a = lambda j: abs(binom(-HALF, j))
    if K + 1 >= n:
        total = sum((a(j) for j in range(K + 1 - n, K + 1)), Fraction(0))
    else:
        total = sum((a(k) for k in range(K + 1, n)), Fraction(0))
        total += sum((a(j) for j in range(0, n)), Fraction(0))
    return float(total)


# ---------------------------------------------------------------------------
# Tables


def _ragged(n_max: int):
    return [np.zeros(n + 1) for n in range(n_max + 1)]


def _as_ragged(rows, depth):
    out = [np.asarray(r, dtype=float) for r in rows]
    if len(out) != depth + 1 or any(len(r) != n + 1 for n, r in enumerate(out)):
        raise ValueError(f"moment array is not ragged [n][s] of depth {depth}")
    return out


@dataclass(frozen=True)
class IntMomentTable:
    depth: int
    M1: list
    Mx: list
    Mz: list
    err: list | None = None
    notices: tuple = ()

    def __post_init__(self):
        for name in ("M1", "Mx", "Mz"):
            object.__setattr__(self, name, _as_ragged(getattr(self, name), self.depth))
        if self.err is None:
            object.__setattr__(self, "err", _ragged(self.depth))
        else:
            object.__setattr__(self, "err", _as_ragged(self.err, self.depth))

    def component(self, i: str):
        return {"1": self.M1, "x": self.Mx, "z": self.Mz}[i]

    def to_json(self) -> dict:
        out = {"depth": self.depth}
        for name in ("M1", "Mx", "Mz", "err"):
            out[name] = [row.tolist() for row in getattr(self, name)]
        if self.notices:
            out["notices"] = list(self.notices)
        return out

    @classmethod
    def from_json(cls, data) -> "IntMomentTable":
        if isinstance(data, (str, bytes)):
            data = json.loads(data)
        return cls(int(data["depth"]), data["M1"], data["Mx"], data["Mz"], data.get("err"),
                   tuple(data.get("notices", ())))


@dataclass(frozen=True)
class HalfMomentTable:
    depth: int
    M1p: list
    Mxp: list
    Mzp: list
    err: list | None = None
    notices: tuple = ()

    def __post_init__(self):
        for name in ("M1p", "Mxp", "Mzp"):
            object.__setattr__(self, name, _as_ragged(getattr(self, name), self.depth))
        if self.err is None:
            object.__setattr__(self, "err", _ragged(self.depth))
        else:
            object.__setattr__(self, "err", _as_ragged(self.err, self.depth))

    def to_json(self) -> dict:
        out = {"depth": self.depth}
        for name in ("M1p", "Mxp", "Mzp", "err"):
            out[name] = [row.tolist() for row in getattr(self, name)]
        if self.notices:
            out["notices"] = list(self.notices)
        return out

    @classmethod
    def from_json(cls, data) -> "HalfMomentTable":
        if isinstance(data, (str, bytes)):
            data = json.loads(data)
        return cls(int(data["depth"]), data["M1p"], data["Mxp"], data["Mzp"], data.get("err"),
                   tuple(data.get("notices", ())))


def moments_from_F(f) -> HalfMomentTable:
    """Half-integer moment table ``(F_plus[a], C1, C2)`` of an FTable."""
    return HalfMomentTable(
        f.n_max,
        [np.array(row) for row in f.F_plus["a"]],
        [np.array(row) for row in f.C1],
        [np.array(row) for row in f.C2],
    )


def _frame_weights(state, n, s, extra_t=0.0, extra_1mt=0.0):
    t = state.ts
    return state.weights * t ** (n - s + extra_t) * (1 - t) ** (s + extra_1mt)


def int_moments_of(state, depth: int) -> IntMomentTable:
    """Integer moments of an atomic state read directly in the (x, z) frame."""
    b = state.blochs
    M1, Mx, Mz = _ragged(depth), _ragged(depth), _ragged(depth)
    for n in range(depth + 1):
        for s in range(n + 1):
            g = _frame_weights(state, n, s)
            M1[n][s], Mx[n][s], Mz[n][s] = g.sum(), (g * b[:, 0]).sum(), (g * b[:, 2]).sum()
    return IntMomentTable(depth, M1, Mx, Mz)


def half_moments_of(state, depth: int) -> HalfMomentTable:
    """Half-integer moments of an atomic state read directly in the (x, z) frame."""
    b = state.blochs
    M1, Mx, Mz = _ragged(depth), _ragged(depth), _ragged(depth)
    for n in range(depth + 1):
        for s in range(n + 1):
            M1[n][s] = _frame_weights(state, n, s).sum()
            Mx[n][s] = (_frame_weights(state, n, s, extra_t=0.5) * b[:, 0]).sum()
            Mz[n][s] = (_frame_weights(state, n, s, extra_1mt=0.5) * b[:, 2]).sum()
    return HalfMomentTable(depth, M1, Mx, Mz)


# ---------------------------------------------------------------------------
# Conversions


def _series(values, K):
    """``sum_{k<=K} (-1)^k C(1/2,k) values(k)`` and the sum of |coefficients|."""
    total = 0.0
    weight = 0.0
    for k in range(K + 1):
        q = sqrt_coeff(k)
        total += q * values(k)
        weight += abs(q)
    return total, weight


def int_from_half(h: HalfMomentTable, anchor, K: int) -> IntMomentTable:
    """Integer moments from half-integer ones.

    ``anchor = (Mx(0,0), Mz(0,0))`` fixes the moments the series cannot
    determine.  Entries for which fewer than ``K`` series terms are available
    are computed with what the table holds; they are listed in ``notices``
    and their error bound reflects the shorter truncation.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    D = h.depth
    M1 = [row.copy() for row in h.M1p]
    Mx, Mz, err = _ragged(D), _ragged(D), _ragged(D)
    notices = []
    Mx[0][0], Mz[0][0] = anchor
    for n in range(1, D + 1):
        k_used = min(K, D - n + 1)
        tail = tail_bound(k_used)
        for s in range(n):
            Mx[n][s], _ = _series(lambda k: h.Mxp[n + k - 1][s + k], k_used)
            prop = sum(abs(sqrt_coeff(k)) * h.err[n + k - 1][s + k] for k in range(k_used + 1))
            err[n][s] = max(err[n][s], tail + prop)
        for s in range(1, n + 1):
            Mz[n][s], _ = _series(lambda k: h.Mzp[n + k - 1][s - 1], k_used)
            prop = sum(abs(sqrt_coeff(k)) * h.err[n + k - 1][s - 1] for k in range(k_used + 1))
            err[n][s] = max(err[n][s], tail + prop)
        if k_used < K:
            notices.append(f"n={n}: series truncated at {k_used} < K={K} terms")
        kc = min(D, n + K)
        sx = sum(c_coeff(n, k) * h.Mxp[k][k] for k in range(kc + 1))
        sz = sum(c_coeff(n, k) * h.Mzp[k][0] for k in range(kc + 1))
        Mx[n][n] = anchor[0] - sx
        Mz[n][0] = anchor[1] - sz
        ct = c_tail(n, kc)
        err[n][n] = max(err[n][n], ct)
        err[n][0] = max(err[n][0], ct)
        if kc < n + K:
            notices.append(f"n={n}: anchored series truncated at k={kc} < {n + K}")
    return IntMomentTable(D, M1, Mx, Mz, err, tuple(notices))


def half_from_int(m: IntMomentTable, K: int) -> HalfMomentTable:
    """Half-integer moments ``M'_x(n,s) = sum_k (-1)^k C(1/2,k) M_x(n+k, s+k)`` etc."""
    if K < 1:
        raise ValueError("K must be >= 1")
    D = m.depth
    M1p = [row.copy() for row in m.M1]
    Mxp, Mzp, err = _ragged(D), _ragged(D), _ragged(D)
    notices = []
    for n in range(D + 1):
        k_used = min(K, D - n)
        tail = tail_bound(k_used)
        for s in range(n + 1):
            Mxp[n][s], _ = _series(lambda k: m.Mx[n + k][s + k], k_used)
            Mzp[n][s], _ = _series(lambda k: m.Mz[n + k][s], k_used)
            prop_x = sum(abs(sqrt_coeff(k)) * m.err[n + k][s + k] for k in range(k_used + 1))
            prop_z = sum(abs(sqrt_coeff(k)) * m.err[n + k][s] for k in range(k_used + 1))
            err[n][s] = tail + max(prop_x, prop_z)
        if k_used < K:
            notices.append(f"n={n}: series truncated at {k_used} < K={K} terms")
    return HalfMomentTable(D, M1p, Mxp, Mzp, err, tuple(notices))


# ---------------------------------------------------------------------------
# Moment problem conditions and Bernstein approximants


@dataclass(frozen=True)
class NCMP1Verdict:
    ok: bool
    check: str | None = None
    index: tuple | None = None
    residual: float = 0.0


def check_ncmp1(m: IntMomentTable, tol: float = 1e-9) -> NCMP1Verdict:
    """Normalisation, conservation and ``M1 >= |(Mx, Mz)|`` within ``tol``."""
    res = abs(m.M1[0][0] - 1.0)
    if res > tol:
        return NCMP1Verdict(False, "normalization", (0, 0), res)
    for n in range(m.depth + 1):
        for s in range(n + 1):
            res = math.hypot(m.Mx[n][s], m.Mz[n][s]) - m.M1[n][s]
            if res > tol:
                return NCMP1Verdict(False, "nonnegativity", (n, s), res)
    for n in range(m.depth):
        for s in range(n + 1):
            for i in "1xz":
                M = m.component(i)
                res = abs(M[n][s] - M[n + 1][s] - M[n + 1][s + 1])
                if res > tol:
                    return NCMP1Verdict(False, f"conservation_{i}", (n, s), res)
    return NCMP1Verdict(True)


def below1_expand(m: IntMomentTable, n: int, s: int, k: int, component: str = "1") -> float:
    """``sum_r C(k-n, r-s) M_i(k, r)``, which equals ``M_i(n,s)`` under conservation."""
    if not (0 <= s <= n <= k <= m.depth):
        raise IndexError(f"need 0 <= s <= n <= k <= depth, got s={s}, n={n}, k={k}, depth={m.depth}")
    M = m.component(component)
    return float(sum(math.comb(k - n, r - s) * M[k][r] for r in range(s, k - n + s + 1)))


@dataclass(frozen=True)
class MatrixPolynomial:
    """``P1(t) 1 + Px(t) sigma_x + Pz(t) sigma_z``; coefficients in increasing powers."""

    P1: tuple = (0.0,)
    Px: tuple = (0.0,)
    Pz: tuple = (0.0,)

    def __call__(self, t):
        ev = lambda c: np.polynomial.polynomial.polyval(t, np.asarray(c, dtype=float))
        return ev(self.P1), ev(self.Px), ev(self.Pz)

    def sup_norm(self, extra_points=()) -> float:
        """``max_t |P1| + sqrt(Px^2 + Pz^2)`` sampled on a grid plus ``extra_points``."""
        t = np.concatenate([np.linspace(0, 1, 2001), np.asarray(extra_points, dtype=float)])
        p1, px, pz = self(t)
        return float(np.max(np.abs(p1) + np.hypot(px, pz)))


def bernstein_nodes(n: int) -> np.ndarray:
    if n == 0:
        return np.zeros(1)
    return (n - np.arange(n + 1)) / n


def bernstein_rho_n(m: IntMomentTable, p: MatrixPolynomial, n: int) -> float:
    """Bernstein approximant ``rho_n(P)`` built from the moments at level ``n``.

    ``C(n,s) M(n,s) = rho(B_{n,n-s})`` with ``B_{n,j} = C(n,j) t^j (1-t)^(n-j)``,
    so the node paired with ``M(n,s)`` is ``(n-s)/n``; this makes ``rho_n``
    reproduce affine polynomials exactly.
    """
    if not 0 <= n <= m.depth:
        raise ValueError(f"n={n} outside table depth {m.depth}")
    nodes = bernstein_nodes(n)
    p1, px, pz = p(nodes)
    weights = np.array([math.comb(n, s) for s in range(n + 1)], dtype=float)
    return float(np.sum(weights * (p1 * m.M1[n] + px * m.Mx[n] + pz * m.Mz[n])))
