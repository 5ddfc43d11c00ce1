"""Outcome strings, probability tables and admissibility.

Strings are text keys such as ``"0110"``; the first character is the first
outcome.  A table of depth ``L`` stores ``P_a`` and ``P_b`` for every string
of length ``1..L``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

PROCESSES = ("a", "b")
DEFAULT_TOL = 1e-9


class TableStructureError(ValueError):
    """Raised when a probability table is missing entries or has bad keys."""

    def __init__(self, message, missing=()):
        super().__init__(message)
        self.missing = list(missing)


class InadmissibleTableError(ValueError):
    def __init__(self, report):
        super().__init__(
            f"table is not admissible: residual {report.residual:.3g} "
            f"at {report.process}:{report.witness!r}"
        )
        self.report = report


def _check_string(r: str) -> str:
    if not r:
        raise ValueError("outcome string must be nonempty")
    if any(c not in "01" for c in r):
        raise ValueError(f"outcome string {r!r} contains characters other than 0/1")
    return r


def switch_count(r: str) -> int:
    """Number of adjacent unequal pairs in ``r``."""
    _check_string(r)
    return sum(1 for x, y in zip(r, r[1:]) if x != y)


def complement(r: str) -> str:
    return r.translate(str.maketrans("01", "10"))


def all_strings(length: int):
    for bits in itertools.product("01", repeat=length):
        yield "".join(bits)


@dataclass(frozen=True)
class ProbabilityTable:
    depth: int
    P_a: Mapping[str, float]
    P_b: Mapping[str, float]

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("table depth must be >= 1")
        object.__setattr__(self, "P_a", dict(self.P_a))
        object.__setattr__(self, "P_b", dict(self.P_b))

    def process(self, i: str) -> Mapping[str, float]:
        if i == "a":
            return self.P_a
        if i == "b":
            return self.P_b
        raise ValueError(f"unknown process {i!r}")

    def __getitem__(self, key):
        i, r = key
        return self.process(i)[r]

    def missing_keys(self) -> list[str]:
        missing = []
        for i in PROCESSES:
            probs = self.process(i)
            for length in range(1, self.depth + 1):
                for r in all_strings(length):
                    if r not in probs:
                        missing.append(f"{i}:{r}")
        return missing

    def check_structure(self):
        missing = self.missing_keys()
        if missing:
            shown = ", ".join(missing[:10])
            more = f" (+{len(missing) - 10} more)" if len(missing) > 10 else ""
            raise TableStructureError(f"table is missing entries: {shown}{more}", missing)
        for i in PROCESSES:
            for r, v in self.process(i).items():
                _check_string(r)
                if len(r) > self.depth:
                    raise TableStructureError(f"key {i}:{r} is deeper than depth {self.depth}")
                if not np.isfinite(v):
                    raise TableStructureError(f"entry {i}:{r} is not finite")

    def truncate(self, depth: int) -> "ProbabilityTable":
        if not 1 <= depth <= self.depth:
            raise ValueError(f"cannot truncate depth {self.depth} table to {depth}")
        keep = lambda d: {r: v for r, v in d.items() if len(r) <= depth}
        return ProbabilityTable(depth, keep(self.P_a), keep(self.P_b))

    def to_json(self) -> dict:
        order = lambda d: {r: float(d[r]) for r in sorted(d, key=lambda r: (len(r), r))}
        return {"depth": self.depth, "P_a": order(self.P_a), "P_b": order(self.P_b)}

    @classmethod
    def from_json(cls, data) -> "ProbabilityTable":
        if isinstance(data, (str, bytes)):
            data = json.loads(data)
        try:
            depth = int(data["depth"])
            P_a = {str(k): float(v) for k, v in data["P_a"].items()}
            P_b = {str(k): float(v) for k, v in data["P_b"].items()}
        except (KeyError, TypeError, AttributeError, ValueError) as exc:
            raise TableStructureError(f"malformed probability table JSON: {exc}") from exc
        table = cls(depth, P_a, P_b)
        table.check_structure()
        return table


@dataclass(frozen=True)
class AdmissibilityReport:
    ok: bool
    residual: float
    process: str | None = None
    witness: str | None = None  # parent string; "" stands for normalisation


def validate_admissible(t: ProbabilityTable, tol: float = DEFAULT_TOL) -> AdmissibilityReport:
    """Check probability conservation ``P(r) = P(r0) + P(r1)`` and normalisation.

    Entries outside [0, 1] count as residuals too.  Raises
    :class:`TableStructureError` if entries are missing.
    """
    t.check_structure()
    worst = (0.0, None, None)
    for i in PROCESSES:
        probs = t.process(i)
        for r, v in probs.items():
            out = max(-v, v - 1.0, 0.0)
            if out > worst[0]:
                worst = (out, i, r)
        res = abs(probs["0"] + probs["1"] - 1.0)
        if res > worst[0]:
            worst = (res, i, "")
        for length in range(1, t.depth):
            for r in all_strings(length):
                res = abs(probs[r] - probs[r + "0"] - probs[r + "1"])
                if res > worst[0]:
                    worst = (res, i, r)
    residual, i, r = worst
    return AdmissibilityReport(residual <= tol, residual, i, r)


def random_admissible(depth: int, seed: int) -> ProbabilityTable:
    """Random admissible table: each entry splits as ``u*P, (1-u)*P``, ``u ~ U[0,1]``."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    rng = np.random.default_rng(seed)
    tables = {}
    for i in PROCESSES:
        probs = {}
        u = rng.uniform()
        probs["0"], probs["1"] = u, 1.0 - u
        for length in range(1, depth):
            for r in all_strings(length):
                u = rng.uniform()
                probs[r + "0"] = u * probs[r]
                probs[r + "1"] = (1.0 - u) * probs[r]
        tables[i] = probs
    return ProbabilityTable(depth, tables["a"], tables["b"])


def uniform_table(depth: int) -> ProbabilityTable:
    """Fair-coin table ``P_i(r) = 2**-len(r)``."""
    probs = {r: 2.0 ** -length for length in range(1, depth + 1) for r in all_strings(length)}
    return ProbabilityTable(depth, probs, dict(probs))


# ---------------------------------------------------------------------------
# Switch-grouped representation


@dataclass(frozen=True)
class SwitchIndex:
    process: str
    n: int
    s: int
    r1: int

    def __post_init__(self):
        if not 0 <= self.s <= self.n:
            raise ValueError(f"switch count {self.s} outside [0, {self.n}]")


def ragged(n_max: int) -> list[np.ndarray]:
    return [np.zeros(n + 1) for n in range(n_max + 1)]


@dataclass(frozen=True)
class FTable:
    """Probabilities grouped by (process, first outcome, n, switch count).

    ``F[i][r1][n][s]`` with ``n = len(r) - 1``.  The derived arrays are
    indexed ``[n][s]`` (``F_plus``/``F_minus`` additionally by process).
    """

    n_max: int
    F: dict
    F_plus: dict = field(init=False)
    F_minus: dict = field(init=False)
    C1: list = field(init=False)
    C2: list = field(init=False)

    def __post_init__(self):
        F_plus = {i: [self.F[i][1][n] + self.F[i][0][n] for n in range(self.n_max + 1)] for i in PROCESSES}
        F_minus = {i: [self.F[i][1][n] - self.F[i][0][n] for n in range(self.n_max + 1)] for i in PROCESSES}
        C1 = [(F_minus["a"][n] + F_minus["b"][n]) / 2 for n in range(self.n_max + 1)]
        C2 = [(F_minus["a"][n] - F_minus["b"][n]) / 2 for n in range(self.n_max + 1)]
        object.__setattr__(self, "F_plus", F_plus)
        object.__setattr__(self, "F_minus", F_minus)
        object.__setattr__(self, "C1", C1)
        object.__setattr__(self, "C2", C2)

    @classmethod
    def from_arrays(cls, F) -> "FTable":
        n_max = len(F["a"][0]) - 1
        F = {i: {r1: [np.asarray(row, dtype=float) for row in F[i][r1]] for r1 in (0, 1)} for i in PROCESSES}
        return cls(n_max, F)

    def value(self, idx: SwitchIndex) -> float:
        return float(self.F[idx.process][idx.r1][idx.n][idx.s])


@dataclass(frozen=True)
class SwitchMismatch:
    """Strings in one switch group whose probabilities disagree."""

    index: SwitchIndex
    spread: float
    low: tuple[str, float]
    high: tuple[str, float]


def switch_groups(t: ProbabilityTable, with_first: bool = True) -> dict:
    """Group the table's strings by ``(i, n, s[, r1])`` -> list of (string, value)."""
    groups: dict = {}
    for i in PROCESSES:
        for r, v in t.process(i).items():
            key = (i, len(r) - 1, switch_count(r), int(r[0])) if with_first else (i, len(r) - 1, switch_count(r))
            groups.setdefault(key, []).append((r, v))
    return groups


def table_to_F(t: ProbabilityTable, tol: float = DEFAULT_TOL) -> FTable | SwitchMismatch:
    """Compress an admissible table into an :class:`FTable`.

    Returns a :class:`SwitchMismatch` for the group with the largest spread if
    that spread exceeds ``tol``.  Raises :class:`InadmissibleTableError` if
    conservation fails.
    """
    report = validate_admissible(t, tol)
    if not report.ok:
        raise InadmissibleTableError(report)
    n_max = t.depth - 1
    F = {i: {0: ragged(n_max), 1: ragged(n_max)} for i in PROCESSES}
    worst = None
    for (i, n, s, r1), members in switch_groups(t).items():
        values = [v for _, v in members]
        F[i][r1][n][s] = float(np.mean(values))
        lo = min(members, key=lambda m: m[1])
        hi = max(members, key=lambda m: m[1])
        spread = hi[1] - lo[1]
        if worst is None or spread > worst.spread:
            worst = SwitchMismatch(SwitchIndex(i, n, s, r1), spread, lo, hi)
    if worst is not None and worst.spread > tol:
        return worst
    return FTable(n_max, F)


def max_switch_spread(t: ProbabilityTable) -> float:
    return max(
        max(v for _, v in members) - min(v for _, v in members)
        for members in switch_groups(t).values()
    )


def table_from_F(f: FTable, depth: int | None = None) -> ProbabilityTable:
    """Expand an FTable back to a full probability table."""
    depth = f.n_max + 1 if depth is None else depth
    tables = {}
    for i in PROCESSES:
        tables[i] = {
            r: float(f.F[i][int(r[0])][length - 1][switch_count(r)])
            for length in range(1, depth + 1)
            for r in all_strings(length)
        }
    return ProbabilityTable(depth, tables["a"], tables["b"])
