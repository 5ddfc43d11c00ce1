"""The universal general-probabilistic model of the two-measurement box.

The algebra is generated by four idempotents ``a1, a0, b1, b0`` (outcome 1
and 0 of each measurement) with ``a1 a0 = a0 a1 = b1 b0 = b0 b1 = 0``.  Its
reduced words alternate between the a- and b-family, so a state is fixed
by its values on such words, and those values are the outcome
probabilities themselves.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from .seqcore import DEFAULT_TOL, InadmissibleTableError, ProbabilityTable, validate_admissible

LETTERS = ("a1", "a0", "b1", "b0")
GENERATORS = LETTERS

ZERO = None  # the zero element; the unit is the empty tuple


def family(letter: str) -> str:
    return letter[0]


def _rewrite_once(word, i):
    """Apply the relation at positions ``i, i+1``; returns (word, changed)."""
    x, y = word[i], word[i + 1]
    if x == y:
        return word[:i + 1] + word[i + 2:], True
    if family(x) == family(y):
        return ZERO, True
    return word, False


def reduce_word(word) -> tuple | None:
    """Normal form of a product of generators; ``None`` is the zero element."""
    if word is ZERO:
        return ZERO
    out = []
    for letter in word:
        if letter not in LETTERS:
            raise ValueError(f"unknown generator {letter!r}")
        if out and out[-1] == letter:
            continue
        if out and family(out[-1]) == family(letter):
            return ZERO
        out.append(letter)
    return tuple(out)


def reduce_word_randomly(word, rng: random.Random):
    """Reduce by applying the relations at random positions (confluence oracle)."""
    word = tuple(word)
    while word is not ZERO:
        spots = [i for i in range(len(word) - 1) if family(word[i]) == family(word[i + 1])]
        if not spots:
            return word
        word, _ = _rewrite_once(word, rng.choice(spots))
    return ZERO


def word_for(process: str, r: str) -> tuple:
    """Reduced word for outcome string ``r`` of the alternating sequence starting with ``process``."""
    other = "b" if process == "a" else "a"
    return tuple((process if k % 2 == 0 else other) + x for k, x in enumerate(r))


def outcomes_of(word) -> tuple[str, str]:
    return family(word[0]), "".join(letter[1] for letter in word)


def reduced_words(max_len: int):
    """Every nonzero reduced word up to ``max_len`` letters, the unit first."""
    yield ()
    for length in range(1, max_len + 1):
        for process in ("a", "b"):
            for bits in itertools.product("01", repeat=length):
                yield word_for(process, "".join(bits))


@dataclass(frozen=True)
class GPFunctional:
    """``w -> rho(prefix . w)`` with ``rho`` read off a probability table.

    ``prefix`` is ``()`` for the state itself; applying operations extends
    it.  A prefix of ``None`` is the zero functional.
    """

    source: ProbabilityTable
    prefix: tuple | None = ()

    def in_domain(self, word) -> bool:
        if self.prefix is ZERO:
            return True
        w = reduce_word(self.prefix + tuple(word))
        return w is ZERO or len(w) <= self.source.depth

    def __call__(self, word) -> float:
        if self.prefix is ZERO:
            return 0.0
        w = reduce_word(self.prefix + tuple(word))
        if w is ZERO:
            return 0.0
        if not w:
            return 1.0
        if len(w) > self.source.depth:
            raise KeyError(f"word of length {len(w)} beyond table depth {self.source.depth}")
        process, r = outcomes_of(w)
        return self.source.process(process)[r]

    def trace(self) -> float:
        return self(())

    @property
    def domain_depth(self) -> int:
        """Longest word length ``w`` on which the functional is always defined."""
        if self.prefix is ZERO:
            return self.source.depth
        return self.source.depth - len(self.prefix)


def gp_from_table(t: ProbabilityTable, tol: float = DEFAULT_TOL) -> GPFunctional:
    report = validate_admissible(t, tol)
    if not report.ok:
        raise InadmissibleTableError(report)
    return GPFunctional(t)


def gp_apply(g: str, f: GPFunctional) -> GPFunctional:
    """Operation ``g``: ``g(f)(x) = f(v_g x)``."""
    if g not in GENERATORS:
        raise ValueError(f"unknown operation {g!r}")
    if f.prefix is ZERO:
        return f
    return GPFunctional(f.source, reduce_word(f.prefix + (g,)))


@dataclass
class GPReport:
    ok: bool
    checks: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)
    max_roundtrip_residual: float = 0.0

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "checks": self.checks,
            "failures": self.failures[:50],
            "n_failures": len(self.failures),
            "max_roundtrip_residual": self.max_roundtrip_residual,
        }


def gp_verify(f: GPFunctional, depth: int | None = None, tol: float = 1e-14) -> GPReport:
    """Check the model axioms on every reduced word up to ``depth``.

    Positivity, the two conservation identities, idempotence and mutual
    annihilation of each measurement's operations, trace preservation of
    ``a1 + a0`` and ``b1 + b0``, and reproduction of the source table.
    """
    depth = f.domain_depth if depth is None else min(depth, f.domain_depth)
    report = GPReport(True)

    def record(name, ok, detail):
        report.checks[name] = report.checks.get(name, True) and ok
        if not ok:
            report.failures.append({"check": name, **detail})

    words = list(reduced_words(depth))
    record("unit", abs(f(()) - f.trace()) == 0.0, {})
    for w in words:
        record("positivity", f(w) >= 0.0, {"word": list(w), "value": f(w)})
    for w in words:
        if len(w) >= depth:
            continue
        for fam in ("a", "b"):
            lhs = f(w + (fam + "1",)) + f(w + (fam + "0",))
            res = abs(lhs - f(w))
            record("conservation", res <= tol, {"word": list(w), "family": fam, "residual": res})
    for g in GENERATORS:
        gf = gp_apply(g, f)
        ggf = gp_apply(g, gf)
        opposite = g[0] + ("0" if g[1] == "1" else "1")
        killed = gp_apply(opposite, gf)
        for w in reduced_words(max(depth - 2, 0)):
            record("idempotence", ggf(w) == gf(w), {"op": g, "word": list(w)})
            record("annihilation", killed(w) == 0.0, {"op": g, "word": list(w)})
    for fam in ("a", "b"):
        if depth >= 1:
            res = abs(gp_apply(fam + "1", f).trace() + gp_apply(fam + "0", f).trace() - f.trace())
            record("trace_preservation", res <= tol, {"family": fam, "residual": res})
    if f.prefix == ():
        worst = 0.0
        for process in ("a", "b"):
            for r, p in f.source.process(process).items():
                if len(r) <= depth:
                    worst = max(worst, abs(f(word_for(process, r)) - p))
        report.max_roundtrip_residual = worst
        record("roundtrip", worst <= tol, {"residual": worst})
    report.ok = all(report.checks.values())
    return report
