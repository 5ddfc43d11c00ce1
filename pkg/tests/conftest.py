import numpy as np
import pytest

from qbox.qmodel import Atom, AtomicState, atomic_to_table
from qbox.seqcore import ProbabilityTable, switch_count, uniform_table


def switch_break_table():
    """Uniform depth-3 table with P_a(001) != P_a(011) (same n=2, s=1, r1=0)."""
    t = uniform_table(3)
    P_a = dict(t.P_a)
    P_a.update({"001": 0.2, "000": 0.05, "011": 0.1, "010": 0.15})
    return ProbabilityTable(3, P_a, t.P_b)


def sum_rule_break_table(depth=4):
    """P_a from one atom, P_b from another: each half is fine, the sum rule is not."""
    ta = atomic_to_table(AtomicState((Atom(1.0, 0.2, (0.0, 0.0, 0.0)),)), depth)
    tb = atomic_to_table(AtomicState((Atom(1.0, 0.8, (0.0, 0.0, 0.0)),)), depth)
    return ProbabilityTable(depth, ta.P_a, tb.P_b)


PERTURB_BASE = AtomicState((Atom(0.5, 0.5, (0.0, 0.0, 0.0)), Atom(0.5, 0.0, (0.0, 0.0, -1.0))))


def c1_perturbed_table(depth=6, eps=0.2, base=PERTURB_BASE):
    """Move ``eps`` from F_{a,0}(n,n) to F_{a,1}(n,n) for every n.

    Doing it on the whole diagonal keeps conservation, the sum rule and
    switch-dependence intact while shifting C1 on its diagonal.
    """
    t = atomic_to_table(base, depth)
    P_a = dict(t.P_a)
    for r in P_a:
        if switch_count(r) == len(r) - 1:
            P_a[r] += eps if r[0] == "1" else -eps
    return ProbabilityTable(depth, P_a, t.P_b)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def uniform8():
    return uniform_table(8)


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
