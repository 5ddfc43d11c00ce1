import json
from functools import reduce

import numpy as np
import pytest

from qbox.qmodel import (
    Atom,
    AtomicState,
    FiniteDimModel,
    ModelError,
    atomic_f,
    atomic_to_finite_model,
    atomic_to_table,
    conditional_prepost,
    random_atomic,
    random_model,
    simulate_sequence,
    simulate_table,
    three_box_demo,
)
from qbox.seqcore import FTable, all_strings, max_switch_spread, table_to_F

PLUS = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)
A0 = np.diag([1.0, 0.0]).astype(complex)


def kraus_prob(A, B, rho, first, r):
    """tr(K rho K^dagger) with K the product of eigenprojections, latest measurement leftmost."""
    I = np.eye(len(A))
    ops = []
    for k, x in enumerate(r):
        P = A if (k % 2 == 0) == (first == "a") else B
        ops.append(P if x == "1" else I - P)
    K = reduce(lambda acc, P: P @ acc, ops, I)
    return float(np.real(np.trace(K @ rho @ K.conj().T)))


def test_qubit_example():
    m = FiniteDimModel(A0, PLUS, A0.copy())
    assert simulate_sequence(m, "a", 3)["111"] == pytest.approx(0.25, abs=1e-14)


def test_commuting_case_vanishes(rng):
    for _ in range(5):
        m = random_model(rng, dim=4)
        same = FiniteDimModel(m.A, m.A, m.rho0)
        assert simulate_sequence(same, "a", 3)["001"] == pytest.approx(0.0, abs=1e-14)


def test_switch_symmetry_d6(rng):
    m = random_model(rng, dim=6)
    p = simulate_sequence(m, "a", 3)
    assert p["001"] == pytest.approx(p["011"], abs=1e-10)


def test_against_kraus_oracle(rng):
    for _ in range(20):
        m = random_model(rng, max_dim=5)
        for first in "ab":
            p = simulate_sequence(m, first, 4)
            for r in all_strings(4):
                assert p[r] == pytest.approx(kraus_prob(m.A, m.B, m.rho0, first, r), abs=1e-12)


def test_length_normalisation(rng):
    m = random_model(rng, dim=8)
    for L in range(1, 7):
        assert sum(simulate_sequence(m, "b", L).values()) == pytest.approx(1.0, abs=1e-10)


def test_model_validation_reports_norm():
    with pytest.raises(ModelError, match="idempot"):
        FiniteDimModel(2 * A0, PLUS, A0)
    with pytest.raises(ModelError):
        FiniteDimModel(A0, PLUS, np.diag([0.7, 0.7]))
    with pytest.raises(ModelError):
        FiniteDimModel(A0, PLUS, np.diag([1.2, -0.2]))
    with pytest.raises(ModelError):
        FiniteDimModel(A0, np.array([[0, 1], [0, 0]], dtype=complex), A0)


def test_model_json_roundtrip(rng):
    m = random_model(rng, dim=3)
    back = FiniteDimModel.from_json(json.dumps(m.to_json()))
    np.testing.assert_allclose(back.A, m.A)
    np.testing.assert_allclose(back.rho0, m.rho0)


def test_conditional_prepost_half(rng):
    hits = 0
    for _ in range(50):
        m = random_model(rng, max_dim=6)
        for pre, post in ((0, 1), (1, 0)):
            res = conditional_prepost(m, pre, post)
            if res is not None:
                hits += 1
                assert res[0] == pytest.approx(0.5, abs=1e-10)
                assert res[1] == pytest.approx(0.5, abs=1e-10)
    assert hits > 20


def test_conditional_prepost_impossible_event():
    m = FiniteDimModel(A0, A0, np.eye(2) / 2)
    assert conditional_prepost(m, 0, 1) is None


def test_three_box():
    report = three_box_demo()
    assert report["overlap"] == pytest.approx(0.0, abs=1e-15)
    probs = [b["probability"] for b in report["boxes"]]
    assert len(probs) == 3
    for p in probs:
        assert p == pytest.approx(0.5, abs=1e-12)


def test_atomic_f_examples():
    s = AtomicState((Atom(1.0, 0.5, (0.0, 0.0, 0.0)),))
    for n in range(5):
        for k in range(n + 1):
            fp, fa, fb, c1, c2 = atomic_f(s, n, k)
            assert fp == 2.0 ** -n and fa == fb == c1 == c2 == 0.0
    s = AtomicState((Atom(1.0, 0.0, (0.0, 0.0, 1.0)),))
    for n in range(1, 5):
        assert atomic_f(s, n, n)[0] == 1.0 and atomic_f(s, n, 0)[0] == 0.0
        assert atomic_f(s, n, n)[4] == 1.0
    assert atomic_f(random_atomic(np.random.default_rng(0)), 0, 0)[0] == pytest.approx(1.0)


def test_atomic_to_table_uniform():
    t = atomic_to_table(AtomicState((Atom(1.0, 0.5, (0.0, 0.0, 0.0)),)), 3)
    for i in "ab":
        for r, v in t.process(i).items():
            assert v == 2.0 ** -len(r)


def test_pure_atom_matches_vector_state():
    # <psi| f(t0) |psi> for a pure qubit state with angles (theta, lam)
    t0, theta, lam = 0.3, 0.4, 1.1
    psi = np.array([np.cos(theta), np.exp(1j * lam) * np.sin(theta)])
    bloch = (np.sin(2 * theta) * np.cos(lam), np.sin(2 * theta) * np.sin(lam), np.cos(2 * theta))
    table = atomic_to_table(AtomicState((Atom(1.0, t0, bloch),)), 4)
    c = np.sqrt(t0 * (1 - t0))
    B = np.array([[t0, c], [c, 1 - t0]], dtype=complex)
    rho = np.outer(psi, psi.conj())
    for first in "ab":
        for r in all_strings(4):
            assert table[first, r] == pytest.approx(kraus_prob(A0, B, rho, first, r), abs=1e-12)


def test_atomic_to_finite_model_blocks():
    m = atomic_to_finite_model(AtomicState((Atom(1.0, 0.5, (0.0, 0.0, 1.0)),)))
    assert m.dim == 2
    np.testing.assert_allclose(m.B, PLUS, atol=1e-15)
    m = atomic_to_finite_model(AtomicState((Atom(0.5, 0.0, (0.0, 0.0, 1.0)), Atom(0.5, 0.7, (1.0, 0.0, 0.0)))))
    assert m.dim == 4
    np.testing.assert_allclose(m.B[:2, :2], np.diag([0.0, 1.0]), atol=1e-15)


def test_oracle_equivalence(rng):
    for _ in range(10):
        s = random_atomic(rng)
        t1 = atomic_to_table(s, 5)
        t2 = simulate_table(atomic_to_finite_model(s), 5)
        for i in "ab":
            for r in t1.process(i):
                assert t1[i, r] == pytest.approx(t2[i, r], abs=1e-12)


def test_atomic_table_switch_consistent(rng):
    t = atomic_to_table(random_atomic(rng), 6)
    assert max_switch_spread(t) == 0.0
    assert isinstance(table_to_F(t, 1e-14), FTable)


def test_atomic_state_validation():
    with pytest.raises(ModelError):
        AtomicState((Atom(0.5, 0.5, (0, 0, 0)),))
    with pytest.raises(ModelError):
        AtomicState((Atom(1.0, 1.5, (0, 0, 0)),))
    with pytest.raises(ModelError):
        AtomicState((Atom(1.0, 0.5, (1, 1, 0)),))


def test_atomic_json_roundtrip(rng):
    s = random_atomic(rng)
    assert AtomicState.from_json(json.dumps(s.to_json())) == s


def test_by_is_inert():
    a = atomic_to_table(AtomicState((Atom(1.0, 0.3, (0.6, 0.0, 0.0)),)), 4)
    b = atomic_to_table(AtomicState((Atom(1.0, 0.3, (0.6, 0.8, 0.0)),)), 4)
    assert a.to_json() == b.to_json()
