import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qbox.qmodel import random_model, simulate_table
from qbox.seqcore import (
    FTable,
    InadmissibleTableError,
    ProbabilityTable,
    SwitchMismatch,
    TableStructureError,
    all_strings,
    complement,
    random_admissible,
    switch_count,
    table_from_F,
    table_to_F,
    uniform_table,
    validate_admissible,
)

bits = st.text(alphabet="01", min_size=1, max_size=20)


@pytest.mark.parametrize("r, expected", [("0", 0), ("1", 0), ("0110", 2), ("101", 2), ("010", 2), ("0101", 3)])
def test_switch_count_examples(r, expected):
    assert switch_count(r) == expected


def test_switch_count_rejects_empty_and_junk():
    with pytest.raises(ValueError):
        switch_count("")
    with pytest.raises(ValueError):
        switch_count("012")


@given(bits)
def test_switch_count_complement_symmetry(r):
    assert switch_count(r) == switch_count(complement(r))


@given(bits)
def test_switch_count_matches_run_count(r):
    runs = 1 + sum(1 for k in range(1, len(r)) if r[k] != r[k - 1])
    assert switch_count(r) == runs - 1


def test_uniform_table_is_admissible_exactly():
    rep = validate_admissible(uniform_table(6), 0.0)
    assert rep.ok and rep.residual == 0.0


def test_constructed_conservation_failure():
    t = uniform_table(2)
    P_a = dict(t.P_a, **{"0": 0.5, "1": 0.5, "00": 0.5, "01": 0.5})
    rep = validate_admissible(ProbabilityTable(2, P_a, t.P_b), 1e-9)
    assert not rep.ok
    assert rep.witness == "0" and rep.process == "a"
    assert rep.residual == pytest.approx(0.5)


def test_normalisation_failure_has_empty_witness():
    t = uniform_table(1)
    rep = validate_admissible(ProbabilityTable(1, {"0": 0.5, "1": 0.6}, t.P_b))
    assert not rep.ok and rep.witness == "" and rep.residual == pytest.approx(0.1)


def test_missing_entries_are_listed():
    t = uniform_table(2)
    P_b = dict(t.P_b)
    del P_b["01"]
    with pytest.raises(TableStructureError) as exc:
        validate_admissible(ProbabilityTable(2, t.P_a, P_b))
    assert exc.value.missing == ["b:01"]


def test_quantum_table_admissible():
    rng = np.random.default_rng(3)
    rep = validate_admissible(simulate_table(random_model(rng, dim=4), 4), 1e-12)
    assert rep.ok and rep.residual <= 1e-12


def test_random_admissible_depth1_normalised():
    t = random_admissible(1, 42)
    assert t.P_a["0"] + t.P_a["1"] == 1.0
    assert t.P_b["0"] + t.P_b["1"] == 1.0


def test_random_admissible_deterministic():
    assert random_admissible(3, 7).to_json() == random_admissible(3, 7).to_json()
    assert random_admissible(3, 7).to_json() != random_admissible(3, 8).to_json()


@given(st.integers(1, 7), st.integers(0, 2**31))
def test_random_admissible_validates(depth, seed):
    assert validate_admissible(random_admissible(depth, seed), 1e-12).ok


def test_random_admissible_rejects_depth0():
    with pytest.raises(ValueError):
        random_admissible(0, 1)


def test_length_sums_are_one():
    t = random_admissible(6, 1)
    for length in range(1, 7):
        assert sum(t.P_a[r] for r in all_strings(length)) == pytest.approx(1.0, abs=length * 1e-12)


def test_json_roundtrip():
    t = random_admissible(4, 11)
    back = ProbabilityTable.from_json(json.dumps(t.to_json()))
    assert back.to_json() == t.to_json()


def test_json_rejects_malformed():
    with pytest.raises(TableStructureError):
        ProbabilityTable.from_json({"depth": 1, "P_a": {"0": 1.0}})


def test_table_to_F_uniform():
    f = table_to_F(uniform_table(5))
    assert isinstance(f, FTable)
    for i in "ab":
        for r1 in (0, 1):
            for n in range(5):
                assert np.all(f.F[i][r1][n] == 2.0 ** -(n + 1))


def test_table_to_F_quantum_spread():
    rng = np.random.default_rng(5)
    t = simulate_table(random_model(rng, dim=4), 5)
    f = table_to_F(t, 1e-10)
    assert isinstance(f, FTable)


def test_table_to_F_switch_witness():
    t = uniform_table(3)
    P_a = dict(t.P_a, **{"001": 0.2, "000": 0.05, "011": 0.1, "010": 0.15})
    res = table_to_F(ProbabilityTable(3, P_a, t.P_b))
    assert isinstance(res, SwitchMismatch)
    assert (res.index.process, res.index.n, res.index.s, res.index.r1) == ("a", 2, 1, 0)
    assert {res.low[0], res.high[0]} == {"001", "011"}
    assert res.spread == pytest.approx(0.1)


def test_table_to_F_propagates_inadmissible():
    t = uniform_table(2)
    with pytest.raises(InadmissibleTableError):
        table_to_F(ProbabilityTable(2, dict(t.P_a, **{"00": 0.3}), t.P_b))


def test_F_derived_identities_and_conservation():
    rng = np.random.default_rng(9)
    f = table_to_F(simulate_table(random_model(rng, dim=6), 6))
    for n in range(f.n_max + 1):
        np.testing.assert_allclose(f.C1[n] + f.C2[n], f.F_minus["a"][n], atol=1e-15)
        np.testing.assert_allclose(f.C1[n] - f.C2[n], f.F_minus["b"][n], atol=1e-15)
    for i in "ab":
        for n in range(f.n_max):
            for s in range(n + 1):
                assert f.F_plus[i][n][s] == pytest.approx(
                    f.F_plus[i][n + 1][s] + f.F_plus[i][n + 1][s + 1], abs=1e-12)


def test_table_from_F_roundtrip():
    rng = np.random.default_rng(2)
    t = simulate_table(random_model(rng, dim=3), 5)
    back = table_from_F(table_to_F(t))
    for i in "ab":
        for r, v in t.process(i).items():
            assert back[i, r] == pytest.approx(v, abs=1e-12)


def test_truncate():
    t = random_admissible(5, 3)
    s = t.truncate(3)
    assert s.depth == 3 and len(s.P_a) == 14 and s.P_a["010"] == t.P_a["010"]
