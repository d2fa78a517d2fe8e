
import pytest
from hypothesis import given, strategies as st

from timebin_dj.oracles import (
    OracleClass,
    OracleSpec,
    all_oracles,
    bv_index,
    classify,
    compose_distributed,
    constant_oracle,
    enumerate_bv_family,
    format_truth_table,
    oracle_bv,
    oracle_complement,
    parse_truth_table,
)
from timebin_dj.timebin import all_bitstrings


def test_bv_zero_is_constant():
    assert oracle_bv("000") == constant_oracle(3, 0)


@pytest.mark.parametrize("j, x, value", [("111", (1, 0, 1), 0), ("100", (1, 1, 0), 1)])
def test_bv_inner_product(j, x, value):
    assert oracle_bv(j)(x) == value


def test_complement():
    assert oracle_complement(constant_oracle(2, 0)) == constant_oracle(2, 1)
    f = oracle_bv("101")
    assert oracle_complement(oracle_complement(f)) == f
    assert oracle_complement(f).label == "fbar_101"


def test_classify_examples():
    assert classify(constant_oracle(3)) is OracleClass.CONSTANT
    assert classify(oracle_bv("010")) is OracleClass.BALANCED
    assert classify(OracleSpec(3, (1, 1, 1, 0, 0, 0, 0, 0))) is OracleClass.NEITHER


@pytest.mark.parametrize("n", range(1, 9))
def test_parity_family_classification(n):
    for j in all_bitstrings(n):
        expected = OracleClass.CONSTANT if not any(j) else OracleClass.BALANCED
        assert classify(oracle_bv(j)) is expected


def test_compose_examples():
    f = oracle_bv("101")
    assert compose_distributed(f, f) == constant_oracle(3, 0)
    assert compose_distributed(oracle_bv("101"), oracle_bv("011")) == oracle_bv("110")
    g = OracleSpec(3, (1, 0, 1, 0, 1, 0, 1, 0))
    assert classify(compose_distributed(constant_oracle(3), g)) is OracleClass.BALANCED


def test_compose_size_mismatch():
    with pytest.raises(ValueError):
        compose_distributed(constant_oracle(2), constant_oracle(3))


tables3 = st.tuples(*[st.integers(0, 1)] * 8).map(lambda t: OracleSpec(3, t))


@given(tables3, tables3, tables3)
def test_compose_commutative_associative(f, g, h):
    assert compose_distributed(f, g) == compose_distributed(g, f)
    assert compose_distributed(compose_distributed(f, g), h) == compose_distributed(f, compose_distributed(g, h))
    assert compose_distributed(f, f) == constant_oracle(3, 0)


def test_bv_family():
    assert len(enumerate_bv_family(1)) == 4
    fam = enumerate_bv_family(3)
    assert len(fam) == 16
    assert len(set(fam)) == 16
    classes = [classify(o) for o in fam]
    assert classes.count(OracleClass.CONSTANT) == 2
    assert classes.count(OracleClass.BALANCED) == 14
    assert [o.label for o in fam[:2]] == ["f_000", "f_001"]
    assert fam[8].label == "fbar_000"


def test_all_oracles_n2():
    tables = all_oracles(2)
    assert len(tables) == 16 and len(set(tables)) == 16


def test_truth_table_roundtrip():
    o = oracle_bv("110")
    assert parse_truth_table(format_truth_table(o)) == o
    assert parse_truth_table("n=2\n0110\n").table == (0, 1, 1, 0)


@pytest.mark.parametrize("text", ["n=3\n0101\n", "n=2\n01x0\n", "m=2\n0110\n", "0110\n"])
def test_truth_table_errors(text):
    with pytest.raises(ValueError):
        parse_truth_table(text)


def test_table_size_invariant():
    with pytest.raises(ValueError):
        OracleSpec(2, (0, 1, 0))


def test_bv_index():
    assert bv_index(oracle_bv("011")) == ((0, 1, 1), False)
    assert bv_index(oracle_complement(oracle_bv("011"))) == ((0, 1, 1), True)
    assert bv_index(OracleSpec(2, (1, 1, 1, 0))) is None
