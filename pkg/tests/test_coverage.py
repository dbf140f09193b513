import pytest
from hypothesis import given
from hypothesis import strategies as st

from diphonekit.catalog import attack_commands, load_catalog
from diphonekit.coverage import (
    DIPHONES_PER_MINUTE,
    DiphoneFrequencyTable,
    EmptyTable,
    Unreachable,
    build_frequency_table,
    coverage_curve,
    coverage_of,
    estimate_minutes_for_coverage,
    merge_tables,
    read_frequency_csv,
    read_transcripts,
    tokens_for_coverage,
    top_fraction,
)
from diphonekit.lexicon import Diphone, required_diphones
from diphonekit.toy import toy_transcripts


@pytest.fixture(scope="module")
def required(lex):
    return required_diphones([t.canonical_text for t in attack_commands(load_catalog())], lex)


@pytest.fixture(scope="module")
def table(lex):
    return build_frequency_table(toy_transcripts(), lex, "toy")


# Frozen from a standalone script that re-parses the bundled dictionary and
# recomputes coverage of every corpus prefix by brute force.
ORACLE_TOKENS = {0.2: 56, 0.4: 173, 0.5: 303, 0.6: 451, 0.8: 1206, 1.0: 8504}
ORACLE_TOP_P = {0.2: 61, 0.4: 86, 0.6: 99, 0.8: 110, 1.0: 117}


def test_corpus_size(table, required):
    assert len(required) == 117
    assert table.total_tokens == 9481
    assert table.total_tokens / DIPHONES_PER_MINUTE >= 10
    assert table.oov_tokens == 0


@pytest.mark.parametrize("p,tokens", sorted(ORACLE_TOKENS.items()))
def test_tokens_for_coverage_oracle(table, required, p, tokens):
    assert tokens_for_coverage(table.sequence, required, p) == tokens
    assert estimate_minutes_for_coverage(table, required, p) == tokens / DIPHONES_PER_MINUTE


@pytest.mark.parametrize("p,covered", sorted(ORACLE_TOP_P.items()))
def test_top_fraction_oracle(table, required, p, covered):
    assert len(coverage_of(required, top_fraction(table, p)).covered) == covered


def test_popularity_tie_break():
    d = [Diphone.parse(s) for s in ("B-AA", "AA-AA", "D-AA")]
    t = DiphoneFrequencyTable({d[0]: 2, d[1]: 2, d[2]: 5}, 9)
    assert t.popularity() == [d[2], d[1], d[0]]
    assert top_fraction(t, 0.5) == {d[2], d[1]}
    assert top_fraction(t, 0.1) == {d[2]}


def test_csv_round_trip(table, tmp_path):
    path = tmp_path / "freq.csv"
    path.write_text(table.to_csv())
    back = read_frequency_csv(path)
    assert back.counts == table.counts
    assert back.popularity() == table.popularity()
    with pytest.raises(ValueError):
        estimate_minutes_for_coverage(back, {Diphone("PAU", "AH")}, 0.5)


def test_empty_and_unreachable(lex):
    empty = build_frequency_table([], lex)
    with pytest.raises(EmptyTable):
        top_fraction(empty, 0.5)
    assert estimate_minutes_for_coverage(empty, set(), 0.5) == 0
    t = build_frequency_table(["call my phone"], lex)
    with pytest.raises(Unreachable) as e:
        estimate_minutes_for_coverage(t, {Diphone("ZH", "OY"), Diphone("PAU", "K")}, 1.0)
    assert e.value.max_fraction == 0.5


def test_oov_counted(lex):
    t = build_frequency_table(["call qwzxv phone"], lex)
    assert t.oov_tokens == 1
    assert t.total_tokens == len(lex["call"]) + len(lex["phone"]) + 2


def test_curve_modes(lex, required):
    lines = toy_transcripts()
    a = build_frequency_table(lines[:80], lex)
    b = build_frequency_table(lines[80:], lex)
    pooled = dict(coverage_curve([a, b], required, [0.5]))
    assert pooled[0.5] == estimate_minutes_for_coverage(merge_tables([a, b]), required, 0.5)
    mean = dict(coverage_curve([a, b], required, [0.5], mode="mean"))
    want = (estimate_minutes_for_coverage(a, required, 0.5) + estimate_minutes_for_coverage(b, required, 0.5)) / 2
    assert mean[0.5] == pytest.approx(want)
    assert dict(coverage_curve([build_frequency_table(["hi"], lex)], required, [1.0]))[1.0] is None


@given(st.lists(st.floats(0.01, 1.0), min_size=2, max_size=6))
def test_minutes_monotone(table, required, fractions):
    fractions = sorted(fractions)
    mins = [m for _, m in coverage_curve([table], required, fractions)]
    assert all(x <= y for x, y in zip(mins, mins[1:]))


def test_read_transcripts_dir(tmp_path):
    (tmp_path / "b.txt").write_text("second one\n")
    (tmp_path / "a.txt").write_text("first one\n")
    assert read_transcripts(tmp_path) == ["first one", "second one"]
    f = tmp_path / "lines.txt"
    f.write_text("x\n\ny\n")
    assert read_transcripts(f) == ["x", "y"]
