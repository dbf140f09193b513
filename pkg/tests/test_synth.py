import pytest

from diphonekit.catalog import attack_commands, by_id, load_catalog
from diphonekit.coverage import build_frequency_table, top_fraction
from diphonekit.lexicon import Diphone
from diphonekit.synth import SynthesisRequest, UnsynthesizableDiphone, synthesis_gap, synthesize
from diphonekit.toy import toy_transcripts

CMDS = by_id(load_catalog())


@pytest.fixture(scope="module")
def mask20(lex):
    return top_fraction(build_frequency_table(toy_transcripts(), lex), 0.2)


@pytest.mark.parametrize("cid", [t.id for t in attack_commands(load_catalog())])
def test_full_coverage_is_all_target(inventories, lex, cid):
    req = SynthesisRequest(CMDS[cid].canonical_text, inventories["p236"])
    assert synthesis_gap(req, lex) == set()
    res = synthesize(req, lex)
    assert res.target_fraction == 1.0
    assert res.realized_tokens == CMDS[cid].tokens
    assert all(e.source_profile == "p236" for e in res.unit_trace)


def test_word_units_preferred(inventories, lex):
    inv = inventories["p334"]
    words = sorted(inv.words)[:3]
    res = synthesize(SynthesisRequest(" ".join(words), inv), lex)
    assert [e.kind for e in res.unit_trace] == ["word"] * 3
    assert len(res.audio) == sum(len(u.clip) for u in res.units)


def test_diphones_only(inventories, lex):
    res = synthesize(SynthesisRequest("again", inventories["p334"], use_word_units=False), lex)
    assert [e.key for e in res.unit_trace] == ["PAU-AH", "AH-G", "G-EH", "EH-N", "N-PAU"]


def test_mask_uses_donor(inventories, lex, mask20):
    req = SynthesisRequest(CMDS["AC0"].canonical_text, inventories["p236"], inventories["p288"], mask20)
    gap = synthesis_gap(req, lex)
    assert gap and not gap & mask20
    res = synthesize(req, lex)
    donor = [e for e in res.unit_trace if e.source_profile == "p288"]
    assert {Diphone.parse(e.key) for e in donor} == gap
    assert 0 < res.target_fraction < 1
    assert res.target_fraction == pytest.approx(1 - len(donor) / len(res.unit_trace))


def test_no_donor_fails(inventories, lex, mask20):
    req = SynthesisRequest(CMDS["AC0"].canonical_text, inventories["p236"], allowed_diphones=mask20)
    with pytest.raises(UnsynthesizableDiphone) as e:
        synthesize(req, lex)
    assert e.value.diphone in synthesis_gap(req, lex)


def test_donor_must_differ(inventories):
    with pytest.raises(ValueError):
        SynthesisRequest("hi", inventories["p236"], inventories["p236"])


def test_empty_command(inventories, lex):
    res = synthesize(SynthesisRequest("", inventories["p236"]), lex)
    assert len(res.audio) == 0 and res.target_fraction == 1.0


def test_crossfade_shortens(inventories, lex):
    text = CMDS["AC1"].canonical_text
    plain = synthesize(SynthesisRequest(text, inventories["p360"]), lex)
    faded = synthesize(SynthesisRequest(text, inventories["p360"], crossfade=2.0), lex)
    n = 32  # 2 ms at 16 kHz
    assert len(faded.audio) == len(plain.audio) - n * (len(plain.units) - 1)


def test_deterministic(inventories, lex, mask20):
    req = SynthesisRequest(CMDS["AC5"].canonical_text, inventories["p334"], inventories["p360"], mask20)
    assert synthesize(req, lex).audio == synthesize(req, lex).audio


def test_word_provenance(inventories, lex, mask20):
    req = SynthesisRequest(CMDS["AC5"].canonical_text, inventories["p334"], inventories["p360"], mask20)
    res = synthesize(req, lex)
    prov = res.word_provenance()
    assert [p[0] for p in prov] == res.realized_tokens
    assert sum(p[2] for p in prov) == len(res.unit_trace)
    assert sum(p[1] for p in prov) == sum(e.source_profile != "p334" for e in res.unit_trace)
