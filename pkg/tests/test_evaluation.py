from functools import lru_cache

import pytest
from hypothesis import given
from hypothesis import strategies as st

from diphonekit.catalog import attack_commands, by_id, load_catalog
from diphonekit.config import ConfidenceThresholds, ExperimentConfig, NoiseModel
from diphonekit.evaluation import (
    EmptyReference,
    EvalResult,
    cell_seed,
    edit_distance,
    match_intent,
    run_experiment,
    simulate_confidence,
    summarize,
    word_error_rate,
)
from diphonekit.inventory import Inventory

CATALOG = load_catalog()


def brute_distance(a, b):
    @lru_cache(maxsize=None)
    def d(i, j):
        if i == 0:
            return j
        if j == 0:
            return i
        return min(d(i - 1, j) + 1, d(i, j - 1) + 1, d(i - 1, j - 1) + (a[i - 1] != b[j - 1]))

    return d(len(a), len(b))


words = st.lists(st.sampled_from("a b c d e".split()), max_size=8)


@given(words, words)
def test_edit_distance_oracle(a, b):
    assert edit_distance(a, b) == brute_distance(tuple(a), tuple(b))


def test_wer_values():
    assert word_error_rate("a b c d".split(), "a x c".split()) == 0.5
    assert word_error_rate(["a"], "a b c".split()) == 2.0
    with pytest.raises(EmptyReference):
        word_error_rate([], ["a"])


def test_match_intent_verbatim():
    for t in CATALOG:
        assert match_intent(t.tokens, CATALOG) == t.id


def test_match_intent_needs_required():
    assert match_intent("alexa play some rock music".split(), CATALOG) == "PC1"
    assert match_intent("alexa what is the weather".split(), CATALOG) is None


def test_confidence_levels():
    th = ConfidenceThresholds()
    assert simulate_confidence(1.0, 0, th) == 300
    assert simulate_confidence(0.8, 0, th) == 300
    assert simulate_confidence(0.3, 0, th) == 200
    assert simulate_confidence(0.1, 0, th) == 100
    assert simulate_confidence(0.0, 0, th) == 0
    assert {simulate_confidence(0.6, s, th) for s in range(50)} == {200, 300}
    with pytest.raises(ValueError):
        simulate_confidence(1.5, 0, th)


def test_coin_rate():
    th = ConfidenceThresholds(coin_p300=0.25)
    rate = sum(simulate_confidence(0.6, s, th) == 300 for s in range(4000)) / 4000
    assert abs(rate - 0.25) < 0.03


def test_thresholds_validated():
    with pytest.raises(ValueError):
        ConfidenceThresholds(high=0.4, coin=0.5)


def test_cell_seed_stable():
    assert cell_seed("a", "b", "AC0", 1) == cell_seed("a", "b", "AC0", 1)
    assert cell_seed("a", "b", "AC0", 1) != cell_seed("a", "b", "AC0", 2)
    assert cell_seed("a", "b", "AC0", 1, "x") != cell_seed("a", "b", "AC0", 1, "y")


CFG = ExperimentConfig(donors={"female": "p288", "male": "p360"})


def test_matched_grid(inventories, lex):
    cmds = attack_commands(CATALOG)[:3]
    out = run_experiment(["p236", "p334"], ["p236", "p334"], cmds, CFG, inventories, CATALOG, lex)
    assert len(out.results) == 12 and not out.failures
    for r in out.results:
        assert r.intent_hit and r.wer == 0
        assert r.confidence == (300 if r.target_profile == r.source_profile else 0)
    assert out.matrix.cells == ((300, 0), (0, 300))


def test_same_gender_affinity(inventories, lex):
    cmds = attack_commands(CATALOG)[:1]
    out = run_experiment(["p236"], ["p288"], cmds, CFG.replace(same_gender_affinity=0.3), inventories, CATALOG, lex)
    assert out.results[0].target_fraction == pytest.approx(0.3)
    assert out.results[0].confidence == 200


def test_failed_cells_isolated(inventories, lex):
    bare = Inventory("empty", "female")
    invs = {**inventories, "empty": bare}
    cmds = attack_commands(CATALOG)[:2]
    out = run_experiment(["p236"], ["p236", "empty"], cmds, ExperimentConfig(), invs, CATALOG, lex)
    assert len(out.results) == 2 and len(out.failures) == 2
    assert out.matrix.cells[0] == (300, None)
    assert ",300,\n" in out.matrix.to_csv()


def test_noise_and_jobs_deterministic(inventories, lex):
    cfg = CFG.replace(noise=NoiseModel(base=0.3), seed=7)
    cmds = attack_commands(CATALOG)[:3]
    profiles = ["p236", "p288", "p334"]
    a = run_experiment(profiles, profiles, cmds, cfg, inventories, CATALOG, lex, jobs=1)
    b = run_experiment(profiles, profiles, cmds, cfg, inventories, CATALOG, lex, jobs=6)
    assert a.results_csv() == b.results_csv()
    assert a.results_json() == b.results_json()
    assert any(r.wer > 0 for r in a.results)
    c = run_experiment(profiles, profiles, cmds, cfg.replace(seed=8), inventories, CATALOG, lex)
    assert c.results_csv() != a.results_csv()


def test_custom_transcriber(inventories, lex):
    cmd = by_id(CATALOG)["AC1"]
    out = run_experiment(
        ["p236"], ["p236"], [cmd], ExperimentConfig(), inventories, CATALOG, lex,
        transcriber=lambda res, rng: ["alexa", "call", "my", "home"],
    )
    r = out.results[0]
    assert r.wer == 0.25 and not r.intent_hit


def test_results_csv_format(inventories, lex):
    out = run_experiment(["p236"], ["p236"], attack_commands(CATALOG)[:1], ExperimentConfig(), inventories, CATALOG, lex)
    assert out.results_csv().splitlines() == [
        "target,source,command,intent_hit,wer,confidence,target_fraction",
        "p236,p236,AC0,true,0.000000,300,1.000000",
    ]


def test_summarize():
    rs = [EvalResult("a", "b", "AC0", True, 0.0, 300, 1.0), EvalResult("a", "b", "AC1", False, 0.5, 0, 0.0)]
    s = summarize(rs)
    assert s["overall"] == {"cells": 2, "intent_hits": 1, "mean_wer": 0.25, "confidence_300": 1}
    assert set(s["by_command"]) == {"AC0", "AC1"}


def test_self_donor_falls_back(inventories, lex, tmp_path):
    from diphonekit.coverage import build_frequency_table
    from diphonekit.toy import toy_transcripts

    freq = tmp_path / "f.csv"
    freq.write_text(build_frequency_table(toy_transcripts(), lex).to_csv())
    cfg = CFG.replace(mask_fraction=0.2, freq_table=str(freq))
    out = run_experiment(["p288"], ["p288"], attack_commands(CATALOG)[:2], cfg, inventories, CATALOG, lex)
    assert not out.failures
    assert all(0.5 <= r.target_fraction < 0.8 for r in out.results)
