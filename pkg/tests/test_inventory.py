import json

import numpy as np
import pytest
from hypothesis import given, settings

from diphonekit.audio import AudioClip, slice_clip
from diphonekit.inventory import (
    AlignmentAudioMismatch,
    ChecksumMismatch,
    CorruptManifest,
    Inventory,
    MissingBlob,
    ProfileMismatch,
    build_inventory,
    extract_units,
    load_inventory,
    merge,
    pick_unit,
    save_inventory,
)
from diphonekit.lexicon import Diphone
from diphonekit.textgrid import Alignment, Interval, Tier
from strategies import RATE, aligned_pairs


@settings(max_examples=50, deadline=None)
@given(aligned_pairs())
def test_midpoint_cuts(pair):
    alignment, audio = pair
    diphones, words = extract_units(alignment, audio, "p1")
    phones = alignment.phones.intervals
    assert len(diphones) == len(phones) - 1
    for u, (a, b) in zip(diphones, zip(phones, phones[1:])):
        assert u.diphone == Diphone(a.label, b.label)
        want = (a.duration / 2 + b.duration / 2) * RATE
        assert abs(len(u.clip) - want) <= 1
        assert slice_clip(audio, u.cut_start, u.cut_end) == u.clip
    assert len(words) == sum(1 for w in alignment.words if w.label != "PAU")
    for w in words:
        assert w.margins[0] > 0 and w.margins[1] > 0


def test_duration_mismatch():
    tier = Tier("phones", (Interval(0, 1.0, "AH"),))
    a = Alignment("", 1.0, {"words": Tier("words", (Interval(0, 1.0, "a"),)), "phones": tier})
    with pytest.raises(AlignmentAudioMismatch):
        extract_units(a, AudioClip(np.zeros(RATE // 2, dtype=np.int16), RATE), "p")


def test_pick_lower_median(inventories):
    inv = inventories["p236"]
    key, units = max(inv.diphones.items(), key=lambda kv: len(kv[1]))
    lengths = [len(u.clip) for u in units]
    assert lengths == sorted(lengths)
    assert pick_unit(inv, key) is units[(len(units) - 1) // 2]
    assert pick_unit(inv, Diphone("ZH", "OY")) is None
    assert pick_unit(inv, "The").word == "the"


def test_save_load_round_trip(inventories, tmp_path):
    inv = inventories["p334"]
    save_inventory(inv, tmp_path / "inv")
    back = load_inventory(tmp_path / "inv")
    assert back.profile == inv.profile and back.gender == inv.gender
    assert back.diphones == inv.diphones
    assert back.words == inv.words
    # a second save is byte-identical
    save_inventory(back, tmp_path / "again")
    assert (tmp_path / "inv" / "manifest.json").read_bytes() == (tmp_path / "again" / "manifest.json").read_bytes()


def _small(inventories, tmp_path):
    inv = inventories["p360"]
    key = next(iter(inv.diphones))
    small = Inventory(inv.profile, inv.gender)
    small.add(inv.diphones[key])
    d = tmp_path / "small"
    save_inventory(small, d)
    return d


def test_checksum_mismatch(inventories, tmp_path):
    d = _small(inventories, tmp_path)
    blob = next((d / "units").iterdir())
    data = bytearray(blob.read_bytes())
    data[-1] ^= 0xFF
    blob.write_bytes(bytes(data))
    with pytest.raises(ChecksumMismatch):
        load_inventory(d)


def test_missing_blob(inventories, tmp_path):
    d = _small(inventories, tmp_path)
    next((d / "units").iterdir()).unlink()
    with pytest.raises(MissingBlob):
        load_inventory(d)


def test_corrupt_manifest(inventories, tmp_path):
    d = _small(inventories, tmp_path)
    (d / "manifest.json").write_text("{not json")
    with pytest.raises(CorruptManifest):
        load_inventory(d)
    (d / "manifest.json").write_text(json.dumps({"profile": "x", "units": [{"kind": "diphone"}]}))
    with pytest.raises(CorruptManifest):
        load_inventory(d)
    with pytest.raises(CorruptManifest):
        load_inventory(tmp_path / "nowhere")


def test_merge(toy_corpus):
    from conftest import load_pairs

    pairs = load_pairs(toy_corpus["p236"])
    whole = build_inventory(pairs, "p236", "female")
    parts = merge([build_inventory(pairs[:10], "p236"), build_inventory(pairs[10:], "p236", "female")])
    assert parts.gender == "female"
    assert parts.diphones == whole.diphones
    with pytest.raises(ProfileMismatch):
        merge([whole, build_inventory(pairs[:2], "p288")])


def test_without_words(inventories):
    inv = inventories["p236"]
    stripped = inv.without_words()
    assert not stripped.words and stripped.diphones == inv.diphones
