from pathlib import Path

import pytest

from diphonekit.audio import read_wav
from diphonekit.inventory import build_inventory
from diphonekit.lexicon import default_lexicon
from diphonekit.textgrid import read_textgrid
from diphonekit.toy import PROFILES, write_toy_corpus


@pytest.fixture(scope="session")
def lex():
    return default_lexicon()


@pytest.fixture(scope="session")
def toy_corpus(tmp_path_factory) -> dict[str, Path]:
    return write_toy_corpus(tmp_path_factory.mktemp("toy"))


def load_pairs(d: Path):
    return [(read_textgrid(tg), read_wav(tg.with_suffix(".wav")), tg.stem) for tg in sorted(d.glob("*.TextGrid"))]


@pytest.fixture(scope="session")
def inventories(toy_corpus):
    genders = {p.id: p.gender for p in PROFILES}
    return {p: build_inventory(load_pairs(d), p, genders[p]) for p, d in toy_corpus.items()}
