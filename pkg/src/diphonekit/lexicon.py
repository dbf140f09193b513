"""Pronunciation lookup and text-to-diphone planning."""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import BinaryIO, Iterable, Mapping, NamedTuple, Union

from .textgrid import PAU

ARPABET = frozenset(
    "AA AE AH AO AW AY B CH D DH EH ER EY F G HH IH IY JH K L M N NG "
    "OW OY P R S SH T TH UH UW V W Y Z ZH".split()
)
PHONES = ARPABET | {PAU}

_TOKEN = re.compile(r"[a-z0-9]+(?:'[a-z0-9]+)*")
_VARIANT = re.compile(r"\(\d+\)$")


class LexiconError(ValueError):
    pass


class MalformedLine(LexiconError):
    def __init__(self, message: str, line: int):
        self.line = line
        super().__init__(f"line {line}: {message}")


class UnknownPhone(LexiconError):
    def __init__(self, phone: str, line: int):
        self.phone = phone
        self.line = line
        super().__init__(f"line {line}: unknown phone {phone!r}")


class OutOfVocabulary(LexiconError, KeyError):
    def __init__(self, token: str):
        self.token = token
        super().__init__(f"word not in lexicon: {token!r}")

    def __str__(self):
        return self.args[0]


class Diphone(NamedTuple):
    left: str
    right: str

    def __str__(self):
        return f"{self.left}-{self.right}"

    @classmethod
    def parse(cls, text: str) -> "Diphone":
        left, sep, right = text.partition("-")
        if not sep or left not in PHONES or right not in PHONES:
            raise ValueError(f"not a diphone: {text!r}")
        return cls(left, right)


@dataclass(frozen=True)
class Pronunciation:
    word: str
    phones: tuple[str, ...]


@dataclass(frozen=True)
class UtterancePlan:
    words: tuple[str, ...]
    phones_with_pauses: tuple[str, ...]
    diphones: tuple[Diphone, ...]

    def word_spans(self) -> list[tuple[int, int]]:
        """Half-open diphone index range belonging to each word.

        A word's span runs from the diphone entering its first phone from the
        preceding PAU to the diphone leaving its last phone into the next PAU.
        """
        spans = []
        pos = 0
        for i in range(1, len(self.phones_with_pauses)):
            if self.phones_with_pauses[i] == PAU:
                spans.append((pos, i))
                pos = i
        return spans


class Lexicon:
    """Case-insensitive word to stress-free phone sequence mapping."""

    def __init__(self, entries: Mapping[str, tuple[str, ...]]):
        self._entries = dict(entries)

    def __contains__(self, word: str) -> bool:
        return word.lower() in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def __getitem__(self, word: str) -> tuple[str, ...]:
        try:
            return self._entries[word.lower()]
        except KeyError:
            raise OutOfVocabulary(word) from None

    def words(self) -> list[str]:
        return sorted(self._entries)

    def lookup(self, word: str) -> Pronunciation:
        return Pronunciation(word.lower(), self[word])


def load_dictionary(source: Union[bytes, str, BinaryIO, Path]) -> Lexicon:
    """Load a CMUdict-format file. The first variant of a word wins."""
    if isinstance(source, Path):
        source = source.read_bytes()
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        source = source.decode("latin-1")

    entries: dict[str, tuple[str, ...]] = {}
    for lineno, raw in enumerate(source.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line or line.startswith(";;;"):
            continue
        head, *phones = line.split()
        if not phones:
            raise MalformedLine(f"no pronunciation for {head!r}", lineno)
        stripped = []
        for ph in phones:
            base = ph.rstrip("012").upper()
            if base not in ARPABET:
                raise UnknownPhone(ph, lineno)
            stripped.append(base)
        word = _VARIANT.sub("", head).lower()
        if not word:
            raise MalformedLine(f"bad headword {head!r}", lineno)
        entries.setdefault(word, tuple(stripped))
    return Lexicon(entries)


def default_lexicon() -> Lexicon:
    """The bundled dictionary subset covering the toy corpus and catalog."""
    data = resources.files("diphonekit") / "data" / "cmudict_subset.dict"
    return load_dictionary(data.read_bytes())


def normalize_text(raw: str) -> list[str]:
    """Lowercase, drop punctuation, keep word-internal apostrophes.

    >>> normalize_text("Alexa, when is my dentist's appointment?")
    ['alexa', 'when', 'is', 'my', "dentist's", 'appointment']
    """
    return _TOKEN.findall(raw.lower())


def plan_utterance(tokens: Iterable[str], lex: Lexicon) -> UtterancePlan:
    words = tuple(t.lower() for t in tokens)
    phones = [PAU]
    for w in words:
        phones.extend(lex[w])
        phones.append(PAU)
    diphones = tuple(Diphone(a, b) for a, b in zip(phones, phones[1:]))
    return UtterancePlan(words, tuple(phones), diphones)


def required_diphones(commands: Iterable[str], lex: Lexicon) -> set[Diphone]:
    required: set[Diphone] = set()
    for text in commands:
        required.update(plan_utterance(normalize_text(text), lex).diphones)
    return required
