"""Voice-assistant command catalog (attack commands AC*, profile-setup commands PC*)."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional, Union

from .lexicon import normalize_text

WAKE_WORD = "alexa"


@dataclass(frozen=True)
class IntentTemplate:
    id: str
    canonical_text: str
    required_keywords: frozenset[str]
    slot_words: frozenset[str]

    def __post_init__(self):
        tokens = set(normalize_text(self.canonical_text))
        if not self.required_keywords <= tokens:
            extra = sorted(self.required_keywords - tokens)
            raise ValueError(f"{self.id}: required keywords {extra} not in {self.canonical_text!r}")

    @property
    def tokens(self) -> list[str]:
        return normalize_text(self.canonical_text)

    @property
    def keywords(self) -> frozenset[str]:
        return self.required_keywords | self.slot_words


def parse_catalog(text: str) -> list[IntentTemplate]:
    """Parse a tab-separated catalog: id, text, required keywords, slot words.

    Keyword columns are optional; with none given, every token except the
    wake word is required.
    """
    templates = []
    seen = set()
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        cols = line.rstrip("\n").split("\t")
        if len(cols) < 2:
            raise ValueError(f"line {lineno}: expected 'id<TAB>text', got {line!r}")
        cid, body = cols[0].strip(), cols[1].strip()
        if cid in seen:
            raise ValueError(f"line {lineno}: duplicate command id {cid!r}")
        seen.add(cid)
        if len(cols) > 2:
            required = frozenset(normalize_text(cols[2]))
            slots = frozenset(normalize_text(cols[3])) if len(cols) > 3 else frozenset()
        else:
            required = frozenset(t for t in normalize_text(body) if t != WAKE_WORD)
            slots = frozenset()
        templates.append(IntentTemplate(cid, body, required, slots - required))
    return templates


def load_catalog(path: Optional[Union[str, Path]] = None) -> list[IntentTemplate]:
    if path is None:
        text = (resources.files("diphonekit") / "data" / "commands.tsv").read_text()
    else:
        text = Path(path).read_text()
    return parse_catalog(text)


def attack_commands(templates: list[IntentTemplate]) -> list[IntentTemplate]:
    return [t for t in templates if t.id.startswith("AC")]


def by_id(templates: list[IntentTemplate]) -> dict[str, IntentTemplate]:
    return {t.id: t for t in templates}
