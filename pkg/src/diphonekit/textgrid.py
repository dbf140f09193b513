"""Praat TextGrid reading and writing for forced-alignment output.

Both the long ("name = value") and short (values only) text syntaxes are
accepted. Only IntervalTiers are supported; a TextGrid must carry a words
tier and a phones tier (MFA names them ``words``/``phones``, optionally with
a ``<speaker> - `` prefix).
"""

from __future__ import annotations

import bisect
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Iterator, Union

PAU = "PAU"
SILENCE_LABELS = frozenset({"", "sil", "sp", "spn"})

# word/phone boundary agreement, seconds
CONTAINMENT_TOL = 1e-3
DURATION_TOL = 1e-6


class TextGridError(ValueError):
    pass


class MalformedTextGrid(TextGridError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MissingTier(TextGridError):
    pass


class NonMonotoneIntervals(TextGridError):
    pass


@dataclass(frozen=True)
class Interval:
    start: float
    end: float
    label: str = ""

    @property
    def duration(self) -> float:
        return self.end - self.start

    @property
    def midpoint(self) -> float:
        return (self.start + self.end) / 2


@dataclass(frozen=True)
class Tier:
    name: str
    intervals: tuple[Interval, ...]

    def __iter__(self) -> Iterator[Interval]:
        return iter(self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)


@dataclass(frozen=True)
class Alignment:
    audio_path: str
    duration: float
    tiers: dict[str, Tier] = field(default_factory=dict)

    @property
    def words(self) -> Tier:
        return self.tiers["words"]

    @property
    def phones(self) -> Tier:
        return self.tiers["phones"]


def normalize_label(raw: str) -> str:
    """Map a phone label to stress-free uppercase ARPAbet, silences to PAU.

    >>> normalize_label("AH0"), normalize_label(""), normalize_label("eh1")
    ('AH', 'PAU', 'EH')
    """
    label = raw.strip().strip('"').strip()
    if label.lower() in SILENCE_LABELS or label.upper() == PAU:
        return PAU
    return label.rstrip("012").upper()


def _normalize_word(raw: str) -> str:
    label = raw.strip().strip('"').strip()
    if label.lower() in SILENCE_LABELS or label.upper() == PAU:
        return PAU
    return label.lower()


# -- tokenizer ---------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<string>"(?:[^"]|"")*")
  | (?P<flag><[A-Za-z]+>)
  | (?P<number>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)
  | (?P<index>\[\s*\d*\s*\]\s*:?)
  | (?P<ident>[A-Za-z_][A-Za-z_ ]*\??)
  | (?P<punct>[=:])
  | (?P<space>\s+)
  | (?P<comment>!.*)
    """,
    re.VERBOSE,
)


@dataclass
class _Token:
    kind: str
    value: str
    line: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    line = 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise MalformedTextGrid(f"unexpected character {text[pos]!r}", line)
        kind = m.lastgroup
        value = m.group()
        if kind == "string":
            tokens.append(_Token("string", value[1:-1].replace('""', '"'), line))
        elif kind in ("number", "flag"):
            tokens.append(_Token(kind, value, line))
        line += value.count("\n")
        pos = m.end()
    return tokens


class _Reader:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.i = 0

    @property
    def line(self) -> int | None:
        if self.i < len(self.tokens):
            return self.tokens[self.i].line
        return self.tokens[-1].line if self.tokens else None

    def _next(self, kind: str) -> _Token:
        if self.i >= len(self.tokens):
            raise MalformedTextGrid(f"unexpected end of file, expected {kind}", self.line)
        tok = self.tokens[self.i]
        if tok.kind != kind:
            raise MalformedTextGrid(f"expected {kind}, found {tok.value!r}", tok.line)
        self.i += 1
        return tok

    def string(self) -> str:
        return self._next("string").value

    def number(self) -> float:
        tok = self._next("number")
        value = float(tok.value)
        if not math.isfinite(value):
            raise MalformedTextGrid(f"non-finite number {tok.value!r}", tok.line)
        return value

    def count(self) -> int:
        tok = self._next("number")
        try:
            n = int(tok.value)
        except ValueError:
            raise MalformedTextGrid(f"expected integer count, found {tok.value!r}", tok.line)
        if n < 0:
            raise MalformedTextGrid("negative count", tok.line)
        return n

    def optional_flag(self) -> None:
        if self.i < len(self.tokens) and self.tokens[self.i].kind == "flag":
            self.i += 1


# -- parsing -----------------------------------------------------------------


def _tier_key(name: str) -> str | None:
    key = name.strip().lower().rsplit("-", 1)[-1].strip()
    return key if key in ("words", "phones") else None


def _read_tier(r: _Reader) -> tuple[str, list[Interval]]:
    line = r.line
    cls = r.string()
    if cls != "IntervalTier":
        raise MalformedTextGrid(f"unsupported tier class {cls!r} (IntervalTier only)", line)
    name = r.string()
    r.number()
    r.number()
    n = r.count()
    intervals = []
    for _ in range(n):
        line = r.line
        start = r.number()
        end = r.number()
        label = r.string()
        if not end > start or start < 0:
            raise MalformedTextGrid(f"bad interval [{start}, {end}] in tier {name!r}", line)
        intervals.append(Interval(start, end, label))
    for a, b in zip(intervals, intervals[1:]):
        if b.start < a.end - DURATION_TOL:
            raise NonMonotoneIntervals(
                f"tier {name!r}: interval at {b.start} starts before previous ends at {a.end}"
            )
    return name, intervals


def _check_containment(words: Tier, phones: Tier) -> None:
    bounds = sorted({p.start for p in phones} | {p.end for p in phones})

    def on_boundary(t: float) -> bool:
        i = bisect.bisect_left(bounds, t - CONTAINMENT_TOL)
        return i < len(bounds) and abs(bounds[i] - t) <= CONTAINMENT_TOL

    for w in words:
        if w.label == PAU:
            continue
        if not (on_boundary(w.start) and on_boundary(w.end)):
            raise MalformedTextGrid(
                f"word {w.label!r} [{w.start}, {w.end}] does not align to phone boundaries"
            )


def parse_textgrid(source: Union[bytes, str, BinaryIO], audio_path: str = "") -> Alignment:
    """Parse a TextGrid into an :class:`Alignment` with normalized labels."""
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        if source.startswith(b"\xfe\xff") or source.startswith(b"\xff\xfe"):
            encoding = "utf-16"
        else:
            encoding = "utf-8-sig"
        try:
            text = source.decode(encoding)
        except UnicodeDecodeError as exc:
            raise MalformedTextGrid(f"not valid {encoding} text: {exc.reason}") from None
    else:
        text = source

    r = _Reader(_tokenize(text))
    if r.string() != "ooTextFile":
        raise MalformedTextGrid("not an ooTextFile", 1)
    if r.string() != "TextGrid":
        raise MalformedTextGrid("object class is not TextGrid", r.line)
    r.number()
    xmax = r.number()
    r.optional_flag()
    n_tiers = r.count()

    tiers: dict[str, Tier] = {}
    for _ in range(n_tiers):
        name, intervals = _read_tier(r)
        key = _tier_key(name)
        if key is None or key in tiers:
            continue
        norm = normalize_label if key == "phones" else _normalize_word
        tiers[key] = Tier(key, tuple(Interval(i.start, i.end, norm(i.label)) for i in intervals))
    if r.i != len(r.tokens):
        raise MalformedTextGrid("trailing content after last tier", r.line)

    for key in ("words", "phones"):
        if key not in tiers:
            raise MissingTier(f"no {key} tier")
    for tier in tiers.values():
        if tier.intervals and tier.intervals[-1].end > xmax + DURATION_TOL:
            raise MalformedTextGrid(f"tier {tier.name!r} extends past xmax={xmax}")
    _check_containment(tiers["words"], tiers["phones"])
    return Alignment(audio_path=audio_path, duration=xmax, tiers=tiers)


def serialize_textgrid(alignment: Alignment) -> str:
    """Render an alignment in the long TextGrid syntax."""

    def q(s: str) -> str:
        return '"' + s.replace('"', '""') + '"'

    start = min((t.intervals[0].start for t in alignment.tiers.values() if t.intervals), default=0.0)
    out = [
        'File type = "ooTextFile"',
        'Object class = "TextGrid"',
        "",
        f"xmin = {start!r}",
        f"xmax = {alignment.duration!r}",
        "tiers? <exists>",
        f"size = {len(alignment.tiers)}",
        "item []:",
    ]
    for n, (name, tier) in enumerate(alignment.tiers.items(), 1):
        out += [
            f"    item [{n}]:",
            '        class = "IntervalTier"',
            f"        name = {q(name)}",
            f"        xmin = {start!r}",
            f"        xmax = {alignment.duration!r}",
            f"        intervals: size = {len(tier)}",
        ]
        for k, iv in enumerate(tier, 1):
            out += [
                f"        intervals [{k}]:",
                f"            xmin = {iv.start!r}",
                f"            xmax = {iv.end!r}",
                f"            text = {q('' if iv.label == PAU else iv.label)}",
            ]
    return "\n".join(out) + "\n"


def read_textgrid(path) -> Alignment:
    path = Path(path)
    return parse_textgrid(path.read_bytes(), audio_path=str(path.with_suffix(".wav")))
