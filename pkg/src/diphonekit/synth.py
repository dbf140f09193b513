"""Unit-selection command synthesis with donor fallback.

Every token is realized in plan order by, in preference: a whole-word unit
from the target, the word's diphones from the target, or, diphone by diphone,
units from a donor profile. An allowed-diphone mask restricts both target unit
kinds: a word unit qualifies only if every diphone of its span is allowed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import AbstractSet, Literal, NamedTuple, Optional

from .audio import AudioClip, concat
from .inventory import Inventory, Unit, pick_unit
from .lexicon import Diphone, Lexicon, UtterancePlan, default_lexicon, normalize_text, plan_utterance

DEFAULT_RATE = 16000


class SynthesisError(ValueError):
    pass


class UnsynthesizableDiphone(SynthesisError):
    def __init__(self, diphone: Diphone, word: str):
        self.diphone = diphone
        self.word = word
        super().__init__(f"diphone {diphone} (in {word!r}) missing from target and donor")


class TraceEntry(NamedTuple):
    key: str
    kind: Literal["word", "diphone"]
    source_profile: str


@dataclass
class SynthesisRequest:
    command_text: str
    target: Inventory
    donor: Optional[Inventory] = None
    allowed_diphones: Optional[AbstractSet[Diphone]] = None
    crossfade: float = 0.0
    # whole-word reuse; a limited-speech simulation may switch this off
    use_word_units: bool = True

    def __post_init__(self):
        if self.donor is not None and self.donor.profile == self.target.profile:
            raise ValueError("donor profile must differ from target profile")


@dataclass
class SynthesisResult:
    audio: AudioClip
    realized_tokens: list[str]
    unit_trace: list[TraceEntry]
    target_fraction: float
    target_profile: str = ""
    units: list[Unit] = field(default_factory=list, repr=False)
    plan: Optional[UtterancePlan] = field(default=None, repr=False)

    def word_provenance(self) -> list[tuple[str, int, int]]:
        """Per token: (token, units not from the target, units used)."""
        out = []
        pos = 0
        spans = self.plan.word_spans() if self.plan else []
        for token, (a, b) in zip(self.realized_tokens, spans):
            n = 1 if self.unit_trace[pos].kind == "word" else b - a
            entries = self.unit_trace[pos:pos + n]
            out.append((token, sum(e.source_profile != self.target_profile for e in entries), n))
            pos += n
        return out


def _target_usable(req: SynthesisRequest, d: Diphone) -> bool:
    if req.allowed_diphones is not None and d not in req.allowed_diphones:
        return False
    return d in req.target.diphones


def _word_usable(req: SynthesisRequest, token: str, span: tuple[Diphone, ...]) -> bool:
    # a word unit carries audio for every diphone in its span, so a mask applies to it too
    if not req.use_word_units or token not in req.target.words:
        return False
    return req.allowed_diphones is None or all(d in req.allowed_diphones for d in span)


def _plan(req: SynthesisRequest, lex: Lexicon) -> UtterancePlan:
    return plan_utterance(normalize_text(req.command_text), lex)


def synthesis_gap(req: SynthesisRequest, lex: Optional[Lexicon] = None) -> set[Diphone]:
    """Plan diphones the target cannot supply, ignoring spans covered by target word units."""
    lex = lex or default_lexicon()
    plan = _plan(req, lex)
    gap = set()
    for token, (a, b) in zip(plan.words, plan.word_spans()):
        if _word_usable(req, token, plan.diphones[a:b]):
            continue
        gap.update(d for d in plan.diphones[a:b] if not _target_usable(req, d))
    return gap


def synthesize(req: SynthesisRequest, lex: Optional[Lexicon] = None) -> SynthesisResult:
    lex = lex or default_lexicon()
    plan = _plan(req, lex)
    me = req.target.profile
    units: list[Unit] = []
    trace: list[TraceEntry] = []
    for token, (a, b) in zip(plan.words, plan.word_spans()):
        if _word_usable(req, token, plan.diphones[a:b]):
            units.append(pick_unit(req.target, token))
            trace.append(TraceEntry(token, "word", me))
            continue
        for d in plan.diphones[a:b]:
            unit = pick_unit(req.target, d) if _target_usable(req, d) else None
            if unit is None and req.donor is not None:
                unit = pick_unit(req.donor, d)
            if unit is None:
                raise UnsynthesizableDiphone(d, token)
            units.append(unit)
            trace.append(TraceEntry(str(d), "diphone", unit.profile))

    if units:
        audio = concat([u.clip for u in units], req.crossfade)
    else:
        audio = AudioClip([], DEFAULT_RATE)
    from_target = sum(e.source_profile == me for e in trace)
    fraction = from_target / len(trace) if trace else 1.0
    return SynthesisResult(audio, list(plan.words), trace, fraction, me, units, plan)
