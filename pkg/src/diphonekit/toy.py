"""Deterministic toy speech corpus: synthetic per-profile audio with exact alignments.

Real recordings are out of reach here, so each phone is rendered as a short
synthetic signal (harmonics under two formant peaks for voiced sounds,
band-shaped noise for voiceless ones) at a profile-specific pitch. The
matching TextGrid is written in the MFA layout, with stress-marked phones and
``sil``/``sp`` silences so the parser's normalization is exercised too.
Words are separated by short pauses, as in careful read speech.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable

import numpy as np

from .audio import AudioClip, write_wav
from .lexicon import Diphone, Lexicon, default_lexicon, normalize_text, plan_utterance, required_diphones
from .textgrid import PAU, Alignment, Interval, Tier, parse_textgrid, serialize_textgrid

RATE = 16000
VOWELS = frozenset("AA AE AH AO AW AY EH ER EY IH IY OW OY UH UW".split())
VOICED = VOWELS | frozenset("B D DH G JH L M N NG R V W Y Z ZH".split())
STOPS = frozenset("B D G K P T CH JH".split())


@dataclass(frozen=True)
class ToyProfile:
    id: str
    gender: str
    f0: float
    formant_scale: float


PROFILES = (
    ToyProfile("p236", "female", 205.0, 1.12),
    ToyProfile("p288", "female", 220.0, 1.16),
    ToyProfile("p334", "male", 118.0, 1.0),
    ToyProfile("p360", "male", 126.0, 0.97),
)


def toy_transcripts() -> list[str]:
    text = (resources.files("diphonekit") / "data" / "toy_transcripts.txt").read_text()
    return [line.strip() for line in text.splitlines() if line.strip()]


def _seed(*parts) -> int:
    return int.from_bytes(hashlib.sha256("|".join(map(str, parts)).encode()).digest()[:8], "little")


def _formants(phone: str) -> tuple[float, float]:
    h = _seed("formant", phone)
    return 300 + h % 600, 900 + (h >> 16) % 1600


def _render_phone(phone: str, n: int, prof: ToyProfile, rng: np.random.Generator) -> np.ndarray:
    if phone == PAU:
        return rng.normal(0, 8, n)
    t = np.arange(n) / RATE
    if phone in VOICED:
        f1, f2 = (f * prof.formant_scale for f in _formants(phone))
        f0 = prof.f0 * (1 + 0.03 * np.sin(2 * np.pi * 3 * t))
        phase = 2 * np.pi * np.cumsum(f0) / RATE
        sig = np.zeros(n)
        for k in range(1, int(3800 // prof.f0)):
            fk = k * prof.f0
            amp = np.exp(-((fk - f1) / 180) ** 2) + 0.6 * np.exp(-((fk - f2) / 250) ** 2) + 0.02
            sig += amp * np.sin(k * phase)
        sig *= 9000 / max(np.abs(sig).max(), 1e-9)
        if phone not in VOWELS:
            sig *= 0.5
    else:
        centre = 1500 + _seed("noise", phone) % 4000
        noise = rng.normal(0, 1, n)
        spec = np.fft.rfft(noise)
        freqs = np.fft.rfftfreq(n, 1 / RATE)
        spec *= np.exp(-((freqs - centre) / 900) ** 2)
        sig = np.fft.irfft(spec, n)
        sig *= 4000 / max(np.abs(sig).max(), 1e-9)
    if phone in STOPS:
        closure = n // 2
        sig[:closure] *= 0.05
    ramp = min(80, n // 4)
    if ramp:
        env = np.ones(n)
        env[:ramp] = np.linspace(0, 1, ramp)
        env[n - ramp:] = np.linspace(1, 0, ramp)
        sig *= env
    return sig


def _duration(phone: str, rng: np.random.Generator, edge: bool) -> float:
    if phone == PAU:
        return rng.uniform(0.12, 0.25) if edge else rng.uniform(0.04, 0.09)
    if phone in VOWELS:
        return rng.uniform(0.07, 0.16)
    return rng.uniform(0.045, 0.10)


def _stress(phones: tuple[str, ...]) -> list[str]:
    out = []
    first = True
    for p in phones:
        if p in VOWELS:
            out.append(p + ("1" if first else "0"))
            first = False
        else:
            out.append(p)
    return out


def render_utterance(text: str, prof: ToyProfile, utt_id: str, lex: Lexicon) -> tuple[AudioClip, Alignment, str]:
    """Synthesize one utterance; returns the audio, its alignment and TextGrid text."""
    rng = np.random.default_rng(_seed(prof.id, utt_id, text))
    tokens = normalize_text(text)
    # times are kept on the sample grid so cuts land on exact sample boundaries
    pos = 0
    pieces = []
    phone_iv: list[Interval] = []
    word_iv: list[Interval] = []

    def emit(phone: str, label: str, edge: bool = False) -> Interval:
        nonlocal pos
        n = max(int(round(_duration(phone, rng, edge) * RATE)), 160)
        pieces.append(_render_phone(phone, n, prof, rng))
        iv = Interval(pos / RATE, (pos + n) / RATE, label)
        phone_iv.append(iv)
        pos += n
        return iv

    emit(PAU, "sil", edge=True)
    for i, tok in enumerate(tokens):
        start = pos
        phones = lex[tok]
        for p, label in zip(phones, _stress(phones)):
            emit(p, label)
        word_iv.append(Interval(start / RATE, pos / RATE, tok))
        last = i == len(tokens) - 1
        emit(PAU, "sil" if last else "sp", edge=last)

    words: list[Interval] = []
    cursor = 0.0
    for w in word_iv:
        if w.start > cursor:
            words.append(Interval(cursor, w.start, ""))
        words.append(w)
        cursor = w.end
    end = pos / RATE
    if end > cursor:
        words.append(Interval(cursor, end, ""))

    audio = AudioClip(np.concatenate(pieces), RATE)
    raw = Alignment(f"{utt_id}.wav", end, {"words": Tier("words", tuple(words)), "phones": Tier("phones", tuple(phone_iv))})
    grid = serialize_textgrid(raw)
    return audio, parse_textgrid(grid, f"{utt_id}.wav"), grid


def cover_sentences(transcripts: list[str], required: set[Diphone], lex: Lexicon) -> list[str]:
    """Greedy set cover: few corpus sentences that jointly contain the required diphones."""
    pool = {s: set(plan_utterance(normalize_text(s), lex).diphones) & required for s in transcripts}
    chosen = []
    left = set(required)
    while left:
        best = max(transcripts, key=lambda s: (len(pool[s] & left), -transcripts.index(s)))
        gain = pool[best] & left
        if not gain:
            break
        chosen.append(best)
        left -= gain
    return chosen


def write_toy_corpus(
    out_dir: str | Path,
    profiles: Iterable[ToyProfile] = PROFILES,
    commands: Iterable[str] | None = None,
    extra_sentences: int = 6,
    lex: Lexicon | None = None,
) -> dict[str, Path]:
    """Write ``<out_dir>/<profile>/<utt>.wav`` + ``.TextGrid`` pairs for each profile.

    Every profile reads a greedy cover of the commands' diphones from the toy
    transcripts plus a few profile-specific sentences. Returns profile -> dir.
    """
    lex = lex or default_lexicon()
    out_dir = Path(out_dir)
    transcripts = toy_transcripts()
    if commands is None:
        from .catalog import attack_commands, load_catalog

        commands = [t.canonical_text for t in attack_commands(load_catalog())]
    base = cover_sentences(transcripts, required_diphones(commands, lex), lex)
    dirs = {}
    for prof in profiles:
        rng = np.random.default_rng(_seed("pick", prof.id))
        rest = [s for s in transcripts if s not in base]
        extra = [rest[i] for i in sorted(rng.choice(len(rest), size=extra_sentences, replace=False))]
        d = out_dir / prof.id
        d.mkdir(parents=True, exist_ok=True)
        (d / "gender.txt").write_text(prof.gender + "\n")
        for k, text in enumerate(base + extra):
            utt = f"{prof.id}_{k:03d}"
            audio, _, grid = render_utterance(text, prof, utt, lex)
            write_wav(audio, d / f"{utt}.wav")
            (d / f"{utt}.TextGrid").write_text(grid)
            (d / f"{utt}.txt").write_text(text + "\n")
        dirs[prof.id] = d
    return dirs
