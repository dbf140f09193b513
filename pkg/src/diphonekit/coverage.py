"""Diphone frequency statistics and coverage against a required diphone set."""

from __future__ import annotations

import csv
import io
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Literal, Mapping, Sequence

from .lexicon import Diphone, Lexicon, normalize_text, plan_utterance

# speech-length conversion used throughout the coverage analysis
DIPHONES_PER_MINUTE = 750


class EmptyTable(ValueError):
    pass


class Unreachable(ValueError):
    def __init__(self, target: float, max_fraction: float):
        self.target = target
        self.max_fraction = max_fraction
        super().__init__(f"coverage {target:.3f} unreachable; corpus attains {max_fraction:.3f}")


@dataclass(frozen=True)
class DiphoneFrequencyTable:
    counts: Mapping[Diphone, int]
    total_tokens: int
    corpus_label: str = ""
    oov_tokens: int = 0
    # diphone tokens in corpus order, used for speech-length simulation
    sequence: tuple[Diphone, ...] = field(default=(), compare=False, repr=False)

    def popularity(self) -> list[Diphone]:
        return sorted(self.counts, key=lambda d: (-self.counts[d], str(d)))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["diphone", "count"])
        for d in self.popularity():
            w.writerow([str(d), self.counts[d]])
        return buf.getvalue()


@dataclass(frozen=True)
class CoverageReport:
    required: frozenset[Diphone]
    available: frozenset[Diphone]
    covered: frozenset[Diphone]
    missing: frozenset[Diphone]
    fraction: float


def _transcript_diphones(text: str, lex: Lexicon) -> tuple[list[Diphone], int]:
    tokens = normalize_text(text)
    known = [t for t in tokens if t in lex]
    plan = plan_utterance(known, lex)
    return list(plan.diphones), len(tokens) - len(known)


def build_frequency_table(
    transcripts: Iterable[str], lex: Lexicon, label: str = ""
) -> DiphoneFrequencyTable:
    """Count diphone tokens over transcripts; OOV words are skipped and counted."""
    seq: list[Diphone] = []
    oov = 0
    for text in transcripts:
        d, skipped = _transcript_diphones(text, lex)
        seq.extend(d)
        oov += skipped
    counts = Counter(seq)
    return DiphoneFrequencyTable(dict(counts), len(seq), label, oov, tuple(seq))


def merge_tables(tables: Sequence[DiphoneFrequencyTable], label: str = "") -> DiphoneFrequencyTable:
    counts: Counter = Counter()
    seq: list[Diphone] = []
    for t in tables:
        counts.update(t.counts)
        seq.extend(t.sequence)
    return DiphoneFrequencyTable(
        dict(counts), sum(t.total_tokens for t in tables), label, sum(t.oov_tokens for t in tables), tuple(seq)
    )


def read_frequency_csv(path: str | Path, label: str = "") -> DiphoneFrequencyTable:
    counts = {}
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            counts[Diphone.parse(row["diphone"])] = int(row["count"])
    return DiphoneFrequencyTable(counts, sum(counts.values()), label or Path(path).stem)


def top_fraction(table: DiphoneFrequencyTable, p: float) -> set[Diphone]:
    """The ``ceil(p * distinct)`` most popular diphones."""
    if not 0 < p <= 1:
        raise ValueError(f"fraction must be in (0, 1], got {p}")
    if not table.counts:
        raise EmptyTable("frequency table has no diphones")
    order = table.popularity()
    # guard against 0.1*10 = 1.0000000000000002 style ceilings
    k = math.ceil(round(p * len(order), 9))
    return set(order[:k])


def coverage_of(required: Iterable[Diphone], available: Iterable[Diphone]) -> CoverageReport:
    required = frozenset(required)
    available = frozenset(available)
    covered = required & available
    fraction = len(covered) / len(required) if required else 1.0
    return CoverageReport(required, available, covered, required - covered, fraction)


def tokens_for_coverage(sequence: Sequence[Diphone], required: set[Diphone], target_fraction: float) -> int:
    """Number of leading corpus tokens after which coverage first reaches the target."""
    if not 0 < target_fraction <= 1:
        raise ValueError(f"target fraction must be in (0, 1], got {target_fraction}")
    if not required:
        return 0
    need = math.ceil(round(target_fraction * len(required), 9))
    seen: set[Diphone] = set()
    for t, d in enumerate(sequence, 1):
        if d in required and d not in seen:
            seen.add(d)
            if len(seen) >= need:
                return t
    raise Unreachable(target_fraction, len(seen) / len(required))


def estimate_minutes_for_coverage(
    table: DiphoneFrequencyTable, required: set[Diphone], target_fraction: float
) -> float:
    if required and not table.sequence and table.total_tokens:
        raise ValueError("table has no token sequence (loaded from CSV?); rebuild it from transcripts")
    return tokens_for_coverage(table.sequence, set(required), target_fraction) / DIPHONES_PER_MINUTE


def coverage_curve(
    tables: Sequence[DiphoneFrequencyTable],
    required: set[Diphone],
    fractions: Sequence[float],
    mode: Literal["pooled", "mean"] = "pooled",
) -> list[tuple[float, float | None]]:
    """Minutes of speech needed per target fraction.

    ``pooled`` concatenates all corpora into one token stream; ``mean``
    averages the per-corpus estimates over corpora that reach the target.
    ``None`` marks an unreachable fraction.
    """
    rows = []
    for p in fractions:
        if mode == "pooled":
            try:
                rows.append((p, estimate_minutes_for_coverage(merge_tables(tables), required, p)))
            except Unreachable:
                rows.append((p, None))
        elif mode == "mean":
            vals = []
            for t in tables:
                try:
                    vals.append(estimate_minutes_for_coverage(t, required, p))
                except Unreachable:
                    pass
            rows.append((p, sum(vals) / len(vals) if vals else None))
        else:
            raise ValueError(f"unknown mode {mode!r}")
    return rows


def read_transcripts(path: str | Path) -> list[str]:
    """One utterance per line from a file, or one utterance per ``*.txt`` file in a directory."""
    path = Path(path)
    if path.is_dir():
        return [p.read_text(encoding="utf-8").strip() for p in sorted(path.glob("*.txt"))]
    return [line.strip() for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]
