"""Desk-scale evaluation: WER, intent matching, simulated speaker-match confidence,
and batch experiment grids over (target profile, source profile, command).

The confidence channel is a simulation. It maps the share of synthesized
units that came from the target's own speech to one of the four levels a
voice assistant reports (0, 100, 200, 300) using declared calibration
constants; it does not model any real scorer.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, Iterable, Mapping, Optional, Sequence

import numpy as np

from .catalog import IntentTemplate
from .config import ConfidenceThresholds, ExperimentConfig, NoiseModel
from .coverage import read_frequency_csv, top_fraction
from .inventory import Inventory
from .lexicon import Lexicon, LexiconError, default_lexicon
from .synth import SynthesisError, SynthesisRequest, SynthesisResult, synthesize

log = logging.getLogger(__name__)

CONFIDENCE_LEVELS = (0, 100, 200, 300)


class EmptyReference(ValueError):
    pass


def edit_distance(a: Sequence[str], b: Sequence[str]) -> int:
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, 1):
        cur = [i] + [0] * len(b)
        for j, y in enumerate(b, 1):
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x != y))
        prev = cur
    return prev[-1]


def word_error_rate(reference: Sequence[str], hypothesis: Sequence[str]) -> float:
    """Word-level Levenshtein distance divided by the reference length."""
    if not reference:
        raise EmptyReference("reference transcript is empty")
    return edit_distance(reference, hypothesis) / len(reference)


def match_intent(transcript: Sequence[str], templates: Sequence[IntentTemplate]) -> Optional[str]:
    """Among templates whose required keywords all occur, pick the one closest to
    the transcript by WER against its canonical text; ties go to keyword recall."""
    words = set(transcript)
    best = None
    best_score = None
    for t in templates:
        if not t.required_keywords <= words:
            continue
        keywords = t.keywords
        recall = len(keywords & words) / len(keywords) if keywords else 1.0
        score = (-word_error_rate(t.tokens, list(transcript)), recall)
        if best_score is None or score > best_score:
            best, best_score = t.id, score
    return best


def simulate_confidence(
    target_fraction: float, rng_seed: int, thresholds: ConfidenceThresholds = ConfidenceThresholds()
) -> int:
    if not 0 <= target_fraction <= 1:
        raise ValueError(f"target fraction must be in [0, 1], got {target_fraction}")
    th = thresholds
    if target_fraction >= th.high:
        return 300
    if target_fraction >= th.coin:
        return 300 if np.random.default_rng(rng_seed).random() < th.coin_p300 else 200
    if target_fraction >= th.medium:
        return 200
    if target_fraction >= th.low:
        return 100
    return 0


def cell_seed(target: str, source: str, command: str, seed: int, stream: str = "") -> int:
    key = f"{target}|{source}|{command}|{seed}|{stream}".encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "little")


def noisy_transcript(
    result: SynthesisResult, rng: np.random.Generator, noise: NoiseModel, vocabulary: Sequence[str]
) -> list[str]:
    """Realized tokens with seeded word substitutions driven by unit provenance."""
    out = []
    for token, foreign, n in result.word_provenance():
        p = noise.base + noise.donor_rate * (foreign / n) + noise.join_rate * (n - 1)
        if p > 0 and rng.random() < min(p, 1.0):
            # draw from all but the last word; the last one stands in when the draw equals the token
            sub = vocabulary[int(rng.integers(len(vocabulary) - 1))]
            out.append(sub if sub != token else vocabulary[-1])
        else:
            out.append(token)
    return out


@dataclass(frozen=True)
class EvalResult:
    target_profile: str
    source_profile: str
    command_id: str
    intent_hit: bool
    wer: float
    confidence: int
    target_fraction: float
    transcript: tuple[str, ...] = ()


@dataclass(frozen=True)
class CellFailure:
    target_profile: str
    source_profile: str
    command_id: str
    error: str


@dataclass(frozen=True)
class CrossMatrix:
    profiles: tuple[str, ...]
    # cells[i][j]: confidence for target profiles[i], source profiles[j]; None if every command failed
    cells: tuple[tuple[Optional[int], ...], ...]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["target\\source", *self.profiles])
        for p, row in zip(self.profiles, self.cells):
            w.writerow([p, *("" if c is None else c for c in row)])
        return buf.getvalue()

    def to_json(self) -> str:
        payload = {"rows": list(self.profiles), "cols": list(self.profiles), "values": [list(r) for r in self.cells]}
        return json.dumps(payload, indent=1) + "\n"


@dataclass
class ExperimentOutcome:
    results: list[EvalResult]
    failures: list[CellFailure]
    matrix: CrossMatrix

    def results_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["target", "source", "command", "intent_hit", "wer", "confidence", "target_fraction"])
        for r in self.results:
            w.writerow([
                r.target_profile, r.source_profile, r.command_id, str(r.intent_hit).lower(),
                f"{r.wer:.6f}", r.confidence, f"{r.target_fraction:.6f}",
            ])
        return buf.getvalue()

    def results_json(self) -> str:
        rows = [asdict(r) for r in self.results]
        fails = [asdict(f) for f in self.failures]
        return json.dumps({"results": rows, "failures": fails}, indent=1) + "\n"


Transcriber = Callable[[SynthesisResult, np.random.Generator], list[str]]


def _match_fraction(result: SynthesisResult, target: str, genders: Mapping[str, str], affinity: float) -> float:
    """Share of units from the target voice, plus optional credit for same-gender units."""
    if not result.unit_trace:
        return 1.0 if result.target_profile == target else 0.0
    g = genders.get(target, "unspecified")
    score = 0.0
    for e in result.unit_trace:
        if e.source_profile == target:
            score += 1.0
        elif g != "unspecified" and genders.get(e.source_profile) == g:
            score += affinity
    return score / len(result.unit_trace)


def _lower_median(values: list[int]) -> Optional[int]:
    if not values:
        return None
    return sorted(values)[(len(values) - 1) // 2]


def run_experiment(
    targets: Sequence[str],
    sources: Sequence[str],
    commands: Sequence[IntentTemplate],
    config: ExperimentConfig,
    inventories: Mapping[str, Inventory],
    templates: Optional[Sequence[IntentTemplate]] = None,
    lex: Optional[Lexicon] = None,
    jobs: int = 1,
    transcriber: Optional[Transcriber] = None,
) -> ExperimentOutcome:
    """Evaluate every (target, source, command) cell.

    The command is synthesized from the source profile's units (with the
    configured same-gender donor filling gaps) and scored against the target
    profile. Failed cells are reported, never fatal.
    """
    lex = lex or default_lexicon()
    templates = list(templates or commands)
    vocabulary = lex.words()
    genders = {p: inv.gender for p, inv in inventories.items()}
    mask = None
    if config.mask_fraction < 1.0:
        if not config.freq_table:
            raise ValueError("mask_fraction < 1 requires a freq_table in the config")
        mask = top_fraction(read_frequency_csv(config.freq_table), config.mask_fraction)

    def donor_for(source: str) -> Optional[Inventory]:
        gender = genders.get(source, "unspecified")
        donor = config.donors.get(gender)
        if donor and donor != source and donor in inventories:
            return inventories[donor]
        if donor == source and gender != "unspecified":
            # the configured donor cannot lend to itself; use the next voice of that gender
            others = sorted(p for p, g in genders.items() if g == gender and p != source)
            return inventories[others[0]] if others else None
        return None

    def run_cell(cell):
        target, source, cmd = cell
        try:
            req = SynthesisRequest(
                cmd.canonical_text,
                inventories[source],
                donor_for(source),
                mask,
                config.crossfade_ms,
                config.use_word_units,
            )
            result = synthesize(req, lex)
        except (SynthesisError, LexiconError, ValueError) as exc:
            return CellFailure(target, source, cmd.id, str(exc))
        rng = np.random.default_rng(cell_seed(target, source, cmd.id, config.seed, "transcript"))
        if transcriber is not None:
            transcript = list(transcriber(result, rng))
        else:
            transcript = noisy_transcript(result, rng, config.noise, vocabulary)
        fraction = _match_fraction(result, target, genders, config.same_gender_affinity)
        fraction = min(max(fraction, 0.0), 1.0)
        confidence = simulate_confidence(
            fraction, cell_seed(target, source, cmd.id, config.seed, "confidence"), config.confidence
        )
        return EvalResult(
            target,
            source,
            cmd.id,
            match_intent(transcript, templates) == cmd.id,
            word_error_rate(cmd.tokens, transcript),
            confidence,
            fraction,
            tuple(transcript),
        )

    cells = [(t, s, c) for t in targets for s in sources for c in commands]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(run_cell, cells))
    else:
        outcomes = [run_cell(c) for c in cells]

    results = [o for o in outcomes if isinstance(o, EvalResult)]
    failures = [o for o in outcomes if isinstance(o, CellFailure)]
    for f in failures:
        log.warning("cell %s/%s/%s failed: %s", f.target_profile, f.source_profile, f.command_id, f.error)

    profiles = tuple(dict.fromkeys([*targets, *sources]))
    levels: dict[tuple[str, str], list[int]] = {}
    for r in results:
        levels.setdefault((r.target_profile, r.source_profile), []).append(r.confidence)
    matrix = CrossMatrix(
        profiles, tuple(tuple(_lower_median(levels.get((t, s), [])) for s in profiles) for t in profiles)
    )
    return ExperimentOutcome(results, failures, matrix)


def summarize(results: Iterable[EvalResult]) -> dict:
    """Intent-hit counts and mean WER per profile and per command."""
    by_profile: dict[str, list[EvalResult]] = {}
    by_command: dict[str, list[EvalResult]] = {}
    results = list(results)
    for r in results:
        by_profile.setdefault(r.source_profile, []).append(r)
        by_command.setdefault(r.command_id, []).append(r)

    def agg(rs):
        return {
            "cells": len(rs),
            "intent_hits": sum(r.intent_hit for r in rs),
            "mean_wer": sum(r.wer for r in rs) / len(rs),
            "confidence_300": sum(r.confidence == 300 for r in rs),
        }

    return {
        "overall": agg(results) if results else {},
        "by_profile": {k: agg(v) for k, v in sorted(by_profile.items())},
        "by_command": {k: agg(v) for k, v in sorted(by_command.items())},
    }
