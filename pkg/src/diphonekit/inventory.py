"""Word and diphone unit extraction from aligned speech, and on-disk inventories.

Diphones are cut between the midpoints of adjacent phones, so each unit holds
the second half of its left phone and the first half of its right phone.
Word units keep half of the neighbouring phone on each side.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Literal, Union

from .audio import AudioClip, read_wav, slice_clip, wav_bytes
from .lexicon import Diphone
from .textgrid import CONTAINMENT_TOL, PAU, Alignment

Gender = Literal["male", "female", "unspecified"]
MANIFEST_VERSION = 1
# alignment vs. audio length disagreement tolerated at the file tail, seconds
DURATION_TOL = 0.05


class InventoryError(ValueError):
    pass


class AlignmentAudioMismatch(InventoryError):
    pass


class ProfileMismatch(InventoryError):
    pass


class CorruptManifest(InventoryError):
    pass


class MissingBlob(InventoryError):
    pass


class ChecksumMismatch(InventoryError):
    pass


@dataclass(frozen=True)
class DiphoneUnit:
    diphone: Diphone
    clip: AudioClip
    source_utterance: str
    cut_start: float
    cut_end: float
    profile: str

    @property
    def key(self) -> Diphone:
        return self.diphone

    @property
    def duration(self) -> float:
        return self.clip.duration


@dataclass(frozen=True)
class WordUnit:
    word: str
    clip: AudioClip
    source_utterance: str
    cut_start: float
    cut_end: float
    margins: tuple[float, float]
    profile: str

    @property
    def key(self) -> str:
        return self.word

    @property
    def duration(self) -> float:
        return self.clip.duration


Unit = Union[DiphoneUnit, WordUnit]


def _sort_key(unit: Unit):
    return (len(unit.clip), unit.source_utterance, unit.cut_start)


@dataclass
class Inventory:
    profile: str
    gender: Gender = "unspecified"
    diphones: dict[Diphone, list[DiphoneUnit]] = field(default_factory=dict)
    words: dict[str, list[WordUnit]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.profile:
            raise ValueError("profile id must be non-empty")

    def add(self, units: Iterable[Unit]) -> None:
        touched = {}
        for u in units:
            if u.profile != self.profile:
                raise ProfileMismatch(f"unit from {u.profile!r} added to inventory {self.profile!r}")
            store = self.diphones if isinstance(u, DiphoneUnit) else self.words
            lst = store.setdefault(u.key, [])
            lst.append(u)
            touched[id(lst)] = lst
        for lst in touched.values():
            lst.sort(key=_sort_key)

    def available_diphones(self) -> set[Diphone]:
        return set(self.diphones)

    def unit_count(self) -> int:
        return sum(map(len, self.diphones.values())) + sum(map(len, self.words.values()))

    def without_words(self) -> "Inventory":
        return Inventory(self.profile, self.gender, dict(self.diphones), {})


def extract_units(
    alignment: Alignment, audio: AudioClip, profile: str, utterance_id: str = ""
) -> tuple[list[DiphoneUnit], list[WordUnit]]:
    if abs(alignment.duration - audio.duration) > DURATION_TOL:
        raise AlignmentAudioMismatch(
            f"alignment is {alignment.duration:.3f} s but audio is {audio.duration:.3f} s"
        )
    utt = utterance_id or Path(alignment.audio_path).stem
    phones = alignment.phones.intervals
    limit = audio.duration

    def cut(a: float, b: float) -> tuple[float, float, AudioClip]:
        a, b = min(a, limit), min(b, limit)
        return a, b, slice_clip(audio, a, b)

    diphones = []
    for p1, p2 in zip(phones, phones[1:]):
        start, end, clip = cut(p1.midpoint, p2.midpoint)
        diphones.append(DiphoneUnit(Diphone(p1.label, p2.label), clip, utt, start, end, profile))

    words = []
    for w in alignment.words:
        if w.label == PAU:
            continue
        inside = [
            k
            for k, p in enumerate(phones)
            if p.start >= w.start - CONTAINMENT_TOL and p.end <= w.end + CONTAINMENT_TOL
        ]
        if not inside:
            continue
        first, last = inside[0], inside[-1]
        start = phones[first - 1].midpoint if first > 0 else phones[first].start
        end = phones[last + 1].midpoint if last + 1 < len(phones) else phones[last].end
        start, end, clip = cut(start, end)
        margins = (phones[first].start - start, end - phones[last].end)
        words.append(WordUnit(w.label, clip, utt, start, end, margins, profile))
    return diphones, words


def build_inventory(
    pairs: Iterable[tuple[Alignment, AudioClip, str]], profile: str, gender: Gender = "unspecified"
) -> Inventory:
    inv = Inventory(profile, gender)
    for alignment, audio, utt in pairs:
        d, w = extract_units(alignment, audio, profile, utt)
        inv.add(d)
        inv.add(w)
    return inv


def merge(inventories: list[Inventory]) -> Inventory:
    if not inventories:
        raise ValueError("nothing to merge")
    if len(inventories) == 1:
        return inventories[0]
    first = inventories[0]
    for inv in inventories[1:]:
        if inv.profile != first.profile:
            raise ProfileMismatch(f"cannot merge {inv.profile!r} into {first.profile!r}")
    gender = next((i.gender for i in inventories if i.gender != "unspecified"), "unspecified")
    out = Inventory(first.profile, gender)
    for inv in inventories:
        out.add(u for lst in inv.diphones.values() for u in lst)
        out.add(u for lst in inv.words.values() for u in lst)
    return out


def pick_unit(inv: Inventory, key: Union[Diphone, str]):
    """The median-duration instance for ``key`` (lower median), or ``None``."""
    if isinstance(key, Diphone):
        units = inv.diphones.get(key)
    else:
        units = inv.words.get(key.lower())
    if not units:
        return None
    return units[(len(units) - 1) // 2]


# -- persistence -------------------------------------------------------------


def save_inventory(inv: Inventory, directory: Union[str, Path]) -> None:
    directory = Path(directory)
    (directory / "units").mkdir(parents=True, exist_ok=True)
    records = []
    written = set()
    for kind, store in (("diphone", inv.diphones), ("word", inv.words)):
        for key in sorted(store, key=str):
            for u in store[key]:
                blob = wav_bytes(u.clip)
                digest = hashlib.sha256(blob).hexdigest()
                if digest not in written:
                    (directory / "units" / f"{digest}.wav").write_bytes(blob)
                    written.add(digest)
                rec = {
                    "kind": kind,
                    "key": str(key),
                    "source_utterance": u.source_utterance,
                    "cut_start": u.cut_start,
                    "cut_end": u.cut_end,
                    "duration": u.duration,
                    "blob": digest,
                }
                if kind == "word":
                    rec["margins"] = list(u.margins)
                records.append(rec)
    manifest = {
        "version": MANIFEST_VERSION,
        "profile": inv.profile,
        "gender": inv.gender,
        "units": records,
    }
    (directory / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")


def load_inventory(directory: Union[str, Path]) -> Inventory:
    directory = Path(directory)
    try:
        manifest = json.loads((directory / "manifest.json").read_text())
        profile = manifest["profile"]
        gender = manifest.get("gender", "unspecified")
        records = manifest["units"]
    except FileNotFoundError:
        raise CorruptManifest(f"no manifest.json in {directory}") from None
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise CorruptManifest(f"{directory}/manifest.json: {exc}") from None

    inv = Inventory(profile, gender)
    cache: dict[str, AudioClip] = {}
    units: list[Unit] = []
    for n, rec in enumerate(records):
        try:
            kind, key, digest = rec["kind"], rec["key"], rec["blob"]
            utt, start, end = rec["source_utterance"], rec["cut_start"], rec["cut_end"]
        except (KeyError, TypeError) as exc:
            raise CorruptManifest(f"unit record {n}: missing field {exc}") from None
        if digest not in cache:
            path = directory / "units" / f"{digest}.wav"
            if not path.exists():
                raise MissingBlob(f"unit {kind} {key!r} ({utt}): blob {digest}.wav not found")
            blob = path.read_bytes()
            if hashlib.sha256(blob).hexdigest() != digest:
                raise ChecksumMismatch(f"unit {kind} {key!r}: blob {digest}.wav is corrupt")
            cache[digest] = read_wav(blob)
        clip = cache[digest]
        if kind == "diphone":
            try:
                diphone = Diphone.parse(key)
            except ValueError as exc:
                raise CorruptManifest(f"unit record {n}: {exc}") from None
            units.append(DiphoneUnit(diphone, clip, utt, start, end, profile))
        elif kind == "word":
            units.append(WordUnit(key, clip, utt, start, end, tuple(rec["margins"]), profile))
        else:
            raise CorruptManifest(f"unit record {n}: unknown kind {kind!r}")
    inv.add(units)
    return inv
