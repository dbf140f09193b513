"""Extract the bundled pronunciation subset from a full CMUdict file.

Usage: python scripts/build_lexicon_subset.py /path/to/cmudict.dict

Only words occurring in the bundled transcripts or command catalog are kept,
so the shipped dictionary stays small. The CMU dictionary license applies to
the output file.
"""

import re
import sys
from pathlib import Path

DATA = Path(__file__).resolve().parents[1] / "src" / "diphonekit" / "data"
TOKEN = re.compile(r"[a-z0-9]+(?:'[a-z0-9]+)*")


def vocabulary() -> set[str]:
    words: set[str] = set()
    for line in (DATA / "toy_transcripts.txt").read_text().splitlines():
        words.update(TOKEN.findall(line.lower()))
    for line in (DATA / "commands.tsv").read_text().splitlines():
        if line.startswith("#") or not line.strip():
            continue
        words.update(TOKEN.findall(line.split("\t")[1].lower()))
    return words


def main(path: str) -> None:
    vocab = vocabulary()
    out = [
        ";;; Subset of the CMU Pronouncing Dictionary (cmudict 0.7b lineage).",
        ";;; Copyright (C) 1993-2015 Carnegie Mellon University. BSD-style license.",
    ]
    found = set()
    for line in Path(path).read_text(encoding="latin-1").splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        head, *phones = line.split()
        word = re.sub(r"\(\d+\)$", "", head).lower()
        if word in vocab:
            out.append(f"{head.upper()}  {' '.join(phones)}")
            found.add(word)
    missing = sorted(vocab - found)
    if missing:
        sys.exit(f"missing from dictionary: {missing}")
    (DATA / "cmudict_subset.dict").write_text("\n".join(out) + "\n")
    print(f"wrote {len(found)} words")


if __name__ == "__main__":
    main(sys.argv[1])
