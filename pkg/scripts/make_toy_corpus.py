"""Generate the synthetic toy corpus and extract one inventory per profile.

Usage: python scripts/make_toy_corpus.py OUT_DIR

Writes OUT_DIR/corpus/<profile>/ (WAV + TextGrid pairs) and
OUT_DIR/inventories/<profile>/ ready for `diphonekit evaluate`.
"""

import argparse
import sys
from pathlib import Path

from diphonekit.cli import main as cli
from diphonekit.toy import write_toy_corpus


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("out_dir")
    parser.add_argument("--extra-sentences", type=int, default=6)
    args = parser.parse_args()
    out = Path(args.out_dir)
    dirs = write_toy_corpus(out / "corpus", extra_sentences=args.extra_sentences)
    for profile, d in dirs.items():
        code = cli(["extract", str(d), "--profile", profile, "--out", str(out / "inventories" / profile)])
        if code:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
