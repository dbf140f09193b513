"""Coverage of the attack-command diphones against speech length.

Usage: python scripts/run_coverage_experiment.py OUT_DIR [TRANSCRIPTS ...]

Prints and writes OUT_DIR/coverage_curve.csv with, for each target coverage
level, the minutes of speech needed (750 diphones per minute) and the coverage
obtained by keeping only the top-p most popular diphones. Defaults to the
bundled toy transcripts.
"""

import argparse
import csv
from importlib import resources
from pathlib import Path

from diphonekit.catalog import attack_commands, load_catalog
from diphonekit.coverage import build_frequency_table, coverage_curve, coverage_of, read_transcripts, top_fraction
from diphonekit.lexicon import default_lexicon, required_diphones

LEVELS = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("out_dir")
    parser.add_argument("transcripts", nargs="*")
    parser.add_argument("--mode", choices=["pooled", "mean"], default="pooled")
    args = parser.parse_args()
    lex = default_lexicon()
    paths = args.transcripts or [str(resources.files("diphonekit") / "data" / "toy_transcripts.txt")]
    tables = [build_frequency_table(read_transcripts(p), lex, Path(p).stem) for p in paths]
    required = required_diphones([t.canonical_text for t in attack_commands(load_catalog())], lex)
    minutes = dict(coverage_curve(tables, required, LEVELS, mode=args.mode))
    pooled = build_frequency_table([t for p in paths for t in read_transcripts(p)], lex)

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "coverage_curve.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["level", "minutes_for_level", "top_p_coverage"])
        print(f"{'level':>6} {'minutes':>8} {'top-p cov':>10}")
        for p in LEVELS:
            m = minutes[p]
            cov = coverage_of(required, top_fraction(pooled, p)).fraction
            w.writerow([p, "" if m is None else f"{m:.4f}", f"{cov:.6f}"])
            print(f"{p:>6.1f} {'n/a' if m is None else f'{m:.2f}':>8} {cov:>10.3f}")
    print(f"{len(required)} required diphones; corpus {pooled.total_tokens / 750:.1f} min")


if __name__ == "__main__":
    main()
