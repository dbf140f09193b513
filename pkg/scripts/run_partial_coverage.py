"""Matched-pair confidence when the target only has its most popular diphones.

Usage: python scripts/run_partial_coverage.py INVENTORIES_DIR [--seeds 200]

For each popularity cut-off the target keeps only the top-p diphones (word
units included only when all their diphones survive) and a same-gender donor
fills the rest. Reports the mean target-unit fraction and the share of
simulated 300-level responses over seeds and attack commands.
"""

import argparse
import tempfile
from importlib import resources
from pathlib import Path

from diphonekit.catalog import attack_commands, load_catalog
from diphonekit.config import ExperimentConfig, load_config
from diphonekit.coverage import build_frequency_table, read_transcripts
from diphonekit.evaluation import run_experiment
from diphonekit.inventory import load_inventory
from diphonekit.lexicon import default_lexicon

CUTOFFS = [0.2, 0.4, 0.5, 0.6, 0.8, 1.0]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("inventories")
    parser.add_argument("--config")
    parser.add_argument("--seeds", type=int, default=200)
    args = parser.parse_args()
    lex = default_lexicon()
    catalog = load_catalog()
    commands = attack_commands(catalog)
    inventories = {}
    for d in sorted(Path(args.inventories).glob("*/manifest.json")):
        inv = load_inventory(d.parent)
        inventories[inv.profile] = inv
    base = load_config(args.config) if args.config else ExperimentConfig(donors={"female": "p288", "male": "p360"})

    transcripts = read_transcripts(resources.files("diphonekit") / "data" / "toy_transcripts.txt")
    with tempfile.TemporaryDirectory() as tmp:
        freq = Path(tmp) / "freq.csv"
        freq.write_text(build_frequency_table(transcripts, lex).to_csv())
        print(f"{'p':>5} {'target':>7} {'fraction':>9} {'300-rate':>9}")
        for p in CUTOFFS:
            for target, inv in inventories.items():
                cfg = base.replace(mask_fraction=p, freq_table=str(freq))
                fractions, top = [], 0
                for seed in range(args.seeds):
                    out = run_experiment([target], [target], commands, cfg.replace(seed=seed), inventories, catalog, lex)
                    fractions += [r.target_fraction for r in out.results]
                    top += sum(r.confidence == 300 for r in out.results)
                    if out.failures:
                        print(f"  {len(out.failures)} cells failed for {target} at p={p}")
                n = len(fractions) or 1
                print(f"{p:>5.1f} {target:>7} {sum(fractions) / n:>9.3f} {top / n:>9.3f}")


if __name__ == "__main__":
    main()
