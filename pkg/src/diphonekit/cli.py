"""Command-line entry point: ``diphonekit <subcommand> ...``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .audio import AudioError, read_wav, write_wav
from .catalog import attack_commands, by_id, load_catalog
from .config import load_config
from .coverage import (
    Unreachable,
    build_frequency_table,
    coverage_curve,
    coverage_of,
    read_frequency_csv,
    read_transcripts,
    top_fraction,
)
from .inventory import AlignmentAudioMismatch, Inventory, InventoryError, extract_units, load_inventory, save_inventory
from .lexicon import LexiconError, default_lexicon, load_dictionary, required_diphones
from .synth import SynthesisError, SynthesisRequest, synthesis_gap, synthesize
from .textgrid import TextGridError, read_textgrid

log = logging.getLogger("diphonekit")


class CliError(Exception):
    pass


@dataclass
class RunManifest:
    subcommand: str
    inputs: list[str]
    config_path: str | None
    seed: int
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))
    tool_version: str = __version__
    stage_seconds: dict[str, float] = field(default_factory=dict)
    # process high-water RSS from getrusage; coarse, not comparable to periodic `top` sampling
    peak_memory_kb: int | None = None

    @contextmanager
    def stage(self, name: str):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.stage_seconds[name] = round(time.perf_counter() - t0, 4)

    def write(self, out_dir: Path) -> None:
        try:
            import resource

            self.peak_memory_kb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
        except ImportError:
            self.peak_memory_kb = None
        (out_dir / "run_manifest.json").write_text(json.dumps(asdict(self), indent=1) + "\n")


def _lexicon(args):
    return load_dictionary(Path(args.dict)) if args.dict else default_lexicon()


def _manifest(args, inputs) -> RunManifest:
    return RunManifest(args.command, [str(i) for i in inputs], args.config, args.seed)


def _seed(args, config) -> int:
    return config.seed if args.seed is None else args.seed


# -- extract ---------------------------------------------------------------


def cmd_extract(args) -> int:
    corpus = Path(args.corpus_dir)
    out = Path(args.out)
    pairs = sorted(
        (tg, tg.with_suffix(".wav")) for tg in corpus.glob("*.TextGrid") if tg.with_suffix(".wav").exists()
    )
    if not pairs:
        raise CliError(f"no aligned pairs found in {corpus}")
    gender = args.gender
    if gender is None:
        gfile = corpus / "gender.txt"
        gender = gfile.read_text().strip() if gfile.exists() else "unspecified"

    config = load_config(args.config)
    manifest = _manifest(args, [corpus])
    manifest.seed = _seed(args, config)
    warnings = 0

    def load(pair):
        tg, wav = pair
        try:
            alignment = read_textgrid(tg)
        except TextGridError as exc:
            if not args.keep_going:
                raise CliError(f"{tg}: {exc}") from None
            return None, f"{tg.name}: {exc}"
        try:
            audio = read_wav(wav)
            return extract_units(alignment, audio, args.profile, tg.stem), None
        except (AudioError, OSError) as exc:
            return None, f"{wav.name}: {exc}"
        except AlignmentAudioMismatch as exc:
            return None, f"{tg.stem}: {exc}"

    with manifest.stage("extract"):
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            loaded = list(pool.map(load, pairs))
    inv = Inventory(args.profile, gender)
    used = 0
    for units, warning in loaded:
        if warning:
            log.warning(warning)
            warnings += 1
        else:
            used += 1
            diphone_units, word_units = units
            inv.add(diphone_units)
            inv.add(word_units)
    if not used:
        raise CliError(f"no usable utterances in {corpus} ({warnings} warnings)")
    with manifest.stage("save"):
        save_inventory(inv, out)
    manifest.write(out)
    n_diphone_units = sum(map(len, inv.diphones.values()))
    n_word_units = sum(map(len, inv.words.values()))
    print(
        f"profile {inv.profile} ({inv.gender}): {used} utterances, "
        f"{n_diphone_units} diphone units ({len(inv.diphones)} distinct), "
        f"{n_word_units} word units ({len(inv.words)} distinct), {warnings} warnings"
    )
    return 0


# -- freq / coverage -------------------------------------------------------


def cmd_freq(args) -> int:
    lex = _lexicon(args)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    transcripts = [t for path in args.transcripts for t in read_transcripts(path)]
    table = build_frequency_table(transcripts, lex, label=args.label or Path(args.transcripts[0]).stem)
    out.write_text(table.to_csv())
    print(
        f"{table.total_tokens} diphone tokens, {len(table.counts)} distinct, "
        f"{table.oov_tokens} out-of-vocabulary tokens skipped"
    )
    return 0


def _parse_fractions(text: str) -> list[float]:
    try:
        fractions = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise CliError(f"bad fraction list {text!r}") from None
    if not fractions or not all(0 < f <= 1 for f in fractions):
        raise CliError("fractions must lie in (0, 1]")
    return fractions


def cmd_coverage(args) -> int:
    lex = _lexicon(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    templates = load_catalog(args.commands)
    commands = attack_commands(templates) or templates
    required = required_diphones([t.canonical_text for t in commands], lex)
    fractions = _parse_fractions(args.fractions)
    manifest = _manifest(args, args.transcripts)
    manifest.seed = _seed(args, load_config(args.config))

    with manifest.stage("frequency"):
        tables = [build_frequency_table(read_transcripts(p), lex, label=Path(p).stem) for p in args.transcripts]
        pooled = tables[0] if len(tables) == 1 else None
        if pooled is None:
            from .coverage import merge_tables

            pooled = merge_tables(tables, "pooled")
    with manifest.stage("coverage"):
        minutes = dict(coverage_curve(tables, required, fractions, mode=args.mode))
        rows = []
        for p in fractions:
            frac = coverage_of(required, top_fraction(pooled, p)).fraction
            rows.append((p, frac, minutes[p]))

    with open(out / "coverage.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["fraction", "top_fraction_coverage", "minutes_for_coverage"])
        for p, frac, m in rows:
            w.writerow([f"{p:g}", f"{frac:.6f}", "" if m is None else f"{m:.4f}"])
    manifest.write(out)
    print(f"required diphones: {len(required)}")
    for p, frac, m in rows:
        m_text = "unreachable" if m is None else f"{m:.2f} min"
        print(f"p={p:g}: top-p coverage {frac:.3f}; speech for {p:.0%} coverage: {m_text}")
    return 0


# -- synth -----------------------------------------------------------------


def cmd_synth(args) -> int:
    lex = _lexicon(args)
    config = load_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = _manifest(args, [args.inventory] + ([args.donor] if args.donor else []))
    manifest.seed = _seed(args, config)

    if args.command_id:
        templates = by_id(load_catalog(args.commands))
        if args.command_id not in templates:
            raise CliError(f"unknown command id {args.command_id!r}")
        cid, text = args.command_id, templates[args.command_id].canonical_text
    else:
        cid, text = "text", args.text

    with manifest.stage("load"):
        target = load_inventory(args.inventory)
        donor = load_inventory(args.donor) if args.donor else None
    mask = None
    if args.mask_fraction < 1.0:
        if not args.freq:
            raise CliError("--mask-fraction below 1 needs --freq <table.csv>")
        mask = top_fraction(read_frequency_csv(args.freq), args.mask_fraction)
    crossfade = args.crossfade_ms if args.crossfade_ms is not None else config.crossfade_ms
    req = SynthesisRequest(text, target, donor, mask, crossfade, not args.no_word_units)
    with manifest.stage("synthesize"):
        gap = synthesis_gap(req, lex)
        result = synthesize(req, lex)

    stem = f"{target.profile}_{cid}"
    write_wav(result.audio, out / f"{stem}.wav")
    trace = {
        "command_id": cid,
        "text": text,
        "target_profile": target.profile,
        "donor_profile": donor.profile if donor else None,
        "realized_tokens": result.realized_tokens,
        "target_fraction": result.target_fraction,
        "gap": sorted(map(str, gap)),
        "unit_trace": [e._asdict() for e in result.unit_trace],
    }
    (out / f"{stem}.json").write_text(json.dumps(trace, indent=1) + "\n")
    manifest.write(out)
    print(f"{stem}.wav: {result.audio.duration:.2f} s, target_fraction {result.target_fraction:.3f}")
    print("gap: " + (" ".join(trace["gap"]) or "(none)"))
    return 0


# -- evaluate / report -----------------------------------------------------


def cmd_evaluate(args) -> int:
    from .evaluation import run_experiment

    lex = _lexicon(args)
    config = load_config(args.config)
    seed = _seed(args, config)
    config = config.replace(seed=seed)
    if args.crossfade_ms is not None:
        config = config.replace(crossfade_ms=args.crossfade_ms)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    root = Path(args.profiles_dir)
    manifest = _manifest(args, [root])
    manifest.seed = seed

    templates = load_catalog(args.commands)
    if args.command_ids:
        index = by_id(templates)
        missing = [c for c in args.command_ids.split(",") if c not in index]
        if missing:
            raise CliError(f"unknown command ids {missing}")
        commands = [index[c] for c in args.command_ids.split(",")]
    else:
        commands = attack_commands(templates)

    dirs = sorted(p.parent for p in root.glob("*/manifest.json"))
    if args.profiles:
        wanted = args.profiles.split(",")
        dirs = [d for d in dirs if d.name in wanted]
    if not dirs:
        raise CliError(f"no inventories found under {root}")
    with manifest.stage("load"):
        inventories = {}
        for d in dirs:
            inv = load_inventory(d)
            inventories[inv.profile] = inv
    profiles = sorted(inventories)
    targets = args.targets.split(",") if args.targets else profiles
    sources = args.sources.split(",") if args.sources else profiles

    with manifest.stage("evaluate"):
        outcome = run_experiment(targets, sources, commands, config, inventories, templates, lex, jobs=args.jobs)
    (out / "results.csv").write_text(outcome.results_csv())
    (out / "results.json").write_text(outcome.results_json())
    (out / "cross_matrix.csv").write_text(outcome.matrix.to_csv())
    (out / "cross_matrix.json").write_text(outcome.matrix.to_json())
    manifest.write(out)
    hits = sum(r.intent_hit for r in outcome.results)
    print(
        f"{len(outcome.results)} cells evaluated, {len(outcome.failures)} failed; "
        f"intent hits {hits}/{len(outcome.results)} (confidence is simulated)"
    )
    return 0


def cmd_report(args) -> int:
    from .evaluation import EvalResult, summarize

    src = Path(args.results_dir)
    path = src / "results.csv"
    if not path.exists():
        raise CliError(f"{path} not found; run `diphonekit evaluate` first")
    with open(path, newline="") as f:
        results = [
            EvalResult(
                row["target"], row["source"], row["command"], row["intent_hit"] == "true",
                float(row["wer"]), int(row["confidence"]), float(row["target_fraction"]),
            )
            for row in csv.DictReader(f)
        ]
    summary = summarize(results)
    (src / "summary.json").write_text(json.dumps(summary, indent=1) + "\n")
    print(f"{'':10} {'cells':>6} {'hits':>6} {'WER':>7} {'CL300':>6}")
    for group in ("by_profile", "by_command"):
        for key, s in summary[group].items():
            print(f"{key:10} {s['cells']:>6} {s['intent_hits']:>6} {s['mean_wer']:>7.3f} {s['confidence_300']:>6}")
        print()
    if summary["overall"]:
        o = summary["overall"]
        print(f"overall: {o['intent_hits']}/{o['cells']} intents, mean WER {o['mean_wer']:.3f}")
    return 0


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI config with [experiment], [donors], [confidence], [noise]")
    common.add_argument("--seed", type=int, default=None, help="global RNG seed (overrides config)")
    common.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="worker threads")
    common.add_argument("--crossfade-ms", type=float, default=None, help="crossfade at unit joins")
    common.add_argument("--dict", help="CMUdict-format dictionary (default: bundled subset)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="diphonekit", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", parents=[common], help="build a unit inventory from WAV+TextGrid pairs")
    p.add_argument("corpus_dir")
    p.add_argument("--profile", required=True)
    p.add_argument("--gender", choices=["male", "female", "unspecified"])
    p.add_argument("--out", required=True)
    p.add_argument("--keep-going", action="store_true", help="treat TextGrid parse errors as warnings")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("freq", parents=[common], help="diphone frequency table from transcripts")
    p.add_argument("transcripts", nargs="+")
    p.add_argument("--out", required=True)
    p.add_argument("--label")
    p.set_defaults(func=cmd_freq)

    p = sub.add_parser("coverage", parents=[common], help="coverage of the command set vs. speech length")
    p.add_argument("transcripts", nargs="+", help="one corpus per path (file or directory)")
    p.add_argument("--commands", help="command catalog (default: bundled)")
    p.add_argument("--fractions", default="0.2,0.4,0.5,0.6,0.8,1.0")
    p.add_argument("--mode", choices=["pooled", "mean"], default="pooled")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_coverage)

    p = sub.add_parser("synth", parents=[common], help="synthesize one command")
    p.add_argument("--inventory", required=True)
    p.add_argument("--donor")
    what = p.add_mutually_exclusive_group(required=True)
    what.add_argument("--command-id")
    what.add_argument("--text")
    p.add_argument("--commands", help="command catalog (default: bundled)")
    p.add_argument("--mask-fraction", type=float, default=1.0)
    p.add_argument("--freq", help="frequency table CSV for --mask-fraction")
    p.add_argument("--no-word-units", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("evaluate", parents=[common], help="run the target x source x command grid")
    p.add_argument("profiles_dir", help="directory of per-profile inventories")
    p.add_argument("--commands", help="command catalog (default: bundled)")
    p.add_argument("--command-ids", help="comma-separated subset, default all AC commands")
    p.add_argument("--profiles", help="comma-separated subset of profiles to load")
    p.add_argument("--targets")
    p.add_argument("--sources")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", parents=[common], help="summarize an evaluate output directory")
    p.add_argument("results_dir")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s"
    )
    if args.jobs < 1:
        print("error: --jobs must be at least 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (CliError, InventoryError, LexiconError, SynthesisError, Unreachable, AudioError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
