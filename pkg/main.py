"""
Main Entry Point
Orchestrates the corpus pipeline: load manifest → parse and align → normalize → merge → filter → clean,
plus splitting, export, MT scoring and localization QA
"""

import argparse
import json
import logging
import os
import sys
from typing import Any, Dict, List, Optional, Sequence

import yaml

# Make the src package importable when run as a script
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from src import __version__
from src.config import PipelineConfig
from src.corpus import (
    PRNG_NAME,
    BiSegment,
    CleanReport,
    MetaFilter,
    SplitSpec,
    clean,
    emit_recipe,
    filter_meta,
    length_profile,
    merge,
    normalize_segments,
    segments_to_units,
    split,
    split_table,
    stats,
    stats_by_game,
)
from src.data_loader import DataLoader, load_corpus, load_lines, read_file, save_corpus
from src.data_normalizer import TypographyNormalizer
from src.errors import LocbenchError
from src.evaluator import compare, parse_metrics, score_system, write_report
from src.locfile import read_bitext, write_bitext, write_tmx
from src.qa_engine import QaConfig, findings_table, load_annotations, run_suite, write_findings_jsonl

logger = logging.getLogger("locbench")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class LocbenchPipeline:
    """Runs each subcommand against one pipeline configuration."""

    def __init__(self, config: Optional[PipelineConfig] = None):
        """
        Initialize the pipeline.

        Args:
            config: Pipeline settings; defaults to config/pipeline.yaml
        """
        self.config = config or PipelineConfig.load()
        self.normalizer = TypographyNormalizer(config_file=self.config.resolve(self.config.typography))
        self.data_loader = DataLoader(
            source_lang=self.config.source_lang,
            target_lang=self.config.target_lang,
            workers=self.config.workers,
        )

    # -- corpus ------------------------------------------------------------

    def build(self, manifest_path: str, out_dir: str) -> CleanReport:
        """
        Build a clean corpus from a manifest of games.

        Args:
            manifest_path: YAML/JSON manifest listing each game's files
            out_dir: Directory receiving corpus.jsonl and the reports

        Returns:
            CleanReport covering filter and clean removals
        """
        print(f"Building corpus from: {manifest_path}")

        print("Step 1: Loading manifest...")
        manifest = self.data_loader.load_manifest(manifest_path)
        print(f"  ✓ {len(manifest.entries)} games")

        print("Step 2: Parsing and aligning localization files...")
        parsed = self.data_loader.load_entries(manifest)
        for entry, segments in zip(manifest.entries, parsed):
            print(f"  {entry.game_title}: {len(segments):,} segments")

        print("Step 3: Normalizing typography...")
        parsed = [normalize_segments(segments, self.normalizer) for segments in parsed]

        print("Step 4: Merging games...")
        merged = merge(manifest, parsed)
        for warning in merged.warnings:
            print(f"  Warning: {warning['message']}")

        print("Step 5: Filtering...")
        predicate = MetaFilter(exclude=self.config.exclude_meta, max_src_tokens=self.config.max_src_tokens)
        filtered, removed = filter_meta(merged.segments, predicate)
        print(f"  Removed {removed:,} segments")

        print("Step 6: Cleaning...")
        segments, report = clean(filtered, self.normalizer)
        report.input_count += removed
        report.removed_by_filter = removed

        os.makedirs(out_dir, exist_ok=True)
        save_corpus(segments, os.path.join(out_dir, "corpus.jsonl"))
        write_report({**report.to_dict(), "warnings": merged.warnings, "tool_version": __version__},
                     report.format(), os.path.join(out_dir, "clean_report.json"))
        self._write_stats(segments, out_dir)
        games = stats_by_game(segments)
        write_report({"tool_version": __version__, "games": json.loads(games.to_json(orient="index"))},
                     games.to_string(), os.path.join(out_dir, "games.json"))

        print("\nBuild completed successfully!")
        print(f"  ✓ {report.output_count:,} segments saved to: {os.path.join(out_dir, 'corpus.jsonl')}")
        return report

    def clean_corpus(self, corpus_path: str, out_dir: str) -> CleanReport:
        print("Step 1: Loading corpus...")
        segments = load_corpus(corpus_path)
        print("Step 2: Cleaning...")
        kept, report = clean(segments, self.normalizer)
        os.makedirs(out_dir, exist_ok=True)
        save_corpus(kept, os.path.join(out_dir, "corpus.clean.jsonl"))
        write_report({**report.to_dict(), "tool_version": __version__}, report.format(),
                     os.path.join(out_dir, "clean_report.json"))
        print(report.format())
        return report

    def split_corpus(self, corpus_path: str, out_dir: str, spec: SplitSpec) -> Dict[str, List[BiSegment]]:
        """
        Draw validation and test sets and write the three split files.

        Args:
            corpus_path: JSON-lines corpus
            out_dir: Output directory
            spec: Split sizes, seed and scope

        Returns:
            Mapping of split name to segments
        """
        print("Step 1: Loading corpus...")
        segments = load_corpus(corpus_path)
        print(f"Step 2: Splitting with {PRNG_NAME}, seed {spec.seed}...")
        splits = split(segments, spec)

        os.makedirs(out_dir, exist_ok=True)
        for name, part in splits.items():
            save_corpus(part, os.path.join(out_dir, f"{name}.jsonl"))
        table = split_table(splits)
        data = {
            "tool_version": __version__,
            "prng": PRNG_NAME,
            "seed": spec.seed,
            "valid_size": spec.valid_size,
            "test_size": spec.test_size,
            "scope": spec.scope,
            "splits": json.loads(table.to_json(orient="index")),
        }
        write_report(data, table.to_string(), os.path.join(out_dir, "split.json"))
        print(table.to_string())
        return splits

    def corpus_stats(self, corpus_path: Optional[str] = None, src_path: Optional[str] = None,
                     tgt_path: Optional[str] = None, out_dir: Optional[str] = None) -> Dict[str, Any]:
        if corpus_path:
            segments = load_corpus(corpus_path)
        else:
            pairs = read_bitext(read_file(src_path), read_file(tgt_path))
            segments = [BiSegment.create(s, t, self.config.source_lang, self.config.target_lang)
                        for s, t in pairs]
        data = self._stats_data(segments)
        print(json.dumps(data, indent=2, ensure_ascii=False))
        if out_dir:
            self._write_stats(segments, out_dir)
        return data

    def export(self, corpus_path: str, out_dir: str, prefix: str = "corpus", tmx: bool = False) -> List[str]:
        """
        Export a corpus as line-aligned plain text, and optionally TMX.

        Returns:
            Paths written
        """
        segments = load_corpus(corpus_path)
        units = segments_to_units(segments)
        src_lang = segments[0].source_lang if segments else self.config.source_lang
        tgt_lang = segments[0].target_lang if segments else self.config.target_lang

        os.makedirs(out_dir, exist_ok=True)
        base = os.path.join(out_dir, prefix)
        written = []
        for data, lang in zip(write_bitext(units), (src_lang, tgt_lang)):
            path = f"{base}.{lang}"
            with open(path, "wb") as f:
                f.write(data)
            written.append(path)
        if tmx:
            path = f"{base}.tmx"
            with open(path, "wb") as f:
                f.write(write_tmx(units))
            written.append(path)
        for path in written:
            print(f"  ✓ {path}")
        return written

    # -- scoring -----------------------------------------------------------

    def score(self, hyp_path: str, ref_path: str, out_dir: str, system: Optional[str] = None,
              metrics: Optional[Sequence[str]] = None, detok_lang: Optional[str] = None):
        hyps = load_lines(hyp_path)
        refs = load_lines(ref_path)
        name = system or os.path.splitext(os.path.basename(hyp_path))[0]
        report = score_system(name, hyps, refs, parse_metrics(metrics), self.config.metric_overrides,
                              detok_lang, self.config.workers)
        report.save_report(os.path.join(out_dir, "score.json"))
        report.print_summary()
        return report

    def compare(self, ref_path: str, systems: Dict[str, str], out_dir: str,
                detok_lang: Optional[str] = None):
        refs = load_lines(ref_path)
        outputs = {name: load_lines(path) for name, path in systems.items()}
        report = compare(outputs, refs, detok_lang, self.config.workers, self.config.metric_overrides)
        report.save_report(os.path.join(out_dir, "comparison.json"))
        print(report.render_table())
        return report

    # -- QA ----------------------------------------------------------------

    def qa(self, corpus_path: str, out_dir: str, qa_config: Optional[str] = None,
           termbase: Optional[str] = None, lexicon: Optional[str] = None,
           annotations: Optional[str] = None):
        """
        Run the QA checks over a corpus.

        Args:
            corpus_path: JSON-lines corpus
            out_dir: Directory receiving findings.jsonl and qa_summary reports
            qa_config: QA config file; defaults to the pipeline's qa.config
            termbase: Termbase CSV overriding the QA config
            lexicon: Gender lexicon overriding the QA config
            annotations: Manual findings to merge into the result
        """
        print("Step 1: Loading corpus and QA resources...")
        segments = load_corpus(corpus_path)
        config = QaConfig.load(
            qa_config or self.config.resolve(self.config.qa_config),
            termbase or self.config.resolve(self.config.termbase),
            lexicon or self.config.resolve(self.config.gender_lexicon),
        )
        manual = load_annotations(annotations) if annotations else []

        print("Step 2: Running checks...")
        result = run_suite(segments, config, manual)

        os.makedirs(out_dir, exist_ok=True)
        write_findings_jsonl(result.findings, os.path.join(out_dir, "findings.jsonl"))
        table = findings_table(result.findings)
        text = result.format() + "\n\n" + table.to_string()
        write_report({**result.to_dict(), "tool_version": __version__}, text,
                     os.path.join(out_dir, "qa_summary.json"))
        print(result.format())
        return result

    def recipe(self, overrides: Dict[str, Any], out_dir: str) -> str:
        text = emit_recipe(overrides)
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "recipe.json"), "w", encoding="utf-8") as f:
            f.write(text + "\n")
        print(text)
        return text

    # -- helpers -----------------------------------------------------------

    def _stats_data(self, segments: Sequence[BiSegment]) -> Dict[str, Any]:
        return {
            "tool_version": __version__,
            **stats(segments).to_dict(),
            "source_length": length_profile(segments),
        }

    def _write_stats(self, segments: Sequence[BiSegment], out_dir: str):
        data = self._stats_data(segments)
        lines = [f"{key:<12}{value:>12,}" for key, value in data.items() if isinstance(value, int)]
        write_report(data, "\n".join(lines), os.path.join(out_dir, "stats.json"))


# ---------------------------------------------------------------------------
# Command line
# ---------------------------------------------------------------------------

class LocbenchArgumentParser(argparse.ArgumentParser):
    """Exits with the usage status instead of argparse's default 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_assignments(values: Optional[Sequence[str]], typed: bool = False) -> Dict[str, Any]:
    """``key=value`` pairs; typed values are parsed as YAML scalars."""
    result = {}
    for item in values or []:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise argparse.ArgumentTypeError(f"expected key=value, got {item!r}")
        result[key] = yaml.safe_load(value) if typed else value
    return result


def build_parser() -> argparse.ArgumentParser:
    parser = LocbenchArgumentParser(
        prog="locbench",
        description="Bilingual game localization corpora, MT scoring and localization QA",
    )
    parser.add_argument("--config", help="Pipeline config file (default: $LOCBENCH_CONFIG or config/pipeline.yaml)")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="More logging (-vv for debug)")
    parser.add_argument("-q", "--quiet", action="store_true", help="Only log errors")
    parser.add_argument("--workers", type=int, help="Worker processes/threads")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")

    subparsers = parser.add_subparsers(dest="command", help="Command to execute")

    build_parser_ = subparsers.add_parser("build", help="Build a clean corpus from a manifest")
    build_parser_.add_argument("--manifest", required=True, help="Manifest listing games and files")
    build_parser_.add_argument("--out-dir", default=".", help="Output directory")

    clean_parser = subparsers.add_parser("clean", help="Remove empty, untranslated and duplicate segments")
    clean_parser.add_argument("--corpus", required=True, help="JSON-lines corpus")
    clean_parser.add_argument("--out-dir", default=".", help="Output directory")

    split_parser = subparsers.add_parser("split", help="Draw validation and test sets")
    split_parser.add_argument("--corpus", required=True, help="JSON-lines corpus")
    split_parser.add_argument("--valid", type=int, help="Validation size")
    split_parser.add_argument("--test", type=int, help="Test size")
    split_parser.add_argument("--seed", type=int, help="Shuffle seed")
    split_parser.add_argument("--scope", action="append", metavar="KEY=VALUE",
                              help="Only segments with this meta value are eligible")
    split_parser.add_argument("--out-dir", default=".", help="Output directory")

    stats_parser = subparsers.add_parser("stats", help="Sentence and token counts")
    source = stats_parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--corpus", help="JSON-lines corpus")
    source.add_argument("--src", help="Source side of a line-aligned bitext")
    stats_parser.add_argument("--tgt", help="Target side of a line-aligned bitext")
    stats_parser.add_argument("--out-dir", help="Also write stats.json/stats.txt here")

    export_parser = subparsers.add_parser("export", help="Write plain bitext (and TMX)")
    export_parser.add_argument("--corpus", required=True, help="JSON-lines corpus")
    export_parser.add_argument("--prefix", default="corpus", help="Output file prefix")
    export_parser.add_argument("--tmx", action="store_true", help="Also write a TMX file")
    export_parser.add_argument("--out-dir", default=".", help="Output directory")

    score_parser = subparsers.add_parser("score", help="Score one system")
    score_parser.add_argument("--hyp", required=True, help="System output, one segment per line")
    score_parser.add_argument("--ref", required=True, help="References, one segment per line")
    score_parser.add_argument("--system", help="System name (default: hypothesis file name)")
    score_parser.add_argument("--metrics", nargs="+", help="Subset of bleu, chrf, ter")
    score_parser.add_argument("--detok-lang", help="Detokenize system output for this language first")
    score_parser.add_argument("--out-dir", default=".", help="Output directory")

    compare_parser = subparsers.add_parser("compare", help="Score and rank several systems")
    compare_parser.add_argument("--ref", required=True, help="References, one segment per line")
    compare_parser.add_argument("--system", action="append", required=True, metavar="NAME=PATH",
                                help="System output file; repeat for each system")
    compare_parser.add_argument("--detok-lang", help="Detokenize system outputs for this language first")
    compare_parser.add_argument("--out-dir", default=".", help="Output directory")

    qa_parser = subparsers.add_parser("qa", help="Run localization QA checks")
    qa_parser.add_argument("--corpus", required=True, help="JSON-lines corpus")
    qa_parser.add_argument("--qa-config", help="QA config file")
    qa_parser.add_argument("--termbase", help="Termbase CSV")
    qa_parser.add_argument("--gender-lexicon", help="Gender lexicon YAML")
    qa_parser.add_argument("--annotations", help="Manual findings (JSON lines) to include")
    qa_parser.add_argument("--out-dir", default=".", help="Output directory")

    recipe_parser = subparsers.add_parser("recipe", help="Emit the NMT training recipe")
    recipe_parser.add_argument("--set", action="append", metavar="FIELD=VALUE", help="Override a recipe field")
    recipe_parser.add_argument("--out-dir", default=".", help="Output directory")

    return parser


def configure_logging(level: str, verbose: int = 0, quiet: bool = False):
    if quiet:
        level = "ERROR"
    elif verbose >= 2:
        level = "DEBUG"
    elif verbose == 1:
        level = "INFO"
    logging.basicConfig(
        level=getattr(logging, level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse arguments and run one subcommand.

    Args:
        argv: Arguments without the program name; defaults to sys.argv[1:]

    Returns:
        0 on success, 1 on usage errors, 2 on data errors
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    if not args.command:
        parser.print_help()
        return EXIT_USAGE
    if args.command == "stats" and args.src and not args.tgt:
        print("locbench stats: error: --src requires --tgt", file=sys.stderr)
        return EXIT_USAGE

    try:
        config = PipelineConfig.load(args.config)
        if args.workers is not None:
            config.workers = args.workers
        config.validate()
        configure_logging(config.log_level, args.verbose, args.quiet)

        pipeline = LocbenchPipeline(config)
        if args.command == "build":
            pipeline.build(args.manifest, args.out_dir)
        elif args.command == "clean":
            pipeline.clean_corpus(args.corpus, args.out_dir)
        elif args.command == "split":
            spec = SplitSpec(
                valid_size=args.valid if args.valid is not None else config.valid_size,
                test_size=args.test if args.test is not None else config.test_size,
                seed=args.seed if args.seed is not None else config.seed,
                scope=parse_assignments(args.scope) if args.scope else config.scope,
            )
            pipeline.split_corpus(args.corpus, args.out_dir, spec)
        elif args.command == "stats":
            pipeline.corpus_stats(args.corpus, args.src, args.tgt, args.out_dir)
        elif args.command == "export":
            pipeline.export(args.corpus, args.out_dir, args.prefix, args.tmx)
        elif args.command == "score":
            pipeline.score(args.hyp, args.ref, args.out_dir, args.system, args.metrics, args.detok_lang)
        elif args.command == "compare":
            systems = parse_assignments(args.system)
            pipeline.compare(args.ref, systems, args.out_dir, args.detok_lang)
        elif args.command == "qa":
            pipeline.qa(args.corpus, args.out_dir, args.qa_config, args.termbase,
                        args.gender_lexicon, args.annotations)
        elif args.command == "recipe":
            pipeline.recipe(parse_assignments(args.set, typed=True), args.out_dir)
    except argparse.ArgumentTypeError as e:
        print(f"locbench {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (LocbenchError, FileNotFoundError, UnicodeDecodeError, OSError) as e:
        logger.error("%s", e)
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


def main():
    """Main entry point."""
    sys.exit(run())


if __name__ == "__main__":
    main()
