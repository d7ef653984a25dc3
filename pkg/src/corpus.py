"""
Corpus
Bilingual segment records and the transformations that turn aligned localization
strings into a deduplicated, filtered and split training corpus.
"""

import hashlib
import json
import logging
import re
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.data_normalizer import TypographyNormalizer, default_normalizer
from src.errors import (
    ConfigError,
    CorpusError,
    InsufficientEligible,
    LanguagePairMismatch,
    UnknownField,
    UnknownMetaKey,
)
from src.locfile import RawEntry, TranslationUnit
from src.tokenizers import tokenize_13a

logger = logging.getLogger(__name__)

ID_SEPARATOR = "\x1f"
_LINE_BREAK = re.compile(r"\r\n|\r|\n")


# ---------------------------------------------------------------------------
# Records
# ---------------------------------------------------------------------------

def segment_id(source_text: str, target_text: str, source_lang: str, target_lang: str) -> int:
    """64-bit BLAKE2b content hash of the four identity fields."""
    payload = ID_SEPARATOR.join((source_text, target_text, source_lang, target_lang)).encode("utf-8")
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "big")


@dataclass(frozen=True)
class BiSegment:
    """A source/target text pair ready for corpus work."""

    source_text: str
    target_text: str
    source_lang: str
    target_lang: str
    meta: Dict[str, str] = field(default_factory=dict)
    id: int = 0

    @classmethod
    def create(cls, source_text: str, target_text: str, source_lang: str, target_lang: str,
               meta: Optional[Dict[str, str]] = None) -> "BiSegment":
        return cls(
            source_text=source_text,
            target_text=target_text,
            source_lang=source_lang,
            target_lang=target_lang,
            meta=dict(meta or {}),
            id=segment_id(source_text, target_text, source_lang, target_lang),
        )

    @property
    def hex_id(self) -> str:
        return f"{self.id:016x}"

    @property
    def language_pair(self) -> Tuple[str, str]:
        return self.source_lang, self.target_lang

    def with_texts(self, source_text: str, target_text: str) -> "BiSegment":
        """Copy with new texts and a recomputed id."""
        return BiSegment.create(source_text, target_text, self.source_lang, self.target_lang, self.meta)

    def with_meta(self, **values: str) -> "BiSegment":
        return replace(self, meta={**self.meta, **values})

    def to_dict(self) -> Dict[str, Any]:
        return {
            "id": self.hex_id,
            "source_lang": self.source_lang,
            "target_lang": self.target_lang,
            "source": self.source_text,
            "target": self.target_text,
            "meta": dict(self.meta),
        }

    @classmethod
    def from_dict(cls, record: Dict[str, Any]) -> "BiSegment":
        segment = cls.create(
            record["source"],
            record["target"],
            record["source_lang"],
            record["target_lang"],
            {str(k): str(v) for k, v in (record.get("meta") or {}).items()},
        )
        stored = record.get("id")
        if stored is not None and stored != segment.hex_id:
            logger.warning("segment id %s does not match its content, using %s", stored, segment.hex_id)
        return segment


def units_to_segments(units: Sequence[TranslationUnit]) -> List[BiSegment]:
    """
    Turn aligned translation units into segments.

    Line breaks inside a string become single spaces. Segment meta carries the
    source entry's meta plus ``key`` and ``origin``.
    """
    segments = []
    for unit in units:
        meta = dict(unit.source.meta)
        meta["key"] = unit.source.key
        if unit.origin:
            meta["origin"] = unit.origin
        segments.append(BiSegment.create(
            _LINE_BREAK.sub(" ", unit.source.text),
            _LINE_BREAK.sub(" ", unit.target.text),
            unit.source.lang,
            unit.target.lang,
            meta,
        ))
    return segments


def normalize_segments(segments: Sequence[BiSegment],
                       normalizer: Optional[TypographyNormalizer] = None) -> List[BiSegment]:
    """Apply typography normalization to both sides of every segment."""
    normalizer = normalizer or default_normalizer()
    return [
        segment.with_texts(
            normalizer.normalize(segment.source_text, segment.source_lang),
            normalizer.normalize(segment.target_text, segment.target_lang),
        )
        for segment in segments
    ]


def segments_to_units(segments: Sequence[BiSegment]) -> List[TranslationUnit]:
    """Translation units for export; the segment id stands in for a missing key."""
    units = []
    for segment in segments:
        meta = {k: v for k, v in segment.meta.items() if k not in ("key", "origin")}
        key = segment.meta.get("key") or segment.hex_id
        units.append(TranslationUnit(
            source=RawEntry(key, segment.source_text, segment.source_lang, meta),
            target=RawEntry(key, segment.target_text, segment.target_lang, {}),
            origin=segment.meta.get("origin", ""),
        ))
    return units


# ---------------------------------------------------------------------------
# Manifest
# ---------------------------------------------------------------------------

@dataclass
class ManifestEntry:
    game_title: str
    developer_year: str
    files: List[str]
    expected_segments: Optional[int] = None


@dataclass
class CorpusManifest:
    """Games to concatenate, in order."""

    entries: List[ManifestEntry] = field(default_factory=list)
    path: Optional[str] = None

    def titles(self) -> List[str]:
        return [entry.game_title for entry in self.entries]


# ---------------------------------------------------------------------------
# Clean
# ---------------------------------------------------------------------------

@dataclass
class CleanReport:
    input_count: int = 0
    removed_duplicates: int = 0
    removed_empty: int = 0
    removed_untranslated: int = 0
    removed_by_filter: int = 0
    output_count: int = 0

    def is_consistent(self) -> bool:
        return self.output_count == (self.input_count - self.removed_duplicates - self.removed_empty
                                     - self.removed_untranslated - self.removed_by_filter)

    def to_dict(self) -> Dict[str, int]:
        return asdict(self)

    def format(self) -> str:
        lines = [
            f"Input segments:        {self.input_count:>10,}",
            f"Removed (empty):       {self.removed_empty:>10,}",
            f"Removed (untranslated):{self.removed_untranslated:>10,}",
            f"Removed (duplicates):  {self.removed_duplicates:>10,}",
            f"Removed (filter):      {self.removed_by_filter:>10,}",
            f"Output segments:       {self.output_count:>10,}",
        ]
        return "\n".join(lines)


def clean(segments: Sequence[BiSegment],
          normalizer: Optional[TypographyNormalizer] = None) -> Tuple[List[BiSegment], CleanReport]:
    """
    Remove empty, untranslated and duplicate segments, in that order.

    Args:
        segments: Input segments
        normalizer: Typography normalizer used for comparisons

    Returns:
        (kept segments in input order, report)
    """
    normalizer = normalizer or default_normalizer()
    report = CleanReport(input_count=len(segments))

    kept: List[BiSegment] = []
    seen = set()
    for segment in segments:
        if not segment.source_text.strip() or not segment.target_text.strip():
            report.removed_empty += 1
            continue
        source_key = normalizer.comparison_key(segment.source_text, segment.source_lang)
        target_key = normalizer.comparison_key(segment.target_text, segment.source_lang)
        if source_key == target_key:
            report.removed_untranslated += 1
            continue
        pair = (normalizer.normalize(segment.source_text, segment.source_lang),
                normalizer.normalize(segment.target_text, segment.target_lang))
        if pair in seen:
            report.removed_duplicates += 1
            continue
        seen.add(pair)
        kept.append(segment)

    report.output_count = len(kept)
    logger.info("clean: %d -> %d segments (%d empty, %d untranslated, %d duplicates)",
                report.input_count, report.output_count, report.removed_empty,
                report.removed_untranslated, report.removed_duplicates)
    return kept, report


# ---------------------------------------------------------------------------
# Filter
# ---------------------------------------------------------------------------

@dataclass
class MetaFilter:
    """Exclusion predicate: any matching meta pair or an over-long source removes a segment."""

    exclude: Dict[str, str] = field(default_factory=dict)
    max_src_tokens: Optional[int] = None

    def __post_init__(self):
        if self.max_src_tokens is not None and (isinstance(self.max_src_tokens, bool)
                                                or not isinstance(self.max_src_tokens, int)
                                                or self.max_src_tokens < 0):
            raise ConfigError(f"max_src_tokens must be a non-negative integer, got {self.max_src_tokens!r}")

    @property
    def is_empty(self) -> bool:
        return not self.exclude and self.max_src_tokens is None


def filter_meta(segments: Sequence[BiSegment], predicate: MetaFilter) -> Tuple[List[BiSegment], int]:
    """
    Drop segments matching the exclusion predicate.

    Args:
        segments: Input segments
        predicate: Meta values to exclude and an optional source token limit

    Returns:
        (kept segments, number removed)
    """
    if predicate.is_empty:
        return list(segments), 0

    warned = set()
    kept = []
    for segment in segments:
        excluded = False
        for key, value in predicate.exclude.items():
            if key not in segment.meta:
                if key not in warned:
                    warned.add(key)
                    logger.warning("%s", UnknownMetaKey(key))
                continue
            if segment.meta[key] == value:
                excluded = True
                break
        if not excluded and predicate.max_src_tokens is not None:
            excluded = len(tokenize_13a(segment.source_text)) > predicate.max_src_tokens
        if not excluded:
            kept.append(segment)

    removed = len(segments) - len(kept)
    logger.info("filter: removed %d of %d segments", removed, len(segments))
    return kept, removed


# ---------------------------------------------------------------------------
# Merge
# ---------------------------------------------------------------------------

@dataclass
class MergeResult:
    segments: List[BiSegment]
    warnings: List[Dict[str, Any]] = field(default_factory=list)


def merge(manifest: CorpusManifest, parsed: Sequence[Sequence[BiSegment]]) -> MergeResult:
    """
    Concatenate per-game segment lists in manifest order.

    Args:
        manifest: Games with their expected sizes
        parsed: One segment list per manifest entry

    Returns:
        Merged segments stamped with game_title and developer_year, plus size warnings
    """
    if len(parsed) != len(manifest.entries):
        raise CorpusError(f"manifest has {len(manifest.entries)} entries but {len(parsed)} were parsed")

    expected_pair = None
    expected_entry = None
    result = MergeResult(segments=[])
    for entry, segments in zip(manifest.entries, parsed):
        for segment in segments:
            if expected_pair is None:
                expected_pair, expected_entry = segment.language_pair, entry.game_title
            elif segment.language_pair != expected_pair:
                raise LanguagePairMismatch(expected_pair, segment.language_pair, entry.game_title)
            result.segments.append(segment.with_meta(game_title=entry.game_title,
                                                     developer_year=entry.developer_year))
        if entry.expected_segments is not None and entry.expected_segments != len(segments):
            warning = {
                "kind": "SegmentCountMismatch",
                "entry": entry.game_title,
                "expected": entry.expected_segments,
                "actual": len(segments),
                "message": f"{entry.game_title}: expected {entry.expected_segments} segments, got {len(segments)}",
            }
            logger.warning(warning["message"])
            result.warnings.append(warning)

    logger.info("merge: %d segments from %d games", len(result.segments), len(manifest.entries))
    return result


# ---------------------------------------------------------------------------
# Split
# ---------------------------------------------------------------------------

MASK64 = (1 << 64) - 1
PRNG_NAME = "splitmix64-v1"


class SplitMix64:
    """Versioned 64-bit generator behind every corpus shuffle."""

    GAMMA = 0x9E3779B97F4A7C15
    MIX1 = 0xBF58476D1CE4E5B9
    MIX2 = 0x94D049BB133111EB

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next(self) -> int:
        self.state = (self.state + self.GAMMA) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * self.MIX1) & MASK64
        z = ((z ^ (z >> 27)) * self.MIX2) & MASK64
        return z ^ (z >> 31)

    def bounded(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection sampling."""
        if n <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - (1 << 64) % n
        while True:
            value = self.next()
            if value < limit:
                return value % n

    def shuffle(self, items: List[Any]) -> None:
        """Fisher-Yates from the last index down, in place."""
        for i in range(len(items) - 1, 0, -1):
            j = self.bounded(i + 1)
            items[i], items[j] = items[j], items[i]


@dataclass
class SplitSpec:
    valid_size: int
    test_size: int
    seed: int
    scope: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for name in ("valid_size", "test_size", "seed"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 0:
                raise ConfigError(f"{name} must be a non-negative integer, got {value!r}")
        if self.seed > MASK64:
            raise ConfigError("seed must fit in 64 bits")

    def in_scope(self, segment: BiSegment) -> bool:
        return all(segment.meta.get(key) == value for key, value in self.scope.items())


SPLIT_NAMES = ("train", "valid", "test")


def split(segments: Sequence[BiSegment], spec: SplitSpec) -> Dict[str, List[BiSegment]]:
    """
    Draw test and validation sets without replacement.

    Args:
        segments: Input corpus (deduplicated, so ids are unique)
        spec: Sizes, seed and eligibility scope

    Returns:
        {"train", "valid", "test"}; test and valid in shuffled order, train in input order
    """
    eligible = [i for i, segment in enumerate(segments) if spec.in_scope(segment)]
    needed = spec.valid_size + spec.test_size
    if needed > len(eligible):
        raise InsufficientEligible(needed, len(eligible))

    SplitMix64(spec.seed).shuffle(eligible)
    test_idx = eligible[:spec.test_size]
    valid_idx = eligible[spec.test_size:needed]
    held_out = set(test_idx) | set(valid_idx)

    result = {
        "train": [segment for i, segment in enumerate(segments) if i not in held_out],
        "valid": [segments[i] for i in valid_idx],
        "test": [segments[i] for i in test_idx],
    }
    logger.info("split (%s, seed %d): train %d, valid %d, test %d", PRNG_NAME, spec.seed,
                len(result["train"]), len(result["valid"]), len(result["test"]))
    return result


# ---------------------------------------------------------------------------
# Statistics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CorpusStats:
    sentences: int = 0
    src_tokens: int = 0
    tgt_tokens: int = 0

    def __add__(self, other: "CorpusStats") -> "CorpusStats":
        return CorpusStats(self.sentences + other.sentences,
                           self.src_tokens + other.src_tokens,
                           self.tgt_tokens + other.tgt_tokens)

    def to_dict(self) -> Dict[str, int]:
        return asdict(self)


def _token_counts(segments: Sequence[BiSegment]) -> Tuple[List[int], List[int]]:
    return ([len(tokenize_13a(s.source_text)) for s in segments],
            [len(tokenize_13a(s.target_text)) for s in segments])


def stats(segments: Sequence[BiSegment]) -> CorpusStats:
    """Sentence and 13a token counts."""
    src, tgt = _token_counts(segments)
    return CorpusStats(len(segments), sum(src), sum(tgt))


def stats_by_game(segments: Sequence[BiSegment]) -> pd.DataFrame:
    """
    Per-game breakdown in first-appearance order, with a Total row.

    Returns:
        DataFrame indexed by game title with segments, src_tokens and tgt_tokens columns
    """
    src, tgt = _token_counts(segments)
    df = pd.DataFrame({
        "game_title": [s.meta.get("game_title", "") for s in segments],
        "segments": 1,
        "src_tokens": src,
        "tgt_tokens": tgt,
    })
    columns = ["segments", "src_tokens", "tgt_tokens"]
    if df.empty:
        table = pd.DataFrame(columns=columns, dtype="int64")
    else:
        table = df.groupby("game_title", sort=False)[columns].sum()
    table.loc["Total"] = [int(table[c].sum()) for c in columns]
    table.index.name = "game_title"
    return table.astype("int64")


def split_table(splits: Dict[str, Sequence[BiSegment]]) -> pd.DataFrame:
    """Training / Validation / Test sizes in sentences and tokens."""
    labels = {"train": "Training", "valid": "Validation", "test": "Test"}
    rows = {}
    for name in SPLIT_NAMES:
        part = stats(splits.get(name, []))
        rows[labels[name]] = {
            "Sentences": part.sentences,
            "Source tokens": part.src_tokens,
            "Target tokens": part.tgt_tokens,
        }
    return pd.DataFrame.from_dict(rows, orient="index")


def length_profile(segments: Sequence[BiSegment],
                   percentiles: Sequence[int] = (50, 90, 95, 99)) -> Dict[str, float]:
    """Source token-length distribution: mean, max and percentiles."""
    src, _ = _token_counts(segments)
    if not src:
        return {}
    lengths = np.asarray(src)
    profile = {"mean": float(lengths.mean()), "max": float(lengths.max())}
    for p, value in zip(percentiles, np.percentile(lengths, percentiles)):
        profile[f"p{p}"] = float(value)
    return profile


# ---------------------------------------------------------------------------
# NMT recipe
# ---------------------------------------------------------------------------

RECIPE_SCHEMA_VERSION = "1"


@dataclass(frozen=True)
class NmtRecipe:
    """Transformer-base training settings; emitted for an external toolkit, never run here."""

    vocab_size: int = 32000
    encoder_layers: int = 6
    decoder_layers: int = 6
    attention_heads: int = 8
    model_dim: int = 512
    ffn_dim: int = 2048
    dropout: float = 0.1
    train_steps: int = 200000
    beam_size: int = 5

    def to_dict(self) -> Dict[str, Any]:
        return {**asdict(self), "schema_version": RECIPE_SCHEMA_VERSION}


def build_recipe(overrides: Optional[Dict[str, Any]] = None) -> NmtRecipe:
    """
    Recipe with constants replaced by the given overrides.

    Raises:
        UnknownField: an override names no recipe field
        ConfigError: an override has the wrong type
    """
    known = {f.name: f.type for f in fields(NmtRecipe)}
    values = {}
    for name, value in (overrides or {}).items():
        if name not in known:
            raise UnknownField(name)
        if isinstance(value, bool):
            raise ConfigError(f"recipe field {name!r} expects a number, got {value!r}")
        if name == "dropout":
            if not isinstance(value, (int, float)) or not 0 <= value < 1:
                raise ConfigError(f"dropout must be a number in [0, 1), got {value!r}")
            value = float(value)
        elif not isinstance(value, int) or value <= 0:
            raise ConfigError(f"recipe field {name!r} expects a positive integer, got {value!r}")
        values[name] = value
    return NmtRecipe(**values)


def emit_recipe(overrides: Optional[Dict[str, Any]] = None) -> str:
    """Serialized recipe: JSON with sorted keys."""
    return json.dumps(build_recipe(overrides).to_dict(), indent=2, sort_keys=True)
