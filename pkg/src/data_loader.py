"""
Data Loader
Loads corpus manifests and the localization files they list, validates manifests
against the schema, and reads/writes JSON-lines corpora.
"""

import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Optional, Sequence, Tuple

import yaml

from src.config import config_path, load_yaml
from src.corpus import BiSegment, CorpusManifest, ManifestEntry, units_to_segments
from src.errors import LocFileError, ManifestError
from src.locfile import (
    KeyValueTableReader,
    KvFormat,
    TmxReader,
    TranslationUnit,
    align_by_key,
    read_lines,
)

logger = logging.getLogger(__name__)

DEFAULT_SCHEMA = {
    "required_fields": {"game_title": "string", "developer_year": "string", "files": "list"},
    "optional_fields": {"expected_segments": "integer"},
    "extensions": {".tmx": "tmx", ".tsv": "kv", ".csv": "kv", ".xlsx": "kv", ".xlsb": "kv"},
}

_TYPE_CHECKS = {
    "string": lambda v: isinstance(v, (str, int)) and not isinstance(v, bool),
    "list": lambda v: isinstance(v, list) and all(isinstance(item, str) for item in v),
    "integer": lambda v: isinstance(v, int) and not isinstance(v, bool) and v >= 0,
}


def read_file(path: str) -> bytes:
    with open(path, "rb") as f:
        return f.read()


def split_kv_name(path: str) -> Tuple[str, str, str]:
    """Split ``dir/stem.lang.ext`` into (dir/stem, lang, .ext)."""
    base, ext = os.path.splitext(path)
    stem, lang = os.path.splitext(base)
    if not lang or not stem:
        raise ManifestError(f"key-value table names must look like <stem>.<lang>{ext}", path)
    return stem, lang[1:], ext.lower()


class DataLoader:
    """Loads manifests and per-game localization files."""

    def __init__(self, schema_config: Optional[str] = None, source_lang: str = "en",
                 target_lang: str = "fr", workers: int = 1):
        """
        Initialize the data loader.

        Args:
            schema_config: Optional path to the manifest schema YAML file
            source_lang: Source language of the corpus
            target_lang: Target language of the corpus
            workers: Threads used to read files
        """
        self.schema_config = schema_config or config_path("schema.yaml")
        self.schema = load_yaml(self.schema_config, "manifest") or DEFAULT_SCHEMA
        self.source_lang = source_lang
        self.target_lang = target_lang
        self.workers = max(1, workers)
        self.issues: List[Dict[str, Any]] = []

    # -- manifests ---------------------------------------------------------

    def validate_manifest(self, document: Any) -> Dict[str, Any]:
        """
        Validate a parsed manifest document against the schema.

        Args:
            document: Parsed manifest (mapping with ``entries`` or a bare list)

        Returns:
            Dictionary containing validation results
        """
        result = {"valid": True, "errors": [], "warnings": []}
        entries = document.get("entries") if isinstance(document, dict) else document
        if not isinstance(entries, list):
            result["valid"] = False
            result["errors"].append("manifest must be a list of entries or a mapping with 'entries'")
            return result

        required = self.schema.get("required_fields", {})
        optional = self.schema.get("optional_fields", {})
        titles = set()
        for index, entry in enumerate(entries, start=1):
            if not isinstance(entry, dict):
                result["errors"].append(f"entry {index}: expected a mapping")
                continue
            for name, kind in required.items():
                if name not in entry:
                    result["errors"].append(f"entry {index}: missing required field {name!r}")
                elif not _TYPE_CHECKS[kind](entry[name]):
                    result["errors"].append(f"entry {index}: field {name!r} must be a {kind}")
            for name, kind in optional.items():
                if entry.get(name) is not None and not _TYPE_CHECKS[kind](entry[name]):
                    result["errors"].append(f"entry {index}: field {name!r} must be a {kind}")
            for name in entry:
                if name not in required and name not in optional:
                    result["warnings"].append(f"entry {index}: unknown field {name!r}")
            title = entry.get("game_title")
            if title in titles:
                result["errors"].append(f"entry {index}: duplicate game title {title!r}")
            titles.add(title)
            if not entry.get("files"):
                result["errors"].append(f"entry {index}: no files listed")

        result["valid"] = not result["errors"]
        return result

    def load_manifest(self, path: str) -> CorpusManifest:
        """
        Load and validate a manifest (JSON or YAML).

        Args:
            path: Manifest file; relative file paths inside it resolve against its directory

        Returns:
            CorpusManifest with absolute file paths
        """
        if not os.path.exists(path):
            raise FileNotFoundError(f"Manifest not found: {path}")
        with open(path, "r", encoding="utf-8") as f:
            try:
                document = yaml.safe_load(f)
            except yaml.YAMLError as e:
                raise ManifestError(f"cannot parse manifest: {e}", path) from e

        validation = self.validate_manifest(document)
        for warning in validation["warnings"]:
            logger.warning("%s: %s", path, warning)
        if not validation["valid"]:
            raise ManifestError("; ".join(validation["errors"]), path)

        if isinstance(document, dict):
            self.source_lang = document.get("source_lang", self.source_lang)
            self.target_lang = document.get("target_lang", self.target_lang)
            entries = document["entries"]
        else:
            entries = document

        base = os.path.dirname(os.path.abspath(path))
        manifest = CorpusManifest(path=path)
        for entry in entries:
            files = [f if os.path.isabs(f) else os.path.join(base, f) for f in entry["files"]]
            missing = [f for f in files if not os.path.exists(f)]
            if missing:
                raise ManifestError(f"{entry['game_title']}: missing files: {', '.join(missing)}", path)
            manifest.entries.append(ManifestEntry(
                game_title=str(entry["game_title"]),
                developer_year=str(entry["developer_year"]),
                files=files,
                expected_segments=entry.get("expected_segments"),
            ))
        logger.info("Loaded manifest %s with %d entries", path, len(manifest.entries))
        return manifest

    # -- localization files ------------------------------------------------

    def _reader_kind(self, path: str) -> str:
        ext = os.path.splitext(path)[1].lower()
        kind = self.schema.get("extensions", {}).get(ext)
        if kind is None:
            raise ManifestError(f"unsupported file type {ext!r}", path)
        return kind

    def read_tmx(self, path: str) -> List[TranslationUnit]:
        reader = TmxReader(source=path)
        try:
            units = reader.read(read_file(path))
        except LocFileError as e:
            e.source = e.source or path
            raise
        self.issues.extend({**issue, "file": path} for issue in reader.issues)
        return [unit if unit.origin else TranslationUnit(unit.source, unit.target, os.path.basename(path))
                for unit in units]

    def read_kv_pair(self, src_path: str, tgt_path: str) -> List[TranslationUnit]:
        """Read a source/target key-value table pair and align them by key."""
        sides = []
        for path, lang in ((src_path, self.source_lang), (tgt_path, self.target_lang)):
            reader = KeyValueTableReader(source=path)
            fmt = KvFormat.from_extension(os.path.splitext(path)[1])
            try:
                sides.append(reader.read(read_file(path), fmt, lang))
            except LocFileError as e:
                e.source = e.source or path
                raise
            self.issues.extend({**issue, "file": path} for issue in reader.issues)
        units, orphans = align_by_key(sides[0], sides[1], origin=os.path.basename(src_path))
        if orphans:
            self.issues.append({
                "kind": "Orphans",
                "message": f"{len(orphans)} keys without a counterpart",
                "file": src_path,
                "count": len(orphans),
            })
        return units

    def _pair_kv_files(self, paths: Sequence[str]) -> List[Tuple[str, str]]:
        groups: Dict[Tuple[str, str], Dict[str, str]] = {}
        order: List[Tuple[str, str]] = []
        for path in paths:
            stem, lang, ext = split_kv_name(path)
            key = (stem, ext)
            if key not in groups:
                groups[key] = {}
                order.append(key)
            groups[key][lang.lower()] = path

        pairs = []
        for key in order:
            langs = groups[key]
            src = langs.get(self.source_lang.lower())
            tgt = langs.get(self.target_lang.lower())
            if src is None or tgt is None:
                raise ManifestError(
                    f"{key[0]}{key[1]}: need one {self.source_lang} and one {self.target_lang} table, "
                    f"found {sorted(langs)}"
                )
            pairs.append((src, tgt))
        return pairs

    def load_entry(self, entry: ManifestEntry) -> List[BiSegment]:
        """
        Parse and align every file of one manifest entry.

        Args:
            entry: Manifest entry

        Returns:
            Segments in file order
        """
        tmx_files = [f for f in entry.files if self._reader_kind(f) == "tmx"]
        kv_files = [f for f in entry.files if self._reader_kind(f) == "kv"]
        units: List[TranslationUnit] = []
        for path in tmx_files:
            units.extend(self.read_tmx(path))
        for src_path, tgt_path in self._pair_kv_files(kv_files):
            units.extend(self.read_kv_pair(src_path, tgt_path))
        logger.info("%s: %d aligned units", entry.game_title, len(units))
        return units_to_segments(units)

    def load_entries(self, manifest: CorpusManifest) -> List[List[BiSegment]]:
        """Load every entry; results keep manifest order regardless of worker count."""
        self.issues = []
        if self.workers == 1 or len(manifest.entries) <= 1:
            return [self.load_entry(entry) for entry in manifest.entries]
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            return list(pool.map(self.load_entry, manifest.entries))


# ---------------------------------------------------------------------------
# JSON-lines corpora and plain text files
# ---------------------------------------------------------------------------

def load_corpus(path: str) -> List[BiSegment]:
    """
    Read a JSON-lines corpus.

    Args:
        path: File with one BiSegment record per line

    Returns:
        Segments in file order
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"Corpus not found: {path}")
    segments = []
    with open(path, "r", encoding="utf-8") as f:
        for number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                segments.append(BiSegment.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, TypeError) as e:
                raise LocFileError(f"bad corpus record: {e}", line=number, source=path) from e
    logger.debug("Loaded %d segments from %s", len(segments), path)
    return segments


def save_corpus(segments: Sequence[BiSegment], path: str):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for segment in segments:
            f.write(json.dumps(segment.to_dict(), ensure_ascii=False, sort_keys=True))
            f.write("\n")


def load_lines(path: str) -> List[str]:
    """Lines of a UTF-8 text file (hypotheses, references, bitext sides)."""
    if not os.path.exists(path):
        raise FileNotFoundError(f"File not found: {path}")
    try:
        return read_lines(read_file(path))
    except LocFileError as e:
        e.source = path
        raise
