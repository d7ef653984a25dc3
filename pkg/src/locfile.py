"""
Localization Files
Reads and writes TMX translation memories, key-value string tables and plain bitext,
and lexes placeholders (markup tags and format variables) out of segment text.
"""

import csv
import io
import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterable, List, Optional, Pattern, Sequence, Tuple

import pandas as pd
from lxml import etree

from src import __version__
from src.errors import (
    BitextLengthMismatch,
    DuplicateKey,
    EmbeddedNewline,
    EncodingError,
    InvalidUnit,
    LocFileError,
    MalformedXml,
    MissingVariant,
    RaggedRow,
    UnsupportedVersion,
)

logger = logging.getLogger(__name__)

UTF8_BOM = b"\xef\xbb\xbf"
TMX_VERSIONS = ("1.4", "1.4b")
XML_LANG = "{http://www.w3.org/XML/1998/namespace}lang"

# Element vocabulary of TMX 1.4; anything else is reported, not rejected.
TMX_ELEMENTS = frozenset({
    "tmx", "header", "body", "tu", "tuv", "seg", "prop", "note", "ude", "map",
    "bpt", "ept", "ph", "it", "hi", "ut", "sub",
})

HEADER_ATTRIBUTES = (
    "creationtool", "creationtoolversion", "segtype", "o-tmf", "adminlang",
    "srclang", "datatype", "o-encoding", "creationdate", "creationid",
    "changedate", "changeid",
)

ORIGIN_PROP = "x-origin"
KEY_PROP = "x-key"

_XML_INCOMPATIBLE = re.compile("[\x00-\x08\x0b\x0c\x0e-\x1f\ud800-\udfff\ufffe\uffff]")


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RawEntry:
    """One string from a localization file, keyed by its game-internal identifier."""

    key: str
    text: str
    lang: str
    meta: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.key:
            raise LocFileError("entry key must be non-empty")
        if not self.lang:
            raise LocFileError(f"entry {self.key!r} has no language")


@dataclass(frozen=True)
class TranslationUnit:
    """A source entry paired with its translation."""

    source: RawEntry
    target: RawEntry
    origin: str = ""

    def problem(self) -> Optional[str]:
        """Return why this unit cannot be serialized, or None when it is valid."""
        if self.source.lang.lower() == self.target.lang.lower():
            return f"source and target share language {self.source.lang!r}"
        for side, entry in (("source", self.source), ("target", self.target)):
            values = [entry.text, entry.key, entry.lang, *entry.meta.keys(), *entry.meta.values()]
            if any(_XML_INCOMPATIBLE.search(value) for value in values):
                return f"{side} contains characters XML cannot carry"
        if _XML_INCOMPATIBLE.search(self.origin):
            return "origin contains characters XML cannot carry"
        return None


class PlaceholderKind(str, Enum):
    TAG = "Tag"
    VARIABLE = "Variable"


@dataclass(frozen=True)
class PlaceholderSpan:
    """A non-translatable token located by UTF-8 byte offsets in its owning text."""

    start: int
    end: int
    kind: PlaceholderKind
    literal: str


# ---------------------------------------------------------------------------
# Placeholders
# ---------------------------------------------------------------------------

MAX_TAG_BYTES = 64

_TAG_PATTERNS = (
    r"<[^\s<>][^<>]*>",
    r"\[[^\s\[\]][^\[\]]*\]",
)

_IDENTIFIER = r"(?:[A-Za-z_][A-Za-z0-9_.]*|[0-9]+)"
_VARIABLE_PATTERNS = (
    r"%\{" + _IDENTIFIER + r"\}",
    r"%[sdiuf%]",
    r"\{" + _IDENTIFIER + r"\}",
)


class PlaceholderLexer:
    """Finds placeholders left to right, taking the longest match at each position."""

    def __init__(self, extra_patterns: Optional[Sequence[str]] = None):
        """
        Initialize the lexer.

        Args:
            extra_patterns: Additional regular expressions recognized as tags
        """
        self.extra_patterns = list(extra_patterns or [])
        self._patterns: List[Tuple[Pattern, PlaceholderKind]] = (
            [(re.compile(p), PlaceholderKind.TAG) for p in _TAG_PATTERNS]
            + [(re.compile(p), PlaceholderKind.VARIABLE) for p in _VARIABLE_PATTERNS]
            + [(re.compile(p), PlaceholderKind.TAG) for p in self.extra_patterns]
        )
        self._any = re.compile("|".join(f"(?:{p.pattern})" for p, _ in self._patterns))

    def char_spans(self, text: str) -> List[Tuple[int, int, PlaceholderKind]]:
        """
        Locate placeholders by character offsets.

        Args:
            text: Segment text

        Returns:
            Sorted, non-overlapping (start, end, kind) triples
        """
        spans = []
        pos = 0
        while pos < len(text):
            found = self._any.search(text, pos)
            if found is None:
                break
            start = found.start()
            best_end, best_kind = start, None
            for pattern, kind in self._patterns:
                candidate = pattern.match(text, start)
                if candidate is None or candidate.end() <= best_end:
                    continue
                if kind is PlaceholderKind.TAG and len(candidate.group().encode("utf-8")) > MAX_TAG_BYTES:
                    continue
                best_end, best_kind = candidate.end(), kind
            if best_kind is None:
                pos = start + 1
                continue
            spans.append((start, best_end, best_kind))
            pos = best_end
        return spans

    def extract(self, text: str) -> List[PlaceholderSpan]:
        """Locate placeholders by UTF-8 byte offsets."""
        spans = self.char_spans(text)
        if not spans:
            return []
        offsets = ByteOffsets(text)
        return [
            PlaceholderSpan(offsets[start], offsets[end], kind, text[start:end])
            for start, end, kind in spans
        ]


class ByteOffsets:
    """Maps character offsets of a string to UTF-8 byte offsets."""

    def __init__(self, text: str):
        self._ascii = text.isascii()
        self._prefix: List[int] = []
        if not self._ascii:
            total = 0
            self._prefix.append(0)
            for char in text:
                total += len(char.encode("utf-8", "surrogatepass"))
                self._prefix.append(total)

    def __getitem__(self, index: int) -> int:
        return index if self._ascii else self._prefix[index]


_DEFAULT_LEXER = PlaceholderLexer()


def extract_placeholders(text: str, lexer: Optional[PlaceholderLexer] = None) -> List[PlaceholderSpan]:
    """
    Return every placeholder of text as byte-offset spans.

    Args:
        text: Segment text
        lexer: Optional lexer carrying configured extra patterns

    Returns:
        Spans sorted by start offset
    """
    return (lexer or _DEFAULT_LEXER).extract(text)


def splice_placeholders(text: str, spans: Sequence[PlaceholderSpan]) -> str:
    """Rebuild text from its gap bytes and the span literals."""
    data = text.encode("utf-8")
    parts = []
    cursor = 0
    for span in spans:
        parts.append(data[cursor:span.start])
        parts.append(span.literal.encode("utf-8"))
        cursor = span.end
    parts.append(data[cursor:])
    return b"".join(parts).decode("utf-8")


# ---------------------------------------------------------------------------
# Decoding helpers
# ---------------------------------------------------------------------------

def decode_utf8(data: bytes) -> str:
    """Decode UTF-8 strictly, dropping a leading BOM."""
    skipped = 0
    if data.startswith(UTF8_BOM):
        data = data[len(UTF8_BOM):]
        skipped = len(UTF8_BOM)
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise EncodingError(e.start + skipped) from e


def read_lines(data: bytes) -> List[str]:
    """Split a UTF-8 text file into lines without their terminators."""
    text = decode_utf8(data)
    if not text:
        return []
    if text.endswith("\n"):
        text = text[:-1]
    return [line[:-1] if line.endswith("\r") else line for line in text.split("\n")]


# ---------------------------------------------------------------------------
# TMX
# ---------------------------------------------------------------------------

def _flatten(element) -> str:
    """Literal text of an element, inline markup included, comments dropped."""
    parts = [element.text or ""]
    for child in element:
        if isinstance(child.tag, str):
            parts.append(_flatten(child))
        parts.append(child.tail or "")
    return "".join(parts)


def _props(element) -> Dict[str, str]:
    return {
        child.get("type", ""): child.text or ""
        for child in element
        if isinstance(child.tag, str) and child.tag == "prop"
    }


class TmxReader:
    """Reads TMX 1.4 documents into translation units, collecting non-fatal issues."""

    def __init__(self, source: Optional[str] = None):
        """
        Initialize the reader.

        Args:
            source: Optional file name used in issue reports
        """
        self.source = source
        self.header: Dict[str, str] = {}
        self.issues: List[Dict[str, Any]] = []

    def read(self, data: bytes) -> List[TranslationUnit]:
        """
        Parse a TMX document.

        Args:
            data: UTF-8 encoded TMX bytes

        Returns:
            One translation unit per well-formed ``tu``, in document order
        """
        self.issues = []
        root = self._parse_xml(data)
        if root.tag != "tmx":
            raise UnsupportedVersion(None)
        version = root.get("version")
        if version not in TMX_VERSIONS:
            raise UnsupportedVersion(version)

        header = root.find("header")
        self.header = dict(header.attrib) if header is not None else {}
        srclang = self.header.get("srclang")
        self._report_unknown_elements(root)

        units = []
        body = root.find("body")
        if body is None:
            return units
        tus = [child for child in body if isinstance(child.tag, str) and child.tag == "tu"]
        for index, tu in enumerate(tus, start=1):
            try:
                units.append(self._read_unit(tu, index, srclang))
            except MissingVariant as e:
                logger.warning("%s: skipping unit: %s", self.source or "tmx", e)
                self.issues.append({
                    "kind": "MissingVariant",
                    "message": str(e),
                    "index": index,
                    "line": tu.sourceline,
                })
        logger.debug("Read %d translation units from %s", len(units), self.source or "tmx")
        return units

    def _parse_xml(self, data: bytes):
        if data.startswith(UTF8_BOM):
            data = data[len(UTF8_BOM):]
        parser = etree.XMLParser(
            resolve_entities=False, no_network=True, load_dtd=False, huge_tree=True
        )
        try:
            return etree.fromstring(data, parser)
        except etree.XMLSyntaxError as e:
            line, column = e.position if e.position else (None, None)
            raise MalformedXml(e.msg or str(e), line=line, column=column) from e

    def _report_unknown_elements(self, root):
        seen = set()
        for element in root.iter():
            if not isinstance(element.tag, str):
                continue
            tag = etree.QName(element).localname
            if tag in TMX_ELEMENTS or tag in seen:
                continue
            seen.add(tag)
            logger.warning("%s: unknown TMX element <%s> at line %s", self.source or "tmx", tag, element.sourceline)
            self.issues.append({
                "kind": "UnknownElement",
                "message": f"unknown element <{tag}>",
                "line": element.sourceline,
            })

    def _read_unit(self, tu, index: int, srclang: Optional[str]) -> TranslationUnit:
        variants = []
        for tuv in tu:
            if not isinstance(tuv.tag, str) or tuv.tag != "tuv":
                continue
            lang = tuv.get(XML_LANG) or tuv.get("lang")
            seg = tuv.find("seg")
            variants.append((lang, None if seg is None else _flatten(seg), _props(tuv)))

        langs = [lang for lang, _, _ in variants]
        if (
            len(variants) != 2
            or not all(langs)
            or langs[0].lower() == langs[1].lower()
            or any(text is None for _, text, _ in variants)
        ):
            raise MissingVariant(index, langs, line=tu.sourceline)

        source_index = 0
        if srclang and srclang.lower() != "*all*":
            if langs[1].lower() == srclang.lower() and langs[0].lower() != srclang.lower():
                source_index = 1

        unit_key = tu.get("tuid") or f"tu-{index}"
        entries = []
        for lang, text, meta in (variants[source_index], variants[1 - source_index]):
            key = meta.pop(KEY_PROP, unit_key) or unit_key
            entries.append(RawEntry(key=key, text=text, lang=lang, meta=meta))
        origin = _props(tu).get(ORIGIN_PROP, "")
        return TranslationUnit(source=entries[0], target=entries[1], origin=origin)


class TmxWriter:
    """Serializes translation units as a deterministic TMX 1.4 document."""

    def write(self, units: Sequence[TranslationUnit], header_meta: Optional[Dict[str, str]] = None) -> bytes:
        """
        Serialize units.

        Args:
            units: Translation units in output order
            header_meta: Header attributes (known TMX names) or extra header props

        Returns:
            UTF-8 encoded TMX document
        """
        for index, unit in enumerate(units):
            reason = unit.problem()
            if reason:
                raise InvalidUnit(index, reason)

        root = etree.Element("tmx", version="1.4")
        header = etree.SubElement(root, "header")
        attributes = self._header_attributes(units)
        extras = {}
        for name, value in (header_meta or {}).items():
            if name in HEADER_ATTRIBUTES:
                attributes[name] = value
            else:
                extras[name] = value
        for name in HEADER_ATTRIBUTES:
            if name in attributes:
                header.set(name, attributes[name])
        for name in sorted(extras):
            prop = etree.SubElement(header, "prop", type=name)
            prop.text = extras[name]

        body = etree.SubElement(root, "body")
        for unit in units:
            self._write_unit(body, unit)

        return etree.tostring(
            root,
            xml_declaration=True,
            encoding="UTF-8",
            pretty_print=True,
            doctype='<!DOCTYPE tmx SYSTEM "tmx14.dtd">',
        )

    @staticmethod
    def _header_attributes(units: Sequence[TranslationUnit]) -> Dict[str, str]:
        source_langs = {unit.source.lang for unit in units}
        return {
            "creationtool": "locbench",
            "creationtoolversion": __version__,
            "segtype": "sentence",
            "o-tmf": "locbench",
            "adminlang": "en",
            "srclang": source_langs.pop() if len(source_langs) == 1 else "*all*",
            "datatype": "plaintext",
        }

    @staticmethod
    def _write_unit(body, unit: TranslationUnit):
        tu = etree.SubElement(body, "tu", tuid=unit.source.key)
        if unit.origin:
            prop = etree.SubElement(tu, "prop", type=ORIGIN_PROP)
            prop.text = unit.origin
        for entry in (unit.source, unit.target):
            tuv = etree.SubElement(tu, "tuv")
            tuv.set(XML_LANG, entry.lang)
            meta = dict(entry.meta)
            if entry.key != unit.source.key:
                meta[KEY_PROP] = entry.key
            for name in sorted(meta):
                prop = etree.SubElement(tuv, "prop", type=name)
                prop.text = meta[name]
            seg = etree.SubElement(tuv, "seg")
            seg.text = entry.text


def parse_tmx(data: bytes, source: Optional[str] = None) -> List[TranslationUnit]:
    """Convenience function returning the units of a TMX document."""
    return TmxReader(source=source).read(data)


def write_tmx(units: Sequence[TranslationUnit], header_meta: Optional[Dict[str, str]] = None) -> bytes:
    """Convenience function serializing units as TMX 1.4."""
    return TmxWriter().write(units, header_meta)


# ---------------------------------------------------------------------------
# Key-value string tables
# ---------------------------------------------------------------------------

class KvFormat(str, Enum):
    TSV = "TSV"
    CSV = "CSV"
    XLSX = "XLSX"
    XLSB = "XLSB"

    @classmethod
    def from_extension(cls, extension: str) -> "KvFormat":
        try:
            return cls(extension.lower().lstrip(".").upper())
        except ValueError:
            raise LocFileError(f"not a key-value table extension: {extension!r}") from None


_TSV_ESCAPE = re.compile(r"\\([tnr\\])")
_TSV_UNESCAPED = {"t": "\t", "n": "\n", "r": "\r", "\\": "\\"}


def _tsv_unescape(value: str) -> str:
    return _TSV_ESCAPE.sub(lambda m: _TSV_UNESCAPED[m.group(1)], value)


class KeyValueTableReader:
    """Reads two-column (key, text) string tables, collecting skipped rows as issues."""

    def __init__(self, source: Optional[str] = None):
        self.source = source
        self.issues: List[Dict[str, Any]] = []

    def read(self, data: bytes, fmt: KvFormat, lang: str,
             meta: Optional[Dict[str, str]] = None) -> List[RawEntry]:
        """
        Parse a key-value table.

        Args:
            data: File contents
            fmt: Table format
            lang: Language of the text column
            meta: Metadata copied onto every entry

        Returns:
            One entry per data row
        """
        self.issues = []
        fmt = fmt if isinstance(fmt, KvFormat) else KvFormat(str(fmt).upper())
        if not data:
            return []
        if fmt in (KvFormat.XLSX, KvFormat.XLSB):
            rows = self._spreadsheet_rows(data, fmt)
        else:
            text = decode_utf8(data)
            rows = self._tsv_rows(text) if fmt is KvFormat.TSV else self._csv_rows(text)

        entries = []
        for position, (line, cells) in enumerate(rows):
            if position == 0 and len(cells) >= 2 and cells[1].strip().lower() == "text":
                continue
            if len(cells) != 2:
                self._skip(RaggedRow(line, len(cells)), "RaggedRow", line)
                continue
            key, text = cells
            if fmt is KvFormat.TSV:
                key, text = _tsv_unescape(key), _tsv_unescape(text)
            if not key:
                self._skip(LocFileError("empty key", line=line), "EmptyKey", line)
                continue
            entry_meta = dict(meta or {})
            entry_meta["line"] = str(line)
            entries.append(RawEntry(key=key, text=text, lang=lang, meta=entry_meta))
        return entries

    def _skip(self, error: LocFileError, kind: str, line: int):
        error.source = self.source
        logger.warning("Skipping row: %s", error)
        self.issues.append({"kind": kind, "message": str(error), "line": line})

    @staticmethod
    def _tsv_rows(text: str) -> Iterable[Tuple[int, List[str]]]:
        for number, line in enumerate(text.split("\n"), start=1):
            if line.endswith("\r"):
                line = line[:-1]
            if line:
                yield number, line.split("\t")

    @staticmethod
    def _csv_rows(text: str) -> Iterable[Tuple[int, List[str]]]:
        reader = csv.reader(io.StringIO(text, newline=""))
        previous_end = 0
        for row in reader:
            start = previous_end + 1
            previous_end = reader.line_num
            if row:
                yield start, row

    @staticmethod
    def _spreadsheet_rows(data: bytes, fmt: KvFormat) -> List[Tuple[int, List[str]]]:
        engine = "openpyxl" if fmt is KvFormat.XLSX else "pyxlsb"
        df = pd.read_excel(io.BytesIO(data), header=None, dtype=str, engine=engine, keep_default_na=False)
        rows = []
        for number, values in enumerate(df.itertuples(index=False, name=None), start=1):
            cells = ["" if pd.isna(value) else str(value) for value in values]
            while cells and cells[-1] == "":
                cells.pop()
            if cells:
                rows.append((number, cells))
        return rows


def parse_kv_table(data: bytes, fmt: KvFormat, lang: str, meta: Optional[Dict[str, str]] = None,
                   source: Optional[str] = None) -> List[RawEntry]:
    """Convenience function returning the entries of a key-value table."""
    return KeyValueTableReader(source=source).read(data, fmt, lang, meta)


def align_by_key(src: Sequence[RawEntry], tgt: Sequence[RawEntry],
                 origin: str = "") -> Tuple[List[TranslationUnit], List[RawEntry]]:
    """
    Inner-join source and target entries on their keys.

    Args:
        src: Source-language entries
        tgt: Target-language entries
        origin: Origin recorded on every unit

    Returns:
        Units in source order, then orphans (source orphans first, in order)
    """
    src_index = _index_by_key(src, "source")
    tgt_index = _index_by_key(tgt, "target")

    units, orphans = [], []
    for entry in src:
        match = tgt_index.get(entry.key)
        if match is None:
            orphans.append(entry)
            continue
        unit = TranslationUnit(source=entry, target=match, origin=origin)
        if entry.lang.lower() == match.lang.lower():
            raise InvalidUnit(len(units), f"source and target share language {entry.lang!r}")
        units.append(unit)
    orphans.extend(entry for entry in tgt if entry.key not in src_index)

    if orphans:
        logger.info("Key alignment left %d orphans (%d units)", len(orphans), len(units))
    return units, orphans


def _index_by_key(entries: Sequence[RawEntry], side: str) -> Dict[str, RawEntry]:
    index: Dict[str, RawEntry] = {}
    for entry in entries:
        if entry.key in index:
            raise DuplicateKey(side, entry.key, index[entry.key].meta.get("line"), entry.meta.get("line"))
        index[entry.key] = entry
    return index


# ---------------------------------------------------------------------------
# Plain bitext
# ---------------------------------------------------------------------------

def write_bitext(units: Sequence[TranslationUnit]) -> Tuple[bytes, bytes]:
    """
    Serialize units as two line-aligned UTF-8 files.

    Args:
        units: Translation units

    Returns:
        (source file bytes, target file bytes)
    """
    for index, unit in enumerate(units):
        for side, text in (("source", unit.source.text), ("target", unit.target.text)):
            if "\n" in text or "\r" in text:
                raise EmbeddedNewline(index, side)
    src = "".join(unit.source.text + "\n" for unit in units)
    tgt = "".join(unit.target.text + "\n" for unit in units)
    return src.encode("utf-8"), tgt.encode("utf-8")


def read_bitext(src_data: bytes, tgt_data: bytes) -> List[Tuple[str, str]]:
    """Read two line-aligned files back into (source, target) pairs."""
    src_lines = read_lines(src_data)
    tgt_lines = read_lines(tgt_data)
    if len(src_lines) != len(tgt_lines):
        raise BitextLengthMismatch(len(src_lines), len(tgt_lines))
    return list(zip(src_lines, tgt_lines))
