"""
Errors
Exception hierarchy shared by the file readers, corpus pipeline, metrics and QA checks.
"""

from typing import Optional


class LocbenchError(Exception):
    """Base class for every error raised by locbench."""


# ---------------------------------------------------------------------------
# Localization files
# ---------------------------------------------------------------------------

class LocFileError(LocbenchError):
    """Problem reading or writing a localization file."""

    def __init__(self, message: str, line: Optional[int] = None, source: Optional[str] = None):
        self.line = line
        self.source = source
        super().__init__(message)

    def __str__(self) -> str:
        message = super().__str__()
        if self.source and self.line is not None:
            return f"{self.source}:{self.line}: {message}"
        if self.line is not None:
            return f"line {self.line}: {message}"
        if self.source:
            return f"{self.source}: {message}"
        return message


class MalformedXml(LocFileError):
    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.column = column
        super().__init__(f"malformed XML: {message}", line=line)


class UnsupportedVersion(LocFileError):
    def __init__(self, version: Optional[str]):
        self.version = version
        super().__init__(f"unsupported TMX version: {version!r} (expected 1.4 or 1.4b)")


class MissingVariant(LocFileError):
    def __init__(self, index: int, languages, line: Optional[int] = None):
        self.index = index
        self.languages = list(languages)
        super().__init__(
            f"translation unit {index} needs exactly two languages, found {self.languages}",
            line=line,
        )


class InvalidUnit(LocFileError):
    def __init__(self, index: int, reason: str):
        self.index = index
        self.reason = reason
        super().__init__(f"invalid translation unit {index}: {reason}")


class RaggedRow(LocFileError):
    def __init__(self, line: int, columns: int):
        self.columns = columns
        super().__init__(f"expected 2 columns, found {columns}", line=line)


class EncodingError(LocFileError):
    def __init__(self, offset: int, reason: str = "invalid UTF-8"):
        self.offset = offset
        super().__init__(f"{reason} at byte offset {offset}")


class DuplicateKey(LocFileError):
    def __init__(self, side: str, key: str, first_line: Optional[str], second_line: Optional[str]):
        self.side = side
        self.key = key
        self.first_line = first_line
        self.second_line = second_line
        super().__init__(
            f"duplicate key {key!r} on {side} side (lines {first_line} and {second_line})"
        )


class EmbeddedNewline(LocFileError):
    def __init__(self, index: int, side: str):
        self.index = index
        self.side = side
        super().__init__(f"unit {index} has a line break in its {side} text")


class BitextLengthMismatch(LocFileError):
    def __init__(self, src_lines: int, tgt_lines: int):
        self.src_lines = src_lines
        self.tgt_lines = tgt_lines
        super().__init__(f"bitext sides differ in length: {src_lines} source vs {tgt_lines} target lines")


# ---------------------------------------------------------------------------
# Corpus pipeline
# ---------------------------------------------------------------------------

class CorpusError(LocbenchError):
    """Problem in a corpus transformation."""


class UnknownMetaKey(CorpusError):
    def __init__(self, key: str):
        self.key = key
        super().__init__(f"meta key {key!r} is not present on every segment")


class LanguagePairMismatch(CorpusError):
    def __init__(self, expected, found, entry: str):
        self.expected = tuple(expected)
        self.found = tuple(found)
        self.entry = entry
        super().__init__(
            f"entry {entry!r} has language pair {self.found[0]}-{self.found[1]}, "
            f"expected {self.expected[0]}-{self.expected[1]}"
        )


class InsufficientEligible(CorpusError):
    def __init__(self, needed: int, available: int):
        self.needed = needed
        self.available = available
        super().__init__(f"split needs {needed} eligible segments but only {available} are available")


class UnknownField(CorpusError):
    def __init__(self, field: str):
        self.field = field
        super().__init__(f"unknown recipe field: {field!r}")


class ManifestError(CorpusError):
    def __init__(self, message: str, path: Optional[str] = None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------

class MetricError(LocbenchError):
    """Problem computing a corpus metric."""


class LengthMismatch(MetricError):
    def __init__(self, hyps: int, refs: int):
        self.hyps = hyps
        self.refs = refs
        super().__init__(f"{hyps} hypotheses but {refs} references")


class EmptyCorpus(MetricError):
    def __init__(self):
        super().__init__("cannot score an empty corpus")


class EmptyRef(MetricError):
    def __init__(self):
        super().__init__("every reference is empty; TER is undefined")


# ---------------------------------------------------------------------------
# QA
# ---------------------------------------------------------------------------

class QaError(LocbenchError):
    """Problem running QA checks or loading their resources."""


class MissingConversationKey(QaError):
    def __init__(self, key: str, position: int):
        self.key = key
        self.position = position
        super().__init__(f"segment {position} has no {key!r} meta value")


class TermbaseError(QaError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"termbase line {line}: {message}" if line is not None else message)


class LexiconError(QaError):
    pass


class UnknownCheck(QaError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown QA check: {name!r}")


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

class ConfigError(LocbenchError):
    """Invalid pipeline configuration."""
