"""
Placeholder Checks
Tags and format variables must survive translation unchanged.
"""

from collections import Counter
from typing import Dict, List, Optional

from src.locfile import PlaceholderLexer
from src.rules.base_rules import (
    SOURCE,
    TARGET,
    Category,
    QaFinding,
    Severity,
    evidence_for,
    finding,
)

_DEFAULT_LEXER = PlaceholderLexer()


def _surplus_spans(occurrences, literal: str, keep: int):
    """Character spans of the occurrences of literal beyond the first ``keep``."""
    matching = [(start, end) for start, end, found in occurrences if found == literal]
    return matching[keep:]


def check_placeholders(segment, position: int = 0,
                       lexer: Optional[PlaceholderLexer] = None) -> List[QaFinding]:
    """
    Compare the placeholder literals of both sides as multisets.

    Args:
        segment: BiSegment to check
        position: Index of the segment in the checked list
        lexer: Placeholder lexer; defaults to the built-in grammar

    Returns:
        One PlaceholderMismatch error when the multisets differ, otherwise nothing
    """
    lexer = lexer or _DEFAULT_LEXER
    occurrences = {}
    for side, text in ((SOURCE, segment.source_text), (TARGET, segment.target_text)):
        occurrences[side] = [(start, end, text[start:end]) for start, end, _ in lexer.char_spans(text)]

    source_counts = Counter(literal for _, _, literal in occurrences[SOURCE])
    target_counts = Counter(literal for _, _, literal in occurrences[TARGET])
    if source_counts == target_counts:
        return []

    missing: Dict[str, int] = dict(source_counts - target_counts)
    extra: Dict[str, int] = dict(target_counts - source_counts)

    evidence = []
    for literal in sorted(missing):
        spans = _surplus_spans(occurrences[SOURCE], literal, target_counts[literal])
        evidence.extend(evidence_for(segment, SOURCE, spans))
    for literal in sorted(extra):
        spans = _surplus_spans(occurrences[TARGET], literal, source_counts[literal])
        evidence.extend(evidence_for(segment, TARGET, spans))

    parts = []
    if missing:
        parts.append("missing on target: " + ", ".join(f"{lit} x{n}" for lit, n in sorted(missing.items())))
    if extra:
        parts.append("extra on target: " + ", ".join(f"{lit} x{n}" for lit, n in sorted(extra.items())))
    return [finding(
        segment, position, Category.PLACEHOLDER_MISMATCH, Severity.ERROR,
        "placeholders differ; " + "; ".join(parts),
        evidence=evidence,
        data={
            "missing": missing,
            "extra": extra,
            "source_counts": dict(source_counts),
            "target_counts": dict(target_counts),
        },
    )]
