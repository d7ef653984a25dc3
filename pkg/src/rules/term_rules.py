"""
Terminology Checks
Termbase conformance on the target side and all-caps source terms that tend to
confuse MT systems.
"""

from typing import List, Optional

from src.lexicons import Termbase
from src.locfile import PlaceholderLexer
from src.rules.base_rules import (
    BARE_WORD,
    SOURCE,
    TARGET,
    Category,
    QaFinding,
    Severity,
    evidence_for,
    find_term,
    finding,
    in_spans,
    is_all_caps,
    words,
)

_DEFAULT_LEXER = PlaceholderLexer()


def check_terms(segment, termbase: Termbase, position: int = 0) -> List[QaFinding]:
    """
    Check every termbase entry whose source term occurs in the source.

    A forbidden rendering in the target is an error and nothing else is reported
    for that entry. Otherwise, when the approved target term is missing, the
    source term left verbatim in the target is an UntranslatedTerm error and
    anything else is a possible-paraphrase warning.

    Args:
        segment: BiSegment to check
        termbase: Approved terminology
        position: Index of the segment in the checked list

    Returns:
        Findings in termbase order
    """
    findings = []
    for entry in termbase.entries:
        source_spans = find_term(segment.source_text, entry.source_term, entry.case_sensitive)
        if not source_spans:
            continue
        source_evidence = evidence_for(segment, SOURCE, source_spans[:1])

        forbidden = []
        for bad in entry.forbidden_targets:
            for span in find_term(segment.target_text, bad, entry.case_sensitive):
                forbidden.append((span, bad))
        if forbidden:
            forbidden.sort()
            found = sorted({bad for _, bad in forbidden})
            findings.append(finding(
                segment, position, Category.TERM_VIOLATION, Severity.ERROR,
                f"{entry.source_term!r} rendered as forbidden {', '.join(repr(f) for f in found)}; "
                f"use {entry.target_term!r}",
                evidence=source_evidence + evidence_for(segment, TARGET, [span for span, _ in forbidden]),
                suggestions=[entry.target_term],
                data={"source_term": entry.source_term, "forbidden": found},
            ))
            continue

        if find_term(segment.target_text, entry.target_term, entry.case_sensitive):
            continue

        verbatim = find_term(segment.target_text, entry.source_term, entry.case_sensitive)
        if verbatim:
            findings.append(finding(
                segment, position, Category.UNTRANSLATED_TERM, Severity.ERROR,
                f"{entry.source_term!r} left untranslated; use {entry.target_term!r}",
                evidence=source_evidence + evidence_for(segment, TARGET, verbatim),
                suggestions=[entry.target_term],
                data={"source_term": entry.source_term},
            ))
        else:
            findings.append(finding(
                segment, position, Category.TERM_VIOLATION, Severity.WARNING,
                f"{entry.target_term!r} not found for {entry.source_term!r}; possible paraphrase",
                evidence=source_evidence,
                suggestions=[entry.target_term],
                data={"source_term": entry.source_term},
            ))
    return findings


def flag_allcaps(segment, position: int = 0, lexer: Optional[PlaceholderLexer] = None) -> List[QaFinding]:
    """
    Flag each run of all-caps source words (two or more letters each).

    Args:
        segment: BiSegment to check
        position: Index of the segment in the checked list
        lexer: Placeholder lexer; placeholder text is never flagged

    Returns:
        One AllCapsRisk info finding per run
    """
    text = segment.source_text
    placeholders = [(start, end) for start, end, _ in (lexer or _DEFAULT_LEXER).char_spans(text)]
    runs = []
    current = None
    for word, start, end in words(text, BARE_WORD):
        if in_spans(start, end, placeholders) or not is_all_caps(word):
            current = None
            continue
        gap = text[current[1]:start] if current else ""
        if current and gap and gap.isspace() and not in_spans(current[1], start, placeholders):
            current[1] = end
        else:
            current = [start, end]
            runs.append(current)

    return [
        finding(
            segment, position, Category.ALLCAPS_RISK, Severity.INFO,
            f"all-caps term {text[start:end]!r} may confuse MT",
            evidence=evidence_for(segment, SOURCE, [(start, end)]),
        )
        for start, end in runs
    ]
