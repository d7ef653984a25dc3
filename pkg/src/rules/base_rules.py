"""
Base Rule Types
Findings, categories and the word segmentation shared by every QA check.
"""

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterable, List, Optional, Pattern, Sequence, Tuple

from src.locfile import ByteOffsets


class Category(str, Enum):
    PLACEHOLDER_MISMATCH = "PlaceholderMismatch"
    TERM_VIOLATION = "TermViolation"
    UNTRANSLATED_TERM = "UntranslatedTerm"
    CAPITALIZATION_DRIFT = "CapitalizationDrift"
    GENDER_MARKED = "GenderMarked"
    REGISTER_INCONSISTENT = "RegisterInconsistent"
    AMBIGUOUS_VERB_FORM = "AmbiguousVerbForm"
    ALLCAPS_RISK = "AllCapsRisk"
    OPPOSITE_MEANING = "Manual(OppositeMeaning)"
    MEANING_SHIFT = "Manual(MeaningShift)"
    WRONG_TRANSLATION = "Manual(WrongTranslation)"
    OMISSION = "Manual(Omission)"
    HALLUCINATION = "Manual(Hallucination)"

    @property
    def is_manual(self) -> bool:
        return self.value.startswith("Manual(")

    @property
    def order(self) -> int:
        return _CATEGORY_ORDER[self]


_CATEGORY_ORDER = {category: index for index, category in enumerate(Category)}
AUTOMATIC_CATEGORIES = tuple(c for c in Category if not c.is_manual)
MANUAL_CATEGORIES = tuple(c for c in Category if c.is_manual)


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"
    INFO = "info"


SOURCE = "source"
TARGET = "target"


@dataclass(frozen=True)
class Evidence:
    """A UTF-8 byte span of one side of a segment."""

    side: str
    start: int
    end: int
    excerpt: str

    def to_dict(self) -> Dict[str, Any]:
        return {"side": self.side, "start": self.start, "end": self.end, "excerpt": self.excerpt}

    @classmethod
    def from_dict(cls, record: Dict[str, Any]) -> "Evidence":
        return cls(record["side"], int(record["start"]), int(record["end"]), record.get("excerpt", ""))


@dataclass(frozen=True)
class QaFinding:
    segment_id: str
    position: int
    category: Category
    severity: Severity
    evidence: Tuple[Evidence, ...] = ()
    message: str = ""
    suggestions: Tuple[str, ...] = ()
    data: Dict[str, Any] = field(default_factory=dict)

    def sort_key(self) -> Tuple:
        first = self.evidence[0].start if self.evidence else -1
        return self.position, self.category.order, first, self.message

    def to_dict(self) -> Dict[str, Any]:
        return {
            "segment_id": self.segment_id,
            "position": self.position,
            "category": self.category.value,
            "severity": self.severity.value,
            "evidence": [e.to_dict() for e in self.evidence],
            "message": self.message,
            "suggestions": list(self.suggestions),
            "data": self.data,
        }

    @classmethod
    def from_dict(cls, record: Dict[str, Any]) -> "QaFinding":
        return cls(
            segment_id=str(record.get("segment_id", "")),
            position=int(record.get("position", 0)),
            category=Category(record["category"]),
            severity=Severity(record.get("severity", Severity.ERROR.value)),
            evidence=tuple(Evidence.from_dict(e) for e in record.get("evidence") or []),
            message=record.get("message", ""),
            suggestions=tuple(record.get("suggestions") or []),
            data=dict(record.get("data") or {}),
        )


def side_text(segment, side: str) -> str:
    return segment.source_text if side == SOURCE else segment.target_text


def evidence_for(segment, side: str, spans: Iterable[Tuple[int, int]]) -> Tuple[Evidence, ...]:
    """Evidence from character spans of one side, converted to byte offsets."""
    text = side_text(segment, side)
    offsets = ByteOffsets(text)
    return tuple(Evidence(side, offsets[start], offsets[end], text[start:end]) for start, end in spans)


def finding(segment, position: int, category: Category, severity: Severity, message: str,
            evidence: Sequence[Evidence] = (), suggestions: Sequence[str] = (),
            data: Optional[Dict[str, Any]] = None) -> QaFinding:
    return QaFinding(
        segment_id=segment.hex_id,
        position=position,
        category=category,
        severity=severity,
        evidence=tuple(evidence),
        message=message,
        suggestions=tuple(suggestions),
        data=dict(data or {}),
    )


# ---------------------------------------------------------------------------
# Words
# ---------------------------------------------------------------------------

# letters/digits; an apostrophe right after a word stays with it (l', t', qu')
WORD = re.compile(r"[^\W_]+['\u2019]?")
BARE_WORD = re.compile(r"[^\W_]+")
_PURE_WORDS = re.compile(r"[^\W_]+(?:['\u2019 -][^\W_]*)*")


def words(text: str, pattern: Pattern = WORD) -> List[Tuple[str, int, int]]:
    """(word, start, end) character spans."""
    return [(m.group(), m.start(), m.end()) for m in pattern.finditer(text)]


def fold_word(word: str) -> str:
    """Case-folded word with a curly apostrophe mapped to a straight one."""
    return word.replace("\u2019", "'").casefold()


def is_pure_word(term: str) -> bool:
    return _PURE_WORDS.fullmatch(term) is not None


def term_pattern(term: str, case_sensitive: bool = False) -> Pattern:
    """Matches term where neither neighbour is a letter or digit."""
    flags = 0 if case_sensitive else re.IGNORECASE
    return re.compile(r"(?<![^\W_])" + re.escape(term) + r"(?![^\W_])", flags)


def find_term(text: str, term: str, case_sensitive: bool = False) -> List[Tuple[int, int]]:
    if not term:
        return []
    return [(m.start(), m.end()) for m in term_pattern(term, case_sensitive).finditer(text)]


def in_spans(start: int, end: int, spans: Sequence[Tuple[int, int]]) -> bool:
    """True when [start, end) overlaps any of the spans."""
    return any(start < s_end and s_start < end for s_start, s_end in spans)


def is_all_caps(word: str) -> bool:
    letters = [c for c in word if c.isalpha()]
    return len(letters) >= 2 and word.isupper()


def is_capitalized(word: str) -> bool:
    return word[:1].isupper() and not is_all_caps(word)
