"""
Lexicons
Termbase, gender lexicon and French register forms used by the QA checks.
"""

import csv
import io
import logging
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

from src.config import config_path, load_yaml
from src.errors import LexiconError, TermbaseError

logger = logging.getLogger(__name__)

TERMBASE_COLUMNS = ("source_term", "target_term", "case_sensitive", "forbidden_targets")
_TRUE = {"true", "1", "yes"}
_FALSE = {"false", "0", "no", ""}


# ---------------------------------------------------------------------------
# Termbase
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TermEntry:
    source_term: str
    target_term: str
    case_sensitive: bool = False
    forbidden_targets: Tuple[str, ...] = ()

    @property
    def lookup_key(self) -> str:
        return self.source_term if self.case_sensitive else self.source_term.casefold()


@dataclass
class Termbase:
    """Approved game terminology with known bad renderings."""

    entries: List[TermEntry] = field(default_factory=list)

    def __post_init__(self):
        seen: Dict[str, int] = {}
        for index, entry in enumerate(self.entries, start=1):
            if not entry.source_term or not entry.target_term:
                raise TermbaseError("source_term and target_term are required", line=index + 1)
            if entry.lookup_key in seen:
                raise TermbaseError(f"duplicate source term {entry.source_term!r}", line=index + 1)
            seen[entry.lookup_key] = index

    def __len__(self) -> int:
        return len(self.entries)

    def target_terms(self) -> List[Tuple[str, bool]]:
        return [(entry.target_term, entry.case_sensitive) for entry in self.entries]


def _parse_flag(value: str, line: int) -> bool:
    value = (value or "").strip().lower()
    if value in _TRUE:
        return True
    if value in _FALSE:
        return False
    raise TermbaseError(f"case_sensitive must be true/false/1/0/yes/no, got {value!r}", line=line)


def parse_termbase(text: str) -> Termbase:
    """
    Parse termbase CSV text.

    Args:
        text: CSV with header source_term,target_term,case_sensitive,forbidden_targets

    Returns:
        Termbase; forbidden targets are ``;``-separated
    """
    reader = csv.DictReader(io.StringIO(text, newline=""))
    missing = [c for c in TERMBASE_COLUMNS[:2] if c not in (reader.fieldnames or [])]
    if missing:
        raise TermbaseError(f"missing columns: {', '.join(missing)}", line=1)

    entries = []
    for row in reader:
        line = reader.line_num
        forbidden = tuple(t.strip() for t in (row.get("forbidden_targets") or "").split(";") if t.strip())
        entries.append(TermEntry(
            source_term=(row.get("source_term") or "").strip(),
            target_term=(row.get("target_term") or "").strip(),
            case_sensitive=_parse_flag(row.get("case_sensitive"), line),
            forbidden_targets=forbidden,
        ))
    return Termbase(entries)


def load_termbase(path: str) -> Termbase:
    if not os.path.exists(path):
        raise FileNotFoundError(f"Termbase not found: {path}")
    with open(path, "r", encoding="utf-8-sig") as f:
        termbase = parse_termbase(f.read())
    logger.info("Loaded %d terms from %s", len(termbase), path)
    return termbase


# ---------------------------------------------------------------------------
# Gender lexicon
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GenderPair:
    masculine: str
    feminine: str
    neutral_alternatives: Tuple[str, ...] = ()


@dataclass
class GenderLexicon:
    gendered_pairs: List[GenderPair] = field(default_factory=list)
    player_referent_markers: List[str] = field(default_factory=list)

    @property
    def is_empty(self) -> bool:
        return not self.gendered_pairs or not self.player_referent_markers

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "GenderLexicon":
        pairs = []
        for index, pair in enumerate(data.get("gendered_pairs") or [], start=1):
            if not isinstance(pair, dict) or not pair.get("masculine") or not pair.get("feminine"):
                raise LexiconError(f"gendered pair {index} needs masculine and feminine forms")
            pairs.append(GenderPair(
                masculine=str(pair["masculine"]).casefold(),
                feminine=str(pair["feminine"]).casefold(),
                neutral_alternatives=tuple(str(a) for a in pair.get("neutral_alternatives") or []),
            ))
        markers = data.get("player_referent_markers") or []
        if not isinstance(markers, list):
            raise LexiconError("player_referent_markers must be a list")
        return cls(gendered_pairs=pairs, player_referent_markers=[str(m).casefold() for m in markers])


def load_gender_lexicon(path: Optional[str] = None) -> GenderLexicon:
    """Load the gender lexicon; defaults to config/gender_lexicon.yaml."""
    path = path or config_path("gender_lexicon.yaml")
    if not os.path.exists(path):
        raise FileNotFoundError(f"Gender lexicon not found: {path}")
    lexicon = GenderLexicon.from_dict(load_yaml(path, "gender_lexicon"))
    if lexicon.is_empty:
        raise LexiconError(f"{path}: gender lexicon needs pairs and player-referent markers")
    return lexicon


# ---------------------------------------------------------------------------
# Register forms
# ---------------------------------------------------------------------------

@dataclass
class RegisterForms:
    """French second-person forms, informal (tu) and formal (vous)."""

    tu: Sequence[str] = ("tu", "te", "t'", "ton", "ta", "tes", "toi")
    vous: Sequence[str] = ("vous", "votre", "vos")
    vous_verb_suffix: Optional[str] = "ez"
    suffix_exclusions: Sequence[str] = ("chez", "assez", "nez", "rez")

    def __post_init__(self):
        self.tu = frozenset(w.replace("\u2019", "'").casefold() for w in self.tu)
        self.vous = frozenset(w.replace("\u2019", "'").casefold() for w in self.vous)
        self.suffix_exclusions = frozenset(w.casefold() for w in self.suffix_exclusions)
        if self.tu & self.vous:
            raise LexiconError(f"forms listed as both tu and vous: {sorted(self.tu & self.vous)}")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RegisterForms":
        defaults = cls()
        return cls(
            tu=data.get("tu") or sorted(defaults.tu),
            vous=data.get("vous") or sorted(defaults.vous),
            vous_verb_suffix=data.get("vous_verb_suffix", defaults.vous_verb_suffix),
            suffix_exclusions=data.get("suffix_exclusions") or sorted(defaults.suffix_exclusions),
        )

    def family(self, folded_word: str) -> Optional[str]:
        """``tu``, ``vous`` or None for a case-folded word."""
        if folded_word in self.tu:
            return "tu"
        if folded_word in self.vous:
            return "vous"
        suffix = self.vous_verb_suffix
        if (suffix and folded_word.endswith(suffix) and len(folded_word) > len(suffix) + 1
                and folded_word not in self.suffix_exclusions):
            return "vous"
        return None
