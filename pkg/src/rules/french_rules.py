"""
French Target Checks
Capitalization, gendered address, tu/vous register and imperative/infinitive
ambiguity, as lexical heuristics over words.
"""

import logging
from typing import Dict, List, Optional, Sequence, Tuple

from src.data_normalizer import primary_language
from src.errors import MissingConversationKey, QaError
from src.lexicons import GenderLexicon, RegisterForms, Termbase
from src.locfile import PlaceholderLexer
from src.rules.base_rules import (
    SOURCE,
    TARGET,
    Category,
    QaFinding,
    Severity,
    evidence_for,
    find_term,
    finding,
    fold_word,
    in_spans,
    is_capitalized,
    is_pure_word,
    words,
)

logger = logging.getLogger(__name__)

_DEFAULT_LEXER = PlaceholderLexer()

DEFAULT_FUNCTION_WORDS = ("of", "the", "and", "a", "an", "in", "on", "to", "for", "at", "by", "with", "from")
DEFAULT_VERBS = ("open", "close", "take", "use", "go", "talk", "find", "bring", "kill", "read", "wait")
DEFAULT_SUBJECT_PRONOUNS = ("i", "you", "he", "she", "it", "we", "they")

PROFILES = ("tu", "vous", "unconstrained")
_SENTENCE_END = ".!?\u2026:"
_OPENERS = "\"'\u00ab\u201c\u2018([{ \t\u00a0\u202f"


def _is_french(lang: str) -> bool:
    return primary_language(lang) == "fr"


def _placeholder_spans(text: str, lexer: Optional[PlaceholderLexer]) -> List[Tuple[int, int]]:
    return [(start, end) for start, end, _ in (lexer or _DEFAULT_LEXER).char_spans(text)]


# ---------------------------------------------------------------------------
# Capitalization
# ---------------------------------------------------------------------------

def _has_title_case_span(text: str, function_words: Sequence[str]) -> bool:
    """Two or more capitalized words joined by whitespace, function words allowed between them."""
    function_words = {w.casefold() for w in function_words}
    capitalized = 0
    previous_end = None
    for word, start, end in words(text):
        joined = previous_end is not None and text[previous_end:start].isspace()
        if is_capitalized(word):
            capitalized = capitalized + 1 if joined and capitalized else 1
            if capitalized >= 2:
                return True
        elif not (capitalized and joined and fold_word(word) in function_words):
            capitalized = 0
        previous_end = end
    return False


def _sentence_initial(text: str, start: int) -> bool:
    before = text[:start].rstrip(_OPENERS)
    return not before or before[-1] in _SENTENCE_END


def check_capitalization(segment, termbase: Optional[Termbase] = None, position: int = 0,
                         function_words: Sequence[str] = DEFAULT_FUNCTION_WORDS,
                         lexer: Optional[PlaceholderLexer] = None) -> List[QaFinding]:
    """
    Flag English-style title case carried into a French target.

    Args:
        segment: BiSegment to check
        termbase: Target terms listed here are exempt
        position: Index of the segment in the checked list
        function_words: Lower-case words allowed inside an English title-case span
        lexer: Placeholder lexer; placeholder text is exempt

    Returns:
        CapitalizationDrift warnings, or one info finding when the target is not French
    """
    if not _is_french(segment.target_lang):
        return [finding(
            segment, position, Category.CAPITALIZATION_DRIFT, Severity.INFO,
            f"capitalization check skipped for target language {segment.target_lang!r}",
            data={"skipped": True},
        )]
    if not _has_title_case_span(segment.source_text, function_words):
        return []

    text = segment.target_text
    masked = _placeholder_spans(text, lexer)
    for term, case_sensitive in (termbase.target_terms() if termbase else []):
        masked.extend(find_term(text, term, case_sensitive))

    runs: List[List[int]] = []
    current = None
    for word, start, end in words(text):
        eligible = (is_capitalized(word) and not in_spans(start, end, masked)
                    and not _sentence_initial(text, start))
        if not eligible:
            current = None
            continue
        if current and text[current[1]:start] == " ":
            current[1] = end
            current[2] += 1
        else:
            current = [start, end, 1]
            runs.append(current)

    findings = []
    for start, end, count in runs:
        if count < 2:
            continue
        excerpt = text[start:end]
        findings.append(finding(
            segment, position, Category.CAPITALIZATION_DRIFT, Severity.WARNING,
            f"{count} consecutive capitalized words {excerpt!r}; French capitalizes only the first word",
            evidence=evidence_for(segment, TARGET, [(start, end)]),
            suggestions=[excerpt[:1] + excerpt[1:].lower()],
            data={"words": count},
        ))
    return findings


# ---------------------------------------------------------------------------
# Gender
# ---------------------------------------------------------------------------

def _marker_present(text: str, marker: str) -> bool:
    if is_pure_word(marker):
        return bool(find_term(text, marker))
    return marker in text.casefold()


def check_gender(segment, lexicon: GenderLexicon, position: int = 0) -> List[QaFinding]:
    """
    Flag gendered target words in lines addressed to the player.

    Args:
        segment: BiSegment to check
        lexicon: Gendered pairs and player-referent markers
        position: Index of the segment in the checked list

    Returns:
        One GenderMarked warning per gendered target occurrence
    """
    if lexicon.is_empty:
        raise QaError("gender check needs a non-empty lexicon")
    markers = [m for m in lexicon.player_referent_markers if _marker_present(segment.source_text, m)]
    if not markers:
        return []

    hits = []
    for pair in lexicon.gendered_pairs:
        for form, gender in ((pair.masculine, "masculine"), (pair.feminine, "feminine")):
            for start, end in find_term(segment.target_text, form):
                hits.append((start, end, form, gender, pair.neutral_alternatives))
    hits.sort()

    return [
        finding(
            segment, position, Category.GENDER_MARKED, Severity.WARNING,
            f"{gender} form {segment.target_text[start:end]!r} addresses the player",
            evidence=evidence_for(segment, TARGET, [(start, end)]),
            suggestions=alternatives,
            data={"form": form, "gender": gender, "markers": markers},
        )
        for start, end, form, gender, alternatives in hits
    ]


# ---------------------------------------------------------------------------
# Register
# ---------------------------------------------------------------------------

def register_families(text: str, forms: RegisterForms) -> Dict[str, List[Tuple[int, int]]]:
    """Character spans of tu-family and vous-family words in a French text."""
    found: Dict[str, List[Tuple[int, int]]] = {"tu": [], "vous": []}
    for word, start, end in words(text):
        family = forms.family(fold_word(word))
        if family:
            found[family].append((start, end))
    return found


def check_register(group: Sequence, profile: str = "unconstrained", forms: Optional[RegisterForms] = None,
                   conversation_key: str = "conversation",
                   positions: Optional[Sequence[int]] = None) -> List[QaFinding]:
    """
    Check that one conversation keeps a single form of address.

    Args:
        group: Segments of one conversation, in order
        profile: Expected register: tu, vous or unconstrained
        forms: Register word lists
        conversation_key: Meta key naming the conversation
        positions: Index of each segment in the checked list; defaults to 0..n-1

    Returns:
        At most one RegisterInconsistent error, on the first segment using the offending family
    """
    if not group:
        raise QaError("register check needs a non-empty group")
    if profile not in PROFILES:
        raise QaError(f"unknown register profile {profile!r}")
    forms = forms or RegisterForms()
    positions = list(positions) if positions is not None else list(range(len(group)))

    conversations = set()
    for segment, position in zip(group, positions):
        if conversation_key not in segment.meta:
            raise MissingConversationKey(conversation_key, position)
        conversations.add(segment.meta[conversation_key])
    if len(conversations) > 1:
        raise QaError(f"register group mixes conversations: {sorted(conversations)}")

    observed = [register_families(segment.target_text, forms) for segment in group]
    first_seen = {}
    for index, families in enumerate(observed):
        for family in ("tu", "vous"):
            if families[family] and family not in first_seen:
                first_seen[family] = index

    if profile == "unconstrained":
        if len(first_seen) < 2:
            return []
        # the family that shows up later breaks the established register; vous on a tie
        offending = "tu" if first_seen["tu"] > first_seen["vous"] else "vous"
        reason = f"mixes tu and vous; {offending} appears after the conversation established the other"
    else:
        offending = "vous" if profile == "tu" else "tu"
        if offending not in first_seen:
            return []
        reason = f"uses {offending} where the conversation profile is {profile}"

    offenders = [positions[i] for i, families in enumerate(observed) if families[offending]]
    first = first_seen[offending]
    segment = group[first]
    return [finding(
        segment, positions[first], Category.REGISTER_INCONSISTENT, Severity.ERROR,
        f"conversation {segment.meta[conversation_key]!r} {reason}",
        evidence=evidence_for(segment, TARGET, observed[first][offending]),
        data={"offending_family": offending, "positions": offenders, "profile": profile},
    )]


# ---------------------------------------------------------------------------
# Imperative / infinitive ambiguity
# ---------------------------------------------------------------------------

def flag_ambiguous_verb_forms(segment, position: int = 0, verbs: Sequence[str] = DEFAULT_VERBS,
                              subject_pronouns: Sequence[str] = DEFAULT_SUBJECT_PRONOUNS,
                              lexer: Optional[PlaceholderLexer] = None) -> List[QaFinding]:
    """
    Flag English sources opening with a bare verb.

    French must choose between an imperative (-ez) and an infinitive (-er)
    rendering, and the string alone rarely says which.

    Args:
        segment: BiSegment to check
        position: Index of the segment in the checked list
        verbs: Base-form verbs to look for
        subject_pronouns: Pronouns that make the verb finite when they come first
        lexer: Placeholder lexer; leading placeholders are skipped

    Returns:
        One AmbiguousVerbForm info finding or nothing
    """
    if primary_language(segment.source_lang) != "en":
        return []
    text = segment.source_text
    placeholders = _placeholder_spans(text, lexer)
    leading = [(w, s, e) for w, s, e in words(text) if not in_spans(s, e, placeholders)]
    if not leading:
        return []
    word, start, end = leading[0]
    folded = fold_word(word)
    if folded in {p.casefold() for p in subject_pronouns}:
        return []
    if folded not in {v.casefold() for v in verbs}:
        return []
    return [finding(
        segment, position, Category.AMBIGUOUS_VERB_FORM, Severity.INFO,
        f"{word!r} may be an imperative or an infinitive; the French ending (-ez / -er) needs context",
        evidence=evidence_for(segment, SOURCE, [(start, end)]),
        suggestions=["-ez", "-er"],
        data={"readings": ["imperative", "infinitive"], "verb": folded},
    )]
