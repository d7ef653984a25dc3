"""
Tokenizers
mteval-v13a tokenization used by BLEU and corpus statistics, tercom preprocessing for TER,
and a language-aware detokenizer for system output.
"""

import re
from functools import lru_cache
from typing import List

# mteval-v13a, Western part
_13A_RULES = (
    (re.compile(r"([\{-\~\[-\` -\&\(-\+\:-\@\/])"), r" \1 "),
    # period and comma unless preceded by a digit
    (re.compile(r"([^0-9])([\.,])"), r"\1 \2 "),
    # period and comma unless followed by a digit
    (re.compile(r"([\.,])([^0-9])"), r" \1 \2"),
    # dash when preceded by a digit
    (re.compile(r"([0-9])(-)"), r"\1 \2 "),
)

_ESCAPED_XML = (("&quot;", '"'), ("&amp;", "&"), ("&lt;", "<"), ("&gt;", ">"))


@lru_cache(maxsize=2 ** 16)
def tokenize_13a_line(line: str) -> str:
    """Tokenize a line the mteval-v13a way and return it space-joined."""
    line = line.replace("<skipped>", "")
    line = line.replace("-\n", "")
    line = line.replace("\n", " ")
    if "&" in line:
        for escaped, char in _ESCAPED_XML:
            line = line.replace(escaped, char)
    line = f" {line} "
    for pattern, replacement in _13A_RULES:
        line = pattern.sub(replacement, line)
    return " ".join(line.split())


def tokenize_13a(text: str) -> List[str]:
    """
    Split text into mteval-v13a tokens.

    Args:
        text: Raw segment text

    Returns:
        Tokens with case preserved
    """
    tokenized = tokenize_13a_line(text)
    return tokenized.split() if tokenized else []


# ---------------------------------------------------------------------------
# tercom
# ---------------------------------------------------------------------------

_TERCOM_WESTERN = (
    (re.compile(r"([{-~[-` -&(-+:-@/])"), r" \1 "),
    (re.compile(r"'s "), r" 's "),
    (re.compile(r"'s$"), r" 's"),
    (re.compile(r"([^0-9])([\.,])"), r"\1 \2 "),
    (re.compile(r"([\.,])([^0-9])"), r" \1 \2"),
    (re.compile(r"([0-9])(-)"), r"\1 \2 "),
)
_TERCOM_PUNCT = re.compile(r"[\.,\?:;!\"\(\)]")


def _tercom_normalize(text: str) -> str:
    text = text.replace("\n-", "").replace("\n", " ")
    for escaped, char in _ESCAPED_XML:
        text = text.replace(escaped, char)
    text = f" {text} "
    for pattern, replacement in _TERCOM_WESTERN:
        text = pattern.sub(replacement, text)
    return text


@lru_cache(maxsize=2 ** 16)
def _tercom_line(text: str, lowercase: bool, normalized: bool, keep_punctuation: bool) -> str:
    if not text:
        return ""
    if lowercase:
        text = text.lower()
    if normalized:
        text = _tercom_normalize(text)
    if not keep_punctuation:
        text = _TERCOM_PUNCT.sub("", text)
    return " ".join(text.split())


def tokenize_tercom(text: str, lowercase: bool = True, normalized: bool = False,
                    keep_punctuation: bool = True) -> List[str]:
    """
    Prepare a segment for TER.

    Args:
        text: Raw segment text
        lowercase: Fold case (``c:lc``)
        normalized: Apply tercom's Western punctuation tokenization (``nr:yes``)
        keep_punctuation: Keep punctuation marks (``pn:yes``)

    Returns:
        Word list
    """
    line = _tercom_line(text, lowercase, normalized, keep_punctuation)
    return line.split() if line else []


# ---------------------------------------------------------------------------
# Detokenization
# ---------------------------------------------------------------------------

NNBSP = "\u202f"
NBSP = "\u00a0"

_ATTACH_LEFT = frozenset({",", ".", "!", "?", ":", ";", "%", ")", "]", "}", "\u2026"})
_ATTACH_RIGHT = frozenset({"(", "[", "{"})
_FRENCH_SPACED = frozenset({"?", "!", ":", ";"})
_APOSTROPHES = ("'", "\u2019")
_WORD = re.compile(r"\w", re.UNICODE)


def _is_french(lang: str) -> bool:
    return lang.lower().split("-")[0].split("_")[0] == "fr"


def _is_clitic(token: str) -> bool:
    """English contraction pieces such as 's, 're or n't."""
    if token.lower() == "n't":
        return True
    return len(token) > 1 and token[0] in _APOSTROPHES and _WORD.match(token[1]) is not None


def _is_elided(token: str) -> bool:
    """French elided forms such as l', d' or qu'."""
    return len(token) > 1 and token[-1] in _APOSTROPHES and _WORD.match(token[-2]) is not None


def detokenize(text: str, lang: str) -> str:
    """
    Rejoin space-separated tokens with language-aware spacing.

    Args:
        text: Tokenized text
        lang: Language code of the text

    Returns:
        Detokenized text
    """
    tokens = text.split()
    if len(tokens) <= 1:
        return tokens[0] if tokens else ""

    french = _is_french(lang)
    out = ""
    glue_next = False
    quote_open = False
    for index, token in enumerate(tokens):
        if index == 0:
            separator = ""
        elif glue_next:
            separator = ""
        else:
            separator = " "
        glue_next = False

        if token == '"':
            if quote_open:
                separator = ""
            else:
                glue_next = True
            quote_open = not quote_open
        elif token in _APOSTROPHES:
            # a lone apostrophe between words joins them
            separator = ""
            glue_next = True
        elif french and token in _FRENCH_SPACED:
            separator = "" if index == 0 else NNBSP
        elif french and token == "\u00ab":
            glue_next = True
            out += separator + token + NBSP
            continue
        elif french and token == "\u00bb":
            separator = "" if index == 0 else NBSP
        elif token in _ATTACH_LEFT:
            separator = ""
        elif token in _ATTACH_RIGHT:
            glue_next = True
        elif not french and _is_clitic(token):
            separator = ""
        elif _is_elided(token):
            glue_next = True

        out += separator + token
    return out
