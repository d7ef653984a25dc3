"""
Typography Normalizer
Unifies quotes, apostrophes, ellipses and spacing per target-language convention,
leaving placeholders untouched.
"""

import copy
import logging
import re
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Tuple

from src.config import config_path, load_yaml
from src.errors import ConfigError
from src.locfile import PlaceholderLexer

logger = logging.getLogger(__name__)

NBSP = "\u00a0"
NNBSP = "\u202f"
ELLIPSIS = "\u2026"
LEFT_GUILLEMET = "\u00ab"
RIGHT_GUILLEMET = "\u00bb"
CURLY_APOSTROPHE = "\u2019"

# stands in for a placeholder while rules run
_MASK = "\ue000"

DEFAULT_TABLE = {
    "rule_order": ["strip", "collapse_spaces", "ellipsis", "quotes", "apostrophe", "french_spacing", "strip"],
    "languages": {
        "en": {"quotes": "straight", "apostrophe": "straight", "french_spacing": False},
        "fr": {"quotes": "guillemets", "apostrophe": "curly", "french_spacing": True},
    },
    "default": {"quotes": "keep", "apostrophe": "keep", "french_spacing": False},
}
QUOTE_CONVENTIONS = ("straight", "guillemets", "keep")
APOSTROPHE_CONVENTIONS = ("straight", "curly", "keep")

_ASCII_SPACE_RUN = re.compile(r" {2,}")
_THREE_DOTS = re.compile(r"\.\.\.")
_SPACE = "[ \t\u00a0\u202f]"
_DOUBLE_QUOTES = '"\u201c\u201d\u201e\u201f'
_CURLY_DOUBLE = re.compile("[\u201c\u201d\u201e\u201f]")
_CURLY_SINGLE = re.compile("[\u2018\u2019]")
_OPEN_GUILLEMET_SPACED = re.compile(f"\u00ab{_SPACE}*")
_CLOSE_GUILLEMET_SPACED = re.compile(f"{_SPACE}*\u00bb")
_HIGH_PUNCTUATION = re.compile(f"{_SPACE}*([?!:;]+)")
_FOLD_BEFORE = re.compile(f"{_SPACE}+(?=[?!:;\u00bb])")
_FOLD_AFTER = re.compile(f"(?<=\u00ab){_SPACE}+")
_FOLD_QUOTES = str.maketrans({
    LEFT_GUILLEMET: '"', RIGHT_GUILLEMET: '"', "\u201c": '"', "\u201d": '"',
    "\u201e": '"', "\u201f": '"', CURLY_APOSTROPHE: "'", "\u2018": "'",
})


def primary_language(lang: str) -> str:
    """Primary subtag of a language code, lower-cased (``fr-CA`` -> ``fr``)."""
    return re.split(r"[-_]", lang.strip().lower(), maxsplit=1)[0]


class TypographyNormalizer:
    """Applies the typography rule table to segment text."""

    def __init__(self, config_file: Optional[str] = None, table: Optional[Dict] = None,
                 lexer: Optional[PlaceholderLexer] = None):
        """
        Initialize the normalizer.

        Args:
            config_file: YAML rule table; defaults to config/typography.yaml
            table: Rule table given directly, overriding any file
            lexer: Placeholder lexer used for masking
        """
        if table is None:
            loaded = load_yaml(config_file or config_path("typography.yaml"), "typography")
            table = loaded or copy.deepcopy(DEFAULT_TABLE)
        self.table = table
        self.lexer = lexer or PlaceholderLexer()
        self._rules: Dict[str, Callable[[str, Dict], str]] = {
            "strip": lambda text, profile: text.strip(),
            "collapse_spaces": lambda text, profile: _ASCII_SPACE_RUN.sub(" ", text),
            "ellipsis": lambda text, profile: _THREE_DOTS.sub(ELLIPSIS, text),
            "quotes": self._quotes,
            "apostrophe": self._apostrophe,
            "french_spacing": self._french_spacing,
        }
        self.rule_order = list(table.get("rule_order") or DEFAULT_TABLE["rule_order"])
        self._validate()

    def _validate(self):
        for name in self.rule_order:
            if name not in self._rules:
                raise ConfigError(f"unknown typography rule: {name!r}")
        profiles = dict(self.table.get("languages") or {})
        profiles["default"] = self.table.get("default") or {}
        for lang, profile in profiles.items():
            if profile.get("quotes", "keep") not in QUOTE_CONVENTIONS:
                raise ConfigError(f"typography.{lang}.quotes must be one of {QUOTE_CONVENTIONS}")
            if profile.get("apostrophe", "keep") not in APOSTROPHE_CONVENTIONS:
                raise ConfigError(f"typography.{lang}.apostrophe must be one of {APOSTROPHE_CONVENTIONS}")

    def profile(self, lang: str) -> Dict:
        languages = self.table.get("languages") or {}
        return languages.get(primary_language(lang)) or self.table.get("default") or DEFAULT_TABLE["default"]

    def normalize(self, text: str, lang: str) -> str:
        """
        Normalize one text.

        Args:
            text: Segment text
            lang: Language the text is written in

        Returns:
            Normalized text; placeholders come back byte-identical
        """
        profile = self.profile(lang)
        masked, literals = self._mask(text)
        for name in self.rule_order:
            masked = self._rules[name](masked, profile)
        return self._unmask(masked, literals)

    def comparison_key(self, text: str, lang: str) -> str:
        """
        Text folded so that typographic variants of the same words compare equal.

        Spaces before ? ! : ; and closing guillemets and after opening guillemets are
        dropped, guillemets and curly quotes become ``"`` and curly apostrophes ``'``.
        """
        folded = self.normalize(text, lang)
        folded = _FOLD_BEFORE.sub("", folded)
        folded = _FOLD_AFTER.sub("", folded)
        return folded.translate(_FOLD_QUOTES)

    # -- masking -----------------------------------------------------------

    def _mask(self, text: str) -> Tuple[str, List[str]]:
        if _MASK in text:
            logger.debug("text already contains the mask character; placeholders not protected")
            return text, []
        spans = self.lexer.char_spans(text)
        if not spans:
            return text, []
        pieces, literals, last = [], [], 0
        for start, end, _ in spans:
            pieces.append(text[last:start])
            pieces.append(_MASK)
            literals.append(text[start:end])
            last = end
        pieces.append(text[last:])
        return "".join(pieces), literals

    @staticmethod
    def _unmask(text: str, literals: List[str]) -> str:
        if not literals:
            return text
        parts = text.split(_MASK)
        out = [parts[0]]
        for literal, part in zip(literals, parts[1:]):
            out.append(literal)
            out.append(part)
        return "".join(out)

    # -- language rules ----------------------------------------------------

    @staticmethod
    def _quotes(text: str, profile: Dict) -> str:
        convention = profile.get("quotes", "keep")
        if convention == "straight":
            text = _OPEN_GUILLEMET_SPACED.sub('"', text)
            text = _CLOSE_GUILLEMET_SPACED.sub('"', text)
            return _CURLY_DOUBLE.sub('"', text)
        if convention == "guillemets":
            positions = [i for i, char in enumerate(text) if char in _DOUBLE_QUOTES]
            # an odd quote out stays as written
            paired = positions[:len(positions) - len(positions) % 2]
            if not paired:
                return text
            chars = list(text)
            for n, i in enumerate(paired):
                chars[i] = LEFT_GUILLEMET if n % 2 == 0 else RIGHT_GUILLEMET
            return "".join(chars)
        return text

    @staticmethod
    def _apostrophe(text: str, profile: Dict) -> str:
        convention = profile.get("apostrophe", "keep")
        if convention == "straight":
            return _CURLY_SINGLE.sub("'", text)
        if convention == "curly":
            return text.replace("'", CURLY_APOSTROPHE)
        return text

    @staticmethod
    def _french_spacing(text: str, profile: Dict) -> str:
        if not profile.get("french_spacing"):
            return text

        def open_guillemet(match):
            return LEFT_GUILLEMET if match.end() == len(text) else LEFT_GUILLEMET + NBSP

        def close_guillemet(match):
            return RIGHT_GUILLEMET if match.start() == 0 else NBSP + RIGHT_GUILLEMET

        text = _OPEN_GUILLEMET_SPACED.sub(open_guillemet, text)
        text = _CLOSE_GUILLEMET_SPACED.sub(close_guillemet, text)

        def high_punctuation(match):
            start, end = match.start(), match.end()
            marks = match.group(1)
            if start == 0:
                return marks
            before = text[start - 1]
            after = text[end:end + 2]
            if marks == ":" and start == match.start(1) and before.isdigit() and after[:1].isdigit():
                return match.group()
            if marks.endswith(":") and after == "//":
                return match.group()
            return NNBSP + marks

        return _HIGH_PUNCTUATION.sub(high_punctuation, text)


@lru_cache(maxsize=1)
def default_normalizer() -> TypographyNormalizer:
    return TypographyNormalizer()


def normalize_typography(text: str, lang: str) -> str:
    """
    Normalize typography with the shipped rule table.

    Args:
        text: Segment text
        lang: Language the text is written in

    Returns:
        Normalized text
    """
    return default_normalizer().normalize(text, lang)


def comparison_key(text: str, lang: str) -> str:
    """Folded form used to detect untranslated segments."""
    return default_normalizer().comparison_key(text, lang)
