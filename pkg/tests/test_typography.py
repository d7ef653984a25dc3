"""
Tests for the typography rule table.
"""

import pytest

from src.data_normalizer import (
    NBSP,
    NNBSP,
    TypographyNormalizer,
    comparison_key,
    normalize_typography,
    primary_language,
)
from src.errors import ConfigError


class TestFrench:
    def test_space_before_high_punctuation(self):
        assert normalize_typography("Bonjour !", "fr") == "Bonjour" + NNBSP + "!"
        assert normalize_typography("Vraiment?!", "fr") == "Vraiment" + NNBSP + "?!"

    def test_straight_quotes_become_guillemets(self):
        text = normalize_typography('Il dit "salut" et part', "fr")
        assert text == "Il dit \u00ab" + NBSP + "salut" + NBSP + "\u00bb et part"

    def test_odd_quote_left_alone(self):
        assert normalize_typography('Un " seul', "fr") == 'Un " seul'

    def test_apostrophe_becomes_curly(self):
        assert normalize_typography("L'\u00e9p\u00e9e", "fr") == "L\u2019\u00e9p\u00e9e"

    def test_time_and_urls_untouched(self):
        assert normalize_typography("Il est 10:30", "fr") == "Il est 10:30"
        assert normalize_typography("Voir http://example.com", "fr") == "Voir http://example.com"

    def test_regional_code_uses_primary_profile(self):
        assert normalize_typography("Quoi ?", "fr-CA") == "Quoi" + NNBSP + "?"

    def test_idempotent(self):
        for text in ('Il dit "salut" !', "Quoi ? Non !", "L'arc...", "\u00ab Viens \u00bb : maintenant"):
            once = normalize_typography(text, "fr")
            assert normalize_typography(once, "fr") == once


class TestEnglish:
    def test_curly_quotes_and_spaces(self):
        assert normalize_typography("\u201cHello\u201d  world...", "en") == '"Hello" world\u2026'

    def test_guillemets_become_straight(self):
        assert normalize_typography("\u00ab Hello \u00bb", "en") == '"Hello"'

    def test_curly_apostrophe(self):
        assert normalize_typography("Don\u2019t", "en") == "Don't"

    def test_unlisted_language_only_gets_shared_rules(self):
        assert normalize_typography("  \u201eHallo\u201c  Welt...  ", "de") == "\u201eHallo\u201c Welt\u2026"


class TestPlaceholders:
    def test_placeholders_survive_byte_identical(self):
        text = normalize_typography('Press <Alias=Player>  "now" {count}...', "fr")
        assert "<Alias=Player>" in text
        assert "{count}" in text
        assert text.endswith("{count}\u2026")

    def test_quotes_inside_tags_are_not_rewritten(self):
        text = normalize_typography('<font color="red">Danger</font>', "fr")
        assert text == '<font color="red">Danger</font>'

    def test_length_grows_only_by_inserted_spaces(self):
        for text in ('Il dit "oui" ! Et toi ?', "Quoi ; encore : ici"):
            out = normalize_typography(text, "fr")
            spaces = lambda s: s.count(NBSP) + s.count(NNBSP)  # noqa: E731
            assert len(out) - len(text) <= spaces(out) - spaces(text)


class TestComparisonKey:
    def test_french_spacing_folds_away(self):
        assert comparison_key("Quoi" + NNBSP + "?", "en") == comparison_key("Quoi ?", "en") == "Quoi?"

    def test_guillemets_fold_to_quotes(self):
        assert comparison_key("\u00ab" + NBSP + "Oui" + NBSP + "\u00bb", "fr") == '"Oui"'

    def test_case_is_kept(self):
        assert comparison_key("Whiterun", "en") != comparison_key("WHITERUN", "en")


class TestRuleTable:
    def test_unknown_rule(self):
        with pytest.raises(ConfigError):
            TypographyNormalizer(table={"rule_order": ["strip", "smart_dashes"]})

    def test_bad_convention(self):
        with pytest.raises(ConfigError):
            TypographyNormalizer(table={"languages": {"fr": {"quotes": "angled"}}})

    def test_custom_order(self):
        normalizer = TypographyNormalizer(table={"rule_order": ["strip"], "languages": {}})
        assert normalizer.normalize("  a...  b  ", "fr") == "a...  b"

    def test_primary_language(self):
        assert primary_language("fr_FR") == "fr"
        assert primary_language(" EN-us ") == "en"
