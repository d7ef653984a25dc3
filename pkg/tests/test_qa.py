"""
Tests for the QA checks, the engine and findings I/O.
"""

import json

import pytest

from conftest import PLANTED_TERMBASE_CSV, make_segment, planted_qa_corpus
from src.errors import MissingConversationKey, QaError, TermbaseError, UnknownCheck
from src.lexicons import GenderLexicon, RegisterForms, load_gender_lexicon, parse_termbase
from src.qa_engine import (
    QaConfig,
    QaEngine,
    findings_table,
    load_annotations,
    read_findings_jsonl,
    run_suite,
    write_findings_jsonl,
)
from src.rules import term_rules
from src.rules.base_rules import AUTOMATIC_CATEGORIES, Category, Severity, finding
from src.rules.french_rules import (
    check_capitalization,
    check_gender,
    check_register,
    flag_ambiguous_verb_forms,
)
from src.rules.placeholder_rules import check_placeholders
from src.rules.term_rules import check_terms, flag_allcaps

TERMBASE_CSV = (
    "source_term,target_term,case_sensitive,forbidden_targets\n"
    "Dragonborn,Enfant de dragon,false,Dragonn\u00e9;N\u00e9-dragon\n"
    "Jarl,jarl,true,\n"
)


@pytest.fixture
def termbase():
    return parse_termbase(TERMBASE_CSV)


@pytest.fixture
def lexicon():
    return load_gender_lexicon()


def conversation(conv, *targets):
    return [make_segment(f"Line {i}", text, conversation=conv) for i, text in enumerate(targets)]


class TestPlaceholders:
    def test_matching_multisets(self):
        assert check_placeholders(make_segment("Hello {name} <b>", "<b> Bonjour {name}")) == []

    def test_surplus_target_occurrence_in_bytes(self):
        (result,) = check_placeholders(make_segment("{0} \u00e9p\u00e9es", "\u00e9p\u00e9es {0} {0}"), position=4)
        assert result.category is Category.PLACEHOLDER_MISMATCH
        assert result.severity is Severity.ERROR
        assert result.position == 4
        assert result.data["extra"] == {"{0}": 1}
        (evidence,) = result.evidence
        assert (evidence.side, evidence.start, evidence.end, evidence.excerpt) == ("target", 12, 15, "{0}")

    def test_missing_tag(self):
        (result,) = check_placeholders(make_segment("Talk to <Alias=Jarl>", "Parlez au jarl"))
        assert result.data["missing"] == {"<Alias=Jarl>": 1}
        assert result.evidence[0].side == "source"


class TestTerms:
    def test_approved_rendering(self, termbase):
        assert check_terms(make_segment("You are Dragonborn.", "Tu es l'Enfant de dragon."), termbase) == []

    def test_forbidden_rendering(self, termbase):
        (result,) = check_terms(make_segment("You are Dragonborn.", "Tu es le Dragonn\u00e9."), termbase)
        assert result.category is Category.TERM_VIOLATION
        assert result.severity is Severity.ERROR
        assert result.suggestions == ("Enfant de dragon",)

    def test_left_untranslated(self, termbase):
        (result,) = check_terms(make_segment("You are Dragonborn.", "Tu es le Dragonborn."), termbase)
        assert result.category is Category.UNTRANSLATED_TERM
        assert result.severity is Severity.ERROR

    def test_possible_paraphrase(self, termbase):
        (result,) = check_terms(make_segment("You are Dragonborn.", "Tu es l'\u00e9lu."), termbase)
        assert result.category is Category.TERM_VIOLATION
        assert result.severity is Severity.WARNING

    def test_case_sensitive_entry(self, termbase):
        (result,) = check_terms(make_segment("Ask the Jarl.", "Demande au Jarl."), termbase)
        assert result.category is Category.UNTRANSLATED_TERM

    def test_termbase_errors(self):
        with pytest.raises(TermbaseError):
            parse_termbase("source_term,target_term\nSword,\u00c9p\u00e9e\nsword,Lame\n")
        with pytest.raises(TermbaseError):
            parse_termbase("source_term,target_term,case_sensitive\nSword,\u00c9p\u00e9e,maybe\n")
        with pytest.raises(TermbaseError):
            parse_termbase("source,target\nSword,\u00c9p\u00e9e\n")


class TestCapitalization:
    def test_title_case_carried_over(self):
        segment = make_segment("Visit the Blue Palace", "Visitez le Palais Bleu")
        (result,) = check_capitalization(segment)
        assert result.severity is Severity.WARNING
        assert result.evidence[0].excerpt == "Palais Bleu"
        assert result.suggestions == ("Palais bleu",)

    def test_sentence_case_target_is_fine(self):
        assert check_capitalization(make_segment("Visit the Blue Palace", "Visitez le Palais bleu")) == []

    def test_termbase_terms_are_exempt(self):
        termbase = parse_termbase("source_term,target_term\nBlue Palace,Palais Bleu\n")
        assert check_capitalization(make_segment("Visit the Blue Palace", "Visitez le Palais Bleu"), termbase) == []

    def test_non_french_target_is_skipped(self):
        (result,) = check_capitalization(make_segment("Visit the Blue Palace", "Besuche den Blauen Palast",
                                                      target_lang="de"))
        assert result.severity is Severity.INFO
        assert result.data == {"skipped": True}


class TestGender:
    def test_player_addressed_line(self, lexicon):
        results = check_gender(make_segment("You are ready, friend.", "Tu es pr\u00eat, ami."), lexicon)
        assert [r.data["form"] for r in results] == ["pr\u00eat", "ami"]
        assert all(r.category is Category.GENDER_MARKED for r in results)
        assert results[1].suggestions == ("camarade",)

    def test_no_player_marker(self, lexicon):
        assert check_gender(make_segment("The guard is ready.", "Le garde est pr\u00eat."), lexicon) == []

    def test_markup_marker(self, lexicon):
        results = check_gender(make_segment("<Alias=Player> arrives.", "L'\u00e9tranger arrive."), lexicon)
        assert [r.data["gender"] for r in results] == ["masculine"]

    def test_empty_lexicon_rejected(self):
        with pytest.raises(QaError):
            check_gender(make_segment("You", "Toi"), GenderLexicon())


class TestRegister:
    def test_unconstrained_mix_flags_the_later_family(self):
        group = conversation("c1", "Tu es pr\u00eat ?", "Bien.", "Vous \u00eates l\u00e0.")
        (result,) = check_register(group)
        assert result.position == 2
        assert result.data["offending_family"] == "vous"
        assert result.data["positions"] == [2]

    def test_tie_prefers_vous(self):
        (result,) = check_register(conversation("c1", "Tu ou vous ?"))
        assert result.data["offending_family"] == "vous"
        assert result.position == 0

    def test_single_family_is_consistent(self):
        assert check_register(conversation("c1", "Tu viens ?", "Prends ton arc.")) == []

    def test_profile(self):
        group = conversation("c1", "Parlez-moi.", "Prends ton arc.")
        (result,) = check_register(group, profile="vous")
        assert result.data["offending_family"] == "tu"
        assert result.position == 1
        (result,) = check_register(group, profile="tu")
        assert result.data["offending_family"] == "vous"

    def test_missing_conversation_key(self):
        with pytest.raises(MissingConversationKey):
            check_register([make_segment("Hi", "Salut")])

    def test_unknown_profile(self):
        with pytest.raises(QaError):
            check_register(conversation("c1", "Salut"), profile="formal")

    def test_vous_verb_suffix(self):
        forms = RegisterForms()
        assert forms.family("parlez") == "vous"
        assert forms.family("chez") is None
        assert forms.family("toi") == "tu"


class TestSourceFlags:
    def test_bare_verb(self):
        (result,) = flag_ambiguous_verb_forms(make_segment("Open the door", "Ouvrir la porte"))
        assert result.data["verb"] == "open"
        assert result.severity is Severity.INFO

    def test_subject_pronoun_makes_it_finite(self):
        assert flag_ambiguous_verb_forms(make_segment("You open the door", "Tu ouvres la porte")) == []

    def test_leading_placeholder_is_skipped(self):
        (result,) = flag_ambiguous_verb_forms(make_segment("{0} Take it", "{0} Prends-le"))
        assert result.evidence[0].excerpt == "Take"

    def test_allcaps_run(self):
        (result,) = flag_allcaps(make_segment("Beware the DRAGON PRIEST now", "Attention au PR\u00caTRE DRAGON"))
        assert result.category is Category.ALLCAPS_RISK
        assert (result.evidence[0].start, result.evidence[0].end) == (11, 24)

    def test_single_capital_letter_is_not_allcaps(self):
        assert flag_allcaps(make_segment("I am A hero", "Je suis un h\u00e9ros")) == []


class TestEngine:
    def test_summary_lists_every_automatic_category(self):
        result = run_suite([make_segment("Hello", "Bonjour")])
        assert result.findings == []
        assert result.summary == {c.value: 0 for c in AUTOMATIC_CATEGORIES}

    def test_load_default_config(self):
        config = QaConfig.load()
        assert config.termbase is None
        assert config.gender_lexicon is not None
        assert "speak" in config.verbs

    def test_loaded_word_lists_are_strings(self):
        config = QaConfig.load()
        assert all(isinstance(word, str) for word in config.function_words)
        assert "on" in config.function_words
        assert all(isinstance(word, str) for word in config.verbs + config.subject_pronouns)

    def test_capitalization_with_loaded_config(self):
        segments = [make_segment("Open the Dragon Gate", "Ouvrez la porte"),
                    make_segment("Visit the Blue Palace", "Visitez le Palais Bleu")]
        result = run_suite(segments, QaConfig.load())
        drift = [f for f in result.findings if f.category is Category.CAPITALIZATION_DRIFT]
        assert [f.position for f in drift] == [1]

    def test_unquoted_yaml_boolean_in_word_list(self, tmp_path):
        path = tmp_path / "qa.yaml"
        path.write_text("qa:\n  capitalization:\n    function_words: [of, on, the]\n", encoding="utf-8")
        with pytest.raises(QaError, match="quote it"):
            QaConfig.load(str(path))

    def test_load_with_termbase(self, tmp_path):
        path = tmp_path / "terms.csv"
        path.write_text(TERMBASE_CSV, encoding="utf-8")
        config = QaConfig.load(termbase_path=str(path))
        assert len(config.termbase) == 2

    def test_findings_are_sorted(self, termbase, lexicon):
        segments = [
            make_segment("Open the gate, Dragonborn", "Ouvrez la porte, Dragonn\u00e9"),
            make_segment("{0} gold", "or"),
        ]
        result = run_suite(segments, QaConfig(termbase=termbase, gender_lexicon=lexicon))
        assert [f.position for f in result.findings] == sorted(f.position for f in result.findings)
        assert result.summary["TermViolation"] == 1
        assert result.summary["PlaceholderMismatch"] == 1
        assert result.summary["AmbiguousVerbForm"] == 1

    def test_register_profile_from_config(self):
        segments = conversation("c1", "Prends ton arc.") + conversation("c2", "Prends ton arc.")
        config = QaConfig(enabled_checks=["register"], profiles={"c1": "vous"})
        result = run_suite(segments, config)
        assert [f.position for f in result.findings] == [0]

    def test_register_skips_non_french(self):
        segments = [make_segment("Hi", "Tu vous", target_lang="de", conversation="c1")]
        assert run_suite(segments, QaConfig(enabled_checks=["register"])).findings == []

    def test_severity_override(self):
        config = QaConfig(enabled_checks=["allcaps"], severity_overrides={"AllCapsRisk": "warning"})
        (result,) = run_suite([make_segment("Find the DRAGON", "Trouve le dragon")], config).findings
        assert result.severity is Severity.WARNING

    def test_bad_severity_override(self):
        with pytest.raises(QaError):
            QaConfig(severity_overrides={"AllCapsRisk": "fatal"})

    def test_unknown_check(self):
        with pytest.raises(UnknownCheck):
            QaConfig(enabled_checks=["spelling"])
        with pytest.raises(UnknownCheck):
            QaEngine(QaConfig(enabled_checks=[], custom_checks=[{"check": "no_such_rules:check"}])).run(
                [make_segment("Hello", "Bonjour")])

    def test_custom_check(self, monkeypatch):
        def flag_everything(segment, context, label="custom"):
            return [finding(segment, 99, Category.ALLCAPS_RISK, Severity.INFO, label)]

        monkeypatch.setattr(term_rules, "flag_everything", flag_everything, raising=False)
        config = QaConfig(enabled_checks=[],
                          custom_checks=[{"check": "term_rules:flag_everything", "params": {"label": "seen"}}])
        result = run_suite([make_segment("a", "b"), make_segment("c", "d")], config)
        assert [(f.position, f.message) for f in result.findings] == [(0, "seen"), (1, "seen")]


class TestFindingsIo:
    def test_jsonl_round_trip(self, tmp_path):
        findings = check_placeholders(make_segment("{0} \u00e9p\u00e9es", "\u00e9p\u00e9es {0} {0}"))
        path = tmp_path / "findings.jsonl"
        write_findings_jsonl(findings, str(path))
        assert read_findings_jsonl(str(path)) == findings

    def test_bad_record(self, tmp_path):
        path = tmp_path / "findings.jsonl"
        path.write_text('{"category": "NoSuchCategory"}\n', encoding="utf-8")
        with pytest.raises(QaError):
            read_findings_jsonl(str(path))

    def test_annotations_must_be_manual(self, tmp_path):
        path = tmp_path / "notes.jsonl"
        path.write_text(json.dumps({"category": "TermViolation", "position": 0}) + "\n", encoding="utf-8")
        with pytest.raises(QaError):
            load_annotations(str(path))

    def test_annotations_join_the_summary(self, tmp_path):
        path = tmp_path / "notes.jsonl"
        record = {"segment_id": "abc", "position": 0, "category": "Manual(Omission)",
                  "severity": "error", "message": "second clause dropped"}
        path.write_text(json.dumps(record) + "\n", encoding="utf-8")
        result = run_suite([make_segment("Hello", "Bonjour")], annotations=load_annotations(str(path)))
        assert result.summary["Manual(Omission)"] == 1
        assert len(result.findings) == 1

    def test_findings_table(self):
        findings = check_placeholders(make_segment("{0}", "")) + flag_allcaps(make_segment("GO NOW", "Vas-y"))
        table = findings_table(findings)
        assert list(table.columns) == ["error", "warning", "info"]
        assert table.loc["PlaceholderMismatch", "error"] == 1
        assert table.loc["AllCapsRisk", "info"] == 1
        assert table.loc["AllCapsRisk", "error"] == 0


class TestPlantedCorpus:
    @pytest.fixture
    def config(self):
        config = QaConfig.load()
        config.termbase = parse_termbase(PLANTED_TERMBASE_CSV)
        return config

    def test_every_planted_defect_is_found(self, config):
        segments, expected = planted_qa_corpus()
        assert all(count > 0 for count in expected.values())
        summary = run_suite(segments, config).summary
        for category, count in expected.items():
            assert summary[category] == count, category

    def test_nothing_else_is_reported(self, config):
        segments, expected = planted_qa_corpus()
        summary = run_suite(segments, config).summary
        assert sum(summary.values()) == sum(expected.values())

    def test_clean_control_has_no_findings(self, config):
        segments, expected = planted_qa_corpus(rate=0.0)
        assert sum(expected.values()) == 0
        assert run_suite(segments, config).findings == []

    def test_findings_repeat_exactly(self, config):
        segments, _ = planted_qa_corpus()
        first = run_suite(segments, config)
        second = run_suite(segments, config)
        assert first.findings == second.findings
        assert [f.to_dict() for f in first.findings] == [f.to_dict() for f in second.findings]
