"""
QA Engine
Runs the configured localization checks over a corpus and reads/writes findings.
"""

import importlib
import json
import logging
import os
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, Optional, Sequence

import pandas as pd

from src.config import config_path, load_yaml
from src.errors import QaError, UnknownCheck
from src.lexicons import GenderLexicon, RegisterForms, Termbase, load_gender_lexicon, load_termbase
from src.locfile import PlaceholderLexer
from src.rules.base_rules import AUTOMATIC_CATEGORIES, Category, QaFinding, Severity
from src.rules.french_rules import (
    DEFAULT_FUNCTION_WORDS,
    DEFAULT_SUBJECT_PRONOUNS,
    DEFAULT_VERBS,
    PROFILES,
    check_capitalization,
    check_gender,
    check_register,
    flag_ambiguous_verb_forms,
)
from src.rules.placeholder_rules import check_placeholders
from src.rules.term_rules import check_terms, flag_allcaps

logger = logging.getLogger(__name__)

SEGMENT_CHECKS = ("placeholders", "terms", "capitalization", "gender", "ambiguous_verbs", "allcaps")
GROUP_CHECKS = ("register",)
ALL_CHECKS = SEGMENT_CHECKS + GROUP_CHECKS


@dataclass
class QaConfig:
    """Enabled checks and the resources they use."""

    enabled_checks: List[str] = field(default_factory=lambda: list(ALL_CHECKS))
    termbase: Optional[Termbase] = None
    gender_lexicon: Optional[GenderLexicon] = None
    register_forms: RegisterForms = field(default_factory=RegisterForms)
    conversation_key: str = "conversation"
    default_profile: str = "unconstrained"
    profiles: Dict[str, str] = field(default_factory=dict)
    verbs: Sequence[str] = DEFAULT_VERBS
    subject_pronouns: Sequence[str] = DEFAULT_SUBJECT_PRONOUNS
    function_words: Sequence[str] = DEFAULT_FUNCTION_WORDS
    extra_patterns: Sequence[str] = ()
    custom_checks: List[Dict[str, Any]] = field(default_factory=list)
    severity_overrides: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for name in self.enabled_checks:
            if name not in ALL_CHECKS:
                raise UnknownCheck(name)
        for profile in [self.default_profile, *self.profiles.values()]:
            if profile not in PROFILES:
                raise QaError(f"unknown register profile {profile!r}")
        for category, severity in self.severity_overrides.items():
            try:
                Category(category)
                Severity(severity)
            except ValueError as e:
                raise QaError(f"bad severity override {category}: {severity}") from e
        self.lexer = PlaceholderLexer(self.extra_patterns)

    @staticmethod
    def _word_list(section: Dict[str, Any], key: str, default: Sequence[str]) -> List[str]:
        words = section.get(key) or default
        for word in words:
            # YAML 1.1 reads bare on, off, yes and no as booleans
            if isinstance(word, bool):
                raise QaError(f"{key} entry {word!r} is not a word; quote it in the YAML file")
        return [str(word) for word in words]

    @classmethod
    def load(cls, path: Optional[str] = None, termbase_path: Optional[str] = None,
             lexicon_path: Optional[str] = None) -> "QaConfig":
        """
        Load QA settings from YAML or JSON.

        Args:
            path: QA config file; defaults to config/qa.yaml
            termbase_path: Termbase CSV, overriding the file's ``termbase``
            lexicon_path: Gender lexicon, overriding the file's ``gender_lexicon``

        Returns:
            QaConfig with lexicons loaded
        """
        path = path or config_path("qa.yaml")
        if not os.path.exists(path):
            raise FileNotFoundError(f"QA config not found: {path}")
        data = load_yaml(path, "qa")
        base = os.path.dirname(os.path.abspath(path))

        def resolve(value):
            if not value or os.path.isabs(value):
                return value
            return os.path.join(base, value)

        termbase_path = termbase_path or resolve(data.get("termbase"))
        lexicon_path = lexicon_path or resolve(data.get("gender_lexicon"))
        register = data.get("register") or {}
        verbs = data.get("ambiguous_verbs") or {}

        custom = []
        for spec in data.get("custom_checks") or []:
            spec = {"check": spec} if isinstance(spec, str) else dict(spec)
            if ":" not in str(spec.get("check", "")):
                raise QaError(f"custom check must be 'module:function', got {spec.get('check')!r}")
            custom.append(spec)

        return cls(
            enabled_checks=list(data.get("enabled_checks", ALL_CHECKS)),
            termbase=load_termbase(termbase_path) if termbase_path else None,
            gender_lexicon=load_gender_lexicon(lexicon_path) if lexicon_path else None,
            register_forms=RegisterForms.from_dict(register),
            conversation_key=register.get("conversation_key", "conversation"),
            default_profile=register.get("default_profile", "unconstrained"),
            profiles={str(k): str(v) for k, v in (register.get("profiles") or {}).items()},
            verbs=cls._word_list(verbs, "verbs", DEFAULT_VERBS),
            subject_pronouns=cls._word_list(verbs, "subject_pronouns", DEFAULT_SUBJECT_PRONOUNS),
            function_words=cls._word_list(data.get("capitalization") or {}, "function_words",
                                          DEFAULT_FUNCTION_WORDS),
            extra_patterns=(data.get("placeholders") or {}).get("extra_patterns") or (),
            custom_checks=custom,
            severity_overrides=dict(data.get("severity_overrides") or {}),
        )


@dataclass
class SuiteResult:
    findings: List[QaFinding]
    summary: Dict[str, int]

    def to_dict(self) -> Dict[str, Any]:
        return {"summary": self.summary, "total": len(self.findings)}

    def format(self) -> str:
        width = max(len(name) for name in self.summary) if self.summary else 10
        lines = ["QA summary", "=" * 60]
        lines.extend(f"{name:<{width}}  {count:>8,}" for name, count in self.summary.items())
        lines.append("-" * 60)
        lines.append(f"{'Total':<{width}}  {len(self.findings):>8,}")
        return "\n".join(lines)


class QaEngine:
    """Dispatches built-in and custom checks."""

    def __init__(self, config: Optional[QaConfig] = None):
        """
        Initialize the engine.

        Args:
            config: QA settings; defaults to every check with no termbase or lexicon
        """
        self.config = config or QaConfig()
        self.check_modules: Dict[str, Any] = {}
        self._segment_checks: Dict[str, Callable] = {
            "placeholders": lambda seg, pos: check_placeholders(seg, pos, lexer=self.config.lexer),
            "terms": lambda seg, pos: check_terms(seg, self.config.termbase, pos),
            "capitalization": lambda seg, pos: check_capitalization(
                seg, self.config.termbase, pos, self.config.function_words, self.config.lexer),
            "gender": lambda seg, pos: check_gender(seg, self.config.gender_lexicon, pos),
            "ambiguous_verbs": lambda seg, pos: flag_ambiguous_verb_forms(
                seg, pos, self.config.verbs, self.config.subject_pronouns, self.config.lexer),
            "allcaps": lambda seg, pos: flag_allcaps(seg, pos, self.config.lexer),
        }

    def _active_segment_checks(self) -> List[str]:
        active = []
        for name in SEGMENT_CHECKS:
            if name not in self.config.enabled_checks:
                continue
            if name == "terms" and not self.config.termbase:
                logger.warning("terms check enabled but no termbase given; skipping")
                continue
            if name == "gender" and (self.config.gender_lexicon is None or self.config.gender_lexicon.is_empty):
                logger.warning("gender check enabled but the lexicon is empty; skipping")
                continue
            active.append(name)
        return active

    def _custom_check(self, spec: Dict[str, Any]) -> Callable:
        module_name, function_name = spec["check"].split(":", 1)
        if module_name not in self.check_modules:
            try:
                self.check_modules[module_name] = importlib.import_module(f"src.rules.{module_name}")
            except ImportError as e:
                raise UnknownCheck(spec["check"]) from e
        function = getattr(self.check_modules[module_name], function_name, None)
        if not callable(function):
            raise UnknownCheck(spec["check"])
        return function

    def run_register(self, segments: Sequence) -> List[QaFinding]:
        """Group segments by conversation and check each group."""
        key = self.config.conversation_key
        groups: Dict[str, List[int]] = {}
        for position, segment in enumerate(segments):
            if key in segment.meta:
                groups.setdefault(segment.meta[key], []).append(position)

        findings = []
        for conversation, positions in groups.items():
            group = [segments[p] for p in positions]
            if not all(s.target_lang.lower().startswith("fr") for s in group):
                continue
            profile = self.config.profiles.get(conversation, self.config.default_profile)
            findings.extend(check_register(group, profile, self.config.register_forms, key, positions))
        return findings

    def run(self, segments: Sequence, annotations: Sequence[QaFinding] = ()) -> SuiteResult:
        """
        Apply every enabled check.

        Args:
            segments: BiSegments to check
            annotations: Manual findings imported from an annotation file

        Returns:
            Sorted findings with per-category counts
        """
        active = self._active_segment_checks()
        custom = [(self._custom_check(spec), spec.get("params") or {}) for spec in self.config.custom_checks]
        context = {"config": self.config, "termbase": self.config.termbase,
                   "gender_lexicon": self.config.gender_lexicon}

        findings: List[QaFinding] = []
        for position, segment in enumerate(segments):
            for name in active:
                findings.extend(self._segment_checks[name](segment, position))
            for function, params in custom:
                results = function(segment, {**context, "position": position}, **params)
                findings.extend(replace(f, position=position) for f in results or [])
        if "register" in self.config.enabled_checks:
            findings.extend(self.run_register(segments))

        overrides = {Category(c): Severity(s) for c, s in self.config.severity_overrides.items()}
        if overrides:
            findings = [replace(f, severity=overrides.get(f.category, f.severity)) for f in findings]
        findings.extend(annotations)
        findings.sort(key=QaFinding.sort_key)
        logger.info("QA: %d findings over %d segments", len(findings), len(segments))
        return SuiteResult(findings=findings, summary=summarize(findings))


def summarize(findings: Sequence[QaFinding]) -> Dict[str, int]:
    """Counts per category; every automatic category appears, manual ones when present."""
    summary = {category.value: 0 for category in AUTOMATIC_CATEGORIES}
    for f in findings:
        summary[f.category.value] = summary.get(f.category.value, 0) + 1
    return summary


def run_suite(segments: Sequence, config: Optional[QaConfig] = None,
              annotations: Sequence[QaFinding] = ()) -> SuiteResult:
    """Convenience function running the QA engine once."""
    return QaEngine(config).run(segments, annotations)


# ---------------------------------------------------------------------------
# Findings I/O
# ---------------------------------------------------------------------------

def write_findings_jsonl(findings: Sequence[QaFinding], path: str):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for item in findings:
            f.write(json.dumps(item.to_dict(), ensure_ascii=False, sort_keys=True))
            f.write("\n")


def read_findings_jsonl(path: str) -> List[QaFinding]:
    findings = []
    with open(path, "r", encoding="utf-8") as f:
        for number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                findings.append(QaFinding.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError) as e:
                raise QaError(f"{path}:{number}: bad finding record: {e}") from e
    return findings


def load_annotations(path: str) -> List[QaFinding]:
    """
    Import human annotations.

    Args:
        path: JSON lines of findings whose categories are Manual(...)

    Returns:
        Manual findings
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"Annotation file not found: {path}")
    findings = read_findings_jsonl(path)
    for item in findings:
        if not item.category.is_manual:
            raise QaError(f"{path}: annotations may only use Manual categories, got {item.category.value}")
    return findings


def findings_table(findings: Sequence[QaFinding]) -> pd.DataFrame:
    """Category x severity counts."""
    columns = [s.value for s in Severity]
    if not findings:
        return pd.DataFrame(columns=columns, dtype="int64")
    df = pd.DataFrame([{"category": f.category.value, "severity": f.severity.value} for f in findings])
    table = pd.crosstab(df["category"], df["severity"])
    order = [c.value for c in Category if c.value in table.index]
    return table.reindex(index=order, columns=columns, fill_value=0)
