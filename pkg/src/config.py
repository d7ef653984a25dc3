"""
Configuration
Pipeline settings loaded from YAML, with in-code defaults when a file is absent.
"""

import logging
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml

from src.errors import ConfigError

logger = logging.getLogger(__name__)

CONFIG_DIR = Path(__file__).resolve().parent.parent / "config"
CONFIG_ENV_VAR = "LOCBENCH_CONFIG"
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def config_path(name: str) -> str:
    """Path of a file shipped under config/."""
    return str(CONFIG_DIR / name)


def load_yaml(path: Optional[str], section: Optional[str] = None) -> Dict[str, Any]:
    """
    Load a YAML (or JSON) mapping.

    Args:
        path: File to read; a missing file yields an empty mapping
        section: Optional top-level key to return instead of the whole document

    Returns:
        Parsed mapping
    """
    if not path or not os.path.exists(path):
        if path:
            logger.debug("config file %s not found, using defaults", path)
        return {}
    with open(path, "r", encoding="utf-8") as f:
        try:
            document = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigError(f"{path}: {e}") from e
    if document is None:
        return {}
    if not isinstance(document, dict):
        raise ConfigError(f"{path}: expected a mapping at top level")
    if section is not None:
        document = document.get(section) or {}
        if not isinstance(document, dict):
            raise ConfigError(f"{path}: section {section!r} must be a mapping")
    return document


@dataclass
class PipelineConfig:
    """Defaults for every CLI subcommand."""

    source_lang: str = "en"
    target_lang: str = "fr"
    typography: Optional[str] = None
    exclude_meta: Dict[str, str] = field(default_factory=dict)
    max_src_tokens: Optional[int] = None
    valid_size: int = 0
    test_size: int = 0
    seed: int = 0
    scope: Dict[str, str] = field(default_factory=dict)
    metric_overrides: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    qa_config: Optional[str] = None
    termbase: Optional[str] = None
    gender_lexicon: Optional[str] = None
    workers: int = 1
    log_level: str = "WARNING"
    source: Optional[str] = None

    @classmethod
    def load(cls, path: Optional[str] = None) -> "PipelineConfig":
        """
        Load the pipeline configuration.

        Args:
            path: Explicit config file; falls back to $LOCBENCH_CONFIG, then config/pipeline.yaml

        Returns:
            PipelineConfig with file values over defaults
        """
        explicit = path or os.environ.get(CONFIG_ENV_VAR)
        if explicit and not os.path.exists(explicit):
            raise ConfigError(f"config file not found: {explicit}")
        path = explicit or config_path("pipeline.yaml")
        return cls.from_dict(load_yaml(path, "pipeline"), source=path)

    @classmethod
    def from_dict(cls, data: Dict[str, Any], source: Optional[str] = None) -> "PipelineConfig":
        config = cls(source=source)
        languages = data.get("languages") or {}
        config.source_lang = languages.get("source", config.source_lang)
        config.target_lang = languages.get("target", config.target_lang)
        config.typography = data.get("typography", config.typography)

        filter_section = data.get("filter") or {}
        config.exclude_meta = {str(k): str(v) for k, v in (filter_section.get("exclude") or {}).items()}
        config.max_src_tokens = filter_section.get("max_src_tokens")

        split_section = data.get("split") or {}
        config.valid_size = split_section.get("valid_size", 0)
        config.test_size = split_section.get("test_size", 0)
        config.seed = split_section.get("seed", 0)
        config.scope = {str(k): str(v) for k, v in (split_section.get("scope") or {}).items()}

        config.metric_overrides = data.get("metrics") or {}

        qa_section = data.get("qa") or {}
        config.qa_config = qa_section.get("config")
        config.termbase = qa_section.get("termbase")
        config.gender_lexicon = qa_section.get("gender_lexicon")

        config.workers = data.get("workers", 1)
        config.log_level = str(data.get("log_level", "WARNING")).upper()

        known = {"languages", "typography", "filter", "split", "metrics", "qa", "workers", "log_level"}
        for key in data:
            if key not in known:
                logger.warning("ignoring unknown pipeline config key %r", key)
        return config

    def resolve(self, path: Optional[str]) -> Optional[str]:
        """Resolve a path relative to the config file's directory."""
        if not path or os.path.isabs(path) or not self.source:
            return path
        candidate = os.path.join(os.path.dirname(os.path.abspath(self.source)), path)
        return candidate if os.path.exists(candidate) else path

    def validate(self) -> List[str]:
        """
        Check value ranges and referenced files.

        Returns:
            Empty list when valid

        Raises:
            ConfigError: listing every problem found
        """
        errors = []
        for name in ("valid_size", "test_size", "workers"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                errors.append(f"{name} must be a non-negative integer, got {value!r}")
        if isinstance(self.workers, int) and self.workers == 0:
            errors.append("workers must be at least 1")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or not 0 <= self.seed < 2 ** 64:
            errors.append(f"seed must be an integer in [0, 2^64), got {self.seed!r}")
        if self.max_src_tokens is not None and (not isinstance(self.max_src_tokens, int)
                                                or self.max_src_tokens < 1):
            errors.append(f"max_src_tokens must be a positive integer, got {self.max_src_tokens!r}")
        if self.log_level not in LOG_LEVELS:
            errors.append(f"log_level must be one of {', '.join(LOG_LEVELS)}")
        if self.source_lang == self.target_lang:
            errors.append("source and target languages must differ")
        for metric, overrides in self.metric_overrides.items():
            if metric not in ("bleu", "chrf", "ter") or not isinstance(overrides, dict):
                errors.append(f"metrics.{metric}: expected bleu/chrf/ter mapping")
        for name in ("typography", "qa_config", "termbase", "gender_lexicon"):
            path = self.resolve(getattr(self, name))
            if path and not os.path.exists(path):
                errors.append(f"{name}: file not found: {path}")
        if errors:
            raise ConfigError("invalid pipeline config: " + "; ".join(errors))
        return errors

    def to_dict(self) -> Dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}
