"""
Evaluator
Scores system outputs against references and renders comparison reports.
"""

import json
import logging
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence

import pandas as pd

from src import __version__
from src.errors import ConfigError
from src.metrics import Metric, MetricScore, MetricSignature, bleu, chrf_pp, round_half_up
from src.ter import ter
from src.tokenizers import detokenize

logger = logging.getLogger(__name__)

DEFAULT_METRICS = (Metric.BLEU, Metric.CHRF2PP, Metric.TER)
_ARROWS = {Metric.BLEU: "BLEU ↑", Metric.CHRF2PP: "chrF2++ ↑", Metric.TER: "TER ↓"}
_OVERRIDE_KEYS = {Metric.BLEU: "bleu", Metric.CHRF2PP: "chrf", Metric.TER: "ter"}


def parse_metrics(names: Optional[Sequence[str]]) -> List[Metric]:
    """Metric enums from CLI/config names such as ``bleu``, ``chrf`` or ``chrF2++``."""
    if not names:
        return list(DEFAULT_METRICS)
    aliases = {"bleu": Metric.BLEU, "chrf": Metric.CHRF2PP, "chrf2++": Metric.CHRF2PP,
               "chrf++": Metric.CHRF2PP, "ter": Metric.TER}
    metrics = []
    for name in names:
        metric = aliases.get(name.lower())
        if metric is None:
            raise ConfigError(f"unknown metric {name!r}; expected one of bleu, chrf, ter")
        if metric not in metrics:
            metrics.append(metric)
    return metrics


def signature_for(metric: Metric, overrides: Optional[Mapping[str, Any]] = None) -> MetricSignature:
    """Default signature for a metric with the matching section of ``metrics`` overrides applied."""
    sig = MetricSignature.default(metric)
    section = (overrides or {}).get(_OVERRIDE_KEYS[metric]) or {}
    return sig.with_overrides(dict(section)) if section else sig


@dataclass
class ScoreReport:
    """Per-system scores with the signatures used."""

    system_name: str
    scores: Dict[str, MetricScore]
    segment_count: int
    tool_version: str = __version__

    def score(self, metric: Metric) -> Optional[float]:
        result = self.scores.get(metric.value)
        return float(result.rounded) if result else None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "system_name": self.system_name,
            "segment_count": self.segment_count,
            "tool_version": self.tool_version,
            "scores": {name: s.to_dict() for name, s in self.scores.items()},
        }

    def format(self) -> str:
        lines = [f"System: {self.system_name} ({self.segment_count:,} segments)"]
        lines.extend(score.format() for score in self.scores.values())
        return "\n".join(lines)

    def save_report(self, output_path: str):
        """
        Save the report as JSON plus a plain-text twin.

        Args:
            output_path: Path of the JSON file; the text file swaps the extension for .txt
        """
        write_report(self.to_dict(), self.format(), output_path)

    def print_summary(self):
        print("\n" + "=" * 60)
        print("SCORE SUMMARY")
        print("=" * 60)
        print(self.format())
        print("=" * 60 + "\n")


def score_system(name: str, hyps: Sequence[str], refs: Sequence[str],
                 metrics: Optional[Sequence[Metric]] = None,
                 overrides: Optional[Mapping[str, Any]] = None,
                 detok_lang: Optional[str] = None, workers: int = 1) -> ScoreReport:
    """
    Score one system with each requested metric.

    Args:
        name: System name
        hyps: System outputs, one per segment
        refs: References aligned with hyps
        metrics: Metrics to compute; defaults to BLEU, chrF2++ and TER
        overrides: Signature overrides keyed by ``bleu``, ``chrf`` and ``ter``
        detok_lang: When set, system outputs are detokenized for this language first
        workers: Processes used for sufficient statistics

    Returns:
        ScoreReport keyed by metric name
    """
    if detok_lang:
        hyps = [detokenize(h, detok_lang) for h in hyps]

    scores: Dict[str, MetricScore] = {}
    for metric in metrics or DEFAULT_METRICS:
        sig = signature_for(metric, overrides)
        if metric is Metric.BLEU:
            result = bleu(hyps, refs, sig, workers=workers)
        elif metric is Metric.CHRF2PP:
            result = chrf_pp(hyps, refs, sig, workers=workers)
        else:
            result, _ = ter(hyps, refs, sig, workers=workers)
        scores[metric.value] = result
        logger.info("%s: %s", name, result.format())
    return ScoreReport(system_name=name, scores=scores, segment_count=len(hyps))


@dataclass
class ComparisonReport:
    """Systems ranked by BLEU, with one signature line per metric."""

    rows: List[Dict[str, Any]]
    signatures: Dict[str, str]
    segment_count: Optional[int] = None
    tool_version: str = __version__
    reports: List[ScoreReport] = field(default_factory=list)

    @staticmethod
    def _sorted(rows: List[Dict[str, Any]]) -> List[Dict[str, Any]]:
        return sorted(rows, key=lambda r: (-(r.get(Metric.BLEU.value) or 0.0), r["system"]))

    @classmethod
    def from_reports(cls, reports: Sequence[ScoreReport]) -> "ComparisonReport":
        rows = []
        signatures: Dict[str, str] = {}
        for report in reports:
            row = {"system": report.system_name}
            for name, score in report.scores.items():
                row[name] = float(score.rounded)
                signatures.setdefault(name, f"{score.name}|{score.signature.format()}")
            rows.append(row)
        count = reports[0].segment_count if reports else None
        return cls(rows=cls._sorted(rows), signatures=signatures, segment_count=count, reports=list(reports))

    @classmethod
    def from_scores(cls, scores: Mapping[str, Mapping[str, float]],
                    signatures: Optional[Mapping[str, str]] = None) -> "ComparisonReport":
        """
        Build a report from stored values, e.g. published result tables.

        Args:
            scores: System name -> {"BLEU": x, "chrF2++": y, "TER": z}
            signatures: Metric name -> signature line; defaults to the default signatures

        Returns:
            ComparisonReport with values rounded half-up to two places
        """
        if signatures is None:
            signatures = {}
            for metric in DEFAULT_METRICS:
                sig = MetricSignature.default(metric)
                signatures[metric.value] = f"{sig.name}|{sig.format()}"
        rows = []
        for system, values in scores.items():
            row = {"system": system}
            row.update({name: float(round_half_up(value)) for name, value in values.items()})
            rows.append(row)
        return cls(rows=cls._sorted(rows), signatures=dict(signatures))

    def to_frame(self) -> pd.DataFrame:
        metrics = [m for m in DEFAULT_METRICS if any(m.value in row for row in self.rows)]
        df = pd.DataFrame(self.rows, columns=["system"] + [m.value for m in metrics])
        return df.set_index("system").rename(columns={m.value: _ARROWS[m] for m in metrics})

    def render_table(self) -> str:
        """Aligned table followed by the signature lines."""
        df = self.to_frame()
        table = df.to_string(float_format=lambda v: f"{v:.2f}", na_rep="-")
        lines = [table, ""]
        for metric in DEFAULT_METRICS:
            if metric.value in self.signatures:
                lines.append(self.signatures[metric.value])
        return "\n".join(lines)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tool_version": self.tool_version,
            "segment_count": self.segment_count,
            "systems": self.rows,
            "signatures": self.signatures,
        }

    def save_report(self, output_path: str):
        write_report(self.to_dict(), self.render_table(), output_path)


def compare(systems: Mapping[str, Sequence[str]], refs: Sequence[str],
            detok_lang: Optional[str] = None, workers: int = 1,
            overrides: Optional[Mapping[str, Any]] = None) -> ComparisonReport:
    """
    Score every system with all three metrics and rank them.

    Args:
        systems: System name -> outputs
        refs: Shared references
        detok_lang: Detokenize system outputs for this language first
        workers: Processes used for sufficient statistics
        overrides: Signature overrides, as for score_system

    Returns:
        ComparisonReport sorted by BLEU descending, then system name
    """
    reports = [
        score_system(name, hyps, refs, DEFAULT_METRICS, overrides, detok_lang, workers)
        for name, hyps in systems.items()
    ]
    return ComparisonReport.from_reports(reports)


def write_report(data: Dict[str, Any], text: str, output_path: str):
    """Write a JSON report and its plain-text rendering next to it."""
    directory = os.path.dirname(output_path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(output_path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, ensure_ascii=False)
    with open(os.path.splitext(output_path)[0] + ".txt", "w", encoding="utf-8") as f:
        f.write(text + "\n")
    logger.info("Report saved to %s", output_path)
