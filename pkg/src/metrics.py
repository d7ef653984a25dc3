"""
Metrics
Corpus-level BLEU and chrF2++ with pinned, reproducible metric signatures.
"""

import math
import string
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from decimal import ROUND_HALF_UP, Decimal
from enum import Enum
from typing import Any, Callable, Dict, List, Sequence, Tuple

from src.errors import ConfigError, EmptyCorpus, LengthMismatch
from src.tokenizers import tokenize_13a_line

REFERENCE_VERSION = "2.0.0"
CHUNK_SIZE = 2000


class Metric(str, Enum):
    BLEU = "BLEU"
    CHRF2PP = "chrF2++"
    TER = "TER"


class Case(str, Enum):
    MIXED = "mixed"
    LOWER = "lower"


class Smoothing(str, Enum):
    EXP = "exp"
    EPS = "eps"
    NONE = "none"


_SMOOTHING_BY_METRIC = {
    Metric.BLEU: (Smoothing.EXP, Smoothing.NONE),
    Metric.CHRF2PP: (Smoothing.NONE, Smoothing.EPS),
    Metric.TER: (Smoothing.NONE,),
}


@dataclass(frozen=True)
class MetricSignature:
    """Every parameter that changes a metric's value, printable in sacre-style short form."""

    metric: Metric
    case: Case = Case.MIXED
    tokenizer: str = "13a"
    smoothing: Smoothing = Smoothing.NONE
    char_order: int = 6
    word_order: int = 2
    beta: int = 2
    normalized: bool = False
    punctuation_tokenized: bool = True
    version: str = REFERENCE_VERSION
    n_refs: int = 1

    def __post_init__(self):
        if self.smoothing not in _SMOOTHING_BY_METRIC[self.metric]:
            raise ConfigError(f"{self.metric.value} does not support smoothing {self.smoothing.value!r}")
        if self.n_refs != 1:
            raise ConfigError("only single-reference scoring is supported")

    @classmethod
    def default(cls, metric: Metric) -> "MetricSignature":
        metric = Metric(metric)
        if metric is Metric.BLEU:
            return cls(metric, case=Case.MIXED, tokenizer="13a", smoothing=Smoothing.EXP)
        if metric is Metric.CHRF2PP:
            return cls(metric, case=Case.MIXED, tokenizer="none", smoothing=Smoothing.NONE,
                       char_order=6, word_order=2, beta=2)
        return cls(metric, case=Case.LOWER, tokenizer="tercom", smoothing=Smoothing.NONE,
                   normalized=False, punctuation_tokenized=True)

    def with_overrides(self, overrides: Dict[str, Any]) -> "MetricSignature":
        """Return a copy with named fields replaced; enum fields accept their string values."""
        known = {f.name: f for f in fields(self)}
        values = {}
        for name, value in overrides.items():
            if name == "effective_order" and self.metric is Metric.CHRF2PP:
                values["smoothing"] = Smoothing.NONE if value else Smoothing.EPS
                continue
            if name not in known or name == "metric":
                raise ConfigError(f"unknown signature field for {self.metric.value}: {name!r}")
            if name == "case":
                value = Case(value)
            elif name == "smoothing":
                value = Smoothing(value)
            values[name] = value
        return replace(self, **values)

    @property
    def effective_order(self) -> bool:
        """chrF averages only over orders present on both sides unless eps smoothing is selected."""
        return self.metric is Metric.CHRF2PP and self.smoothing is Smoothing.NONE

    @property
    def name(self) -> str:
        if self.metric is Metric.CHRF2PP:
            return f"chrF{self.beta}" + "+" * self.word_order
        return self.metric.value

    def format(self) -> str:
        """Short signature, e.g. ``#:1|c:mixed|e:no|tok:13a|s:exp|v:2.0.0``."""
        yes_no = {True: "yes", False: "no"}
        if self.metric is Metric.BLEU:
            parts = [f"#:{self.n_refs}", f"c:{self._case_tag()}", "e:no",
                     f"tok:{self.tokenizer}", f"s:{self.smoothing.value}"]
        elif self.metric is Metric.CHRF2PP:
            parts = [f"#:{self.n_refs}", f"c:{self._case_tag()}", f"e:{yes_no[self.effective_order]}",
                     f"nc:{self.char_order}", f"nw:{self.word_order}", "s:no"]
        else:
            parts = [f"#:{self.n_refs}", f"c:{self._case_tag()}", "t:tercom",
                     f"nr:{yes_no[self.normalized]}", f"pn:{yes_no[self.punctuation_tokenized]}", "a:no"]
        parts.append(f"v:{self.version}")
        return "|".join(parts)

    def _case_tag(self) -> str:
        return "lc" if self.case is Case.LOWER else "mixed"


def round_half_up(value: float, places: int = 2) -> Decimal:
    """Round for presentation only; computation stays in full precision."""
    return Decimal(str(value)).quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_UP)


@dataclass(frozen=True)
class MetricScore:
    """One metric's corpus score with the signature that produced it."""

    signature: MetricSignature
    score: float
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def name(self) -> str:
        return self.signature.name

    @property
    def rounded(self) -> Decimal:
        return round_half_up(self.score)

    def format(self) -> str:
        return f"{self.name}|{self.signature.format()} = {self.rounded}"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "metric": self.name,
            "score": float(self.rounded),
            "signature": self.signature.format(),
            **self.details,
        }


# ---------------------------------------------------------------------------
# Shared plumbing
# ---------------------------------------------------------------------------

def check_corpus(hyps: Sequence[str], refs: Sequence[str]):
    if len(hyps) != len(refs):
        raise LengthMismatch(len(hyps), len(refs))
    if not hyps:
        raise EmptyCorpus()


def sum_statistics(worker: Callable, pairs: List[Tuple[str, str]], options: tuple,
                   workers: int = 1) -> List[int]:
    """
    Compute integer sufficient statistics, optionally over a process pool.

    Args:
        worker: Top-level function mapping (pairs, *options) to a list of ints
        pairs: (hypothesis, reference) pairs
        options: Extra arguments forwarded to the worker
        workers: Number of processes; 1 computes in-process

    Returns:
        Column-wise sums of the per-chunk statistics
    """
    if workers <= 1 or len(pairs) <= CHUNK_SIZE:
        return worker((pairs, *options))
    chunks = [(pairs[i:i + CHUNK_SIZE], *options) for i in range(0, len(pairs), CHUNK_SIZE)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        partials = list(pool.map(worker, chunks))
    return [sum(column) for column in zip(*partials)]


# ---------------------------------------------------------------------------
# BLEU
# ---------------------------------------------------------------------------

BLEU_MAX_ORDER = 4


def _word_ngrams(tokens: Sequence[str], order: int) -> Counter:
    return Counter(tuple(tokens[i:i + order]) for i in range(len(tokens) - order + 1))


def bleu_segment_statistics(hyp_tokens: Sequence[str], ref_tokens: Sequence[str]) -> List[int]:
    """[hyp_len, ref_len, correct_1..4, total_1..4] for one segment."""
    correct, total = [], []
    for order in range(1, BLEU_MAX_ORDER + 1):
        hyp_ngrams = _word_ngrams(hyp_tokens, order)
        ref_ngrams = _word_ngrams(ref_tokens, order)
        correct.append(sum(min(count, ref_ngrams[ngram]) for ngram, count in hyp_ngrams.items()))
        total.append(max(0, len(hyp_tokens) - order + 1))
    return [len(hyp_tokens), len(ref_tokens)] + correct + total


def _bleu_worker(args) -> List[int]:
    pairs, lowercase = args
    stats = [0] * (2 + 2 * BLEU_MAX_ORDER)
    for hyp, ref in pairs:
        if lowercase:
            hyp, ref = hyp.lower(), ref.lower()
        hyp_tokens = tokenize_13a_line(hyp.rstrip()).split()
        ref_tokens = tokenize_13a_line(ref.rstrip()).split()
        for i, value in enumerate(bleu_segment_statistics(hyp_tokens, ref_tokens)):
            stats[i] += value
    return stats


def _log(value: float) -> float:
    return math.log(value) if value > 0 else -9999999999.0


def bleu_from_statistics(stats: Sequence[int], smoothing: Smoothing) -> Dict[str, Any]:
    """Score and its components from summed BLEU statistics."""
    sys_len, ref_len = stats[0], stats[1]
    correct = stats[2:2 + BLEU_MAX_ORDER]
    total = stats[2 + BLEU_MAX_ORDER:]
    precisions = [0.0] * BLEU_MAX_ORDER

    if not any(correct):
        return {"score": 0.0, "precisions": precisions, "bp": 0.0, "sys_len": sys_len, "ref_len": ref_len}

    smooth = 1.0
    for n in range(BLEU_MAX_ORDER):
        if total[n] == 0:
            break
        if correct[n] == 0:
            if smoothing is Smoothing.EXP:
                smooth *= 2
                precisions[n] = 100.0 / (smooth * total[n])
        else:
            precisions[n] = 100.0 * correct[n] / total[n]

    bp = 1.0
    if sys_len < ref_len:
        bp = math.exp(1 - ref_len / sys_len) if sys_len > 0 else 0.0
    score = bp * math.exp(sum(_log(p) for p in precisions) / BLEU_MAX_ORDER)
    return {"score": score, "precisions": precisions, "bp": bp, "sys_len": sys_len, "ref_len": ref_len}


def bleu(hyps: Sequence[str], refs: Sequence[str], sig: MetricSignature = None,
         workers: int = 1) -> MetricScore:
    """
    Corpus BLEU over 13a tokens.

    Args:
        hyps: System outputs
        refs: One reference per output
        sig: Signature; defaults to the BLEU default
        workers: Processes used for n-gram statistics

    Returns:
        Score with signature, precisions and brevity penalty
    """
    sig = sig or MetricSignature.default(Metric.BLEU)
    check_corpus(hyps, refs)
    stats = sum_statistics(_bleu_worker, list(zip(hyps, refs)), (sig.case is Case.LOWER,), workers)
    result = bleu_from_statistics(stats, sig.smoothing)
    details = {
        "precisions": [round(p, 4) for p in result["precisions"]],
        "bp": round(result["bp"], 4),
        "sys_len": result["sys_len"],
        "ref_len": result["ref_len"],
    }
    return MetricScore(signature=sig, score=result["score"], details=details)


# ---------------------------------------------------------------------------
# chrF2++
# ---------------------------------------------------------------------------

_PUNCTUATION = frozenset(string.punctuation)
_EPS = 1e-16


def chrf_words(text: str) -> List[str]:
    """Whitespace words with one leading or trailing punctuation mark split off."""
    words = []
    for word in text.split():
        if len(word) == 1:
            words.append(word)
        elif word[-1] in _PUNCTUATION:
            words.extend([word[:-1], word[-1]])
        elif word[0] in _PUNCTUATION:
            words.extend([word[0], word[1:]])
        else:
            words.append(word)
    return words


def _char_ngrams(text: str, order: int) -> Counter:
    return Counter(text[i:i + order] for i in range(len(text) - order + 1))


def chrf_segment_statistics(hyp: str, ref: str, char_order: int, word_order: int) -> List[int]:
    """[hyp_count, ref_count, match_count] per order, character orders first."""
    stats = []
    hyp_chars, ref_chars = "".join(hyp.split()), "".join(ref.split())
    pairs = [(_char_ngrams(hyp_chars, n), _char_ngrams(ref_chars, n)) for n in range(1, char_order + 1)]
    if word_order:
        hyp_words, ref_words = chrf_words(hyp), chrf_words(ref)
        pairs += [(_word_ngrams(hyp_words, n), _word_ngrams(ref_words, n)) for n in range(1, word_order + 1)]
    for hyp_ngrams, ref_ngrams in pairs:
        match = sum(min(count, ref_ngrams[ngram]) for ngram, count in hyp_ngrams.items())
        # hypothesis n-grams count only for orders the reference has
        stats.extend([sum(hyp_ngrams.values()) if ref_ngrams else 0, sum(ref_ngrams.values()), match])
    return stats


def _chrf_worker(args) -> List[int]:
    pairs, lowercase, char_order, word_order = args
    stats = [0] * (3 * (char_order + word_order))
    for hyp, ref in pairs:
        if lowercase:
            hyp, ref = hyp.lower(), ref.lower()
        for i, value in enumerate(chrf_segment_statistics(hyp, ref, char_order, word_order)):
            stats[i] += value
    return stats


def chrf_from_statistics(stats: Sequence[int], beta: int, effective_order: bool) -> float:
    """F-beta score (0-100) from summed chrF statistics."""
    orders = len(stats) // 3
    factor = beta ** 2
    score = avg_prec = avg_rec = 0.0
    effective = 0
    for i in range(orders):
        n_hyp, n_ref, n_match = stats[3 * i:3 * i + 3]
        prec = n_match / n_hyp if n_hyp > 0 else _EPS
        rec = n_match / n_ref if n_ref > 0 else _EPS
        denom = factor * prec + rec
        score += ((1 + factor) * prec * rec / denom) if denom > 0 else _EPS
        if n_hyp > 0 and n_ref > 0:
            effective += 1
            avg_prec += prec
            avg_rec += rec

    if not effective_order:
        return 100 * score / orders
    if effective == 0:
        return 0.0
    avg_prec /= effective
    avg_rec /= effective
    if avg_prec + avg_rec:
        return 100 * (1 + factor) * avg_prec * avg_rec / (factor * avg_prec + avg_rec)
    return 0.0


def chrf_pp(hyps: Sequence[str], refs: Sequence[str], sig: MetricSignature = None,
            workers: int = 1) -> MetricScore:
    """
    Corpus chrF2++ (character orders 1-6, word orders 1-2, beta 2).

    Args:
        hyps: System outputs
        refs: One reference per output
        sig: Signature; defaults to the chrF2++ default
        workers: Processes used for n-gram statistics

    Returns:
        Score with signature
    """
    sig = sig or MetricSignature.default(Metric.CHRF2PP)
    check_corpus(hyps, refs)
    options = (sig.case is Case.LOWER, sig.char_order, sig.word_order)
    stats = sum_statistics(_chrf_worker, list(zip(hyps, refs)), options, workers)
    score = chrf_from_statistics(stats, sig.beta, sig.effective_order)
    return MetricScore(signature=sig, score=score)
