"""
TER
Translation edit rate with tercom-style greedy block shifts over a beam-limited edit distance.
"""

import math
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from src.errors import EmptyRef
from src.metrics import Metric, MetricScore, MetricSignature, Case, check_corpus, sum_statistics
from src.tokenizers import tokenize_tercom

COST_INS = 1
COST_DEL = 1
COST_SUB = 1
MAX_SHIFT_SIZE = 10
MAX_SHIFT_DIST = 50
MAX_SHIFT_CANDIDATES = 1000
BEAM_WIDTH = 25

_INFINITY = int(1e16)
OP_INS = "i"
OP_DEL = "d"
OP_NOP = " "
OP_SUB = "s"
OP_UNDEF = "x"
_FLIP_OPS = str.maketrans(OP_INS + OP_DEL, OP_DEL + OP_INS)

Row = List[Tuple[int, str]]


@dataclass(frozen=True)
class TerAlignment:
    """Edit counts of one segment after shifting."""

    insertions: int
    deletions: int
    substitutions: int
    shifts: int
    ref_length: int

    @property
    def edits(self) -> int:
        return self.insertions + self.deletions + self.substitutions + self.shifts

    @property
    def score(self) -> Optional[float]:
        return self.edits / self.ref_length if self.ref_length > 0 else None


class BeamEditDistance:
    """Word edit distance against a fixed reference, reusing rows of the previous hypothesis."""

    def __init__(self, words_ref: Sequence[str]):
        self.words_ref = list(words_ref)
        self._initial_row: Row = [(j * COST_INS, OP_INS) for j in range(len(self.words_ref) + 1)]
        self._cached_words: List[str] = []
        self._cached_rows: List[Row] = []

    def __call__(self, words_hyp: Sequence[str]) -> Tuple[int, str]:
        """
        Edit distance and operation trace rewriting the hypothesis into the reference.

        Returns:
            (distance, trace) where ``d`` consumes a hypothesis word and ``i`` a reference word
        """
        words_hyp = list(words_hyp)
        shared = 0
        limit = min(len(words_hyp), len(self._cached_words))
        if len(words_hyp) == len(self._cached_words):
            while shared < limit and words_hyp[shared] == self._cached_words[shared]:
                shared += 1
        rows = self._cached_rows[:shared] if shared else []
        rows = self._fill(words_hyp, rows)
        self._cached_words = words_hyp
        self._cached_rows = rows
        return rows[-1][-1][0] if rows else self._initial_row[-1][0], self._trace(words_hyp, rows)

    def _fill(self, words_h: List[str], rows: List[Row]) -> List[Row]:
        n_ref = len(self.words_ref)
        n_hyp = len(words_h)
        length_ratio = n_ref / n_hyp if words_h else 1.0
        beam = math.ceil(length_ratio / 2 + BEAM_WIDTH) if length_ratio / 2 > BEAM_WIDTH else BEAM_WIDTH

        for i in range(len(rows) + 1, n_hyp + 1):
            prev = rows[-1] if rows else self._initial_row
            diagonal = math.floor(i * length_ratio)
            min_j = max(0, diagonal - beam)
            max_j = n_ref + 1 if i == n_hyp else min(n_ref + 1, diagonal + beam)
            row: Row = [(_INFINITY, OP_UNDEF)] * (n_ref + 1)
            word = words_h[i - 1]
            for j in range(min_j, max_j):
                if j == 0:
                    row[j] = (prev[j][0] + COST_DEL, OP_DEL)
                    continue
                if word == self.words_ref[j - 1]:
                    cost_sub, op_sub = 0, OP_NOP
                else:
                    cost_sub, op_sub = COST_SUB, OP_SUB
                # preference: match/substitution, then deletion, then insertion
                for cost, op in (
                    (prev[j - 1][0] + cost_sub, op_sub),
                    (prev[j][0] + COST_DEL, OP_DEL),
                    (row[j - 1][0] + COST_INS, OP_INS),
                ):
                    if row[j][0] > cost:
                        row[j] = (cost, op)
            rows.append(row)
        return rows

    def _trace(self, words_h: List[str], rows: List[Row]) -> str:
        i, j = len(words_h), len(self.words_ref)
        ops = []
        while i > 0 or j > 0:
            op = rows[i - 1][j][1] if i > 0 else self._initial_row[j][1]
            ops.append(op)
            if op in (OP_SUB, OP_NOP):
                i -= 1
                j -= 1
            elif op == OP_INS:
                j -= 1
            elif op == OP_DEL:
                i -= 1
            else:
                raise RuntimeError(f"edit trace left the beam at ({i}, {j})")
        return "".join(reversed(ops))


def trace_to_alignment(trace: str) -> Tuple[Dict[int, int], List[int], List[int]]:
    """
    Alignment of a reference-to-hypothesis trace.

    Returns:
        (reference position -> hypothesis position, reference error flags, hypothesis error flags)
    """
    pos_hyp = pos_ref = -1
    align: Dict[int, int] = {}
    ref_err: List[int] = []
    hyp_err: List[int] = []
    for op in trace:
        if op in (OP_NOP, OP_SUB):
            pos_hyp += 1
            pos_ref += 1
            align[pos_ref] = pos_hyp
            flag = 0 if op == OP_NOP else 1
            hyp_err.append(flag)
            ref_err.append(flag)
        elif op == OP_INS:
            pos_hyp += 1
            hyp_err.append(1)
        elif op == OP_DEL:
            pos_ref += 1
            align[pos_ref] = pos_hyp
            ref_err.append(1)
        else:
            raise ValueError(f"unknown edit operation {op!r}")
    return align, ref_err, hyp_err


def find_shifted_pairs(words_h: Sequence[str], words_r: Sequence[str]) -> Iterator[Tuple[int, int, int]]:
    """Yield (hyp start, ref start, length) for every matching run within the shift limits."""
    n_hyp, n_ref = len(words_h), len(words_r)
    for start_h in range(n_hyp):
        for start_r in range(n_ref):
            if abs(start_r - start_h) > MAX_SHIFT_DIST:
                continue
            length = 0
            while words_h[start_h + length] == words_r[start_r + length] and length < MAX_SHIFT_SIZE:
                length += 1
                yield start_h, start_r, length
                if n_hyp == start_h + length or n_ref == start_r + length:
                    break


def perform_shift(words: List[str], start: int, length: int, target: int) -> List[str]:
    """Move words[start:start+length] so that it lands before position target."""
    if target < start:
        return words[:target] + words[start:start + length] + words[target:start] + words[start + length:]
    if target > start + length:
        return words[:start] + words[start + length:target] + words[start:start + length] + words[target:]
    return (words[:start] + words[start + length:length + target]
            + words[start:start + length] + words[length + target:])


def shift_candidates(words_h: List[str], words_r: List[str],
                     trace: str) -> Iterator[Tuple[int, int, int, int, List[str]]]:
    """
    Shifts permitted by the tercom constraints for the current hypothesis.

    Yields:
        (hyp start, ref start, length, target index, shifted words)
    """
    align, ref_err, hyp_err = trace_to_alignment(trace.translate(_FLIP_OPS))
    for start_h, start_r, length in find_shifted_pairs(words_h, words_r):
        # only move words that are wrong to a place where the reference is not matched
        if sum(hyp_err[start_h:start_h + length]) == 0:
            continue
        if sum(ref_err[start_r:start_r + length]) == 0:
            continue
        if start_h <= align[start_r] < start_h + length:
            continue
        previous = -1
        for offset in range(-1, length):
            if start_r + offset == -1:
                target = 0
            elif start_r + offset in align:
                target = align[start_r + offset] + 1
            else:
                break
            if target == previous:
                continue
            previous = target
            yield start_h, start_r, length, target, perform_shift(words_h, start_h, length, target)


def _best_shift(words_h: List[str], words_r: List[str], distance: BeamEditDistance,
                checked: int) -> Tuple[int, List[str], int]:
    pre_score, trace = distance(words_h)
    best = None
    current_pair = None
    for start_h, start_r, length, target, shifted in shift_candidates(words_h, words_r, trace):
        # the candidate budget is checked between matching pairs
        if (start_h, start_r, length) != current_pair:
            if checked >= MAX_SHIFT_CANDIDATES:
                break
            current_pair = (start_h, start_r, length)
        candidate = (pre_score - distance(shifted)[0], length, -start_h, -target, shifted)
        checked += 1
        if best is None or candidate > best:
            best = candidate
    if best is None:
        return 0, words_h, checked
    return best[0], best[4], checked


def _count_operations(trace: str) -> Tuple[int, int, int]:
    """(insertions, deletions, substitutions) from the hypothesis-to-reference trace."""
    return trace.count(OP_INS), trace.count(OP_DEL), trace.count(OP_SUB)


def align_segment(words_h: Sequence[str], words_r: Sequence[str]) -> TerAlignment:
    """
    Greedy tercom search for one segment.

    Args:
        words_h: Hypothesis words
        words_r: Reference words

    Returns:
        Edit counts; reference words missing from the hypothesis are insertions,
        surplus hypothesis words are deletions
    """
    words_h, words_r = list(words_h), list(words_r)
    if not words_r:
        return TerAlignment(0, len(words_h), 0, 0, 0)

    distance = BeamEditDistance(words_r)
    shifts = 0
    checked = 0
    while True:
        delta, shifted, checked = _best_shift(words_h, words_r, distance, checked)
        if checked >= MAX_SHIFT_CANDIDATES or delta <= 0:
            break
        shifts += 1
        words_h = shifted
    _, trace = distance(words_h)
    insertions, deletions, substitutions = _count_operations(trace)
    return TerAlignment(insertions, deletions, substitutions, shifts, len(words_r))


def edit_distance(words_h: Sequence[str], words_r: Sequence[str]) -> int:
    """Plain word edit distance, no shifts."""
    if not words_r:
        return len(words_h)
    return BeamEditDistance(words_r)(words_h)[0]


def exhaustive_ter(words_h: Sequence[str], words_r: Sequence[str]) -> int:
    """
    Minimum of shifts + edit distance over every sequence of strictly improving
    shifts allowed by the tercom candidate rules. Exponential; small inputs only.
    """
    words_r = list(words_r)
    if not words_r:
        return len(words_h)
    distance = BeamEditDistance(words_r)
    start = tuple(words_h)
    best = distance(list(start))[0]
    frontier = {start: 0}
    seen = {start: 0}
    while frontier:
        next_frontier = {}
        for words, shifts in frontier.items():
            score, trace = distance(list(words))
            best = min(best, shifts + score)
            for *_, shifted in list(shift_candidates(list(words), words_r, trace)):
                if distance(shifted)[0] >= score:
                    continue
                key = tuple(shifted)
                if key in seen and seen[key] <= shifts + 1:
                    continue
                seen[key] = shifts + 1
                next_frontier[key] = shifts + 1
        frontier = next_frontier
    return best


def _ter_worker(args) -> List[int]:
    pairs, lowercase, normalized, keep_punctuation = args
    stats = [0, 0, 0, 0, 0, 0]
    for hyp, ref in pairs:
        alignment = align_segment(
            tokenize_tercom(hyp, lowercase, normalized, keep_punctuation),
            tokenize_tercom(ref, lowercase, normalized, keep_punctuation),
        )
        for i, value in enumerate((alignment.insertions, alignment.deletions, alignment.substitutions,
                                   alignment.shifts, alignment.ref_length, 1)):
            stats[i] += value
    return stats


def ter(hyps: Sequence[str], refs: Sequence[str], sig: MetricSignature = None,
        workers: int = 1) -> Tuple[MetricScore, List[TerAlignment]]:
    """
    Corpus TER: total edits over total reference words, x100.

    Args:
        hyps: System outputs
        refs: One reference per output
        sig: Signature; defaults to the TER default
        workers: Processes used for the per-segment search

    Returns:
        (score, per-segment alignments)
    """
    sig = sig or MetricSignature.default(Metric.TER)
    check_corpus(hyps, refs)
    options = (sig.case is Case.LOWER, sig.normalized, sig.punctuation_tokenized)
    pairs = list(zip(hyps, refs))

    if workers > 1:
        totals = sum_statistics(_ter_worker, pairs, options, workers)
        alignments = []
    else:
        alignments = [
            align_segment(tokenize_tercom(h, *options), tokenize_tercom(r, *options)) for h, r in pairs
        ]
        totals = [
            sum(a.insertions for a in alignments),
            sum(a.deletions for a in alignments),
            sum(a.substitutions for a in alignments),
            sum(a.shifts for a in alignments),
            sum(a.ref_length for a in alignments),
        ]

    insertions, deletions, substitutions, shifts, ref_length = totals[:5]
    if ref_length == 0:
        raise EmptyRef()
    edits = insertions + deletions + substitutions + shifts
    details = {
        "edits": edits,
        "ref_length": ref_length,
        "insertions": insertions,
        "deletions": deletions,
        "substitutions": substitutions,
        "shifts": shifts,
    }
    return MetricScore(signature=sig, score=100.0 * edits / ref_length, details=details), alignments
