"""
Shared fixtures: small segment factories and synthetic corpora with planted defects.
"""

import os
import random
import sys

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

from src.corpus import BiSegment  # noqa: E402

PLANTED_UNIQUE = 820
PLANTED_EMPTY = 50
PLANTED_UNTRANSLATED = 30
PLANTED_DUPLICATES = 100


def make_segment(source: str, target: str, source_lang: str = "en", target_lang: str = "fr",
                 **meta) -> BiSegment:
    return BiSegment.create(source, target, source_lang, target_lang, {k: str(v) for k, v in meta.items()})


def planted_pairs(seed: int = 7):
    """1,000 (source, target) pairs: 820 good, 50 empty targets, 30 untranslated, 100 repeats."""
    good = [(f"Line {i} of the quest log", f"Ligne {i} du journal de qu\u00eate") for i in range(PLANTED_UNIQUE)]
    empty = [(f"Unused string {i}", "") for i in range(PLANTED_EMPTY)]
    untranslated = [(f"Item {i}", f"Item {i}") for i in range(PLANTED_UNTRANSLATED)]
    repeats = good[:PLANTED_DUPLICATES]
    rest = empty + untranslated + repeats
    random.Random(seed).shuffle(rest)
    # originals first so every repeat follows the pair it duplicates
    return good + rest


@pytest.fixture
def segment():
    return make_segment


@pytest.fixture
def planted_corpus():
    return [make_segment(s, t, key=f"K{i}") for i, (s, t) in enumerate(planted_pairs())]


@pytest.fixture
def skyrim_corpus():
    """12,000 segments, half of them from one game."""
    segments = []
    for i in range(12000):
        game = "Skyrim" if i % 2 == 0 else "Oblivion"
        segments.append(make_segment(f"Source line {i}", f"Ligne source {i}", game_title=game))
    return segments


@pytest.fixture
def config_dir():
    return os.path.join(os.path.dirname(__file__), "..", "config")


# ---------------------------------------------------------------------------
# QA corpus with planted defects
# ---------------------------------------------------------------------------

PLANTED_TERMBASE_CSV = (
    "source_term,target_term,case_sensitive,forbidden_targets\n"
    "Dragonborn,Enfant de dragon,false,Dragonn\u00e9\n"
)

_ADDRESS = {
    "tu": (("The guard will see you now.", "Le garde va te recevoir."),
           ("The captain thanks you.", "Le capitaine te remercie.")),
    "vous": (("The guard will see you now.", "Le garde va vous recevoir."),
             ("The captain thanks you.", "Le capitaine vous remercie.")),
}
_COINS = ("The merchant asks for {0} coins.", "Le marchand demande {0} pi\u00e8ces.")
_COINS_DROPPED = "Le marchand demande des pi\u00e8ces."
_LEGEND_SOURCE = "The legend of the Dragonborn lives on."
_LEGEND = {
    None: "La l\u00e9gende de l'Enfant de dragon perdure.",
    "TermViolation": "La l\u00e9gende du Dragonn\u00e9 perdure.",
    "UntranslatedTerm": "La l\u00e9gende du Dragonborn perdure.",
}


def planted_qa_corpus(conversations: int = 200, seed: int = 5, rate: float = 0.25):
    """
    Four-line conversations, each defect planted independently with probability ``rate``.

    Returns:
        (segments, expected) where expected counts planted findings per category
    """
    rng = random.Random(seed)
    expected = {"PlaceholderMismatch": 0, "TermViolation": 0, "UntranslatedTerm": 0, "RegisterInconsistent": 0}
    segments = []
    for c in range(conversations):
        family = rng.choice(["tu", "vous"])
        opening, closing = _ADDRESS[family]
        coins_target = _COINS[1]
        legend = None
        if rng.random() < rate:
            coins_target = _COINS_DROPPED
            expected["PlaceholderMismatch"] += 1
        if rng.random() < rate:
            legend = rng.choice(["TermViolation", "UntranslatedTerm"])
            expected[legend] += 1
        if rng.random() < rate:
            closing = _ADDRESS["vous" if family == "tu" else "tu"][1]
            expected["RegisterInconsistent"] += 1
        lines = [opening, (_COINS[0], coins_target), (_LEGEND_SOURCE, _LEGEND[legend]), closing]
        segments.extend(make_segment(s, t, conversation=f"conv{c:03d}", key=f"C{c:03d}L{i}")
                        for i, (s, t) in enumerate(lines))
    return segments, expected


# ---------------------------------------------------------------------------
# Metric corpora
# ---------------------------------------------------------------------------

METRIC_VOCAB = ["the", "a", "dragon", "guard", "gate", "Whiterun", "sword", "gold", "open", "door",
                ",", ".", "!", "?", "it's", "(north)", "J'arl", "don't", "3.50", "1,000"]
ACCENTED_VOCAB = ["l'\u00e9p\u00e9e", "o\u00f9", "\u00ab", "\u00bb", "ch\u00e2teau", "na\u00efve", "\u00c9tienne",
                  "d\u2019or", "Stra\u00dfe", "\u2026", "pr\u00eat", "\u00e0"]
PUNCTUATION_VOCAB = [",", ".", "!", "?", "...", ";", ":", "(", ")", "\"", "'", "-", "--", "!?", "{0}", "<b>"]


def metric_sentence(rng, vocab, max_words=12):
    return " ".join(rng.choices(vocab, k=rng.randint(1, max_words)))


def adversarial_corpus(rng):
    """
    Random (hyps, refs) mixing plain, empty, accented, punctuation-heavy, repeated and long segments.

    References are never empty.
    """
    size = rng.randint(1, 6)
    hyps, refs = [], []
    for _ in range(size):
        kind = rng.choice(["plain", "plain", "empty", "accented", "punctuation", "repeat", "long"])
        if kind == "accented":
            vocab = METRIC_VOCAB + ACCENTED_VOCAB
        elif kind == "punctuation":
            vocab = METRIC_VOCAB[:4] + PUNCTUATION_VOCAB
        else:
            vocab = METRIC_VOCAB
        ref = metric_sentence(rng, vocab, 40 if kind == "long" else 12)
        if kind == "empty":
            hyp = ""
        elif kind == "repeat":
            hyp = " ".join([rng.choice(ref.split())] * rng.randint(1, 8))
        elif rng.random() < 0.5:
            words = ref.split()
            rng.shuffle(words)
            cut = rng.randint(1, len(words))
            hyp = " ".join(words[:cut] + rng.choices(vocab, k=rng.randint(0, 3)))
        else:
            hyp = metric_sentence(rng, vocab, 40 if kind == "long" else 12)
        hyps.append(hyp)
        refs.append(ref)
    return hyps, refs
