"""Sentence decomposition into word-pair classification samples.

A virtual root is prepended at position 0 as the semantic head of every
predicate.  Two sample kinds cover the whole task: (root, word) pairs carry
sense labels (or the no-relation label when the word is not a predicate),
and (predicate, word) pairs carry role labels.  One label inventory serves
both kinds; sense labels are namespaced internally so a sense suffix such
as "01" can never collide with a role string.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .conll import Sentence, Token, copy_sentence

NONE_LABEL = "<none>"
_SENSE_TAG = "sense:"

SENSE_PAIR = "sense"
ROLE_PAIR = "role"


class DataError(ValueError):
    """Annotation or tree structure that the decomposition cannot consume."""


def sense_suffix(pred: str) -> str:
    """Sense part of a PRED cell: "prevent.01" -> "01"."""
    return pred.rsplit(".", 1)[-1]


@dataclass(frozen=True)
class WordPairSample:
    head: int                 # 0 = virtual root
    dep: int                  # 1..L-1; may equal head for role pairs
    kind: str                 # SENSE_PAIR | ROLE_PAIR
    label: int | None = None  # gold label id, training only


class LabelSpace:
    """Unified inventory {none} + role labels + sense labels with dense ids."""

    def __init__(self, role_labels: list[str], sense_suffixes: list[str],
                 most_common_sense: str | None = None):
        self.labels = [NONE_LABEL]
        self.labels += role_labels
        self.labels += [_SENSE_TAG + s for s in sense_suffixes]
        self._ids = {label: i for i, label in enumerate(self.labels)}
        if len(self._ids) != len(self.labels):
            raise DataError("duplicate labels in inventory")
        self.none_id = 0
        self.role_ids = list(range(1, 1 + len(role_labels)))
        self.sense_ids = list(range(1 + len(role_labels), len(self.labels)))
        self.most_common_sense = most_common_sense

    def __len__(self):
        return len(self.labels)

    @classmethod
    def from_corpus(cls, sentences: list[Sentence]) -> "LabelSpace":
        roles = set()
        senses: Counter = Counter()
        for sent in sentences:
            for t in sent.tokens:
                roles.update(a for a in t.apreds if a is not None)
                if t.pred is not None:
                    senses[sense_suffix(t.pred)] += 1
        most_common = None
        if senses:
            most_common = min(senses, key=lambda s: (-senses[s], s))
        return cls(sorted(roles), sorted(senses), most_common)

    def role_id(self, label: str) -> int:
        i = self._ids.get(label)
        if i is None or i not in set(self.role_ids):
            raise DataError(f"unknown role label {label!r}")
        return i

    def sense_id(self, suffix: str) -> int:
        i = self._ids.get(_SENSE_TAG + suffix)
        if i is None:
            raise DataError(f"unknown sense {suffix!r}")
        return i

    def is_sense_id(self, i: int) -> bool:
        return i >= self.sense_ids[0] if self.sense_ids else False

    def name(self, i: int) -> str:
        """Surface string for a label id (sense ids map back to suffixes)."""
        label = self.labels[i]
        if label.startswith(_SENSE_TAG):
            return label[len(_SENSE_TAG):]
        return label

    def to_json(self) -> dict:
        return {
            "roles": [self.labels[i] for i in self.role_ids],
            "senses": [self.name(i) for i in self.sense_ids],
            "most_common_sense": self.most_common_sense,
        }

    @classmethod
    def from_json(cls, data: dict) -> "LabelSpace":
        return cls(data["roles"], data["senses"], data["most_common_sense"])


# ---------------------------------------------------------------------------
# pair construction

def sense_pairs(sentence: Sentence, labels: LabelSpace,
                mode: str = "given") -> list[WordPairSample]:
    """Root-headed pairs for one sentence.

    mode "given": one pair per annotated predicate (predicates supplied by
    the data, as in CoNLL-2009).  mode "all": one pair for every word, with
    the no-relation label on non-predicates (CoNLL-2008 identification).
    """
    if mode not in ("given", "all"):
        raise ValueError(f"unknown sense-pair mode {mode!r}")
    out = []
    for t in sentence.tokens:
        if t.fillpred:
            if t.pred is None:
                raise DataError(f"predicate at {t.idx} has no sense annotation")
            out.append(WordPairSample(0, t.idx, SENSE_PAIR,
                                      labels.sense_id(sense_suffix(t.pred))))
        elif mode == "all":
            out.append(WordPairSample(0, t.idx, SENSE_PAIR, labels.none_id))
    return out


def role_pairs(sentence: Sentence, predicate: int,
               labels: LabelSpace | None = None) -> list[WordPairSample]:
    """One (predicate, word) pair per non-root word, the predicate included."""
    gold: dict[int, str] = {}
    if labels is not None:
        positions = sentence.predicate_positions()
        if predicate not in positions:
            raise DataError(f"position {predicate} is not a predicate")
        ordinal = positions.index(predicate)
        for t in sentence.tokens:
            if ordinal < len(t.apreds) and t.apreds[ordinal] is not None:
                gold[t.idx] = t.apreds[ordinal]
    out = []
    for t in sentence.tokens:
        label = None
        if labels is not None:
            role = gold.get(t.idx)
            label = labels.none_id if role is None else labels.role_id(role)
        out.append(WordPairSample(predicate, t.idx, ROLE_PAIR, label))
    return out


# ---------------------------------------------------------------------------
# k-order argument pruning

@dataclass(frozen=True)
class PruningConfig:
    k: int
    source: str = "pred"      # "gold" HEAD column or "pred" PHEAD column

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("pruning order k must be >= 0")
        if self.source not in ("gold", "pred"):
            raise ValueError(f"unknown head source {self.source!r}")


def _heads(sentence: Sentence, source: str) -> list[int]:
    heads = [t.head if source == "gold" else t.phead for t in sentence.tokens]
    n = len(heads)
    for i, h in enumerate(heads):
        if not 0 <= h <= n:
            raise DataError(f"head {h} of token {i + 1} out of range")
        if h == i + 1:
            raise DataError(f"token {i + 1} is its own head")
    # every token must reach the root without revisiting a node
    for start in range(1, n + 1):
        seen = set()
        node = start
        while node != 0:
            if node in seen:
                raise DataError(f"cyclic head structure at token {start}")
            seen.add(node)
            node = heads[node - 1]
    return heads


def prune_candidates(sentence: Sentence, predicate: int,
                     cfg: PruningConfig) -> set[int]:
    """Positions kept as argument candidates for one predicate.

    A word survives iff it lies within k edges below the predicate or below
    one of the predicate's syntactic ancestors (the chain up to and
    including head position 0, so every root of a multi-rooted analysis is
    reachable).  The predicate itself is its own depth-0 descendant, so it
    always stays.
    """
    heads = _heads(sentence, cfg.source)
    n = len(heads)
    children: list[list[int]] = [[] for _ in range(n + 1)]
    for child, head in enumerate(heads, 1):
        children[head].append(child)

    anchors = [predicate]
    node = heads[predicate - 1]
    while node != 0:
        anchors.append(node)
        node = heads[node - 1]
    anchors.append(0)

    retained: set[int] = set()
    for anchor in anchors:
        frontier = [anchor]
        if anchor != 0:
            retained.add(anchor)
        for _ in range(cfg.k):
            frontier = [c for node in frontier for c in children[node]]
            if not frontier:
                break
            retained.update(frontier)
    return retained


def pruning_stats(sentences: list[Sentence], k: int,
                  cfg: PruningConfig | None = None) -> tuple[float, float]:
    """(coverage of true arguments, reduction of candidates) at order k."""
    cfg = PruningConfig(k, cfg.source if cfg else "pred")
    true_args = 0
    kept_args = 0
    candidates = 0
    kept_candidates = 0
    for sent in sentences:
        for ordinal, p in enumerate(sent.predicate_positions()):
            retained = prune_candidates(sent, p, cfg)
            candidates += len(sent)
            kept_candidates += len(retained)
            for t in sent.tokens:
                if ordinal < len(t.apreds) and t.apreds[ordinal] is not None:
                    true_args += 1
                    if t.idx in retained:
                        kept_args += 1
    coverage = kept_args / true_args if true_args else 1.0
    reduction = (candidates - kept_candidates) / candidates if candidates else 0.0
    return coverage, reduction


# ---------------------------------------------------------------------------
# pass assembly and annotation rebuild

def pass_units(sentence: Sentence, mode: str = "conll2009") -> list[int | None]:
    """Encoder passes a sentence needs: None marks the predicate-free
    identification pass of the conll2008 procedure."""
    units: list[int | None] = []
    if mode == "conll2008":
        units.append(None)
    units += sentence.predicate_positions()
    return units


def pass_samples(sentence: Sentence, labels: LabelSpace, unit: int | None,
                 mode: str = "conll2009",
                 pruning: PruningConfig | None = None) -> list[WordPairSample]:
    """Gold-labeled samples scored within one encoder pass."""
    if unit is None:
        return sense_pairs(sentence, labels, mode="all")
    samples = []
    if mode == "conll2009":
        samples += [s for s in sense_pairs(sentence, labels, mode="given")
                    if s.dep == unit]
    roles = role_pairs(sentence, unit, labels)
    if pruning is not None:
        retained = prune_candidates(sentence, unit, pruning)
        roles = [s for s in roles if s.dep in retained]
    return samples + roles


def with_annotation(sentence: Sentence, senses: dict[int, str],
                    roles: dict[int, dict[int, str]]) -> Sentence:
    """Copy of the sentence whose FILLPRED/PRED/APRED columns carry the
    given predictions; every other column is passed through untouched.

    senses maps predicate position -> sense suffix; roles maps predicate
    position -> {argument position -> role label}.  The PRED cell is the
    predicted lemma joined with the suffix.
    """
    out = copy_sentence(sentence)
    positions = sorted(senses)
    for t in out.tokens:
        t.fillpred = t.idx in senses
        t.pred = f"{t.plemma}.{senses[t.idx]}" if t.fillpred else None
        t.apreds = [roles.get(p, {}).get(t.idx) for p in positions]
    return out


def gold_annotation(sentence: Sentence,
                    labels: LabelSpace) -> tuple[dict, dict]:
    """Regroup the gold pairs of a sentence into with_annotation() inputs."""
    senses: dict[int, str] = {}
    roles: dict[int, dict[int, str]] = {}
    for s in sense_pairs(sentence, labels, mode="given"):
        senses[s.dep] = labels.name(s.label)
    for p in sentence.predicate_positions():
        assigned = {}
        for s in role_pairs(sentence, p, labels):
            if s.label != labels.none_id:
                assigned[s.dep] = labels.name(s.label)
        roles[p] = assigned
    return senses, roles
