"""CoNLL-2008/2009 column files, embedding text files, and vocabularies.

Column layouts handled here:

  conll2009: ID FORM LEMMA PLEMMA POS PPOS FEAT PFEAT HEAD PHEAD DEPREL
             PDEPREL FILLPRED PRED APRED1..APREDn
  conll2008: ID FORM LEMMA GPOS PPOS SPLIT_FORM SPLIT_LEMMA PPOSS HEAD
             DEPREL PRED ARG1..ARGn

The 2008 layout has no predicted lemma/POS columns; they are mirrored from
the gold ones, and SPLIT_FORM/SPLIT_LEMMA/PPOSS are retained verbatim so
files round-trip.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

log = logging.getLogger(__name__)

FORMATS = ("conll2009", "conll2008")


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass
class Token:
    idx: int                      # 1-based position in the sentence
    form: str
    lemma: str
    plemma: str
    pos: str
    ppos: str
    feat: str = "_"
    pfeat: str = "_"
    head: int = 0
    phead: int = 0
    deprel: str = "_"
    pdeprel: str = "_"
    fillpred: bool = False
    pred: str | None = None       # e.g. "prevent.01" when fillpred
    apreds: list = field(default_factory=list)
    # 2008-only columns, kept so those files round-trip
    split_form: str | None = None
    split_lemma: str | None = None
    pposs: str | None = None


@dataclass
class Sentence:
    tokens: list[Token]

    def __len__(self):
        return len(self.tokens)

    @property
    def length_with_root(self) -> int:
        """Positions available to word pairs: the tokens plus the virtual root."""
        return len(self.tokens) + 1

    def token(self, position: int) -> Token:
        """Token at a 1-based position (0 is the virtual root, not a token)."""
        return self.tokens[position - 1]

    def predicate_positions(self) -> list[int]:
        return [t.idx for t in self.tokens if t.fillpred]


def _as_lines(source):
    if isinstance(source, str):
        return source.splitlines()
    if hasattr(source, "read"):
        return source.read().splitlines()
    return [line.rstrip("\r\n") for line in source]


def parse_conll(source, fmt: str = "conll2009") -> list[Sentence]:
    """Parse a column file into sentences; malformed rows report line numbers."""
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}")
    sentences = []
    rows: list[tuple[int, list[str]]] = []
    for lineno, raw in enumerate(_as_lines(source), 1):
        line = raw.strip()
        if not line:
            if rows:
                sentences.append(_build_sentence(rows, fmt))
                rows = []
            continue
        rows.append((lineno, line.split()))
    if rows:
        sentences.append(_build_sentence(rows, fmt))
    return sentences


def _int_field(value: str, what: str, lineno: int) -> int:
    try:
        return int(value)
    except ValueError:
        raise ParseError(f"non-integer {what} {value!r}", lineno) from None


def _build_sentence(rows, fmt) -> Sentence:
    min_cols = 14 if fmt == "conll2009" else 11
    ncols = len(rows[0][1])
    for lineno, cols in rows:
        if len(cols) != ncols:
            raise ParseError(
                f"inconsistent column count ({len(cols)} vs {ncols})", lineno)
    if ncols < min_cols:
        raise ParseError(f"{fmt} needs at least {min_cols} columns, got {ncols}",
                         rows[0][0])

    tokens = []
    for expected, (lineno, cols) in enumerate(rows, 1):
        idx = _int_field(cols[0], "ID", lineno)
        if idx != expected:
            raise ParseError(f"token ID {idx} out of sequence (expected {expected})",
                             lineno)
        if fmt == "conll2009":
            fillpred = cols[12] == "Y"
            pred = None if cols[13] == "_" else cols[13]
            if fillpred != (pred is not None):
                raise ParseError("FILLPRED and PRED columns disagree", lineno)
            tok = Token(
                idx=idx, form=cols[1], lemma=cols[2], plemma=cols[3],
                pos=cols[4], ppos=cols[5], feat=cols[6], pfeat=cols[7],
                head=_int_field(cols[8], "HEAD", lineno),
                phead=_int_field(cols[9], "PHEAD", lineno),
                deprel=cols[10], pdeprel=cols[11],
                fillpred=fillpred, pred=pred,
                apreds=[None if c == "_" else c for c in cols[14:]],
            )
        else:
            pred = None if cols[10] == "_" else cols[10]
            head = _int_field(cols[8], "HEAD", lineno)
            tok = Token(
                idx=idx, form=cols[1], lemma=cols[2], plemma=cols[2],
                pos=cols[3], ppos=cols[4],
                head=head, phead=head, deprel=cols[9], pdeprel=cols[9],
                fillpred=pred is not None, pred=pred,
                apreds=[None if c == "_" else c for c in cols[11:]],
                split_form=cols[5], split_lemma=cols[6], pposs=cols[7],
            )
        tokens.append(tok)

    n_preds = sum(1 for t in tokens if t.fillpred)
    n_apreds = ncols - min_cols
    if n_apreds != n_preds:
        raise ParseError(
            f"{n_apreds} argument columns for {n_preds} predicates", rows[0][0])
    return Sentence(tokens)


def write_conll(sentences: list[Sentence], fmt: str = "conll2009") -> str:
    """Emit sentences as tab-separated rows, one blank line after each."""
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}")
    chunks = []
    for sent in sentences:
        for t in sent.tokens:
            if fmt == "conll2009":
                cols = [str(t.idx), t.form, t.lemma, t.plemma, t.pos, t.ppos,
                        t.feat, t.pfeat, str(t.head), str(t.phead),
                        t.deprel, t.pdeprel,
                        "Y" if t.fillpred else "_", t.pred or "_"]
            else:
                cols = [str(t.idx), t.form, t.lemma, t.pos, t.ppos,
                        t.split_form or t.form, t.split_lemma or t.lemma,
                        t.pposs or t.ppos, str(t.head), t.deprel,
                        t.pred or "_"]
            cols += [a or "_" for a in t.apreds]
            chunks.append("\t".join(cols) + "\n")
        chunks.append("\n")
    return "".join(chunks)


def copy_sentence(sentence: Sentence) -> Sentence:
    return Sentence([replace(t, apreds=list(t.apreds)) for t in sentence.tokens])


# ---------------------------------------------------------------------------
# pre-trained embeddings

class EmbeddingTable:
    """Frozen text-format vectors with lowercase lookup and an OOV fallback."""

    def __init__(self, dim: int, vectors: dict[str, np.ndarray]):
        self.dim = dim
        self.vectors = vectors
        self.oov = np.zeros(dim)

    def __len__(self):
        return len(self.vectors)

    def lookup(self, key: str) -> np.ndarray:
        return self.vectors.get(key.lower(), self.oov)

    def __contains__(self, key: str) -> bool:
        return key.lower() in self.vectors


def load_embeddings(source) -> EmbeddingTable:
    """Read "key v1 .. vd" lines; dimension comes from the first line."""
    vectors: dict[str, np.ndarray] = {}
    dim = None
    for lineno, raw in enumerate(_as_lines(source), 1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if dim is None:
            dim = len(parts) - 1
            if dim < 1:
                raise ParseError("embedding line needs a key and values", lineno)
        elif len(parts) - 1 != dim:
            raise ParseError(
                f"expected {dim} values, got {len(parts) - 1}", lineno)
        key = parts[0].lower()
        if key in vectors:
            log.warning("duplicate embedding key %r at line %d; last wins",
                        key, lineno)
        try:
            vectors[key] = np.array([float(v) for v in parts[1:]])
        except ValueError:
            raise ParseError("non-numeric embedding value", lineno) from None
    if dim is None:
        raise ParseError("empty embedding file")
    return EmbeddingTable(dim, vectors)


# ---------------------------------------------------------------------------
# vocabulary

PAD = "<pad>"
UNK = "<unk>"
ROOT = "<root>"
_RESERVED = (PAD, UNK, ROOT)


class Vocabulary:
    """String-to-id tables for forms, lemmas and POS tags.

    Ids are dense from 0; 0/1/2 are the pad, unknown and virtual-root
    symbols in every table.
    """

    def __init__(self, forms: dict[str, int], lemmas: dict[str, int],
                 pos: dict[str, int]):
        self.forms = forms
        self.lemmas = lemmas
        self.pos = pos

    @classmethod
    def build(cls, sentences: list[Sentence], min_count: int = 2,
              use_predicted: bool = True) -> "Vocabulary":
        """Count surface strings and keep forms/lemmas seen >= min_count times.

        POS tags are always kept.  Uses the predicted lemma/POS columns by
        default, matching what the model consumes.
        """
        if min_count < 1:
            raise ValueError("min_count must be >= 1")
        counts = {"form": {}, "lemma": {}, "pos": {}}
        streams = []
        for sent in sentences:
            for t in sent.tokens:
                streams.append((t.form,
                                t.plemma if use_predicted else t.lemma,
                                t.ppos if use_predicted else t.pos))
        for form, lemma, pos in streams:
            counts["form"][form] = counts["form"].get(form, 0) + 1
            counts["lemma"][lemma] = counts["lemma"].get(lemma, 0) + 1
            counts["pos"][pos] = counts["pos"].get(pos, 0) + 1

        tables = {key: {sym: i for i, sym in enumerate(_RESERVED)}
                  for key in counts}
        for form, lemma, pos in streams:
            if counts["form"][form] >= min_count and form not in tables["form"]:
                tables["form"][form] = len(tables["form"])
            if counts["lemma"][lemma] >= min_count and lemma not in tables["lemma"]:
                tables["lemma"][lemma] = len(tables["lemma"])
            if pos not in tables["pos"]:
                tables["pos"][pos] = len(tables["pos"])
        return cls(tables["form"], tables["lemma"], tables["pos"])

    def form_id(self, s: str) -> int:
        return self.forms.get(s, 1)

    def lemma_id(self, s: str) -> int:
        return self.lemmas.get(s, 1)

    def pos_id(self, s: str) -> int:
        return self.pos.get(s, 1)

    @property
    def root_id(self) -> int:
        return 2

    def sizes(self) -> tuple[int, int, int]:
        return len(self.forms), len(self.lemmas), len(self.pos)

    def to_lists(self) -> dict[str, list[str]]:
        out = {}
        for name, table in (("forms", self.forms), ("lemmas", self.lemmas),
                            ("pos", self.pos)):
            items = sorted(table.items(), key=lambda kv: kv[1])
            out[name] = [k for k, _ in items]
        return out

    @classmethod
    def from_lists(cls, data: dict[str, list[str]]) -> "Vocabulary":
        return cls(*({s: i for i, s in enumerate(data[name])}
                     for name in ("forms", "lemmas", "pos")))
