"""The neural labeler: word representation, stacked BiLSTM encoder, two
projection heads, the biaffine scorer and argmax decoding.

One encoder pass handles one predicate (or, for predicate identification,
no predicate): the indicator embedding marks the current predicate, every
position is projected into a predicate space and an argument space, and a
pair (head j, dependent i) is scored as

    s_ij = h_i_arg' W h_j_pred  +  U (h_i_arg ++ h_j_pred)  +  b

over the unified label inventory.  The "sba" variant shares one projection
head for both spaces; the "dba" variant drops the U and b terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np

from . import autodiff as ad
from .autodiff import Parameter, Tensor
from .conll import EmbeddingTable, Sentence, Vocabulary
from .pairs import LabelSpace, PruningConfig, WordPairSample, prune_candidates, \
    with_annotation

VARIANTS = ("full", "sba", "dba")


@dataclass
class ModelConfig:
    dim_word: int = 100
    dim_pretrained: int = 100
    dim_lemma: int = 100
    dim_pos: int = 100
    dim_indicator: int = 16
    lstm_layers: int = 3
    lstm_size: int = 400          # per direction
    proj_size: int = 300
    word_dropout: float = 0.20    # drop probability on the word representation
    recurrent_keep: float = 0.80
    projection_keep: float = 0.80
    variant: str = "full"
    use_indicator: bool = True
    use_pos: bool = True
    use_lemma: bool = True
    use_predicted: bool = True    # consume PLEMMA/PPOS instead of LEMMA/POS
    masked_decode: bool = True

    def validate(self):
        dims = (self.dim_word, self.dim_pretrained, self.dim_lemma,
                self.dim_pos, self.dim_indicator, self.lstm_layers,
                self.lstm_size, self.proj_size)
        if any(d <= 0 for d in dims):
            raise ValueError("all dimensions must be positive")
        if not 0.0 <= self.word_dropout < 1.0:
            raise ValueError("word_dropout must be in [0, 1)")
        for keep in (self.recurrent_keep, self.projection_keep):
            if not 0.0 < keep <= 1.0:
                raise ValueError("keep probabilities must be in (0, 1]")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")

    def repr_width(self, with_pretrained: bool) -> int:
        width = self.dim_word
        if with_pretrained:
            width += self.dim_pretrained
        if self.use_lemma:
            width += self.dim_lemma
        if self.use_pos:
            width += self.dim_pos
        if self.use_indicator:
            width += self.dim_indicator
        return width


def _uniform(rng, shape, bound=0.01):
    return rng.uniform(-bound, bound, shape)


def _glorot(rng, shape):
    fan_out, fan_in = shape
    bound = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, shape)


class ModelWeights:
    """All learned tables and matrices plus the frozen pre-trained vectors."""

    def __init__(self, config: ModelConfig, vocab: Vocabulary,
                 labels: LabelSpace, params: dict[str, Parameter],
                 pretrained: EmbeddingTable | None = None):
        self.config = config
        self.vocab = vocab
        self.labels = labels
        self.params = params
        self.pretrained = pretrained

    @classmethod
    def build(cls, config: ModelConfig, vocab: Vocabulary, labels: LabelSpace,
              pretrained: EmbeddingTable | None = None,
              rng=0) -> "ModelWeights":
        config.validate()
        if pretrained is not None and pretrained.dim != config.dim_pretrained:
            raise ValueError(
                f"pre-trained vectors are {pretrained.dim}-dimensional but the "
                f"configuration says {config.dim_pretrained}")
        if isinstance(rng, (int, np.integer)):
            rng = np.random.default_rng(rng)
        n_forms, n_lemmas, n_pos = vocab.sizes()
        n_labels = len(labels)
        h = config.lstm_size
        dh = config.proj_size

        params: dict[str, Parameter] = {}

        def p(name, data):
            params[name] = Parameter(name, data)

        p("embed.word", _uniform(rng, (n_forms, config.dim_word)))
        if config.use_lemma:
            p("embed.lemma", _uniform(rng, (n_lemmas, config.dim_lemma)))
        if config.use_pos:
            p("embed.pos", _uniform(rng, (n_pos, config.dim_pos)))
        if config.use_indicator:
            p("embed.indicator", _uniform(rng, (2, config.dim_indicator)))

        width = config.repr_width(pretrained is not None)
        for layer in range(config.lstm_layers):
            d_in = width if layer == 0 else 2 * h
            for direction in ("fw", "bw"):
                prefix = f"lstm.{layer}.{direction}"
                p(prefix + ".wx", _glorot(rng, (4 * h, d_in)))
                p(prefix + ".wh", _glorot(rng, (4 * h, h)))
                bias = _uniform(rng, 4 * h)
                bias[h:2 * h] = 1.0      # forget gate starts open
                p(prefix + ".b", bias)

        heads = ("shared",) if config.variant == "sba" else ("pred", "arg")
        for head in heads:
            p(f"proj.{head}.w", _glorot(rng, (dh, 2 * h)))
            p(f"proj.{head}.b", _uniform(rng, dh))

        # zero start: early training is driven by the class-bias gradient
        p("score.w", np.zeros((dh, n_labels, dh)))
        if config.variant != "dba":
            p("score.u", np.zeros((n_labels, 2 * dh)))
            p("score.b", np.zeros(n_labels))
        return cls(config, vocab, labels, params, pretrained)

    def __getitem__(self, name: str) -> Parameter:
        return self.params[name]

    def parameters(self) -> list[Parameter]:
        return list(self.params.values())

    def copy(self) -> "ModelWeights":
        params = {name: Parameter(name, p.data.copy())
                  for name, p in self.params.items()}
        return ModelWeights(self.config, self.vocab, self.labels, params,
                            self.pretrained)

    def config_dict(self) -> dict:
        return asdict(self.config)


# ---------------------------------------------------------------------------
# forward pieces

def word_representation(weights: ModelWeights, sentence: Sentence,
                        position: int, is_current_predicate: bool,
                        train: bool = False, rng=None) -> Tensor:
    """Concatenated embedding blocks for one position (0 = virtual root)."""
    cfg = weights.config
    vocab = weights.vocab
    if position == 0:
        fid = lid = pid = vocab.root_id
        pretrained_vec = None
    else:
        tok = sentence.token(position)
        fid = vocab.form_id(tok.form)
        lid = vocab.lemma_id(tok.plemma if cfg.use_predicted else tok.lemma)
        pid = vocab.pos_id(tok.ppos if cfg.use_predicted else tok.pos)
        pretrained_vec = tok.form

    parts = [ad.take_row(weights["embed.word"], fid)]
    if weights.pretrained is not None:
        if pretrained_vec is None:
            vec = np.zeros(weights.pretrained.dim)
        else:
            vec = weights.pretrained.lookup(pretrained_vec)
        parts.append(ad.constant(vec))
    if cfg.use_lemma:
        parts.append(ad.take_row(weights["embed.lemma"], lid))
    if cfg.use_pos:
        parts.append(ad.take_row(weights["embed.pos"], pid))
    if cfg.use_indicator:
        parts.append(ad.take_row(weights["embed.indicator"],
                                 int(is_current_predicate)))
    e = ad.concat(parts) if len(parts) > 1 else parts[0]
    if train and cfg.word_dropout > 0.0:
        e = ad.dropout(e, 1.0 - cfg.word_dropout, True, rng=rng)
    return e


def _run_lstm(weights: ModelWeights, prefix: str, xs: list[Tensor],
              train: bool, rng) -> list[Tensor]:
    wx = weights[prefix + ".wx"]
    wh = weights[prefix + ".wh"]
    b = weights[prefix + ".b"]
    n = wh.data.shape[1]
    keep = weights.config.recurrent_keep
    h_mask = None
    if train and keep < 1.0:
        h_mask = ad.dropout_mask((n,), keep, rng)
    h = ad.constant(np.zeros(n))
    c = ad.constant(np.zeros(n))
    out = []
    for x in xs:
        hh = ad.dropout(h, keep, True, mask=h_mask) if h_mask is not None else h
        hc = ad.lstm_cell(wx, x, wh, hh, b, c)
        h = ad.slice1d(hc, 0, n)
        c = ad.slice1d(hc, n, 2 * n)
        out.append(h)
    return out


def encode(weights: ModelWeights, reprs: list[Tensor], train: bool = False,
           rng=None) -> list[Tensor]:
    """Stacked BiLSTM states g_i = fw_i ++ bw_i; recurrent and between-layer
    dropout masks are shared across time-steps within a layer."""
    cfg = weights.config
    keep = cfg.recurrent_keep
    seq = list(reprs)
    for layer in range(cfg.lstm_layers):
        if train and layer > 0 and keep < 1.0:
            mask = ad.dropout_mask((seq[0].data.size,), keep, rng)
            seq = [ad.dropout(x, keep, True, mask=mask) for x in seq]
        fw = _run_lstm(weights, f"lstm.{layer}.fw", seq, train, rng)
        bw = _run_lstm(weights, f"lstm.{layer}.bw", seq[::-1], train, rng)[::-1]
        seq = [ad.concat([f, b]) for f, b in zip(fw, bw)]
    return seq


def project(weights: ModelWeights, g: Tensor, train: bool = False,
            rng=None) -> tuple[Tensor, Tensor]:
    """(h_pred, h_arg) for one encoder state; shared under the sba variant."""
    cfg = weights.config
    keep = cfg.projection_keep
    if cfg.variant == "sba":
        h = ad.relu(ad.add(ad.matmul(weights["proj.shared.w"], g),
                           weights["proj.shared.b"]))
        h = ad.dropout(h, keep, train, rng=rng)
        return h, h
    hp = ad.relu(ad.add(ad.matmul(weights["proj.pred.w"], g),
                        weights["proj.pred.b"]))
    ha = ad.relu(ad.add(ad.matmul(weights["proj.arg.w"], g),
                        weights["proj.arg.b"]))
    hp = ad.dropout(hp, keep, train, rng=rng)
    ha = ad.dropout(ha, keep, train, rng=rng)
    return hp, ha


@dataclass
class EncodedPass:
    """Projected vectors for one encoder pass, indexed by position."""
    h_pred: list[Tensor]
    h_arg: list[Tensor]


def encode_pass(weights: ModelWeights, sentence: Sentence,
                current_predicate: int | None = None, train: bool = False,
                rng=None) -> EncodedPass:
    length = sentence.length_with_root
    reprs = [word_representation(weights, sentence, i, i == current_predicate,
                                 train, rng)
             for i in range(length)]
    states = encode(weights, reprs, train, rng)
    projected = [project(weights, g, train, rng) for g in states]
    return EncodedPass([hp for hp, _ in projected], [ha for _, ha in projected])


def biaffine_score(weights: ModelWeights, h_arg: Tensor,
                   h_pred: Tensor) -> Tensor:
    """Label score vector for one (dependent, head) pair."""
    s = ad.bilinear(weights["score.w"], h_arg, h_pred)
    if weights.config.variant != "dba":
        s = ad.add(s, ad.matmul(weights["score.u"], ad.concat([h_arg, h_pred])))
        s = ad.add(s, weights["score.b"])
    return s


def score_sample(weights: ModelWeights, enc: EncodedPass,
                 sample: WordPairSample) -> Tensor:
    return biaffine_score(weights, enc.h_arg[sample.dep], enc.h_pred[sample.head])


@dataclass
class ScoreMatrix:
    """Scores of one predicate pass.

    Row 0 holds the root-headed sense scores of the pass's predicate; row
    i >= 1 holds the role scores of dependent i against that predicate, so
    the row count equals the sentence length including the virtual root.
    """
    scores: np.ndarray      # (length_with_root, n_labels)
    predicate: int


def score_matrix(weights: ModelWeights, sentence: Sentence,
                 predicate: int) -> ScoreMatrix:
    enc = encode_pass(weights, sentence, predicate)
    rows = [biaffine_score(weights, enc.h_arg[predicate], enc.h_pred[0]).data]
    for i in range(1, sentence.length_with_root):
        rows.append(biaffine_score(weights, enc.h_arg[i], enc.h_pred[predicate]).data)
    return ScoreMatrix(np.stack(rows), predicate)


def decode(scores, mask=None) -> np.ndarray:
    """Argmax label ids along the last axis; ties go to the lowest id.

    `mask` restricts the argmax to a subset of permitted label ids.
    """
    if isinstance(scores, ScoreMatrix):
        scores = scores.scores
    arr = np.asarray(scores)
    if mask is None:
        return np.argmax(arr, axis=-1)
    permitted = sorted(set(int(i) for i in mask))
    if not permitted:
        raise ValueError("empty permitted label subset")
    sub = arr[..., permitted]
    return np.take(permitted, np.argmax(sub, axis=-1))


# ---------------------------------------------------------------------------
# sentence-level prediction

def _decode_masks(weights: ModelWeights):
    labels = weights.labels
    if not weights.config.masked_decode:
        return None, None
    return ([labels.none_id] + labels.sense_ids,
            [labels.none_id] + labels.role_ids)


def predict_sentence(weights: ModelWeights, sentence: Sentence,
                     mode: str = "conll2009",
                     pruning: PruningConfig | None = None) -> Sentence:
    """Annotate one sentence.

    conll2009: the predicates are given; each gets one encoder pass that
    scores its sense pair and all of its role pairs.  conll2008: a first
    pass with no marked predicate attaches every word to the virtual root
    to identify and disambiguate the predicates, then each predicted
    predicate gets its own labeling pass.
    """
    labels = weights.labels
    sense_mask, role_mask = _decode_masks(weights)
    n = len(sentence)
    senses: dict[int, str] = {}

    if mode == "conll2009":
        targets = sentence.predicate_positions()
    elif mode == "conll2008":
        enc = encode_pass(weights, sentence, None)
        targets = []
        for w in range(1, n + 1):
            row = biaffine_score(weights, enc.h_arg[w], enc.h_pred[0]).data
            label = int(decode(row, sense_mask))
            # under unmasked decoding anything that is not a sense label
            # counts as "not a predicate"
            if labels.is_sense_id(label):
                targets.append(w)
                senses[w] = labels.name(label)
    else:
        raise ValueError(f"unknown mode {mode!r}")

    roles: dict[int, dict[int, str]] = {}
    for p in targets:
        enc = encode_pass(weights, sentence, p)
        if mode == "conll2009":
            row = biaffine_score(weights, enc.h_arg[p], enc.h_pred[0]).data
            label = int(decode(row, sense_mask))
            if labels.is_sense_id(label):
                senses[p] = labels.name(label)
            else:
                # a given predicate must carry some sense
                senses[p] = labels.most_common_sense or "01"
        retained = None
        if pruning is not None:
            retained = prune_candidates(sentence, p, pruning)
        assigned: dict[int, str] = {}
        for w in range(1, n + 1):
            if retained is not None and w not in retained:
                continue
            row = biaffine_score(weights, enc.h_arg[w], enc.h_pred[p]).data
            label = int(decode(row, role_mask))
            if label != labels.none_id and not labels.is_sense_id(label):
                assigned[w] = labels.name(label)
        roles[p] = assigned
    return with_annotation(sentence, senses, roles)
