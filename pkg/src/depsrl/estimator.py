"""Scikit-learn style facade over the whole pipeline.

The estimator consumes lists of parsed `Sentence` objects (see
`depsrl.conll.parse_conll`): fit() trains the word-pair labeler on gold
annotation, predict() returns annotated copies, score() is the semantic F1
against the inputs' own gold columns.  Hyperparameters mirror the run
configuration and default to the published recipe, so `RoleLabeler()` is
the full-size model and toy settings are keyword overrides — clonable and
grid-searchable like any other estimator.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .conll import EmbeddingTable, Sentence, load_embeddings
from .model import ModelConfig, predict_sentence
from .pairs import PruningConfig
from .training import TrainConfig, pair_accuracy, train
from .evaluation import score_semantic


def check_sentences(X, require_gold: bool = False) -> list[Sentence]:
    """Validate estimator input: a sequence of parsed sentences."""
    if isinstance(X, Sentence):
        raise TypeError("expected a list of Sentence objects, got a single one")
    sentences = list(X)
    for i, s in enumerate(sentences):
        if not isinstance(s, Sentence):
            raise TypeError(
                f"item {i} is {type(s).__name__}, expected Sentence")
        if len(s) == 0:
            raise ValueError(f"sentence {i} is empty")
        if require_gold:
            for t in s.tokens:
                if t.fillpred and t.pred is None:
                    raise ValueError(
                        f"sentence {i}: predicate at {t.idx} lacks a sense")
    return sentences


class RoleLabeler(BaseEstimator):
    """End-to-end dependency semantic role labeler.

    Parameters follow the standard recipe; see the run-configuration keys
    of the same names.  `mode` selects whether predicates are given
    ("conll2009") or must be identified first ("conll2008", which also
    drops the predicate indicator feature from the word representation).
    """

    def __init__(self, mode="conll2009", dim_word=100, dim_pretrained=100,
                 dim_lemma=100, dim_pos=100, dim_indicator=16, lstm_layers=3,
                 lstm_size=400, proj_size=300, word_dropout=0.20,
                 recurrent_keep=0.80, projection_keep=0.80, variant="full",
                 use_indicator=True, use_pos=True, use_lemma=True,
                 use_predicted=True, masked_decode=True, batch_tokens=5000,
                 max_epochs=50, eval_every=1, patience=10, min_count=2,
                 base_lr=0.002, beta1=0.9, beta2=0.9, epsilon=1e-8,
                 anneal_decay=0.75, anneal_period=5000, clip_norm=5.0,
                 prune_k=None, prune_source="pred", seed=1, embeddings=None):
        self.mode = mode
        self.dim_word = dim_word
        self.dim_pretrained = dim_pretrained
        self.dim_lemma = dim_lemma
        self.dim_pos = dim_pos
        self.dim_indicator = dim_indicator
        self.lstm_layers = lstm_layers
        self.lstm_size = lstm_size
        self.proj_size = proj_size
        self.word_dropout = word_dropout
        self.recurrent_keep = recurrent_keep
        self.projection_keep = projection_keep
        self.variant = variant
        self.use_indicator = use_indicator
        self.use_pos = use_pos
        self.use_lemma = use_lemma
        self.use_predicted = use_predicted
        self.masked_decode = masked_decode
        self.batch_tokens = batch_tokens
        self.max_epochs = max_epochs
        self.eval_every = eval_every
        self.patience = patience
        self.min_count = min_count
        self.base_lr = base_lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.anneal_decay = anneal_decay
        self.anneal_period = anneal_period
        self.clip_norm = clip_norm
        self.prune_k = prune_k
        self.prune_source = prune_source
        self.seed = seed
        self.embeddings = embeddings

    # -- configuration assembly ------------------------------------------

    def _pretrained_table(self):
        if self.embeddings is None:
            return None
        if isinstance(self.embeddings, EmbeddingTable):
            return self.embeddings
        with open(self.embeddings, encoding="utf-8") as fh:
            return load_embeddings(fh.read())

    def _model_config(self, pretrained) -> ModelConfig:
        return ModelConfig(
            dim_word=self.dim_word,
            dim_pretrained=pretrained.dim if pretrained else self.dim_pretrained,
            dim_lemma=self.dim_lemma,
            dim_pos=self.dim_pos,
            dim_indicator=self.dim_indicator,
            lstm_layers=self.lstm_layers,
            lstm_size=self.lstm_size,
            proj_size=self.proj_size,
            word_dropout=self.word_dropout,
            recurrent_keep=self.recurrent_keep,
            projection_keep=self.projection_keep,
            variant=self.variant,
            use_indicator=self.use_indicator and self.mode == "conll2009",
            use_pos=self.use_pos,
            use_lemma=self.use_lemma,
            use_predicted=self.use_predicted,
            masked_decode=self.masked_decode,
        )

    def _train_config(self) -> TrainConfig:
        return TrainConfig(
            batch_tokens=self.batch_tokens, max_epochs=self.max_epochs,
            seed=self.seed, eval_every=self.eval_every, patience=self.patience,
            min_count=self.min_count, base_lr=self.base_lr, beta1=self.beta1,
            beta2=self.beta2, epsilon=self.epsilon,
            anneal_decay=self.anneal_decay, anneal_period=self.anneal_period,
            clip_norm=self.clip_norm, mode=self.mode)

    def _pruning(self) -> PruningConfig | None:
        if self.prune_k is None:
            return None
        return PruningConfig(self.prune_k, self.prune_source)

    # -- estimator API ----------------------------------------------------

    def fit(self, X, y=None, dev=None, log=None):
        """Train on gold-annotated sentences; `dev` drives model selection."""
        sentences = check_sentences(X, require_gold=True)
        dev_sentences = check_sentences(dev) if dev is not None else None
        pretrained = self._pretrained_table()
        ckpt = train(sentences, dev_sentences, self._model_config(pretrained),
                     self._train_config(), pretrained=pretrained,
                     pruning=self._pruning(), log=log)
        self.checkpoint_ = ckpt
        self.weights_ = ckpt.weights
        self.dev_f1_ = ckpt.best_f1
        self.n_steps_ = ckpt.step
        return self

    def _require_fitted(self):
        if not hasattr(self, "weights_"):
            raise NotFittedError(
                "this RoleLabeler instance is not fitted yet; call fit() or "
                "load() first")

    def predict(self, X) -> list[Sentence]:
        """Annotated copies of the input sentences (gold columns ignored)."""
        self._require_fitted()
        sentences = check_sentences(X)
        return [predict_sentence(self.weights_, s, self.mode, self._pruning())
                for s in sentences]

    def score(self, X, y=None) -> float:
        """Semantic F1 (0..1) of predict(X) against X's own gold columns."""
        sentences = check_sentences(X, require_gold=True)
        report = score_semantic(sentences, self.predict(sentences), self.mode)
        return report.semantic_f1 / 100.0

    def pair_accuracy(self, X) -> float:
        self._require_fitted()
        return pair_accuracy(self.weights_, check_sentences(X, require_gold=True),
                             self.mode, self._pruning())

    # -- persistence ------------------------------------------------------

    def save(self, path):
        self._require_fitted()
        save_checkpoint(self.checkpoint_, path)

    def load(self, path):
        """Populate the fitted state from a checkpoint file."""
        ckpt = load_checkpoint(path, expect_mode=self.mode)
        self.checkpoint_ = ckpt
        self.weights_ = ckpt.weights
        self.dev_f1_ = ckpt.best_f1
        self.n_steps_ = ckpt.step
        return self
