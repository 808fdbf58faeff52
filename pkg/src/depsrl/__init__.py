"""End-to-end dependency semantic role labeling as word-pair classification.

A virtual root turns predicate disambiguation into one more word-pair
decision, so a single BiLSTM encoder with a biaffine scorer handles
predicate identification/disambiguation and argument labeling together.
Ships with its own reverse-mode differentiation engine, CoNLL-2008/2009
I/O, a training loop and a CLI; the `RoleLabeler` estimator is the main
entry point for library use.
"""

from .autodiff import Adam, Parameter, Tape, Tensor, backward, learning_rate
from .checkpoint import Checkpoint, CheckpointError, load_checkpoint, \
    save_checkpoint
from .config import ConfigError, RunConfig, load_config, parse_config
from .conll import EmbeddingTable, ParseError, Sentence, Token, Vocabulary, \
    load_embeddings, parse_conll, write_conll
from .estimator import RoleLabeler, check_sentences
from .evaluation import AlignmentError, EvalReport, ablation_report, \
    score_predicates_2008, score_semantic
from .model import ModelConfig, ModelWeights, ScoreMatrix, biaffine_score, \
    decode, encode, encode_pass, predict_sentence, score_matrix, \
    word_representation
from .pairs import DataError, LabelSpace, NONE_LABEL, PruningConfig, \
    WordPairSample, prune_candidates, pruning_stats, role_pairs, sense_pairs
from .training import Batch, TrainConfig, TrainingError, batch_loss, \
    make_batches, pair_accuracy, train

__version__ = "0.1.0"

__all__ = [
    "Adam", "Parameter", "Tape", "Tensor", "backward", "learning_rate",
    "Checkpoint", "CheckpointError", "load_checkpoint", "save_checkpoint",
    "ConfigError", "RunConfig", "load_config", "parse_config",
    "EmbeddingTable", "ParseError", "Sentence", "Token", "Vocabulary",
    "load_embeddings", "parse_conll", "write_conll",
    "RoleLabeler", "check_sentences",
    "AlignmentError", "EvalReport", "ablation_report",
    "score_predicates_2008", "score_semantic",
    "ModelConfig", "ModelWeights", "ScoreMatrix", "biaffine_score", "decode",
    "encode", "encode_pass", "predict_sentence", "score_matrix",
    "word_representation",
    "DataError", "LabelSpace", "NONE_LABEL", "PruningConfig",
    "WordPairSample", "prune_candidates", "pruning_stats", "role_pairs",
    "sense_pairs",
    "Batch", "TrainConfig", "TrainingError", "batch_loss", "make_batches",
    "pair_accuracy", "train",
    "__version__",
]
