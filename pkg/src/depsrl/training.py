"""Batch construction, loss aggregation, the optimization loop and dev-set
model selection."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Adam, Tape
from .checkpoint import Checkpoint
from .conll import Sentence, Vocabulary
from .evaluation import score_semantic
from .model import ModelConfig, ModelWeights, decode, encode_pass, \
    predict_sentence, score_sample, _decode_masks
from .pairs import LabelSpace, PruningConfig, SENSE_PAIR, pass_samples, pass_units


class TrainingError(RuntimeError):
    """Optimization aborted (non-finite loss)."""


@dataclass
class TrainConfig:
    batch_tokens: int = 5000
    max_epochs: int = 50
    seed: int = 1
    eval_every: int = 1
    patience: int = 10
    min_count: int = 2
    base_lr: float = 0.002
    beta1: float = 0.9
    beta2: float = 0.9
    epsilon: float = 1e-8
    anneal_decay: float = 0.75
    anneal_period: int = 5000
    clip_norm: float = 5.0
    mode: str = "conll2009"
    freeze: tuple[str, ...] = ()

    def validate(self):
        if self.batch_tokens < 1 or self.max_epochs < 1:
            raise ValueError("batch budget and epoch cap must be positive")
        if self.eval_every < 1 or self.patience < 1:
            raise ValueError("eval_every and patience must be positive")
        if self.mode not in ("conll2009", "conll2008"):
            raise ValueError(f"unknown mode {self.mode!r}")


@dataclass
class Batch:
    units: list[tuple[int, int | None]]   # (sentence index, pass unit)
    tokens: int


def make_batches(units: list[tuple[int, int | None]],
                 sentences: list[Sentence], budget: int,
                 rng: np.random.Generator) -> list[Batch]:
    """Seeded shuffle, then greedy fill by token count.  A pass larger than
    the whole budget becomes its own batch."""
    order = rng.permutation(len(units))
    batches: list[Batch] = []
    current: list[tuple[int, int | None]] = []
    count = 0
    for j in order:
        unit = units[int(j)]
        size = len(sentences[unit[0]])
        if current and count + size > budget:
            batches.append(Batch(current, count))
            current, count = [], 0
        current.append(unit)
        count += size
    if current:
        batches.append(Batch(current, count))
    return batches


def batch_loss(weights: ModelWeights, sentences: list[Sentence], batch: Batch,
               sample_map: dict, train: bool = True, rng=None):
    """Mean cross-entropy over every word-pair sample in the batch, sense
    and role pairs pooled.  Returns (loss tensor, sample count)."""
    terms = []
    for sent_idx, unit in batch.units:
        samples = sample_map[(sent_idx, unit)]
        if not samples:
            continue
        enc = encode_pass(weights, sentences[sent_idx], unit, train, rng)
        for s in samples:
            terms.append(ad.cross_entropy(score_sample(weights, enc, s), s.label))
    if not terms:
        return ad.constant(0.0), 0
    return ad.scale(ad.add_n(terms), 1.0 / len(terms)), len(terms)


def pair_accuracy(weights: ModelWeights, sentences: list[Sentence],
                  mode: str = "conll2009",
                  pruning: PruningConfig | None = None) -> float:
    """Fraction of gold word-pair samples whose decoded label is correct."""
    sense_mask, role_mask = _decode_masks(weights)
    labels = weights.labels
    correct = total = 0
    for sent in sentences:
        for unit in pass_units(sent, mode):
            samples = pass_samples(sent, labels, unit, mode, pruning)
            if not samples:
                continue
            enc = encode_pass(weights, sent, unit)
            for s in samples:
                mask = sense_mask if s.kind == SENSE_PAIR else role_mask
                got = int(decode(score_sample(weights, enc, s).data, mask))
                correct += got == s.label
                total += 1
    return correct / total if total else 1.0


def train(train_sentences: list[Sentence],
          dev_sentences: list[Sentence] | None,
          model_cfg: ModelConfig, train_cfg: TrainConfig,
          pretrained=None, pruning: PruningConfig | None = None,
          log=None) -> Checkpoint:
    """Full optimization loop; keeps the weights of the best dev epoch.

    Without a dev set, the final weights win.  Raises TrainingError with
    the step and batch id if the loss leaves the finite range.
    """
    emit = log if log is not None else (lambda line: None)
    model_cfg.validate()
    train_cfg.validate()
    rng = np.random.default_rng(train_cfg.seed)

    vocab = Vocabulary.build(train_sentences, train_cfg.min_count,
                             model_cfg.use_predicted)
    labels = LabelSpace.from_corpus(train_sentences)
    weights = ModelWeights.build(model_cfg, vocab, labels, pretrained, rng)

    units = [(i, u) for i, s in enumerate(train_sentences)
             for u in pass_units(s, train_cfg.mode)]
    sample_map = {
        (i, u): pass_samples(train_sentences[i], labels, u, train_cfg.mode,
                             pruning)
        for i, u in units}

    opt = Adam(weights.parameters(), base_lr=train_cfg.base_lr,
               beta1=train_cfg.beta1, beta2=train_cfg.beta2,
               eps=train_cfg.epsilon, decay=train_cfg.anneal_decay,
               period=train_cfg.anneal_period, freeze=train_cfg.freeze)

    best_f1 = -math.inf
    best_weights = weights.copy()
    best_step = 0
    stale = 0
    step = 0
    for epoch in range(1, train_cfg.max_epochs + 1):
        batches = make_batches(units, train_sentences, train_cfg.batch_tokens,
                               rng)
        epoch_losses = []
        for batch_id, batch in enumerate(batches):
            with Tape():
                loss, n = batch_loss(weights, train_sentences, batch,
                                     sample_map, True, rng)
            if n == 0:
                continue
            value = loss.item()
            if not math.isfinite(value):
                raise TrainingError(
                    f"non-finite loss {value} at step {step}, batch {batch_id}")
            ad.backward(loss)
            ad.clip_global_norm(weights.parameters(), train_cfg.clip_norm)
            lr = opt.step()
            step += 1
            epoch_losses.append(value)
            emit(f"epoch={epoch} step={step} loss={value:.6f} lr={lr!r}")

        mean_loss = float(np.mean(epoch_losses)) if epoch_losses else 0.0
        if dev_sentences is None or epoch % train_cfg.eval_every != 0:
            emit(f"epoch={epoch} step={step} mean_loss={mean_loss:.6f}")
            continue
        predicted = [predict_sentence(weights, s, train_cfg.mode, pruning)
                     for s in dev_sentences]
        report = score_semantic(dev_sentences, predicted, train_cfg.mode)
        f1 = report.semantic_f1
        emit(f"epoch={epoch} step={step} mean_loss={mean_loss:.6f} "
             f"dev_p={report.semantic_p:.2f} dev_r={report.semantic_r:.2f} "
             f"dev_f1={f1:.2f}")
        if f1 > best_f1:
            best_f1 = f1
            best_weights = weights.copy()
            best_step = step
            stale = 0
        else:
            stale += 1
            if stale >= train_cfg.patience:
                emit(f"epoch={epoch} early_stop=1 best_dev_f1={best_f1:.2f}")
                break

    if dev_sentences is None or best_f1 == -math.inf:
        best_weights = weights.copy()
        best_step = step
        best_f1 = None
    return Checkpoint(best_weights, mode=train_cfg.mode, pruning=pruning,
                      seed=train_cfg.seed,
                      best_f1=None if best_f1 is None else float(best_f1),
                      step=best_step)
