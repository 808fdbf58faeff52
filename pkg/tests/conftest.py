import pathlib

import numpy as np
import pytest

from depsrl.conll import Sentence, Token
from depsrl.model import ModelConfig
from depsrl.training import TrainConfig

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir():
    return FIXTURES


def fixture_text(name: str) -> str:
    return (FIXTURES / name).read_text(encoding="utf-8")


def max_rel_error(analytic, numeric, floor=1e-3):
    """Worst relative disagreement; the floor keeps finite-difference noise
    on near-zero components from dominating the ratio."""
    analytic = np.asarray(analytic, dtype=float)
    numeric = np.asarray(numeric, dtype=float)
    denom = np.maximum(np.abs(analytic) + np.abs(numeric), floor)
    return float((np.abs(analytic - numeric) / denom).max())


def make_toy_corpus(n_sentences=50, seed=20240, max_predicates=3):
    """Synthetic separable corpus: a "verb" token v0..v7 is a predicate
    whose sense is fixed by its identity (v0..v3 -> 01, v4..v7 -> 02); the
    word left of it is A0, the noun right of it is A1, and an adverb two
    to the right is AM-TMP.  Syntactic heads form a simple chain so the
    pruning machinery has a tree to walk.  Vocabulary stays under 100.
    """
    rng = np.random.default_rng(seed)
    nouns = [f"n{i}" for i in range(20)]
    verbs = [f"v{i}" for i in range(8)]
    advs = [f"r{i}" for i in range(4)]
    sentences = []
    for _ in range(n_sentences):
        k = int(rng.integers(1, max_predicates + 1))
        words: list[tuple[str, str]] = []
        pred_positions = []
        for _ in range(k):
            words.append((nouns[int(rng.integers(len(nouns)))], "N"))
            words.append((verbs[int(rng.integers(len(verbs)))], "V"))
            pred_positions.append(len(words))
            words.append((nouns[int(rng.integers(len(nouns)))], "N"))
            if rng.random() < 0.3:
                words.append((advs[int(rng.integers(len(advs)))], "R"))
        tokens = []
        for idx, (form, pos) in enumerate(words, 1):
            tokens.append(Token(
                idx=idx, form=form, lemma=form, plemma=form, pos=pos,
                ppos=pos, head=idx - 1, phead=idx - 1, deprel="DEP",
                pdeprel="DEP", apreds=[None] * k))
        for ordinal, p in enumerate(pred_positions):
            verb = words[p - 1][0]
            sense = "01" if int(verb[1:]) < 4 else "02"
            tokens[p - 1].fillpred = True
            tokens[p - 1].pred = f"{verb}.{sense}"
            tokens[p - 2].apreds[ordinal] = "A0"
            if p < len(words) and words[p][1] == "N":
                tokens[p].apreds[ordinal] = "A1"
            if p + 1 < len(words) and words[p + 1][1] == "R":
                tokens[p + 1].apreds[ordinal] = "AM-TMP"
        sentences.append(Sentence(tokens))
    return sentences


def toy_model_config(**overrides) -> ModelConfig:
    base = dict(dim_word=16, dim_pretrained=8, dim_lemma=8, dim_pos=8,
                dim_indicator=8, lstm_layers=1, lstm_size=24, proj_size=16,
                word_dropout=0.0, recurrent_keep=1.0, projection_keep=1.0)
    base.update(overrides)
    return ModelConfig(**base)


def toy_train_config(**overrides) -> TrainConfig:
    base = dict(batch_tokens=120, max_epochs=200, seed=7, eval_every=2,
                patience=5, min_count=1)
    base.update(overrides)
    return TrainConfig(**base)


@pytest.fixture(scope="session")
def toy_corpus():
    return make_toy_corpus()
