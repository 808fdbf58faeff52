"""Acceptance suite: one test per criterion, each printing a pass/fail
line (run with `pytest tests/test_acceptance.py -v -s` to see them)."""

import math
import time
from contextlib import contextmanager

import numpy as np
import numpy.testing as npt
import pytest

from conftest import FIXTURES, fixture_text, make_toy_corpus, max_rel_error, \
    toy_model_config, toy_train_config
from depsrl import autodiff as ad
from depsrl.checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from depsrl.conll import Sentence, Token, Vocabulary, parse_conll, write_conll
from depsrl.evaluation import score_predicates_2008, score_semantic
from depsrl.model import ModelConfig, ModelWeights, biaffine_score, decode, \
    predict_sentence, score_matrix
from depsrl.pairs import LabelSpace, NONE_LABEL, PruningConfig, \
    gold_annotation, prune_candidates, pruning_stats, pass_samples, \
    pass_units, role_pairs, sense_pairs, with_annotation
from depsrl.training import Batch, batch_loss, pair_accuracy, train

ALL_FIXTURES = (("figure1.conll", "conll2009"),
                ("eval_gold.conll", "conll2009"),
                ("eval_pred.conll", "conll2009"),
                ("pred08_gold.conll", "conll2008"),
                ("pred08_pred.conll", "conll2008"))


@contextmanager
def criterion(number, name):
    try:
        yield
    except BaseException:
        print(f"[criterion {number}] {name}: FAIL")
        raise
    print(f"[criterion {number}] {name}: PASS")


def _tok(idx, form, pos, n_preds, head=None):
    return Token(idx=idx, form=form, lemma=form, plemma=form, pos=pos,
                 ppos=pos, head=idx - 1 if head is None else head,
                 phead=idx - 1 if head is None else head,
                 apreds=[None] * n_preds)


# ---------------------------------------------------------------------------
# 1. gradient correctness

def gradcheck_corpus():
    words = [("n0", "N"), ("v0", "V"), ("n1", "N"), ("r0", "R"),
             ("n2", "N"), ("n3", "N"), ("n4", "N"), ("r1", "R")]
    toks = [_tok(i + 1, f, p, 1) for i, (f, p) in enumerate(words)]
    toks[1].fillpred = True
    toks[1].pred = "v0.01"
    toks[0].apreds[0] = "A0"
    toks[2].apreds[0] = "A1"
    toks[3].apreds[0] = "AM-TMP"
    first = Sentence(toks)
    toks2 = [_tok(1, "n5", "N", 1), _tok(2, "v5", "V", 1), _tok(3, "n6", "N", 1)]
    toks2[1].fillpred = True
    toks2[1].pred = "v5.02"
    toks2[0].apreds[0] = "A0"
    toks2[2].apreds[0] = "A1"
    return [first, Sentence(toks2)]


def test_criterion_1_gradient_correctness():
    with criterion(1, "full-model gradients match finite differences"):
        started = time.monotonic()
        corpus = gradcheck_corpus()
        sent = corpus[0]
        assert sent.length_with_root == 9
        vocab = Vocabulary.build(corpus, min_count=1)
        labels = LabelSpace.from_corpus(corpus)
        assert len(labels) == 6
        cfg = ModelConfig(dim_word=8, dim_pretrained=8, dim_lemma=8,
                          dim_pos=8, dim_indicator=8, lstm_layers=1,
                          lstm_size=16, proj_size=8, word_dropout=0.0,
                          recurrent_keep=1.0, projection_keep=1.0)
        rng = np.random.default_rng(11)
        weights = ModelWeights.build(cfg, vocab, labels, None, rng)
        # move the scorer off its zero start so its gradients are generic
        for name in ("score.w", "score.u", "score.b"):
            weights[name].data = rng.uniform(-0.3, 0.3, weights[name].data.shape)

        units = [(0, u) for u in pass_units(sent)]
        sample_map = {(0, u): pass_samples(sent, labels, u) for _, u in units}
        batch = Batch(units, len(sent))

        def loss_value():
            loss, _ = batch_loss(weights, [sent], batch, sample_map,
                                 train=False)
            return loss.item()

        with ad.Tape():
            loss, n = batch_loss(weights, [sent], batch, sample_map,
                                 train=False)
        assert n == 9        # one sense pair plus eight role pairs
        ad.backward(loss)

        for p in weights.parameters():
            numeric = ad.numeric_gradient(loss_value, p.data, h=1e-6)
            assert max_rel_error(p.grad, numeric) < 1e-4, p.name
        elapsed = time.monotonic() - started
        print(f"  checked {sum(p.data.size for p in weights.parameters())} "
              f"components in {elapsed:.1f}s")
        assert elapsed < 60.0


# ---------------------------------------------------------------------------
# 2. biaffine oracle equivalence

def test_criterion_2_biaffine_oracle():
    with criterion(2, "biaffine scorer equals the triple-loop oracle"):
        rng = np.random.default_rng(21)
        for _ in range(100):
            d_h = int(rng.integers(2, 9))
            n_labels = int(rng.integers(2, 7))
            params = {
                "score.w": ad.Parameter("score.w",
                                        rng.normal(size=(d_h, n_labels, d_h))),
                "score.u": ad.Parameter("score.u",
                                        rng.normal(size=(n_labels, 2 * d_h))),
                "score.b": ad.Parameter("score.b", rng.normal(size=n_labels)),
            }
            weights = ModelWeights(ModelConfig(), None, None, params)
            ha = rng.normal(size=d_h)
            hp = rng.normal(size=d_h)
            got = biaffine_score(weights, ad.constant(ha), ad.constant(hp)).data
            expected = np.zeros(n_labels)
            for l in range(n_labels):
                for i in range(d_h):
                    for j in range(d_h):
                        expected[l] += ha[i] * params["score.w"].data[i, l, j] * hp[j]
                pair = np.concatenate([ha, hp])
                for m in range(2 * d_h):
                    expected[l] += params["score.u"].data[l, m] * pair[m]
                expected[l] += params["score.b"].data[l]
            npt.assert_allclose(got, expected, atol=1e-10)


# ---------------------------------------------------------------------------
# 3. toy overfit

def test_criterion_3_toy_overfit():
    with criterion(3, "50-sentence synthetic corpus overfits"):
        started = time.monotonic()
        corpus = make_toy_corpus(n_sentences=50)
        assert len(corpus) == 50
        assert max(len(s.predicate_positions()) for s in corpus) <= 3
        assert len({t.form for s in corpus for t in s.tokens}) <= 100
        ckpt = train(corpus, corpus, toy_model_config(),
                     toy_train_config(max_epochs=200, patience=25))
        accuracy = pair_accuracy(ckpt.weights, corpus)
        predicted = [predict_sentence(ckpt.weights, s) for s in corpus]
        f1 = score_semantic(corpus, predicted).semantic_f1 / 100.0
        elapsed = time.monotonic() - started
        print(f"  pair accuracy {accuracy:.4f}, semantic F1 {f1:.4f}, "
              f"{elapsed:.0f}s")
        assert accuracy >= 0.99
        assert f1 >= 0.99
        assert elapsed < 300.0


# ---------------------------------------------------------------------------
# 4. prior capture by the class bias

def skewed_corpus(n_sentences=12):
    # 20 role pairs (one A0) plus one sense pair per sentence:
    # the no-relation label holds ~90% of all samples
    rng = np.random.default_rng(41)
    sentences = []
    for _ in range(n_sentences):
        toks = [_tok(i + 1, f"n{int(rng.integers(12))}", "N", 1)
                for i in range(20)]
        toks[2].form = "v0"
        toks[2].pos = toks[2].ppos = "V"
        toks[2].fillpred = True
        toks[2].pred = "v0.01"
        toks[1].apreds[0] = "A0"
        sentences.append(Sentence(toks))
    return sentences


def test_criterion_4_bias_captures_prior():
    with criterion(4, "frozen-interaction training drives the class bias "
                      "to the majority label"):
        corpus = skewed_corpus()
        labels = LabelSpace.from_corpus(corpus)
        counts = {labels.none_id: 0}
        for sent in corpus:
            for unit in pass_units(sent):
                for s in pass_samples(sent, labels, unit):
                    counts[s.label] = counts.get(s.label, 0) + 1
        total = sum(counts.values())
        majority = max(counts, key=counts.get)
        assert majority == labels.none_id
        assert counts[majority] / total >= 0.88

        ckpt = train(corpus, None, toy_model_config(),
                     toy_train_config(max_epochs=40,
                                      freeze=("score.w", "score.u")))
        weights = ckpt.weights
        npt.assert_array_equal(weights["score.w"].data,
                               np.zeros_like(weights["score.w"].data))
        npt.assert_array_equal(weights["score.u"].data,
                               np.zeros_like(weights["score.u"].data))
        bias = weights["score.b"].data
        assert int(np.argmax(bias)) == weights.labels.none_id

        decoded_majority = total_pairs = 0
        for sent in corpus:
            for unit in pass_units(sent):
                for s in pass_samples(sent, weights.labels, unit):
                    m = score_matrix(weights, sent, unit)
                    row = m.scores[0] if s.kind == "sense" else m.scores[s.dep]
                    decoded_majority += int(decode(row)) == weights.labels.none_id
                    total_pairs += 1
        share = decoded_majority / total_pairs
        print(f"  majority decode share {share:.3f}")
        assert share >= 0.95


# ---------------------------------------------------------------------------
# 5. decomposition fidelity

def test_criterion_5_decomposition_fidelity():
    with criterion(5, "re-applied gold pairs reproduce every fixture byte "
                      "for byte"):
        for name, fmt in ALL_FIXTURES:
            text = fixture_text(name)
            sentences = parse_conll(text, fmt)
            labels = LabelSpace.from_corpus(sentences)
            rebuilt = [with_annotation(s, *gold_annotation(s, labels))
                       for s in sentences]
            assert write_conll(rebuilt, fmt) == text, name

        sent = parse_conll(fixture_text("figure1.conll"))[0]
        labels = LabelSpace.from_corpus([sent])
        senses = [(p.head, p.dep, labels.name(p.label))
                  for p in sense_pairs(sent, labels, mode="given")]
        assert senses == [(0, 5, "01"), (0, 9, "01")]
        roles5 = {p.dep: labels.name(p.label) for p in role_pairs(sent, 5, labels)}
        roles9 = {p.dep: labels.name(p.label) for p in role_pairs(sent, 9, labels)}
        assert len(roles5) == len(roles9) == sent.length_with_root - 1
        assert roles5[2] == "A0" and roles5[4] == "AM-MIS" \
            and roles5[3] == "AM-MOD"
        assert roles5[5] == NONE_LABEL and roles5[10] == NONE_LABEL
        assert roles9[10] == "A1"
        assert all(lab == NONE_LABEL for dep, lab in roles9.items() if dep != 10)


# ---------------------------------------------------------------------------
# 6. pruning properties

def brute_force_retained(sentence, predicate, k):
    heads = [t.head for t in sentence.tokens]
    anchors = {predicate, 0}
    node = heads[predicate - 1]
    while node != 0:
        anchors.add(node)
        node = heads[node - 1]
    retained = set()
    for w in range(1, len(heads) + 1):
        node, steps = w, 0
        while True:
            if node in anchors and steps <= k:
                retained.add(w)
                break
            if node == 0 or steps > k:
                break
            node = heads[node - 1]
            steps += 1
    return retained


def test_criterion_6_pruning_properties():
    with criterion(6, "pruning coverage/reduction behave and match the "
                      "brute-force oracle"):
        corpora = [parse_conll(fixture_text("figure1.conll")),
                   make_toy_corpus(n_sentences=10)]
        for corpus in corpora:
            k_max = max(len(s) for s in corpus) + 1
            cfg = PruningConfig(0, "gold")
            prev_cov, prev_red = -1.0, 2.0
            for k in range(k_max + 1):
                coverage, reduction = pruning_stats(corpus, k, cfg)
                assert coverage >= prev_cov
                assert reduction <= prev_red
                prev_cov, prev_red = coverage, reduction
                for sent in corpus:
                    for p in sent.predicate_positions():
                        assert prune_candidates(sent, p, PruningConfig(k, "gold")) \
                            == brute_force_retained(sent, p, k)
            assert prev_cov == 1.0 and prev_red == 0.0


# ---------------------------------------------------------------------------
# 7. scoring correctness

def test_criterion_7_scoring_correctness():
    with criterion(7, "hand-counted fixtures score exactly"):
        gold = parse_conll(fixture_text("eval_gold.conll"))
        pred = parse_conll(fixture_text("eval_pred.conll"))
        report = score_semantic(gold, pred)
        assert report.semantic_p == pytest.approx(66.67, abs=0.01)
        assert report.semantic_r == pytest.approx(66.67, abs=0.01)
        assert report.semantic_f1 == pytest.approx(66.67, abs=0.01)

        for name, fmt in ALL_FIXTURES:
            sentences = parse_conll(fixture_text(name), fmt)
            identity = score_semantic(sentences, sentences, fmt)
            assert identity.semantic_p == 100.0
            assert identity.semantic_r == 100.0
            assert identity.semantic_f1 == 100.0

        g08 = parse_conll(fixture_text("pred08_gold.conll"), "conll2008")
        p08 = parse_conll(fixture_text("pred08_pred.conll"), "conll2008")
        p, r, f1 = score_predicates_2008(g08, p08)
        assert p == pytest.approx(50.0, abs=0.01)
        assert r == pytest.approx(33.33, abs=0.01)
        assert f1 == pytest.approx(40.0, abs=0.01)


# ---------------------------------------------------------------------------
# 8. schedule and optimizer

def test_criterion_8_schedule_and_adam():
    with criterion(8, "annealing schedule and a hand-evaluated Adam step"):
        assert ad.learning_rate(0) == 0.002
        assert ad.learning_rate(5000) == pytest.approx(0.0015, abs=1e-18)
        assert ad.learning_rate(10000) == pytest.approx(0.001125, abs=1e-18)

        p = ad.Parameter("p", np.array([0.7]))
        opt = ad.Adam([p])
        g = 0.3
        p.grad[:] = g
        opt.step()
        # by hand: m=(1-b1)g, v=(1-b2)g^2, hat(m)=g, hat(v)=g^2
        m_hat = (0.1 * g) / (1.0 - 0.9)
        v_hat = (0.1 * g * g) / (1.0 - 0.9)
        expected = 0.7 - 0.002 * m_hat / (math.sqrt(v_hat) + 1e-8)
        assert abs(p.data[0] - expected) < 1e-12


# ---------------------------------------------------------------------------
# 9. round trips and determinism

def test_criterion_9_round_trips_and_determinism(tmp_path):
    with criterion(9, "exact file/checkpoint round trips; seeded runs are "
                      "identical"):
        for name, fmt in ALL_FIXTURES:
            text = fixture_text(name)
            assert write_conll(parse_conll(text, fmt), fmt) == text

        corpus = make_toy_corpus(n_sentences=12, seed=5)

        def run():
            lines = []
            ckpt = train(corpus, corpus, toy_model_config(),
                         toy_train_config(max_epochs=6, patience=50),
                         log=lines.append)
            outputs = write_conll([predict_sentence(ckpt.weights, s)
                                   for s in corpus])
            return ckpt, lines, outputs

        first, log1, out1 = run()
        second, log2, out2 = run()
        assert log1 == log2
        assert out1 == out2
        for name, p in first.weights.params.items():
            npt.assert_array_equal(p.data, second.weights[name].data)

        path = tmp_path / "model.ckpt"
        save_checkpoint(first, path)
        loaded = load_checkpoint(path)
        sent = corpus[0]
        pred = sent.predicate_positions()[0]
        npt.assert_array_equal(score_matrix(first.weights, sent, pred).scores,
                               score_matrix(loaded.weights, sent, pred).scores)
        again = tmp_path / "model2.ckpt"
        save_checkpoint(loaded, again)
        assert write_conll([predict_sentence(loaded.weights, s) for s in corpus]) \
            == out1
