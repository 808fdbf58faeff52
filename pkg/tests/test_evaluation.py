import pytest
from hypothesis import given, strategies as st

from conftest import fixture_text, make_toy_corpus
from depsrl.conll import parse_conll
from depsrl.evaluation import AlignmentError, EvalReport, _prf, ablation_report, \
    report_text, report_tsv, score_predicates_2008, score_semantic
from depsrl.pairs import LabelSpace, gold_annotation, with_annotation


def strip_annotation(sentences):
    return [with_annotation(s, {}, {}) for s in sentences]


def test_identical_prediction_scores_hundred():
    gold = parse_conll(fixture_text("figure1.conll"))
    report = score_semantic(gold, gold)
    assert (report.semantic_p, report.semantic_r, report.semantic_f1) == \
        (100.0, 100.0, 100.0)
    assert report.disambiguation_p == 100.0


def test_hand_fixture_two_thirds():
    gold = parse_conll(fixture_text("eval_gold.conll"))
    pred = parse_conll(fixture_text("eval_pred.conll"))
    report = score_semantic(gold, pred)
    assert report.semantic_p == pytest.approx(66.67, abs=0.01)
    assert report.semantic_r == pytest.approx(66.67, abs=0.01)
    assert report.semantic_f1 == pytest.approx(66.67, abs=0.01)
    # the sense was right, one of two arcs came back, one arc is spurious
    assert report.disambiguation_p == 100.0
    assert report.arg_correct == 1
    assert report.arg_predicted == 2
    assert report.arg_gold == 2


def test_empty_prediction_scores_zero():
    gold = parse_conll(fixture_text("eval_gold.conll"))
    report = score_semantic(gold, strip_annotation(gold))
    assert (report.semantic_p, report.semantic_r, report.semantic_f1) == \
        (0.0, 0.0, 0.0)


def test_both_empty_is_vacuously_perfect():
    gold = strip_annotation(parse_conll(fixture_text("eval_gold.conll")))
    report = score_semantic(gold, gold)
    assert report.semantic_f1 == 100.0


def test_misalignment_reports_first_divergence():
    gold = parse_conll(fixture_text("eval_gold.conll"))
    with pytest.raises(AlignmentError, match="1 sentences"):
        score_semantic(gold, [])
    short = parse_conll(fixture_text("eval_gold.conll"))
    short[0].tokens.pop()
    with pytest.raises(AlignmentError, match="sentence 1"):
        score_semantic(gold, short)


def test_sense_identity_uses_suffix_when_predicates_given():
    gold = parse_conll(fixture_text("eval_gold.conll"))
    pred = parse_conll(fixture_text("eval_gold.conll"))
    pred[0].token(2).pred = "salute.01"     # different lemma, same suffix
    report = score_semantic(gold, pred, "conll2009")
    assert report.disambiguation_p == 100.0
    report08 = score_semantic(gold, pred, "conll2008")
    assert report08.predicate_p == 0.0      # full string must match there


# ---------------------------------------------------------------------------
# 2008 predicate scoring

def load_2008():
    gold = parse_conll(fixture_text("pred08_gold.conll"), "conll2008")
    pred = parse_conll(fixture_text("pred08_pred.conll"), "conll2008")
    return gold, pred


def test_2008_predicate_fixture_counts():
    gold, pred = load_2008()
    p, r, f1 = score_predicates_2008(gold, pred)
    assert p == pytest.approx(50.0, abs=0.01)
    assert r == pytest.approx(33.33, abs=0.01)
    assert f1 == pytest.approx(40.0, abs=0.01)


def test_2008_wrong_sense_counts_nothing():
    gold, _ = load_2008()
    pred = parse_conll(fixture_text("pred08_gold.conll"), "conll2008")
    pred[0].token(1).pred = "run.02"
    p, r, _ = score_predicates_2008(gold, pred)
    assert p == pytest.approx(200.0 / 3.0, abs=0.01)
    assert r == pytest.approx(200.0 / 3.0, abs=0.01)


def test_2008_spurious_predicate_costs_precision_only():
    gold, _ = load_2008()
    pred = parse_conll(fixture_text("pred08_gold.conll"), "conll2008")
    for s in pred:
        t = s.token(2)
        t.fillpred = True
        t.pred = "and.01"
        for tok in s.tokens:
            tok.apreds.insert(1, None)
    p, r, _ = score_predicates_2008(gold, pred)
    assert r == 100.0
    assert p < 100.0


# ---------------------------------------------------------------------------
# monotonicity and bounds

def test_removing_a_correct_item_never_raises_recall():
    gold = parse_conll(fixture_text("figure1.conll"))
    ls = LabelSpace.from_corpus(gold)
    senses, roles = gold_annotation(gold[0], ls)
    full = [with_annotation(gold[0], senses, roles)]
    r_full = score_semantic(gold, full).semantic_r
    roles_minus = {p: dict(v) for p, v in roles.items()}
    roles_minus[5].pop(2)                   # drop a correct arc
    partial = [with_annotation(gold[0], senses, roles_minus)]
    assert score_semantic(gold, partial).semantic_r < r_full


def test_adding_a_spurious_item_never_raises_precision():
    gold = parse_conll(fixture_text("figure1.conll"))
    ls = LabelSpace.from_corpus(gold)
    senses, roles = gold_annotation(gold[0], ls)
    p_full = score_semantic(gold, [with_annotation(gold[0], senses, roles)]).semantic_p
    roles_plus = {p: dict(v) for p, v in roles.items()}
    roles_plus[5][7] = "A4"                 # invent an arc
    noisy = [with_annotation(gold[0], senses, roles_plus)]
    assert score_semantic(gold, noisy).semantic_p < p_full


@given(st.integers(0, 50), st.integers(0, 50), st.integers(0, 50))
def test_prf_bounds(correct_seed, predicted_extra, gold_extra):
    correct = correct_seed
    predicted = correct + predicted_extra
    gold = correct + gold_extra
    p, r, f1 = _prf(correct, predicted, gold)
    assert 0.0 <= p <= 100.0 and 0.0 <= r <= 100.0
    assert min(p, r) - 1e-9 <= f1 <= max(p, r) + 1e-9


def test_count_identity_on_toy_corpus():
    corpus = make_toy_corpus(n_sentences=6)
    mangled = []
    for s in corpus:
        ls = LabelSpace.from_corpus(corpus)
        senses, roles = gold_annotation(s, ls)
        for p in roles:
            roles[p] = {w: ("A1" if role == "A0" else role)
                        for w, role in roles[p].items()}
        mangled.append(with_annotation(s, senses, roles))
    report = score_semantic(corpus, mangled)
    assert report.sem_correct <= min(report.sem_predicted, report.sem_gold)
    assert report.arg_correct <= min(report.arg_predicted, report.arg_gold)


# ---------------------------------------------------------------------------
# rendering

def test_report_text_mentions_all_sections():
    gold = parse_conll(fixture_text("eval_gold.conll"))
    pred = parse_conll(fixture_text("eval_pred.conll"))
    text = report_text(score_semantic(gold, pred))
    assert "semantic labeling" in text
    assert "argument labeling" in text
    assert "66.67" in text


def test_report_tsv_is_tab_separated_keys():
    gold = parse_conll(fixture_text("eval_gold.conll"))
    tsv = report_tsv(score_semantic(gold, gold))
    rows = dict(line.split("\t") for line in tsv.splitlines())
    assert rows["semantic_f1"] == "100.0000"
    assert rows["semantic_gold"] == "3"


def test_ablation_report_single_row():
    gold = parse_conll(fixture_text("eval_gold.conll"))
    table = ablation_report([("full", score_semantic(gold, gold))])
    assert len(table.splitlines()) == 2
    assert "full" in table


def test_ablation_report_rows_sorted_and_consistent():
    gold = parse_conll(fixture_text("eval_gold.conll"))
    pred = parse_conll(fixture_text("eval_pred.conll"))
    r1 = score_semantic(gold, gold)
    r2 = score_semantic(gold, pred)
    table = ablation_report([("zeta", r2), ("alpha", r1)])
    lines = table.splitlines()
    assert lines[1].startswith("alpha")
    assert lines[2].startswith("zeta")
    # rows carry the same numbers an independent rescoring produces
    again = score_semantic(gold, pred)
    assert f"{again.argument_f1:6.2f}" in lines[2]


def test_confusion_table_optional():
    gold = parse_conll(fixture_text("eval_gold.conll"))
    pred = parse_conll(fixture_text("eval_pred.conll"))
    report = score_semantic(gold, pred, confusion=True)
    assert report.confusion[("A0", "A0")] == 1
    assert report.confusion[("A1", "<none>")] == 1
    assert report.confusion[("<none>", "A1")] == 1
    assert score_semantic(gold, pred).confusion is None


def test_f1_zero_when_no_overlap():
    assert EvalReport(sem_predicted=3, sem_gold=3).semantic_f1 == 0.0
