"""CoNLL-style semantic scoring.

An item is a sense prediction (sentence, predicate position, sense) or an
argument arc (sentence, predicate position, argument position, role); the
semantic score is labeled precision/recall/F1 over the union of both item
kinds, in percent.  Sense identity is the bare suffix when the predicates
are given (conll2009) and the full "lemma.sense" string when the system
also identifies predicates (conll2008).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .conll import Sentence
from .pairs import sense_suffix


class AlignmentError(ValueError):
    """Gold and predicted corpora do not line up sentence by sentence."""


def _prf(correct: int, predicted: int, gold: int) -> tuple[float, float, float]:
    if predicted == 0 and gold == 0:
        return 100.0, 100.0, 100.0
    p = 100.0 * correct / predicted if predicted else 0.0
    r = 100.0 * correct / gold if gold else 0.0
    f1 = 2.0 * p * r / (p + r) if p + r else 0.0
    return p, r, f1


@dataclass
class EvalReport:
    mode: str = "conll2009"
    sem_correct: int = 0
    sem_predicted: int = 0
    sem_gold: int = 0
    arg_correct: int = 0
    arg_predicted: int = 0
    arg_gold: int = 0
    sense_correct: int = 0
    sense_predicted: int = 0
    sense_gold: int = 0
    confusion: Counter | None = field(default=None, repr=False)

    @property
    def semantic_p(self):
        return _prf(self.sem_correct, self.sem_predicted, self.sem_gold)[0]

    @property
    def semantic_r(self):
        return _prf(self.sem_correct, self.sem_predicted, self.sem_gold)[1]

    @property
    def semantic_f1(self):
        return _prf(self.sem_correct, self.sem_predicted, self.sem_gold)[2]

    @property
    def argument_p(self):
        return _prf(self.arg_correct, self.arg_predicted, self.arg_gold)[0]

    @property
    def argument_r(self):
        return _prf(self.arg_correct, self.arg_predicted, self.arg_gold)[1]

    @property
    def argument_f1(self):
        return _prf(self.arg_correct, self.arg_predicted, self.arg_gold)[2]

    @property
    def disambiguation_p(self):
        """Correct senses over gold predicates (predicates given)."""
        if self.sense_gold == 0:
            return 100.0
        return 100.0 * self.sense_correct / self.sense_gold

    @property
    def predicate_p(self):
        return _prf(self.sense_correct, self.sense_predicted, self.sense_gold)[0]

    @property
    def predicate_r(self):
        return _prf(self.sense_correct, self.sense_predicted, self.sense_gold)[1]

    @property
    def predicate_f1(self):
        return _prf(self.sense_correct, self.sense_predicted, self.sense_gold)[2]


def _check_aligned(gold: list[Sentence], predicted: list[Sentence]):
    if len(gold) != len(predicted):
        raise AlignmentError(
            f"gold has {len(gold)} sentences, prediction has {len(predicted)}")
    for i, (g, p) in enumerate(zip(gold, predicted), 1):
        if len(g) != len(p):
            raise AlignmentError(
                f"sentence {i}: gold has {len(g)} tokens, prediction has {len(p)}")


def _sense_items(sent: Sentence, index: int, mode: str) -> set:
    items = set()
    for t in sent.tokens:
        if t.fillpred and t.pred is not None:
            key = t.pred if mode == "conll2008" else sense_suffix(t.pred)
            items.add((index, t.idx, key))
    return items


def _arg_items(sent: Sentence, index: int) -> set:
    positions = sent.predicate_positions()
    items = set()
    for t in sent.tokens:
        for ordinal, role in enumerate(t.apreds):
            if role is not None:
                items.add((index, positions[ordinal], t.idx, role))
    return items


def score_semantic(gold: list[Sentence], predicted: list[Sentence],
                   mode: str = "conll2009",
                   confusion: bool = False) -> EvalReport:
    """Labeled precision/recall/F1 over senses plus argument arcs."""
    _check_aligned(gold, predicted)
    report = EvalReport(mode=mode, confusion=Counter() if confusion else None)
    for i, (g, p) in enumerate(zip(gold, predicted)):
        g_senses = _sense_items(g, i, mode)
        p_senses = _sense_items(p, i, mode)
        g_args = _arg_items(g, i)
        p_args = _arg_items(p, i)
        report.sense_correct += len(g_senses & p_senses)
        report.sense_predicted += len(p_senses)
        report.sense_gold += len(g_senses)
        report.arg_correct += len(g_args & p_args)
        report.arg_predicted += len(p_args)
        report.arg_gold += len(g_args)
        if report.confusion is not None:
            g_roles = {(pe, w): role for (_, pe, w, role) in g_args}
            p_roles = {(pe, w): role for (_, pe, w, role) in p_args}
            for key in set(g_roles) | set(p_roles):
                report.confusion[(g_roles.get(key, "<none>"),
                                  p_roles.get(key, "<none>"))] += 1
    report.sem_correct = report.sense_correct + report.arg_correct
    report.sem_predicted = report.sense_predicted + report.arg_predicted
    report.sem_gold = report.sense_gold + report.arg_gold
    return report


def score_predicates_2008(gold: list[Sentence],
                          predicted: list[Sentence]) -> tuple[float, float, float]:
    """Predicate identification + labeling F1: an item is correct only when
    both the position and the full sense string match."""
    report = score_semantic(gold, predicted, mode="conll2008")
    return report.predicate_p, report.predicate_r, report.predicate_f1


# ---------------------------------------------------------------------------
# rendering

def report_text(report: EvalReport) -> str:
    lines = [
        "                            P       R      F1",
        f"semantic labeling      {report.semantic_p:6.2f}  {report.semantic_r:6.2f}  {report.semantic_f1:6.2f}",
        f"argument labeling      {report.argument_p:6.2f}  {report.argument_r:6.2f}  {report.argument_f1:6.2f}",
    ]
    if report.mode == "conll2008":
        lines.append(
            f"predicate labeling     {report.predicate_p:6.2f}  {report.predicate_r:6.2f}  {report.predicate_f1:6.2f}")
    else:
        lines.append(
            f"predicate disambiguation  precision {report.disambiguation_p:6.2f}")
    lines.append(
        f"counts semantic {report.sem_correct}/{report.sem_predicted}/{report.sem_gold} "
        f"arguments {report.arg_correct}/{report.arg_predicted}/{report.arg_gold} "
        f"senses {report.sense_correct}/{report.sense_predicted}/{report.sense_gold}"
        " (correct/predicted/gold)")
    return "\n".join(lines)


def report_tsv(report: EvalReport) -> str:
    pairs = [
        ("mode", report.mode),
        ("semantic_p", f"{report.semantic_p:.4f}"),
        ("semantic_r", f"{report.semantic_r:.4f}"),
        ("semantic_f1", f"{report.semantic_f1:.4f}"),
        ("argument_p", f"{report.argument_p:.4f}"),
        ("argument_r", f"{report.argument_r:.4f}"),
        ("argument_f1", f"{report.argument_f1:.4f}"),
        ("disambiguation_p", f"{report.disambiguation_p:.4f}"),
        ("predicate_p", f"{report.predicate_p:.4f}"),
        ("predicate_r", f"{report.predicate_r:.4f}"),
        ("predicate_f1", f"{report.predicate_f1:.4f}"),
        ("semantic_correct", report.sem_correct),
        ("semantic_predicted", report.sem_predicted),
        ("semantic_gold", report.sem_gold),
        ("argument_correct", report.arg_correct),
        ("argument_predicted", report.arg_predicted),
        ("argument_gold", report.arg_gold),
        ("sense_correct", report.sense_correct),
        ("sense_predicted", report.sense_predicted),
        ("sense_gold", report.sense_gold),
    ]
    return "\n".join(f"{k}\t{v}" for k, v in pairs)


def ablation_report(rows: list[tuple[str, EvalReport]]) -> str:
    """One line per configuration: argument labeling P/R/F1 plus the
    predicate disambiguation precision; rows sorted by name."""
    width = max([len("system")] + [len(name) for name, _ in rows])
    lines = [f"{'system':<{width}}    AL-P    AL-R   AL-F1    PD-P"]
    for name, rep in sorted(rows, key=lambda nr: nr[0]):
        lines.append(
            f"{name:<{width}}  {rep.argument_p:6.2f}  {rep.argument_r:6.2f}  "
            f"{rep.argument_f1:6.2f}  {rep.disambiguation_p:6.2f}")
    return "\n".join(lines)
