"""Per-class error rates, conflict counting and the kappa diversity statistic.

For each class i, every test sample in a cell is assigned to one of four
confusion categories by the rules below (m is the max probability, T the
near-tie set within delta_tie of m, which always contains the argmax):

  (i)   m < tau_fail, or loss > loss_fail when that check is enabled
        -> d  (failed sample)
  (ii)  |T| >= 2 and i in T and m >= tau_high -> a  (high-confidence conflict)
  (iii) |T| >= 2 and i in T and m <  tau_high -> d  (low-confidence conflict)
  (iv)  argmax == i -> b  (decisive classification into i)
  (v)   otherwise  -> c  (decisive non-i, including ties not involving i)

a and d capture conflict cases, b and c conflict-free ones. The per-class
kappa corrects the observed conflict agreement p1 = (a+d)/N by the chance
agreement p2 computed from the marginals of the 2x2 table; a high kappa
means many conflicts, i.e. low diversity of the test data as seen by the
model.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import EmptyCellError, NoSamplesForClassError
from .ingest import CellStore
from .records import KappaThresholds, Manifest, PredictionRecord

CATEGORIES = ("a", "b", "c", "d")
RULES = ("i", "ii", "iii", "iv", "v")


@dataclass(frozen=True)
class ConfusionCounts:
    """The 2x2 conflict table for one class: a+b+c+d = n."""

    a: int
    b: int
    c: int
    d: int
    n: int

    def __post_init__(self):
        if min(self.a, self.b, self.c, self.d) < 0:
            raise ValueError("counts must be non-negative")
        if self.a + self.b + self.c + self.d != self.n:
            raise ValueError("counts must sum to n")


@dataclass(frozen=True)
class ClassMetrics:
    class_label: str
    error_rate_test: float
    error_rate_train: float | None
    gap: float
    gap_is_test_only: bool
    kappa: float
    counts: ConfusionCounts


def argmax_index(probs: Sequence[float]) -> int:
    """Index of the largest probability; ties go to the lowest index."""
    best = 0
    for j in range(1, len(probs)):
        if probs[j] > probs[best]:
            best = j
    return best


def _signature(
    probs: Sequence[float], loss: float | None, th: KappaThresholds
) -> tuple[bool, float, int, tuple[int, ...]]:
    """Per-record facts shared by all classes: (failed, m, argmax, tie set)."""
    m = max(probs)
    failed = m < th.tau_fail or (
        th.loss_fail is not None and loss is not None and loss > th.loss_fail
    )
    ties = tuple(j for j, p in enumerate(probs) if m - p <= th.delta_tie)
    return failed, m, argmax_index(probs), ties


def _classify(
    sig: tuple[bool, float, int, tuple[int, ...]], class_index: int, th: KappaThresholds
) -> tuple[str, str]:
    """Apply rules (i)-(v); returns (category, rule)."""
    failed, m, argmax, ties = sig
    if failed:
        return "d", "i"
    if len(ties) >= 2 and class_index in ties:
        if m >= th.tau_high:
            return "a", "ii"
        return "d", "iii"
    if argmax == class_index:
        return "b", "iv"
    return "c", "v"


def assign_rule(
    probs: Sequence[float],
    loss: float | None,
    class_index: int,
    th: KappaThresholds,
) -> tuple[str, str]:
    """Classify one probability vector for one class; returns (category, rule)."""
    return _classify(_signature(probs, loss, th), class_index, th)


def confusion_counts(
    records: Iterable[PredictionRecord], class_index: int, th: KappaThresholds
) -> ConfusionCounts:
    """Count the four categories for class_index over a cell's test records.

    N is the total number of records: the conflict events are evaluated on
    every sample, not only on samples whose true class is class_index.
    """
    tally = {"a": 0, "b": 0, "c": 0, "d": 0}
    n = 0
    for rec in records:
        cat, _ = assign_rule(rec.probs, rec.loss, class_index, th)
        tally[cat] += 1
        n += 1
    if n == 0:
        raise EmptyCellError("no test records to count")
    return ConfusionCounts(tally["a"], tally["b"], tally["c"], tally["d"], n)


def kappa(counts: ConfusionCounts, epsilon: float) -> float:
    """Chance-corrected conflict agreement.

        p1 = (a + d) / N
        p2 = ((a+b)(a+c) + (c+d)(b+d)) / N^2
        kappa = (p1 - p2) / (1 - p2)

    When the chance denominator degenerates (1 - p2 < epsilon) the value
    is defined as 0.0. The result is clamped to [-1, 1] against rounding.
    """
    a, b, c, d, n = counts.a, counts.b, counts.c, counts.d, counts.n
    if n <= 0:
        raise EmptyCellError("kappa needs at least one sample")
    p1 = (a + d) / n
    p2 = ((a + b) * (a + c) + (c + d) * (b + d)) / (n * n)
    if 1.0 - p2 < epsilon:
        return 0.0
    value = (p1 - p2) / (1.0 - p2)
    return max(-1.0, min(1.0, value))


def per_class_error_rate(
    records: Iterable[PredictionRecord],
    class_label: str,
    vocabulary: Sequence[str],
) -> float:
    """Fraction of class_label's samples whose argmax is a different class."""
    class_index = vocabulary.index(class_label)
    total = 0
    wrong = 0
    for rec in records:
        if rec.true_class != class_label:
            continue
        total += 1
        if argmax_index(rec.probs) != class_index:
            wrong += 1
    if total == 0:
        raise NoSamplesForClassError(f"no samples with true_class {class_label!r}")
    return wrong / total


def generalization_gap(
    test_err: float, train_err: float | None
) -> tuple[float, bool]:
    """Test error minus train error; falls back to the test error alone.

    Returns (value, test_only). test_only is True when no train error
    exists (e.g. a zero-shot class with no training samples), in which
    case the value is the plain test error.
    """
    if train_err is None:
        return test_err, True
    return test_err - train_err, False


def cell_class_metrics(
    cell: CellStore, manifest: Manifest
) -> list[ClassMetrics]:
    """Compute ClassMetrics for every class present in the cell's test split.

    Classes are emitted in vocabulary order. The train-side error rate is
    computed from the cell's train records when the class has any there.
    """
    if not cell.test_records:
        raise EmptyCellError(f"cell {cell.key} has no test records")
    th = manifest.thresholds
    vocab = manifest.class_vocabulary
    sigs = [_signature(r.probs, r.loss, th) for r in cell.test_records]
    test_classes = {r.true_class for r in cell.test_records}
    train_classes = {r.true_class for r in cell.train_records}

    out = []
    for index, label in enumerate(vocab):
        if label not in test_classes:
            continue
        tally = {"a": 0, "b": 0, "c": 0, "d": 0}
        for sig in sigs:
            cat, _ = _classify(sig, index, th)
            tally[cat] += 1
        counts = ConfusionCounts(
            tally["a"], tally["b"], tally["c"], tally["d"], len(sigs)
        )
        err_test = per_class_error_rate(cell.test_records, label, vocab)
        err_train = (
            per_class_error_rate(cell.train_records, label, vocab)
            if label in train_classes
            else None
        )
        gap, test_only = generalization_gap(err_test, err_train)
        out.append(
            ClassMetrics(
                class_label=label,
                error_rate_test=err_test,
                error_rate_train=err_train,
                gap=gap,
                gap_is_test_only=test_only,
                kappa=kappa(counts, th.epsilon_denominator),
                counts=counts,
            )
        )
    return out


def rule_assignments(
    records: Sequence[PredictionRecord], class_index: int, th: KappaThresholds
) -> list[tuple[str, str, str]]:
    """Debug dump: (sample_id, category, rule) per record, for audits."""
    return [
        (rec.sample_id, *assign_rule(rec.probs, rec.loss, class_index, th))
        for rec in records
    ]


def write_rule_assignments_csv(
    records: Sequence[PredictionRecord], class_index: int, th: KappaThresholds, fp
) -> None:
    """Auditable per-record dump: sample_id, category, rule, max prob."""
    import csv

    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow(["sample_id", "category", "rule", "max_prob"])
    for rec in records:
        cat, rule = assign_rule(rec.probs, rec.loss, class_index, th)
        writer.writerow([rec.sample_id, cat, rule, repr(max(rec.probs))])
