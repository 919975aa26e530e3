"""Confusion metrics, seed aggregation, robustness tables, correlations.

Machine is the positive class throughout. The zero-division policy
reports any 0/0 metric as 0 and carries the affected term names in an
`undefined_terms` flag so degenerate sets stay visible in reports.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

from .attacks import PerturbationSpec, perturb_testset
from .corpus import ExampleUnit, Label, Record
from .errors import EvalError

VARIANT_LABELS = {"misspelling": "+ms", "homoglyph": "+hg"}


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def confusion(predictions: Sequence[Label], gold: Sequence[Label]) -> ConfusionMatrix:
    if len(predictions) != len(gold):
        raise EvalError(
            f"prediction/gold length mismatch: {len(predictions)} vs {len(gold)}"
        )
    if not predictions:
        raise EvalError("cannot build a confusion matrix from no predictions")
    tp = fp = tn = fn = 0
    for pred, truth in zip(predictions, gold):
        if truth is Label.MACHINE:
            if pred is Label.MACHINE:
                tp += 1
            else:
                fn += 1
        else:
            if pred is Label.MACHINE:
                fp += 1
            else:
                tn += 1
    return ConfusionMatrix(tp=tp, fp=fp, tn=tn, fn=fn)


def accuracy(cm: ConfusionMatrix) -> float:
    total = cm.total
    if total == 0:
        return 0.0
    return (cm.tp + cm.tn) / total


def prf1(cm: ConfusionMatrix, positive_class: Label = Label.MACHINE) -> dict:
    """Precision/recall/F1 for the chosen positive class.

    Any term with a zero denominator is reported as 0 and named in
    `undefined_terms`.
    """
    if positive_class is Label.MACHINE:
        tp, fp, fn = cm.tp, cm.fp, cm.fn
    else:
        tp, fp, fn = cm.tn, cm.fn, cm.fp
    undefined = []
    if tp + fp > 0:
        precision = tp / (tp + fp)
    else:
        precision = 0.0
        undefined.append("precision")
    if tp + fn > 0:
        recall = tp / (tp + fn)
    else:
        recall = 0.0
        undefined.append("recall")
    if precision + recall > 0:
        f1 = 2.0 * precision * recall / (precision + recall)
    else:
        f1 = 0.0
        undefined.append("f1")
    return {
        "precision": precision,
        "recall": recall,
        "f1": f1,
        "undefined_terms": tuple(undefined),
    }


def aggregate_seeds(metric_sets: Sequence) -> dict:
    """Mean and sample standard deviation (n-1) over same-shaped metric sets.

    Accepts bare numbers or arbitrarily nested dicts of numbers; keys with
    non-numeric leaves are dropped. A single set yields std 0.
    """
    if not metric_sets:
        raise EvalError("no metric sets to aggregate")
    first = metric_sets[0]
    if isinstance(first, Mapping):
        out = {}
        for key, value in first.items():
            if isinstance(value, Mapping) or _is_number(value):
                out[key] = aggregate_seeds([m[key] for m in metric_sets])
        return out
    if not _is_number(first):
        raise EvalError(f"cannot aggregate non-numeric metric {first!r}")
    xs = [float(v) for v in metric_sets]
    n = len(xs)
    mean = math.fsum(xs) / n
    if n > 1:
        std = math.sqrt(math.fsum((x - mean) ** 2 for x in xs) / (n - 1))
    else:
        std = 0.0
    return {"mean": mean, "sample_std": std}


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


# --- correlations ----------------------------------------------------------


def _pearson(xs: list[float], ys: list[float]) -> float:
    n = len(xs)
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    sxx = math.fsum((x - mx) ** 2 for x in xs)
    syy = math.fsum((y - my) ** 2 for y in ys)
    if sxx == 0.0 or syy == 0.0:
        return float("nan")
    sxy = math.fsum((x - mx) * (y - my) for x, y in zip(xs, ys))
    return sxy / (math.sqrt(sxx) * math.sqrt(syy))


def _mean_ranks(xs: list[float]) -> list[float]:
    order = sorted(range(len(xs)), key=lambda i: xs[i])
    ranks = [0.0] * len(xs)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and xs[order[j + 1]] == xs[order[i]]:
            j += 1
        mean_rank = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = mean_rank
        i = j + 1
    return ranks


def _count_inversions(seq: list[float]) -> int:
    """Pairs (i < j) with seq[i] > seq[j], by mergesort; ties not counted."""
    work = list(seq)
    buffer = [0.0] * len(work)
    inversions = 0
    width = 1
    n = len(work)
    while width < n:
        for lo in range(0, n, 2 * width):
            mid = min(lo + width, n)
            hi = min(lo + 2 * width, n)
            i, j, k = lo, mid, lo
            while i < mid and j < hi:
                if work[j] < work[i]:
                    inversions += mid - i
                    buffer[k] = work[j]
                    j += 1
                else:
                    buffer[k] = work[i]
                    i += 1
                k += 1
            while i < mid:
                buffer[k] = work[i]
                i += 1
                k += 1
            while j < hi:
                buffer[k] = work[j]
                j += 1
                k += 1
            work[lo:hi] = buffer[lo:hi]
        width *= 2
    return inversions


def _tie_term(sorted_values: list[float]) -> int:
    total = 0
    i = 0
    n = len(sorted_values)
    while i < n:
        j = i
        while j + 1 < n and sorted_values[j + 1] == sorted_values[i]:
            j += 1
        size = j - i + 1
        total += size * (size - 1) // 2
        i = j + 1
    return total


def _kendall_tau_b(xs: list[float], ys: list[float]) -> float:
    n = len(xs)
    pairs = sorted(zip(xs, ys))
    n0 = n * (n - 1) // 2
    n1 = 0
    n3 = 0
    i = 0
    while i < n:
        j = i
        while j + 1 < n and pairs[j + 1][0] == pairs[i][0]:
            j += 1
        size = j - i + 1
        n1 += size * (size - 1) // 2
        n3 += _tie_term([pairs[k][1] for k in range(i, j + 1)])
        i = j + 1
    n2 = _tie_term(sorted(ys))
    if n0 == n1 or n0 == n2:
        return float("nan")
    # after sorting by (x, y), strict y-inversions are exactly the
    # discordant pairs: x-tied pairs sit y-sorted, y-ties are not strict
    discordant = _count_inversions([p[1] for p in pairs])
    concordant = n0 - n1 - n2 + n3 - discordant
    return (concordant - discordant) / math.sqrt((n0 - n1) * (n0 - n2))


def correlations(x: Sequence[float], y: Sequence[float]) -> dict[str, float]:
    """Pearson, Spearman (mean ranks), and Kendall tau-b.

    A constant input makes every coefficient NaN.
    """
    if len(x) != len(y):
        raise EvalError(f"correlation length mismatch: {len(x)} vs {len(y)}")
    if len(x) < 2:
        raise EvalError("correlations need at least 2 points")
    xs = [float(v) for v in x]
    ys = [float(v) for v in y]
    return {
        "pearson": _pearson(xs, ys),
        "spearman": _pearson(_mean_ranks(xs), _mean_ranks(ys)),
        "kendall_tau_b": _kendall_tau_b(xs, ys),
    }


class QualityCorrelation(NamedTuple):
    coefficients: dict[str, float]
    used: int
    skipped: int


def correlate_quality(
    records: Sequence[Record], scores_by_id: Mapping[str, float]
) -> QualityCorrelation:
    """Correlate translation-quality scores with per-record detector scores.

    Records without a quality score, or without an entry in scores_by_id,
    are skipped and tallied.
    """
    qualities = []
    scores = []
    skipped = 0
    for record in records:
        score = scores_by_id.get(record.id)
        if record.translation_quality is None or score is None:
            skipped += 1
            continue
        qualities.append(float(record.translation_quality))
        scores.append(float(score))
    if len(qualities) < 2:
        raise EvalError(
            f"need at least 2 records with quality scores, got {len(qualities)}"
        )
    return QualityCorrelation(correlations(qualities, scores), len(qualities), skipped)


# --- robustness tables ------------------------------------------------------


@dataclass(frozen=True)
class EvalReport:
    rows: tuple[dict, ...]


def _flags(per_class: dict[str, dict]) -> tuple[str, ...]:
    out = []
    for label_name, stats in per_class.items():
        for term in stats["undefined_terms"]:
            out.append(f"{label_name}.{term}")
    return tuple(sorted(out))


def robustness_table(
    params,
    config,
    test_sets: Mapping[str, Sequence[ExampleUnit]],
    attacks: Sequence[PerturbationSpec],
    tags: Sequence[str] | None = None,
) -> EvalReport:
    """Accuracy and per-class P/R/F1 per (test-set tag, variant).

    The raw variant is always present; each attack spec adds its variant
    (+ms or +hg) built with `perturb_testset`. Rows come out ordered by tag
    then variant. On sets holding a single true label, accuracy equals that
    label's recall; the other label's metrics carry undefined flags.
    """
    from .detector import predict_units

    if tags is None:
        tags = sorted(test_sets)
    rows = []
    for tag in tags:
        if tag not in test_sets:
            raise EvalError(f"unknown test-set tag: {tag!r}")
        units = list(test_sets[tag])
        variants: list[tuple[str, list[ExampleUnit]]] = [("raw", units)]
        for spec in attacks:
            variants.append(
                (
                    VARIANT_LABELS[spec.kind],
                    perturb_testset(units, spec.kind, spec.rate, spec.seed),
                )
            )
        for variant_name, variant_units in variants:
            predictions, _ = predict_units(params, variant_units, config)
            cm = confusion(predictions, [u.label for u in variant_units])
            per_class = {
                label.value: prf1(cm, label) for label in (Label.HUMAN, Label.MACHINE)
            }
            rows.append(
                {
                    "tag": tag,
                    "variant": variant_name,
                    "count": cm.total,
                    "accuracy": accuracy(cm),
                    "classes": {
                        name: {
                            "precision": stats["precision"],
                            "recall": stats["recall"],
                            "f1": stats["f1"],
                        }
                        for name, stats in per_class.items()
                    },
                    "flags": list(_flags(per_class)),
                }
            )
    return EvalReport(rows=tuple(rows))


def aggregate_reports(reports: Sequence[EvalReport]) -> list[dict]:
    """Merge per-seed reports row-wise; n > 1 turns cells into mean/std."""
    if not reports:
        raise EvalError("no reports to aggregate")
    base = reports[0]
    for other in reports[1:]:
        if [(r["tag"], r["variant"]) for r in other.rows] != [
            (r["tag"], r["variant"]) for r in base.rows
        ]:
            raise EvalError("reports have mismatched row layouts")
    merged = []
    single = len(reports) == 1
    for position, row in enumerate(base.rows):
        group = [report.rows[position] for report in reports]
        flags = sorted({flag for g in group for flag in g["flags"]})
        entry = {
            "tag": row["tag"],
            "variant": row["variant"],
            "count": row["count"],
            "flags": flags,
        }
        if single:
            entry["accuracy"] = row["accuracy"]
            entry["classes"] = row["classes"]
        else:
            entry["accuracy"] = aggregate_seeds([g["accuracy"] for g in group])
            entry["classes"] = {
                name: aggregate_seeds([g["classes"][name] for g in group])
                for name in row["classes"]
            }
        merged.append(entry)
    return merged


# --- report rendering -------------------------------------------------------


def _round_floats(obj, places: int = 4):
    if isinstance(obj, float):
        return round(obj, places)
    if isinstance(obj, dict):
        return {k: _round_floats(v, places) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v, places) for v in obj]
    return obj


def render_report_json(payload: dict) -> str:
    """Deterministic machine-readable report: sorted keys, 4-decimal floats."""
    return json.dumps(_round_floats(payload), indent=2, sort_keys=True) + "\n"


def _cell(value) -> str:
    if isinstance(value, Mapping):
        return f"{100.0 * value['mean']:.2f} ± {100.0 * value['sample_std']:.2f}"
    return f"{100.0 * value:.2f}"


def render_rows_markdown(rows: Sequence[dict]) -> str:
    header = (
        "| set | variant | n | accuracy | P(machine) | R(machine) | F1(machine) "
        "| P(human) | R(human) | F1(human) | flags |"
    )
    divider = "|---" * 11 + "|"
    lines = [header, divider]
    for row in rows:
        machine = row["classes"]["machine"]
        human = row["classes"]["human"]
        lines.append(
            "| {tag} | {variant} | {count} | {acc} | {pm} | {rm} | {fm} "
            "| {ph} | {rh} | {fh} | {flags} |".format(
                tag=row["tag"],
                variant=row["variant"],
                count=row["count"],
                acc=_cell(row["accuracy"]),
                pm=_cell(machine["precision"]),
                rm=_cell(machine["recall"]),
                fm=_cell(machine["f1"]),
                ph=_cell(human["precision"]),
                rh=_cell(human["recall"]),
                fh=_cell(human["f1"]),
                flags=" ".join(row["flags"]) if row["flags"] else "-",
            )
        )
    return "\n".join(lines)
