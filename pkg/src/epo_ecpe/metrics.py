"""Precision/recall/F1 for pairs, emotions and causes, plus CV aggregation."""

import json
import math
from dataclasses import asdict, dataclass

TASKS = ("pair", "emotion", "cause", "single_pair", "multi_pair")


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float
    tp: int = 0
    n_pred: int = 0
    n_gold: int = 0


def prf_from_counts(tp, n_pred, n_gold):
    p = tp / n_pred if n_pred else 0.0
    r = tp / n_gold if n_gold else 0.0
    f1 = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return PRF(p, r, f1, tp, n_pred, n_gold)


def prf(pred, gold):
    """Micro P/R/F1. ``pred``/``gold`` are sets, or aligned lists of per-document sets."""
    if isinstance(pred, (set, frozenset)):
        pred, gold = [pred], [gold]
    tp = sum(len(set(p) & set(g)) for p, g in zip(pred, gold, strict=True))
    return prf_from_counts(tp, sum(len(set(p)) for p in pred), sum(len(set(g)) for g in gold))


def decompose(pairs):
    return {e for e, _ in pairs}, {c for _, c in pairs}


def stratify(docs):
    single = [d for d in docs if len(d.gold_pairs) == 1]
    multi = [d for d in docs if len(d.gold_pairs) > 1]
    return single, multi


@dataclass
class EvalReport:
    pair: PRF
    emotion: PRF
    cause: PRF
    single_pair: PRF
    multi_pair: PRF
    n_docs: dict

    def to_dict(self):
        return asdict(self)


def evaluate(docs, predictions):
    """Score predictions (Prediction objects or pair sets keyed by doc_id) against gold."""
    by_id = {}
    for p in predictions:
        by_id[p.doc_id] = set(p.pairs)
    gold = [set(d.gold_pairs) for d in docs]
    pred = [by_id.get(d.doc_id, set()) for d in docs]
    emo = [decompose(p)[0] for p in pred], [decompose(g)[0] for g in gold]
    cau = [decompose(p)[1] for p in pred], [decompose(g)[1] for g in gold]
    single_idx = [k for k, d in enumerate(docs) if len(d.gold_pairs) == 1]
    multi_idx = [k for k, d in enumerate(docs) if len(d.gold_pairs) > 1]
    return EvalReport(
        pair=prf(pred, gold),
        emotion=prf(*emo),
        cause=prf(*cau),
        single_pair=prf([pred[k] for k in single_idx], [gold[k] for k in single_idx]),
        multi_pair=prf([pred[k] for k in multi_idx], [gold[k] for k in multi_idx]),
        n_docs={"total": len(docs), "single_pair": len(single_idx), "multi_pair": len(multi_idx),
                "no_pair": len(docs) - len(single_idx) - len(multi_idx)},
    )


def aggregate_cv(reports):
    """Mean and population std per task/metric over a flat pool of reports."""
    reports = list(reports)
    if not reports:
        raise ValueError("aggregate_cv needs at least one report")
    summary = {}
    for task in TASKS:
        summary[task] = {}
        for metric in ("precision", "recall", "f1"):
            values = [getattr(getattr(r, task), metric) for r in reports]
            mean = sum(values) / len(values)
            std = math.sqrt(sum((v - mean) ** 2 for v in values) / len(values))
            summary[task][metric] = {"mean": mean, "std": std}
    return summary


def format_summary(summary, n_reports=None):
    lines = []
    if n_reports is not None:
        lines.append(f"reports pooled: {n_reports}")
    lines.append(f"{'task':<12} {'P':>17} {'R':>17} {'F1':>17}")
    for task in TASKS:
        cells = [f"{summary[task][m]['mean']:.4f} ± {summary[task][m]['std']:.4f}"
                 for m in ("precision", "recall", "f1")]
        lines.append(f"{task:<12} " + " ".join(f"{c:>17}" for c in cells))
    return "\n".join(lines)


def summary_json(summary):
    return json.dumps(summary, indent=2, sort_keys=True)
