"""Cross-validation and K / window sweeps, with CSV tables."""

import csv
import logging

from .corpus import make_folds, select_docs
from .metrics import TASKS, aggregate_cv, evaluate
from .trainer import candidate_recall, fit, predict

log = logging.getLogger(__name__)

SWEEP_PARAMS = ("K", "w")


def parse_sweep(spec):
    """'K=1..5' -> ('K', [1, 2, 3, 4, 5]); also accepts 'w=0,2,4'."""
    try:
        name, values = spec.split("=", 1)
        name = name.strip()
        if ".." in values:
            lo, hi = values.split("..", 1)
            settings = list(range(int(lo), int(hi) + 1))
        else:
            settings = [int(v) for v in values.split(",") if v.strip()]
    except ValueError as exc:
        raise ValueError(f"bad sweep spec {spec!r}; expected e.g. K=1..5 or w=0..4") from exc
    if name not in SWEEP_PARAMS:
        raise ValueError(f"sweep parameter must be one of {SWEEP_PARAMS}, got {name!r}")
    if not settings:
        raise ValueError(f"sweep {spec!r} has no settings")
    return name, settings


def cross_validate(docs, lexicon, config, n_folds=10, repeats=1, embeddings_path=None,
                   top_pair="document", model=None):
    """Train per fold (or reuse ``model`` when given) and score each test split.

    ``n_folds=1`` trains and tests on the whole corpus. Returns a list of dicts
    with repeat, fold, n_test, candidate_recall and the EvalReport.
    """
    results = []
    for r in range(repeats):
        cfg = config.replace(seed=config.seed + r)
        if n_folds == 1:
            splits = [(0, docs, docs)]
        else:
            splits = [(f.fold_id, select_docs(docs, f.train_docs), select_docs(docs, f.test_docs))
                      for f in make_folds(docs, n_folds, seed=cfg.seed)]
        for fold_id, train_docs, test_docs in splits:
            m = model if model is not None else fit(train_docs, cfg, embeddings_path)
            preds, outputs = predict(m, test_docs, lexicon, top_pair=top_pair)
            report = evaluate(test_docs, preds)
            results.append({
                "repeat": r,
                "fold": fold_id,
                "n_test": len(test_docs),
                "candidate_recall": candidate_recall(outputs),
                "report": report,
            })
            log.info("repeat %d fold %d: pair F1 %.4f", r, fold_id, report.pair.f1)
    return results


def sweep(docs, lexicon, config, param, settings, n_folds=10, repeats=1, embeddings_path=None,
          top_pair="document"):
    """Retrain from scratch for every setting of K or w; one summary row per setting."""
    if param not in SWEEP_PARAMS:
        raise ValueError(f"cannot sweep {param!r}")
    rows = []
    for value in settings:
        cfg = config.replace(**{param: value})
        results = cross_validate(docs, lexicon, cfg, n_folds, repeats, embeddings_path, top_pair)
        summary = aggregate_cv(r["report"] for r in results)
        row = {param: value, "n_reports": len(results)}
        for task in ("pair", "emotion", "cause"):
            for metric in ("precision", "recall", "f1"):
                row[f"{task}_{metric}"] = summary[task][metric]["mean"]
            row[f"{task}_f1_std"] = summary[task]["f1"]["std"]
        rows.append(row)
    return rows


FOLD_COLUMNS = ["repeat", "fold", "n_test", "candidate_recall"] + [
    f"{task}_{m}" for task in TASKS for m in ("precision", "recall", "f1")
]


def fold_rows(results):
    rows = []
    for res in results:
        row = {k: res[k] for k in ("repeat", "fold", "n_test", "candidate_recall")}
        for task in TASKS:
            prf = getattr(res["report"], task)
            for m in ("precision", "recall", "f1"):
                row[f"{task}_{m}"] = getattr(prf, m)
        rows.append(row)
    return rows


def write_table(rows, path, columns=None):
    columns = columns or (list(rows[0]) if rows else [])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (f"{v:.6f}" if isinstance(v, float) else v) for k, v in row.items()})


def read_table(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))
