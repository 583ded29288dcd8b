"""Lexicon-gated extraction of emotion-cause pairs from scored genuine pairs."""

import json
from dataclasses import dataclass


@dataclass(frozen=True)
class ScoredPair:
    emotion_index: int
    cause_index: int
    score: float


@dataclass(frozen=True)
class Prediction:
    doc_id: str
    pairs: frozenset

    def to_record(self):
        return {"doc_id": self.doc_id, "pairs": [list(p) for p in sorted(self.pairs)]}


def contains_sentiment_word(clause, lexicon):
    words = lexicon.words if hasattr(lexicon, "words") else lexicon
    return any(tok in words for tok in clause.tokens)


def _as_scored(item):
    if isinstance(item, ScoredPair):
        return item
    i, j, s = item
    return ScoredPair(int(i), int(j), float(s))


def _top(scores):
    return min(scores, key=lambda k: (-scores[k], k))


def extract(doc, scored, lexicon, top_pair="document"):
    """Keep (i, j) when clause i holds a lexicon word and the pair scores > 0.5
    or is the top genuine pair.

    Duplicate (i, j) entries collapse to their maximum score first. The top
    pair is the highest score, ties going to the lexicographically smallest
    (i, j); with ``top_pair="document"`` there is one per document, with
    ``"candidate"`` one per candidate emotion clause.
    """
    if top_pair not in ("document", "candidate"):
        raise ValueError(f"top_pair must be 'document' or 'candidate', not {top_pair!r}")
    best = {}
    for item in scored:
        sp = _as_scored(item)
        key = (sp.emotion_index, sp.cause_index)
        if key not in best or sp.score > best[key]:
            best[key] = sp.score
    if not best:
        return Prediction(doc.doc_id, frozenset())
    if top_pair == "document":
        tops = {_top(best)}
    else:
        by_candidate = {}
        for (i, j), score in best.items():
            by_candidate.setdefault(i, {})[(i, j)] = score
        tops = {_top(group) for group in by_candidate.values()}
    has_word = {}
    pairs = set()
    for (i, j), score in best.items():
        if i not in has_word:
            has_word[i] = contains_sentiment_word(doc.clauses[i - 1], lexicon)
        if has_word[i] and (score > 0.5 or (i, j) in tops):
            pairs.add((i, j))
    return Prediction(doc.doc_id, frozenset(pairs))


def write_predictions(predictions, path):
    with open(path, "w", encoding="utf-8") as fh:
        for pred in predictions:
            fh.write(json.dumps(pred.to_record()) + "\n")


def read_predictions(path):
    preds = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rec = json.loads(line)
                preds.append(Prediction(rec["doc_id"], frozenset(tuple(p) for p in rec["pairs"])))
    return preds
