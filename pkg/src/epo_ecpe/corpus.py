"""Corpus, lexicon and embedding I/O, fold splitting, and the synthetic corpus."""

import json
import random
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

PAD_ID = 0
UNK_ID = 1
PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"


class CorpusFormatError(ValueError):
    pass


class CorpusValidationError(ValueError):
    pass


class EmbeddingFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Clause:
    index: int
    tokens: tuple

    def __post_init__(self):
        if not self.tokens:
            raise CorpusValidationError(f"clause {self.index} has no tokens")


@dataclass(frozen=True)
class Document:
    doc_id: str
    clauses: tuple
    gold_pairs: frozenset = field(default_factory=frozenset)

    def __len__(self):
        return len(self.clauses)

    @classmethod
    def from_tokens(cls, doc_id, clauses, pairs=()):
        doc = cls(
            doc_id=doc_id,
            clauses=tuple(Clause(i + 1, tuple(toks)) for i, toks in enumerate(clauses)),
            gold_pairs=frozenset((int(e), int(c)) for e, c in pairs),
        )
        doc.validate()
        return doc

    def validate(self):
        n = len(self.clauses)
        if n < 1:
            raise CorpusValidationError(f"document {self.doc_id!r} has no clauses")
        for e, c in self.gold_pairs:
            if not (1 <= e <= n and 1 <= c <= n):
                raise CorpusValidationError(
                    f"document {self.doc_id!r}: pair ({e}, {c}) outside clause range 1..{n}"
                )

    @property
    def emotion_indices(self):
        return sorted({e for e, _ in self.gold_pairs})

    def to_record(self):
        return {
            "doc_id": self.doc_id,
            "clauses": [list(c.tokens) for c in self.clauses],
            "pairs": [list(p) for p in sorted(self.gold_pairs)],
        }


@dataclass(frozen=True)
class Lexicon:
    words: frozenset = frozenset()

    def __contains__(self, token):
        return token in self.words

    def __len__(self):
        return len(self.words)


class Vocabulary:
    def __init__(self, tokens=()):
        self.token_to_id = {PAD_TOKEN: PAD_ID, UNK_TOKEN: UNK_ID}
        for tok in tokens:
            if tok not in self.token_to_id:
                self.token_to_id[tok] = len(self.token_to_id)

    def __len__(self):
        return len(self.token_to_id)

    def __contains__(self, token):
        return token in self.token_to_id

    def __getitem__(self, token):
        return self.token_to_id.get(token, UNK_ID)

    def encode(self, tokens):
        return [self[t] for t in tokens]

    def tokens(self):
        """Corpus tokens in id order, without the reserved entries."""
        return list(self.token_to_id)[2:]

    def __eq__(self, other):
        return isinstance(other, Vocabulary) and self.token_to_id == other.token_to_id


def parse_document(record, where="record"):
    try:
        doc_id = record["doc_id"]
        clauses = record["clauses"]
        pairs = record.get("pairs", [])
    except (KeyError, TypeError) as exc:
        raise CorpusFormatError(f"{where}: missing field {exc}") from exc
    if not isinstance(doc_id, str) or not isinstance(clauses, list):
        raise CorpusFormatError(f"{where}: doc_id must be a string and clauses a list")
    for clause in clauses:
        if not isinstance(clause, list) or not all(isinstance(t, str) for t in clause):
            raise CorpusFormatError(f"{where}: every clause must be a list of token strings")
    for pair in pairs:
        if not (isinstance(pair, list) and len(pair) == 2 and all(isinstance(x, int) for x in pair)):
            raise CorpusFormatError(f"{where}: every pair must be [emotion, cause] integers")
    return Document.from_tokens(doc_id, clauses, [tuple(p) for p in pairs])


def load_corpus(path):
    docs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"{path}: line {lineno}: {exc.msg}") from exc
            docs.append(parse_document(record, where=f"{path}: line {lineno}"))
    return docs


def dump_corpus(docs, path):
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(json.dumps(doc.to_record(), ensure_ascii=False) + "\n")


def load_lexicon(path):
    words = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            word = line.strip()
            if not word or word.startswith("#"):
                continue
            words.add(word)
    return Lexicon(frozenset(words))


def dump_lexicon(lexicon, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# sentiment lexicon, one word per line\n")
        for word in sorted(lexicon.words):
            fh.write(word + "\n")


def build_vocab(docs, min_count=1):
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    counts = Counter(tok for doc in docs for clause in doc.clauses for tok in clause.tokens)
    # first-occurrence order keeps ids stable across runs
    ordered = []
    seen = set()
    for doc in docs:
        for clause in doc.clauses:
            for tok in clause.tokens:
                if tok not in seen and counts[tok] >= min_count:
                    seen.add(tok)
                    ordered.append(tok)
    return Vocabulary(ordered)


def load_embeddings(path, vocab, dim, seed=0):
    """Build a (len(vocab), dim) matrix, copying rows found in a word2vec text file.

    Rows for tokens missing from the file, and the unknown row, are drawn from
    U[-0.1, 0.1] with ``seed``; the padding row is zero.
    """
    rng = np.random.default_rng(seed)
    matrix = rng.uniform(-0.1, 0.1, size=(len(vocab), dim))
    matrix[PAD_ID] = 0.0
    if path is None:
        return matrix
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split()
            if not parts:
                continue
            # word2vec text files may open with a "count dim" header
            if lineno == 1 and len(parts) == 2 and all(p.isdigit() for p in parts):
                continue
            token, values = parts[0], parts[1:]
            if len(values) != dim:
                raise EmbeddingFormatError(
                    f"{path}: line {lineno}: token {token!r} has {len(values)} values, expected {dim}"
                )
            if token in vocab and vocab[token] != PAD_ID:
                matrix[vocab[token]] = np.asarray(values, dtype=np.float64)
    return matrix


@dataclass(frozen=True)
class FoldSplit:
    fold_id: int
    train_docs: tuple
    test_docs: tuple


def make_folds(docs, n_folds=10, seed=0):
    if n_folds < 1:
        raise ValueError("n_folds must be >= 1")
    if n_folds > len(docs):
        raise ValueError(f"n_folds={n_folds} exceeds the number of documents ({len(docs)})")
    ids = [d.doc_id for d in docs]
    if len(set(ids)) != len(ids):
        raise ValueError("document ids must be unique for fold splitting")
    order = list(range(len(docs)))
    random.Random(seed).shuffle(order)
    base, extra = divmod(len(docs), n_folds)
    folds = []
    start = 0
    for k in range(n_folds):
        size = base + (1 if k < extra else 0)
        test = set(order[start:start + size])
        start += size
        folds.append(FoldSplit(
            fold_id=k,
            train_docs=tuple(ids[i] for i in range(len(docs)) if i not in test),
            test_docs=tuple(ids[i] for i in sorted(test)),
        ))
    return folds


def select_docs(docs, doc_ids):
    wanted = set(doc_ids)
    return [d for d in docs if d.doc_id in wanted]


# --- synthetic corpus -------------------------------------------------------

FILLER_WORDS = (
    "the", "a", "city", "road", "man", "woman", "child", "house", "day", "night",
    "went", "saw", "said", "took", "walked", "old", "new", "morning", "market", "river",
)
TRIGGER_WORDS = ("because", "after", "since", "when")
EMOTION_WORDS = ("happy", "sad", "angry", "afraid", "joyful", "upset", "proud", "worried")
MAX_CAUSE_DISTANCE = 2


def _filler(rng, lo=2, hi=5):
    return [rng.choice(FILLER_WORDS) for _ in range(rng.randint(lo, hi))]


def _insert(rng, tokens, word):
    tokens.insert(rng.randint(0, len(tokens)), word)


def _sample_pairs(rng, n_clauses, n_pairs):
    """Pick (emotion, cause) pairs, 1-based, with disjoint clauses and no cross-window confusion."""
    pairs = []
    for _ in range(50 * n_pairs):
        if len(pairs) == n_pairs:
            break
        e = rng.randint(1, n_clauses)
        offset = rng.randint(-MAX_CAUSE_DISTANCE, MAX_CAUSE_DISTANCE)
        c = e + offset
        if not 1 <= c <= n_clauses:
            continue
        used = {x for p in pairs for x in p}
        if e in used or c in used:
            continue
        # another pair's cause must not sit in this emotion's window and vice versa
        if any(abs(c2 - e) <= MAX_CAUSE_DISTANCE or abs(c - e2) <= MAX_CAUSE_DISTANCE
               for e2, c2 in pairs):
            continue
        pairs.append((e, c))
    return pairs


def generate_synthetic(n_docs, seed, max_len=10, max_pairs=2):
    """Deterministic toy corpus with lexicon-marked emotions and trigger-marked causes.

    Every cause lies within two clauses of its emotion, only gold emotion
    clauses carry a lexicon word, and documents hold 1..max_pairs pairs
    (single-pair documents dominate, as in the benchmark).
    """
    if n_docs < 1:
        raise ValueError("n_docs must be >= 1")
    if max_len < 4:
        raise ValueError("max_len must be >= 4")
    rng = random.Random(seed)
    docs = []
    for k in range(n_docs):
        n_clauses = rng.randint(4, max_len)
        n_pairs = 1
        while n_pairs < max_pairs and rng.random() < 0.3:
            n_pairs += 1
        pairs = _sample_pairs(rng, n_clauses, n_pairs)
        clauses = [_filler(rng) for _ in range(n_clauses)]
        for e, c in pairs:
            _insert(rng, clauses[e - 1], rng.choice(EMOTION_WORDS))
            _insert(rng, clauses[c - 1], rng.choice(TRIGGER_WORDS))
        docs.append(Document.from_tokens(f"syn{seed}-{k:05d}", clauses, pairs))
    return docs, Lexicon(frozenset(EMOTION_WORDS))
