"""The full emotion-prediction-oriented pair extraction network."""

from dataclasses import dataclass

import torch
import torch.nn as nn

from .corpus import PAD_ID
from .emotion_head import CandidateSet, EmotionHead, select_candidates
from .encoder import HierarchicalEncoder
from .objectives import (
    PRETRAIN,
    TRAIN,
    LossBreakdown,
    emotion_loss,
    fake_loss,
    genuine_loss,
    phase_loss,
)
from .pairing import PairBatch, PairScorer, build_pair_batch


@dataclass
class DocOutput:
    doc: object
    emotion_prob: torch.Tensor
    emotion_label: torch.Tensor
    candidates: CandidateSet
    pairs: PairBatch


def tensorize(docs, vocab):
    """Pad documents to (B, D, N) token ids plus token and clause masks."""
    if not docs:
        raise ValueError("cannot tensorize an empty batch")
    D = max(len(d.clauses) for d in docs)
    N = max(len(c.tokens) for d in docs for c in d.clauses)
    ids = torch.full((len(docs), D, N), PAD_ID, dtype=torch.long)
    for b, doc in enumerate(docs):
        for c, clause in enumerate(doc.clauses):
            ids[b, c, :len(clause.tokens)] = torch.tensor(vocab.encode(clause.tokens))
    token_mask = torch.zeros(len(docs), D, N, dtype=torch.bool)
    clause_mask = torch.zeros(len(docs), D, dtype=torch.bool)
    for b, doc in enumerate(docs):
        clause_mask[b, :len(doc.clauses)] = True
        for c, clause in enumerate(doc.clauses):
            token_mask[b, c, :len(clause.tokens)] = True
    return ids, token_mask, clause_mask


def emotion_labels(doc, dtype=torch.float32):
    emotions = {e for e, _ in doc.gold_pairs}
    return torch.tensor([float(i in emotions) for i in range(1, len(doc.clauses) + 1)], dtype=dtype)


class EPOECPE(nn.Module):
    def __init__(self, vocab, config, embeddings=None):
        super().__init__()
        self.vocab = vocab
        self.config = config
        drop = config.dropout
        hidden = config.dims["clause"]
        self.encoder = HierarchicalEncoder(
            len(vocab), config.dims["embedding"], hidden, dropout=drop, embeddings=embeddings
        )
        self.head = EmotionHead(hidden, drop["prediction"])
        self.pair_scorer = PairScorer(hidden, drop["prediction"])

    @property
    def dtype(self):
        return self.encoder.embedding.weight.dtype

    def forward(self, docs, phase=TRAIN, K=None, w=None):
        K = self.config.K if K is None else K
        w = self.config.w if w is None else w
        ids, token_mask, clause_mask = tensorize(docs, self.vocab)
        states = self.encoder(ids, token_mask, clause_mask)
        r_e, r_c, probs = self.head(states.clause_repr)
        outputs = []
        for b, doc in enumerate(docs):
            n = len(doc.clauses)
            prob = probs[b, :n]
            # recomputed every pass; the choice itself is not differentiated
            cand = select_candidates(prob, K)
            pairs = build_pair_batch(
                cand, n, w, r_e[b, :n], r_c[b, :n], doc.gold_pairs, self.pair_scorer,
                score_genuine=(phase != PRETRAIN),
            )
            outputs.append(DocOutput(doc, prob, emotion_labels(doc, prob.dtype), cand, pairs))
        return outputs, states

    def loss_breakdown(self, outputs, phase=TRAIN, exclude=()):
        zero = outputs[0].emotion_prob.new_zeros(())
        l_e, l_gp, l_fp = zero, zero, zero
        for out in outputs:
            l_e = l_e + emotion_loss(out.emotion_prob, out.emotion_label)
            if phase != PRETRAIN:
                l_gp = l_gp + genuine_loss(out.pairs.genuine_prob, out.pairs.genuine_label)
            l_fp = l_fp + fake_loss(out.pairs.fake_prob, out.pairs.fake_label)
        bd = LossBreakdown(l_e, l_gp, l_fp, zero)
        bd.total = phase_loss(bd, phase, exclude)
        return bd

    @torch.no_grad()
    def score_genuine(self, docs, K=None, w=None):
        """Eval-mode genuine pair scores per document: list of [(i, j, score)]."""
        was_training = self.training
        self.eval()
        try:
            outputs, _ = self(docs, phase=TRAIN, K=K, w=w)
        finally:
            self.train(was_training)
        scored = []
        for out in outputs:
            probs = out.pairs.genuine_prob.tolist()
            scored.append([(i, j, s) for (i, j), s in zip(out.pairs.genuine, probs)])
        return outputs, scored
