"""Emotion/context projections, emotion probabilities and top-K candidates."""

from dataclasses import dataclass

import torch
import torch.nn as nn

from .encoder import init_linear_


@dataclass(frozen=True)
class CandidateSet:
    indices: tuple  # 1-based clause indices, best first
    probs: tuple

    def __len__(self):
        return len(self.indices)


def project(r, emo_proj, ctx_proj):
    """Affine emotion-specific and context-specific views of clause states."""
    return emo_proj(r), ctx_proj(r)


def emotion_prob(r_e, scorer, dropout=None):
    x = dropout(r_e) if dropout is not None else r_e
    return torch.sigmoid(scorer(x).squeeze(-1))


def select_candidates(probs, k):
    """Top-min(k, len) clauses by probability, ties to the lower index.

    ``probs`` may be a tensor or a sequence; the choice itself carries no gradient.
    """
    if k < 1:
        raise ValueError("K must be >= 1")
    if isinstance(probs, torch.Tensor):
        values = probs.detach().cpu().tolist()
    else:
        values = list(probs)
    order = sorted(range(len(values)), key=lambda i: (-values[i], i))[:k]
    return CandidateSet(
        indices=tuple(i + 1 for i in order),
        probs=tuple(float(values[i]) for i in order),
    )


class EmotionHead(nn.Module):
    def __init__(self, hidden_dim=200, dropout=0.1):
        super().__init__()
        self.emo_proj = nn.Linear(hidden_dim, hidden_dim)
        self.ctx_proj = nn.Linear(hidden_dim, hidden_dim)
        self.scorer = nn.Linear(hidden_dim, 1)
        self.dropout = nn.Dropout(dropout)
        self.reset_parameters()

    def reset_parameters(self):
        for lin in (self.emo_proj, self.ctx_proj, self.scorer):
            init_linear_(lin)

    def forward(self, r):
        r_e, r_c = project(r, self.emo_proj, self.ctx_proj)
        return r_e, r_c, emotion_prob(r_e, self.scorer, self.dropout)
