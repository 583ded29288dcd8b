"""Context windows, genuine/fake pair construction and pair scoring.

Clause indices are 1-based throughout, matching the corpus format.
"""

from dataclasses import dataclass

import torch
import torch.nn as nn

from .encoder import init_linear_


@dataclass(frozen=True)
class WindowPartition:
    center: int
    inside: tuple
    outside: tuple


def build_window(i, d_len, w):
    if not 1 <= i <= d_len:
        raise ValueError(f"clause index {i} outside 1..{d_len}")
    if w < 0:
        raise ValueError("window size must be >= 0")
    lo, hi = max(1, i - w), min(d_len, i + w)
    inside = tuple(range(lo, hi + 1))
    outside = tuple(range(1, lo)) + tuple(range(hi + 1, d_len + 1))
    return WindowPartition(i, inside, outside)


def enumerate_pairs(candidates, d_len, w):
    """Genuine pairs {(i, j): j in IW_i} and fake pairs {(i, k): k in OW_i} per candidate i."""
    indices = getattr(candidates, "indices", candidates)
    if not indices:
        raise ValueError("candidate set is empty")
    genuine, fake = [], []
    for i in indices:
        win = build_window(i, d_len, w)
        genuine.extend((i, j) for j in win.inside)
        fake.extend((i, k) for k in win.outside)
    return genuine, fake


def genuine_represent(i, inside, r_e, r_c):
    """Relevance-weighted cause representations for candidate ``i`` over its window.

    beta is a softmax across the window of dot(r_c[j], r_e[i]); p[j] = beta[j] * r_c[j].
    """
    rows = torch.as_tensor([j - 1 for j in inside], device=r_c.device)
    ctx = r_c[rows]
    beta = torch.softmax(ctx @ r_e[i - 1], dim=0)
    return beta, beta.unsqueeze(-1) * ctx


def fake_represent(i, ks, r_e, r_c):
    """[r_e[i]; r_c[k]] for every k in ``ks`` (a single int is accepted too)."""
    single = isinstance(ks, int)
    rows = torch.as_tensor([ks - 1] if single else [k - 1 for k in ks], device=r_c.device)
    emo = r_e[i - 1].expand(len(rows), -1)
    p = torch.cat([emo, r_c[rows]], dim=-1)
    return p[0] if single else p


def _score(p, linear, dropout=None):
    x = dropout(p) if dropout is not None else p
    return torch.sigmoid(linear(x).squeeze(-1))


def genuine_score(p, scorer, dropout=None):
    return _score(p, scorer.genuine, dropout)


def fake_score(p, scorer, dropout=None):
    return _score(p, scorer.fake, dropout)


class PairScorer(nn.Module):
    def __init__(self, hidden_dim=200, dropout=0.1):
        super().__init__()
        self.genuine = nn.Linear(hidden_dim, 1)
        self.fake = nn.Linear(2 * hidden_dim, 1)
        self.dropout = nn.Dropout(dropout)
        for lin in (self.genuine, self.fake):
            init_linear_(lin)


@dataclass
class PairBatch:
    """Pairs of one document. Tensors are aligned with the index lists."""
    genuine: list            # [(i, j)]
    genuine_repr: torch.Tensor
    beta: torch.Tensor
    genuine_prob: torch.Tensor
    genuine_label: torch.Tensor
    fake: list               # [(i, k)]
    fake_repr: torch.Tensor
    fake_prob: torch.Tensor
    fake_label: torch.Tensor


def build_pair_batch(candidates, d_len, w, r_e, r_c, gold_pairs, scorer, score_genuine=True):
    """Represent, score and label all genuine and fake pairs of one document.

    r_e, r_c: (d_len, H) for the real clauses. With ``score_genuine=False`` the
    genuine scorer is not applied (its probabilities come back empty).
    """
    dev, dt = r_c.device, r_c.dtype
    H = r_c.size(-1)
    genuine, fake = [], []
    g_repr, betas, f_repr = [], [], []
    for i in candidates.indices:
        win = build_window(i, d_len, w)
        beta, p = genuine_represent(i, win.inside, r_e, r_c)
        genuine.extend((i, j) for j in win.inside)
        g_repr.append(p)
        betas.append(beta)
        if win.outside:
            fake.extend((i, k) for k in win.outside)
            f_repr.append(fake_represent(i, win.outside, r_e, r_c))
    g_repr = torch.cat(g_repr) if g_repr else r_c.new_zeros(0, H)
    beta = torch.cat(betas) if betas else r_c.new_zeros(0)
    f_repr = torch.cat(f_repr) if f_repr else r_c.new_zeros(0, 2 * H)
    g_prob = genuine_score(g_repr, scorer, scorer.dropout) if score_genuine else r_c.new_zeros(0)
    f_prob = fake_score(f_repr, scorer, scorer.dropout)
    gold = set(gold_pairs)
    g_label = torch.tensor([float(p in gold) for p in genuine], device=dev, dtype=dt)
    f_label = torch.tensor([float(p in gold) for p in fake], device=dev, dtype=dt)
    return PairBatch(genuine, g_repr, beta, g_prob, g_label, fake, f_repr, f_prob, f_label)
