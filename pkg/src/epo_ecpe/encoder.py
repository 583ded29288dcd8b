"""Hierarchical clause encoder: word Bi-LSTM, word attention, clause Bi-LSTM."""

import math
from dataclasses import dataclass

import torch
import torch.nn as nn
from torch.nn.utils.rnn import pack_padded_sequence, pad_packed_sequence

from .corpus import PAD_ID


class MaskError(ValueError):
    pass


@dataclass
class ClauseStates:
    word_hidden: torch.Tensor    # (B, D, N, H)
    word_attention: torch.Tensor  # (B, D, N)
    clause_pooled: torch.Tensor  # (B, D, H)
    clause_repr: torch.Tensor    # (B, D, H)
    token_mask: torch.Tensor     # (B, D, N) bool
    clause_mask: torch.Tensor    # (B, D) bool


def init_linear_(linear):
    """Glorot-uniform weights, zero bias."""
    nn.init.xavier_uniform_(linear.weight)
    if linear.bias is not None:
        nn.init.zeros_(linear.bias)


def init_lstm_(lstm):
    """Glorot input kernels and orthogonal recurrent kernels per gate, unit forget bias.

    PyTorch orders gate blocks as (input, forget, cell, output).
    """
    H = lstm.hidden_size
    with torch.no_grad():
        for name, p in lstm.named_parameters():
            if name.startswith("weight_ih"):
                for g in range(4):
                    nn.init.xavier_uniform_(p[g * H:(g + 1) * H])
            elif name.startswith("weight_hh"):
                for g in range(4):
                    nn.init.orthogonal_(p[g * H:(g + 1) * H])
            else:
                p.zero_()
                if name.startswith("bias_ih"):
                    p[H:2 * H] = 1.0


def run_bilstm(lstm, inputs, lengths):
    """Bi-LSTM over right-padded sequences; padded outputs are exactly zero.

    Packing makes the backward direction start at each sequence's last real
    step, so padding never leaks into real positions.
    """
    packed = pack_padded_sequence(inputs, lengths.cpu(), batch_first=True, enforce_sorted=False)
    out, _ = lstm(packed)
    out, _ = pad_packed_sequence(out, batch_first=True, total_length=inputs.size(1))
    return out


def word_attend(h, mask, proj, context):
    """Attention pooling over words.

    h: (..., N, H); mask: (..., N) bool; proj: Linear(H, H); context: (H,).
    Returns (pooled (..., H), alpha (..., N)).
    """
    if not bool(mask.any(dim=-1).all()):
        raise MaskError("word attention needs at least one unmasked position per clause")
    scores = torch.tanh(proj(h)) @ context
    scores = scores.masked_fill(~mask, float("-inf"))
    alpha = torch.softmax(scores, dim=-1)
    pooled = (alpha.unsqueeze(-1) * h).sum(dim=-2)
    return pooled, alpha


class HierarchicalEncoder(nn.Module):
    def __init__(self, vocab_size, embed_dim=200, hidden_dim=200, dropout=None, embeddings=None):
        super().__init__()
        if hidden_dim % 2:
            raise ValueError("hidden_dim must be even (forward + backward halves)")
        dropout = dropout or {}
        self.embed_dim = embed_dim
        self.hidden_dim = hidden_dim
        self.embedding = nn.Embedding(vocab_size, embed_dim, padding_idx=PAD_ID)
        self.word_lstm = nn.LSTM(embed_dim, hidden_dim // 2, batch_first=True, bidirectional=True)
        self.attn_proj = nn.Linear(hidden_dim, hidden_dim)
        self.attn_context = nn.Parameter(torch.empty(hidden_dim))
        self.clause_lstm = nn.LSTM(hidden_dim, hidden_dim // 2, batch_first=True, bidirectional=True)
        self.embed_dropout = nn.Dropout(dropout.get("embedding", 0.1))
        self.word_dropout = nn.Dropout(dropout.get("word", 0.5))
        self.clause_dropout = nn.Dropout(dropout.get("clause", 0.1))
        self.reset_parameters(embeddings)

    def reset_parameters(self, embeddings=None):
        with torch.no_grad():
            if embeddings is not None:
                self.embedding.weight.copy_(torch.as_tensor(embeddings))
            else:
                self.embedding.weight.uniform_(-0.1, 0.1)
            self.embedding.weight[PAD_ID].zero_()
        init_lstm_(self.word_lstm)
        init_lstm_(self.clause_lstm)
        init_linear_(self.attn_proj)
        bound = math.sqrt(6.0 / (self.hidden_dim + 1))
        nn.init.uniform_(self.attn_context, -bound, bound)

    def embed(self, token_ids):
        if token_ids.numel() and (token_ids.min() < 0 or token_ids.max() >= self.embedding.num_embeddings):
            raise IndexError(
                f"token id out of range [0, {self.embedding.num_embeddings})"
            )
        return self.embed_dropout(self.embedding(token_ids))

    def word_encode(self, embedded, lengths):
        """embedded: (C, N, E) clauses, lengths: (C,) -> (C, N, H)."""
        return self.word_dropout(run_bilstm(self.word_lstm, embedded, lengths))

    def clause_encode(self, pooled, lengths):
        """pooled: (B, D, H), lengths: (B,) -> (B, D, H) with zero padded rows."""
        return self.clause_dropout(run_bilstm(self.clause_lstm, pooled, lengths))

    def forward(self, token_ids, token_mask, clause_mask):
        """token_ids: (B, D, N) long; masks bool. Returns ClauseStates."""
        B, D, N = token_ids.shape
        emb = self.embed(token_ids)
        flat_mask = clause_mask.reshape(-1)
        real = emb.reshape(B * D, N, -1)[flat_mask]
        real_tok_mask = token_mask.reshape(B * D, N)[flat_mask]
        h_real = self.word_encode(real, real_tok_mask.sum(-1))
        pooled_real, alpha_real = word_attend(h_real, real_tok_mask, self.attn_proj, self.attn_context)

        H = self.hidden_dim
        word_hidden = h_real.new_zeros(B * D, N, H)
        word_hidden[flat_mask] = h_real
        alpha = alpha_real.new_zeros(B * D, N)
        alpha[flat_mask] = alpha_real
        pooled = pooled_real.new_zeros(B * D, H)
        pooled[flat_mask] = pooled_real
        pooled = pooled.reshape(B, D, H)

        r = self.clause_encode(pooled, clause_mask.sum(-1))
        return ClauseStates(
            word_hidden=word_hidden.reshape(B, D, N, H),
            word_attention=alpha.reshape(B, D, N),
            clause_pooled=pooled,
            clause_repr=r,
            token_mask=token_mask,
            clause_mask=clause_mask,
        )
