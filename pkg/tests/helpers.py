"""Independent oracles shared by the test modules."""

import itertools
import math

import numpy as np
import torch

from epo_ecpe.config import TrainConfig
from epo_ecpe.corpus import Document, build_vocab
from epo_ecpe.model import EPOECPE
from epo_ecpe.objectives import TRAIN


def tiny_docs():
    return [
        Document.from_tokens("t1", [["a", "b"], ["so", "happy", "c"], ["because", "d"], ["e"]], [(2, 3)]),
        Document.from_tokens("t2", [["b", "c", "a"], ["d"], ["sad", "e"], ["because", "a", "b"]], [(3, 4)]),
    ]


def tiny_model(seed=0, dim=8, K=2, w=1, docs=None):
    docs = docs or tiny_docs()
    torch.manual_seed(seed)
    cfg = TrainConfig(K=K, w=w, dims={"embedding": dim, "clause": dim}, seed=seed)
    model = EPOECPE(build_vocab(docs), cfg).double()
    # the small default embedding scale makes every gradient tiny; spread it out
    with torch.no_grad():
        model.encoder.embedding.weight.normal_(0, 1.0)
        model.encoder.embedding.weight[0].zero_()
        for p in model.parameters():
            if p.dim() == 1:
                p.add_(0.1 * torch.randn_like(p))
    model.eval()
    return model, docs


def loss_terms(model, docs):
    outputs, _ = model(docs, phase=TRAIN)
    bd = model.loss_breakdown(outputs, TRAIN)
    cands = tuple(o.candidates.indices for o in outputs)
    return {"l_e": bd.l_e, "l_gp": bd.l_gp, "l_fp": bd.l_fp, "total": bd.total}, cands


def finite_difference_grads(model, docs, eps=1e-6):
    """Central differences of every loss term w.r.t. every parameter entry."""
    _, base_cands = loss_terms(model, docs)
    grads = {}
    with torch.no_grad():
        for name, p in model.named_parameters():
            flat = p.view(-1)
            g = {k: torch.zeros_like(flat) for k in ("l_e", "l_gp", "l_fp", "total")}
            for idx in range(flat.numel()):
                orig = flat[idx].item()
                flat[idx] = orig + eps
                plus, c1 = loss_terms(model, docs)
                flat[idx] = orig - eps
                minus, c2 = loss_terms(model, docs)
                flat[idx] = orig
                assert c1 == base_cands and c2 == base_cands, "perturbation flipped the candidate set"
                for k in g:
                    g[k][idx] = (plus[k] - minus[k]) / (2 * eps)
            grads[name] = {k: v.view_as(p) for k, v in g.items()}
    return grads


def analytic_grads(model, docs):
    out = {}
    for key in ("l_e", "l_gp", "l_fp", "total"):
        model.zero_grad(set_to_none=True)
        terms, _ = loss_terms(model, docs)
        terms[key].backward()
        for name, p in model.named_parameters():
            g = p.grad if p.grad is not None else torch.zeros_like(p)
            out.setdefault(name, {})[key] = g.detach().clone()
    return out


def max_relative_error(a, n, floor=1e-6):
    """Entrywise |a - n| / max(|a|, |n|, floor), maximised."""
    denom = torch.maximum(torch.maximum(a.abs(), n.abs()), torch.full_like(a, floor))
    return float(((a - n).abs() / denom).max()) if a.numel() else 0.0


def lstm_reference(x, w_ih, w_hh, b_ih, b_hh):
    """Hand-stepped single-direction LSTM (PyTorch gate order i, f, g, o), zero initial state."""
    H = w_hh.shape[1]
    h = np.zeros(H)
    c = np.zeros(H)
    sig = lambda z: 1.0 / (1.0 + np.exp(-z))
    out = []
    for x_t in x:
        z = w_ih @ x_t + b_ih + w_hh @ h + b_hh
        i, f, g, o = sig(z[:H]), sig(z[H:2 * H]), np.tanh(z[2 * H:3 * H]), sig(z[3 * H:])
        c = f * c + i * g
        h = o * np.tanh(c)
        out.append(h)
    return np.array(out)


def bce_reference(probs, labels, eps=1e-7):
    total = 0.0
    for p, y in zip(probs, labels):
        p = min(max(p, eps), 1 - eps)
        total += -(y * math.log(p) + (1 - y) * math.log(1 - p))
    return total


def brute_force_extract(doc, scored, lexicon):
    """Literal two-condition rule over every distinct genuine pair."""
    best = {}
    for i, j, s in scored:
        best[(i, j)] = max(s, best.get((i, j), -math.inf))
    if not best:
        return frozenset()
    top_score = max(best.values())
    top = sorted(k for k, v in best.items() if v == top_score)[0]
    keep = set()
    for (i, j), s in best.items():
        cond1 = any(tok in lexicon.words for tok in doc.clauses[i - 1].tokens)
        cond2 = s > 0.5 or (i, j) == top
        if cond1 and cond2:
            keep.add((i, j))
    return frozenset(keep)


def brute_force_prf(pred, gold):
    tp = sum(1 for x in pred if x in gold)
    p = tp / len(pred) if pred else 0.0
    r = tp / len(gold) if gold else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f


def brute_force_topk(probs, k):
    best = None
    n = len(probs)
    m = min(k, n)
    # lexicographic preference over every ordered selection
    for combo in itertools.permutations(range(n), m):
        key = [(-probs[i], i) for i in combo]
        if key != sorted(key):
            continue
        rest = [(-probs[i], i) for i in range(n) if i not in combo]
        if rest and key and max(key) > min(rest):
            continue
        best = tuple(i + 1 for i in combo)
    return best
