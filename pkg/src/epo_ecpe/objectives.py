"""Cross-entropy terms and their phase compositions."""

from dataclasses import dataclass

import torch

EPS = 1e-7
PRETRAIN = "pretrain"
TRAIN = "train"
LOSS_TERMS = ("e", "gp", "fp")


@dataclass
class LossBreakdown:
    l_e: torch.Tensor
    l_gp: torch.Tensor
    l_fp: torch.Tensor
    total: torch.Tensor

    def as_floats(self):
        return {k: float(getattr(self, k).detach() if hasattr(getattr(self, k), "detach") else getattr(self, k)) for k in ("l_e", "l_gp", "l_fp", "total")}


def bce_sum(prob, label):
    """Summed binary cross-entropy, probabilities clamped to [EPS, 1 - EPS]."""
    if prob.numel() == 0:
        return prob.new_zeros(())
    p = prob.clamp(EPS, 1.0 - EPS)
    return -(label * torch.log(p) + (1.0 - label) * torch.log(1.0 - p)).sum()


def emotion_loss(prob, label):
    return bce_sum(prob, label)


def genuine_loss(prob, label):
    return bce_sum(prob, label)


def fake_loss(prob, label):
    return bce_sum(prob, label)


def phase_terms(phase, exclude=()):
    if phase == PRETRAIN:
        terms = ("e", "fp")
    elif phase == TRAIN:
        terms = LOSS_TERMS
    else:
        raise ValueError(f"unknown phase {phase!r}")
    return tuple(t for t in terms if t not in set(exclude))


def phase_loss(breakdown, phase, exclude=()):
    """Unweighted sum l_e + l_fp (pretrain) or l_e + l_gp + l_fp (train), fixed order.

    ``exclude`` drops terms for ablations.
    """
    total = None
    for term in phase_terms(phase, exclude):
        value = getattr(breakdown, "l_" + term)
        total = value if total is None else total + value
    if total is None:
        return breakdown.l_e * 0.0
    return total
