"""Two-phase training, batching, seeding and checkpoints."""

import io
import logging
import math
import os
import random
import tempfile

import numpy as np
import torch

from .config import TrainConfig
from .corpus import Vocabulary, build_vocab, load_embeddings
from .extractor import extract
from .model import EPOECPE
from .objectives import PRETRAIN, TRAIN

log = logging.getLogger(__name__)

CHECKPOINT_VERSION = "epo-ecpe-checkpoint/1"


class TrainingError(RuntimeError):
    pass


class CheckpointVersionError(RuntimeError):
    pass


class CheckpointCorruptError(RuntimeError):
    pass


def set_seed(seed):
    random.seed(seed)
    np.random.seed(seed % 2**32)
    torch.manual_seed(seed)


def build_model(docs, config, embeddings_path=None):
    config.validate()
    set_seed(config.seed)
    vocab = build_vocab(docs, config.min_count)
    emb = load_embeddings(embeddings_path, vocab, config.dims["embedding"], seed=config.seed)
    model = EPOECPE(vocab, config, embeddings=torch.as_tensor(emb, dtype=torch.float32))
    return model


def make_batches(docs, batch_size, rng):
    """Length-bucketed batches: sort by clause count, chunk, shuffle the chunks."""
    order = list(range(len(docs)))
    rng.shuffle(order)
    order.sort(key=lambda k: len(docs[k].clauses))
    batches = [[docs[k] for k in order[s:s + batch_size]] for s in range(0, len(order), batch_size)]
    rng.shuffle(batches)
    return batches


def _check_finite(bd, where):
    values = bd.as_floats()
    if not all(math.isfinite(v) for v in values.values()):
        raise TrainingError(f"non-finite loss at {where}: {values}")


def step(model, optimizer, batch, phase, exclude=(), grad_clip=None, where=""):
    """One forward/backward/update. Returns the pre-update LossBreakdown."""
    if not batch:
        raise ValueError("empty batch")
    if any(len(d.clauses) == 0 for d in batch):
        raise ValueError("batch contains a document without clauses")
    model.train()
    optimizer.zero_grad(set_to_none=True)
    outputs, _ = model(batch, phase=phase)
    bd = model.loss_breakdown(outputs, phase, exclude)
    _check_finite(bd, where or phase)
    if bd.total.requires_grad:
        bd.total.backward()
        grads = [p.grad for p in model.parameters() if p.grad is not None]
        if not all(torch.isfinite(g).all() for g in grads):
            raise TrainingError(f"non-finite gradient at {where or phase}")
        if grad_clip is not None:
            torch.nn.utils.clip_grad_norm_(model.parameters(), grad_clip)
        optimizer.step()
    return bd


def make_optimizer(model, lr, config):
    return torch.optim.Adam(model.parameters(), lr=lr, betas=config.adam_betas, eps=config.adam_eps)


def run_phase(model, docs, config, phase, epochs, lr, exclude=(), history=None, on_epoch=None):
    if epochs == 0 or not docs:
        return model
    optimizer = make_optimizer(model, lr, config)
    rng = random.Random(config.seed * 1000 + (0 if phase == PRETRAIN else 1))
    for epoch in range(1, epochs + 1):
        totals = {"l_e": 0.0, "l_gp": 0.0, "l_fp": 0.0, "total": 0.0}
        for b, batch in enumerate(make_batches(docs, config.batch_size, rng)):
            bd = step(model, optimizer, batch, phase, exclude, config.grad_clip,
                      where=f"{phase} epoch {epoch} batch {b}")
            for k, v in bd.as_floats().items():
                totals[k] += v
        record = {"phase": phase, "epoch": epoch, **totals}
        log.info("%s epoch %d: l_e=%.4f l_gp=%.4f l_fp=%.4f total=%.4f",
                 phase, epoch, totals["l_e"], totals["l_gp"], totals["l_fp"], totals["total"])
        if history is not None:
            history.append(record)
        if on_epoch is not None:
            on_epoch(record)
    return model


def pretrain(model, docs, config, history=None, on_epoch=None):
    """Minimise L_e + L_fp; the genuine scorer is never evaluated, so it receives no update."""
    return run_phase(model, docs, config, PRETRAIN, config.epochs_pretrain, config.lr_pretrain,
                     config.exclude_pretrain, history, on_epoch)


def train(model, docs, config, history=None, on_epoch=None):
    return run_phase(model, docs, config, TRAIN, config.epochs_train, config.lr_train,
                     config.exclude_train, history, on_epoch)


def fit(docs, config, embeddings_path=None, history=None, on_epoch=None):
    model = build_model(docs, config, embeddings_path)
    if config.skip_pretrain:
        log.info("pre-training skipped (skip_pretrain=True)")
    else:
        pretrain(model, docs, config, history, on_epoch)
    train(model, docs, config, history, on_epoch)
    model.eval()
    return model


def predict(model, docs, lexicon, batch_size=32, top_pair="document"):
    preds, outputs = [], []
    for s in range(0, len(docs), batch_size):
        chunk = docs[s:s + batch_size]
        outs, scored = model.score_genuine(chunk)
        outputs.extend(outs)
        preds.extend(extract(doc, sc, lexicon, top_pair) for doc, sc in zip(chunk, scored))
    return preds, outputs


def candidate_recall(outputs):
    """Fraction of gold emotion clauses that land in the candidate set."""
    hit = total = 0
    for out in outputs:
        emotions = {e for e, _ in out.doc.gold_pairs}
        hit += len(emotions & set(out.candidates.indices))
        total += len(emotions)
    return hit / total if total else 0.0


# --- checkpoints ------------------------------------------------------------

def save_checkpoint(model, path, phase="train", epoch=None, extra=None):
    payload = {
        "version": CHECKPOINT_VERSION,
        "config": model.config.to_dict(),
        "vocab": list(model.vocab.token_to_id),
        "params": {k: v.detach().cpu().clone() for k, v in model.state_dict().items()},
        "shapes": {k: list(v.shape) for k, v in model.state_dict().items()},
        "phase": phase,
        "epoch": epoch,
        "rng_state": torch.get_rng_state(),
        "extra": extra or {},
    }
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".ckpt-", dir=directory)
    try:
        with os.fdopen(fd, "wb") as fh:
            torch.save(payload, fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_checkpoint(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        payload = torch.load(io.BytesIO(raw), map_location="cpu", weights_only=True)
    except Exception as exc:
        raise CheckpointCorruptError(f"{path}: unreadable checkpoint ({exc.__class__.__name__})") from exc
    if not isinstance(payload, dict) or "version" not in payload:
        raise CheckpointCorruptError(f"{path}: missing version tag")
    if payload["version"] != CHECKPOINT_VERSION:
        raise CheckpointVersionError(
            f"{path}: checkpoint version {payload['version']!r}, expected {CHECKPOINT_VERSION!r}"
        )
    try:
        config = TrainConfig.from_dict(payload["config"])
        vocab_tokens = payload["vocab"]
        vocab = Vocabulary(vocab_tokens[2:])
        params = payload["params"]
        for name, shape in payload["shapes"].items():
            if list(params[name].shape) != shape:
                raise CheckpointCorruptError(f"{path}: parameter {name} has wrong shape")
        model = EPOECPE(vocab, config)
        model.to(params["encoder.embedding.weight"].dtype)
        model.load_state_dict(params)
    except CheckpointCorruptError:
        raise
    except Exception as exc:
        raise CheckpointCorruptError(f"{path}: malformed checkpoint contents ({exc})") from exc
    model.eval()
    model.checkpoint_meta = {k: payload.get(k) for k in ("phase", "epoch", "extra")}
    return model
