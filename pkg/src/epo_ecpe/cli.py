"""Command-line entry points: gen-synth, train, evaluate, predict."""

import argparse
import json
import logging
import os
import subprocess
import sys
import time
from pathlib import Path

import torch

from . import __version__
from .config import TrainConfig
from .corpus import dump_corpus, dump_lexicon, generate_synthetic, load_corpus, load_lexicon
from .experiments import (
    FOLD_COLUMNS,
    cross_validate,
    fold_rows,
    parse_sweep,
    sweep,
    write_table,
)
from .extractor import write_predictions
from .metrics import aggregate_cv, format_summary
from .trainer import fit, load_checkpoint, predict, save_checkpoint

log = logging.getLogger("epo_ecpe")


class UsageError(ValueError):
    pass


def artifact_version():
    try:
        rev = subprocess.run(
            ["git", "describe", "--always", "--dirty"], cwd=Path(__file__).parent,
            capture_output=True, text=True, timeout=5,
        )
        if rev.returncode == 0 and rev.stdout.strip():
            return f"{__version__}+g{rev.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def write_manifest(path, command, args, config=None, outputs=(), started=None, extra=None):
    manifest = {
        "command": command,
        "argv": sys.argv[1:],
        "args": {k: v for k, v in vars(args).items() if k != "func"},
        "config": config.to_dict() if config is not None else None,
        "seed": getattr(args, "seed", None) if config is None else config.seed,
        "outputs": [os.fspath(o) for o in outputs],
        "started": started,
        "seconds": None if started is None else round(time.time() - started, 3),
        "version": artifact_version(),
        "torch": torch.__version__,
    }
    manifest.update(extra or {})
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, default=str)
    return path


def manifest_path(output):
    output = Path(output)
    if output.is_dir():
        return output / "manifest.json"
    return output.with_name(output.name + ".manifest.json")


def _config_overrides(args):
    over = {
        "seed": args.seed,
        "epochs_pretrain": args.epochs_pretrain,
        "epochs_train": args.epochs_train,
        "batch_size": args.batch_size,
        "lr_pretrain": args.lr_pretrain,
        "lr_train": args.lr_train,
        "K": args.K,
        "w": args.w,
    }
    dims = {k: v for k, v in (("embedding", args.embedding_dim), ("clause", args.clause_dim)) if v}
    if dims:
        over["dims"] = dims
    return over


def resolve_config(args, base=None):
    if base is None:
        base = TrainConfig.from_file(args.config) if args.config else TrainConfig()
    cfg = base.replace(**_config_overrides(args))
    if getattr(args, "skip_pretrain", False):
        cfg = cfg.replace(skip_pretrain=True)
    for name in ("exclude_train", "exclude_pretrain"):
        value = getattr(args, name, None)
        if value:
            cfg = cfg.replace(**{name: [t.strip() for t in value.split(",") if t.strip()]})
    return cfg.validate()


def cmd_gen_synth(args):
    started = time.time()
    if args.n_docs < 1:
        raise UsageError("--n-docs must be >= 1")
    docs, lexicon = generate_synthetic(args.n_docs, args.seed, args.max_len, args.max_pairs)
    dump_corpus(docs, args.out_corpus)
    dump_lexicon(lexicon, args.out_lexicon)
    write_manifest(manifest_path(args.out_corpus), "gen-synth", args,
                   outputs=[args.out_corpus, args.out_lexicon], started=started)
    print(f"wrote {len(docs)} documents to {args.out_corpus}")


def cmd_train(args):
    started = time.time()
    docs = load_corpus(args.corpus)
    load_lexicon(args.lexicon)  # fail early on an unreadable lexicon
    cfg = resolve_config(args)
    if not docs:
        raise UsageError("training corpus is empty")
    out = Path(args.out_checkpoint)
    log_path = Path(args.log) if args.log else out.with_name(out.name + ".log")
    history = []

    def on_epoch(record):
        with open(log_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record) + "\n")

    if cfg.skip_pretrain:
        on_epoch({"event": "skip_pretrain", "note": "pre-training phase skipped"})
    model = fit(docs, cfg, args.embeddings, history=history, on_epoch=on_epoch)
    save_checkpoint(model, out, phase="train", epoch=cfg.epochs_train,
                    extra={"corpus": os.fspath(args.corpus)})
    outputs = [out, log_path]
    if history and not args.no_plots:
        from .plotting import plot_loss_curves
        fig = out.with_name(out.name + ".loss.png")
        plot_loss_curves(history, fig)
        outputs.append(fig)
    write_manifest(manifest_path(out), "train", args, cfg, outputs, started,
                   extra={"skip_pretrain": cfg.skip_pretrain,
                          "epochs_logged": {"pretrain": sum(r["phase"] == "pretrain" for r in history),
                                            "train": sum(r["phase"] == "train" for r in history)}})
    print(f"saved checkpoint to {out}")


def cmd_evaluate(args):
    started = time.time()
    model = load_checkpoint(args.checkpoint)
    docs = load_corpus(args.corpus)
    lexicon = load_lexicon(args.lexicon)
    cfg = resolve_config(args, base=model.config)
    if args.folds < 1:
        raise UsageError("--folds must be >= 1")
    if args.folds > len(docs):
        raise UsageError(f"--folds {args.folds} exceeds the corpus size ({len(docs)})")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = []

    if args.sweep:
        param, settings = parse_sweep(args.sweep)
        rows = sweep(docs, lexicon, cfg, param, settings, args.folds, args.repeats,
                     args.embeddings, args.top_pair)
        table = out_dir / f"sweep_{param}.csv"
        write_table(rows, table)
        outputs.append(table)
        if not args.no_plots:
            from .plotting import plot_sweep
            outputs.append(plot_sweep(rows, param, out_dir / f"sweep_{param}.png"))
        for row in rows:
            print(f"{param}={row[param]}: pair F1 {row['pair_f1']:.4f} ± {row['pair_f1_std']:.4f}")
    else:
        reuse = model if args.no_retrain else None
        results = cross_validate(docs, lexicon, cfg, args.folds, args.repeats, args.embeddings,
                                 args.top_pair, model=reuse)
        rows = fold_rows(results)
        summary = aggregate_cv(r["report"] for r in results)
        write_table(rows, out_dir / "folds.csv", FOLD_COLUMNS)
        text = format_summary(summary, len(results))
        (out_dir / "report.txt").write_text(text + "\n", encoding="utf-8")
        (out_dir / "report.json").write_text(json.dumps({
            "summary": summary,
            "folds": rows,
            "n_folds": args.folds,
            "repeats": args.repeats,
            "per_fold": [r["report"].to_dict() for r in results],
        }, indent=2), encoding="utf-8")
        outputs += [out_dir / "folds.csv", out_dir / "report.txt", out_dir / "report.json"]
        if not args.no_plots:
            from .plotting import plot_fold_scores
            outputs.append(plot_fold_scores(rows, out_dir / "folds.png"))
        print(text)
    write_manifest(out_dir / "manifest.json", "evaluate", args, cfg, outputs, started)


def cmd_predict(args):
    started = time.time()
    model = load_checkpoint(args.checkpoint)
    docs = load_corpus(args.corpus)
    lexicon = load_lexicon(args.lexicon)
    preds = predict(model, docs, lexicon, top_pair=args.top_pair)[0] if docs else []
    write_predictions(preds, args.out)
    write_manifest(manifest_path(args.out), "predict", args, model.config, [args.out], started)
    print(f"wrote {len(preds)} predictions to {args.out}")


def _add_config_flags(p):
    p.add_argument("--config", help="JSON file with TrainConfig fields")
    p.add_argument("--seed", type=int)
    p.add_argument("--epochs-pretrain", type=int)
    p.add_argument("--epochs-train", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--lr-pretrain", type=float)
    p.add_argument("--lr-train", type=float)
    p.add_argument("--K", type=int)
    p.add_argument("--w", type=int)
    p.add_argument("--embedding-dim", type=int)
    p.add_argument("--clause-dim", type=int)


def build_parser():
    parser = argparse.ArgumentParser(prog="epo-ecpe", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-synth", help="write a synthetic corpus and lexicon")
    p.add_argument("--n-docs", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-len", type=int, default=10)
    p.add_argument("--max-pairs", type=int, default=2)
    p.add_argument("--out-corpus", required=True)
    p.add_argument("--out-lexicon", required=True)
    p.set_defaults(func=cmd_gen_synth)

    p = sub.add_parser("train", help="pre-train then train a model")
    p.add_argument("--corpus", required=True)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--out-checkpoint", required=True)
    p.add_argument("--embeddings", help="word2vec text file")
    p.add_argument("--skip-pretrain", action="store_true")
    p.add_argument("--exclude-train", help="comma list of loss terms (e,gp,fp) dropped in training")
    p.add_argument("--exclude-pretrain", help="comma list of loss terms dropped in pre-training")
    p.add_argument("--log", help="per-epoch log file (default: <checkpoint>.log)")
    p.add_argument("--no-plots", action="store_true")
    _add_config_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="cross-validated P/R/F1, optionally sweeping K or w")
    p.add_argument("--corpus", required=True)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--sweep", help="K=1..5 or w=0..4")
    p.add_argument("--no-retrain", action="store_true",
                   help="score the checkpoint on each test split instead of retraining per fold")
    p.add_argument("--embeddings")
    p.add_argument("--top-pair", choices=("document", "candidate"), default="document")
    p.add_argument("--no-plots", action="store_true")
    _add_config_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("predict", help="extract pairs with a trained checkpoint")
    p.add_argument("--corpus", required=True)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--top-pair", choices=("document", "candidate"), default="document")
    p.set_defaults(func=cmd_predict)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    try:
        args.func(args)
    except Exception as exc:  # one machine-parsable line per failure
        print(f"error: {exc.__class__.__name__}: {exc}", file=sys.stderr)
        if args.verbose:
            raise
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
