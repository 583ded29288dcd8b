"""Figures written next to the tabular reports."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_loss_curves(history, path):
    """Per-epoch loss terms across both phases, one x position per epoch."""
    fig, ax = plt.subplots(figsize=(7, 4))
    xs = list(range(1, len(history) + 1))
    for key, label in (("l_e", "emotion"), ("l_gp", "genuine pairs"), ("l_fp", "fake pairs"),
                       ("total", "total")):
        ax.plot(xs, [r[key] for r in history], label=label, lw=2 if key == "total" else 1)
    n_pre = sum(1 for r in history if r["phase"] == "pretrain")
    if n_pre and n_pre < len(history):
        ax.axvline(n_pre + 0.5, color="grey", ls="--", lw=1)
        ax.text(n_pre + 0.7, ax.get_ylim()[1] * 0.95, "train", va="top", fontsize=8, color="grey")
    ax.set_xlabel("epoch")
    ax.set_ylabel("summed loss")
    ax.legend(fontsize=8)
    return _finish(fig, path)


def plot_sweep(rows, param, path):
    """Pair/emotion/cause F1 against the swept setting."""
    fig, ax = plt.subplots(figsize=(6, 4))
    xs = [row[param] for row in rows]
    for task, marker in (("pair", "o"), ("emotion", "s"), ("cause", "^")):
        ys = [row[f"{task}_f1"] for row in rows]
        errs = [row[f"{task}_f1_std"] for row in rows]
        ax.errorbar(xs, ys, yerr=errs, marker=marker, capsize=3, label=f"{task} F1")
    ax.set_xlabel("K" if param == "K" else "|w|")
    ax.set_ylabel("F1")
    ax.set_xticks(xs)
    ax.set_ylim(0, 1.05)
    ax.legend(fontsize=8)
    return _finish(fig, path)


def plot_fold_scores(rows, path):
    fig, ax = plt.subplots(figsize=(7, 4))
    labels = [f"{r['repeat']}/{r['fold']}" for r in rows]
    xs = range(len(rows))
    width = 0.27
    for off, task in zip((-width, 0, width), ("pair", "emotion", "cause")):
        ax.bar([x + off for x in xs], [r[f"{task}_f1"] for r in rows], width, label=task)
    ax.set_xticks(list(xs))
    ax.set_xticklabels(labels, rotation=90, fontsize=7)
    ax.set_xlabel("repeat/fold")
    ax.set_ylabel("F1")
    ax.set_ylim(0, 1.05)
    ax.legend(fontsize=8)
    return _finish(fig, path)
