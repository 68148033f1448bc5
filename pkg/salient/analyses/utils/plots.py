import numpy as np
import matplotlib.pyplot as plt


def mean_saliency(maps):
    """Average |gradient| map over examples, cropped to the shortest one."""
    n_frames = min(m.shape[0] for m in maps)
    return np.mean([np.abs(m[:n_frames]) for m in maps], axis=0)


def saliency_heatmap(saliency, save_path, title="saliency", selected=None):
    """Time × band map of absolute input gradients.

    :param numpy.ndarray saliency: (T, F) non-negative map.
    :param selected: band indices to mark on the band axis.
    """
    fig, axs = plt.subplots(1, 1, dpi=300, tight_layout=True)
    img = axs.imshow(
        saliency.T, origin="lower", aspect="auto", cmap="magma",
        interpolation="nearest")
    if selected is not None:
        for band in selected:
            axs.axhline(band, color="cyan", linewidth=0.4, alpha=0.7)
    axs.set_xlabel("frame")
    axs.set_ylabel("band")
    axs.set_title(title)
    fig.colorbar(img, ax=axs, label="|gradient|")
    fig.savefig(save_path, format="pdf")
    plt.close(fig)


def importance_bars(tally, save_path, selected=(), title="importance"):
    """Summed importance and votes per band.

    :param pandas.DataFrame tally: columns band_index, votes, summed_score.
    """
    fig, (top, bottom) = plt.subplots(
        2, 1, dpi=300, sharex=True, tight_layout=True)
    colors = ["tab:red" if b in set(selected) else "tab:blue"
              for b in tally["band_index"]]
    top.bar(tally["band_index"], tally["summed_score"], color=colors)
    top.set_ylabel("summed |gradient|")
    top.set_title(title)
    bottom.bar(tally["band_index"], tally["votes"], color=colors)
    bottom.set_ylabel("votes")
    bottom.set_xlabel("band")
    fig.savefig(save_path, format="pdf")
    plt.close(fig)


def loss_curves(history, save_path, title="training loss"):
    """
    :param pandas.DataFrame history: columns member, epoch, loss.
    """
    fig, axs = plt.subplots(1, 1, dpi=300, tight_layout=True)
    for member, rows in history.groupby("member"):
        axs.plot(rows["epoch"], rows["loss"], label=f"member {member}",
                 linewidth=0.8)
    axs.set_xlabel("epoch")
    axs.set_ylabel("mean loss")
    axs.set_title(title)
    if history["member"].nunique() <= 10:
        axs.legend(fontsize="x-small")
    fig.savefig(save_path, format="pdf")
    plt.close(fig)


def prediction_overlay(target, prediction, save_path, title="prediction"):
    """Target sequence against the ensemble prediction."""
    n = min(len(target), len(prediction))
    fig, axs = plt.subplots(1, 1, dpi=300, tight_layout=True)
    axs.plot(np.arange(n), target[:n], label="target", linewidth=0.8)
    axs.plot(np.arange(n), prediction[:n], label="ensemble", linewidth=0.8)
    axs.set_xlabel("step")
    axs.set_title(title)
    axs.legend(fontsize="x-small")
    fig.savefig(save_path, format="pdf")
    plt.close(fig)


def confusion_heatmap(counts, save_path, class_names=None, title="confusion"):
    counts = np.asarray(counts)
    labels = class_names or [str(k) for k in range(counts.shape[0])]
    fig, axs = plt.subplots(1, 1, dpi=300, tight_layout=True)
    img = axs.imshow(counts, cmap="Blues")
    for (i, j), value in np.ndenumerate(counts):
        axs.text(j, i, str(value), ha="center", va="center", fontsize=6)
    axs.set_xticks(np.arange(len(labels)))
    axs.set_xticklabels(labels)
    axs.set_yticks(np.arange(len(labels)))
    axs.set_yticklabels(labels)
    axs.set_xlabel("predicted")
    axs.set_ylabel("true")
    axs.set_title(title)
    fig.colorbar(img, ax=axs)
    fig.savefig(save_path, format="pdf")
    plt.close(fig)
