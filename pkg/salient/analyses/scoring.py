import pandas as pd

from .base import Base
from .utils.plots import confusion_heatmap, prediction_overlay
from ..ensemble import inter_model_agreement
from ..evaluation.metrics import evaluate
from ..selection.masking import apply_mask

OVERLAY_FILES = 4


class Evaluation(Base):
    """Score an ensemble on ``eval.split`` of ``paths.dataset``."""

    name = "eval"

    def extract(self):
        ens = self.load_ensemble()
        dataset = apply_mask(self.load_dataset(), ens.spec, ens.mask)
        return dict(ensemble=ens, dataset=dataset)

    def transform(self, data):
        ens, dataset = data["ensemble"], data["dataset"]
        split = self.config["eval"]["split"]
        examples = dataset.split(split)
        report = evaluate(ens, examples)
        data.update(report=report, split=split, agreement=None)
        if report.task == "classification":
            self.logger.info(
                f"{split} UAR {report.metrics['uar']:.4f} (members "
                f"{report.metrics['member_mean_uar']:.4f} ± "
                f"{report.metrics['member_std_uar']:.4f})")
            data["agreement"], _ = inter_model_agreement(ens, examples)
        else:
            self.logger.info(
                f"{split} pearson {report.metrics['pearson']:.4f}, "
                f"MSE {report.metrics['mse']:.4f}")
        return data

    def make_artifacts(self, data):
        ens, report = data["ensemble"], data["report"]
        row = dict(
            split=data["split"], n_members=ens.size,
            loss=ens.loss.identifier,
            mask=("none" if ens.mask is None
                  else f"{ens.mask.origin}:{len(ens.mask)}"),
            **report.metrics)
        pd.DataFrame([row]).to_csv(self.save_path / "metrics.csv", index=False)
        report.members.to_csv(self.save_path / "members.csv", index=False)

    def make_tables(self, data):
        report = data["report"]
        report.per_file.to_csv(self.save_path / "per_file.csv", index=False)
        if report.confusion is not None:
            pd.DataFrame(report.confusion.counts).to_csv(
                self.save_path / "confusion.csv")
        if data["agreement"] is not None:
            pd.DataFrame(data["agreement"]).to_csv(
                self.save_path / "agreement.csv")

    def make_plots(self, data):
        report, dataset = data["report"], data["dataset"]
        if report.confusion is not None:
            confusion_heatmap(
                report.confusion.counts, self.save_path / "confusion.pdf",
                class_names=dataset.class_names or None)
            return
        for example in dataset.split(data["split"])[:OVERLAY_FILES]:
            prediction_overlay(
                example.target, report.predictions[example.id],
                self.save_path / f"prediction_{example.id}.pdf",
                title=example.id)
