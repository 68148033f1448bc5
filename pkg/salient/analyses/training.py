import pandas as pd

from .base import Base
from .utils.plots import loss_curves
from ..ensemble import inter_model_agreement, train_ensemble
from ..exceptions import ConfigError, DataError
from ..loaders.models import save_ensemble
from ..selection.masking import apply_mask, source_name


class EnsembleTraining(Base):
    """Train an ensemble on the train split of ``paths.dataset``.

    When ``paths.mask`` is set, the networks only see the selected bands.
    """

    name = "train"
    requires_mask = False

    def extract(self):
        dataset = self.load_dataset()
        if dataset.task != self.config.task:
            raise ConfigError(
                f"dataset task <{dataset.task}> differs from the configured "
                f"<{self.config.task}>")
        mask = None
        if self.requires_mask or self.config["paths"]["mask"]:
            mask = self.load_mask()
        return dict(dataset=dataset, mask=mask)

    def input_name(self, dataset):
        name = self.config["features"]["input_name"]
        if name not in dataset.input_names:
            raise DataError(
                f"dataset has no input <{name}>, it has "
                f"{dataset.input_names}")
        return name

    def build_spec(self, dataset, mask):
        name = self.input_name(dataset)
        n_features = dataset.n_features(name)
        if mask is not None:
            if mask.n_bands != n_features:
                raise DataError(
                    f"mask covers {mask.n_bands} bands, input <{name}> has "
                    f"{n_features}")
            n_features = len(mask)
        return self.config.network_spec(n_features, input_name=name)

    def check_classes(self, dataset, spec):
        if spec.task == "classification" and dataset.n_classes > spec.n_classes:
            raise ConfigError(
                f"dataset has {dataset.n_classes} classes, network.n_classes "
                f"is {spec.n_classes}")

    def transform(self, data):
        dataset, mask = data["dataset"], data["mask"]
        spec = self.build_spec(dataset, mask)
        self.check_classes(dataset, spec)
        view = apply_mask(dataset, spec, mask)
        examples = list(view.train)
        if self.config["train"]["merge_dev"]:
            self.logger.info("training on train and dev")
            examples += view.dev
        ensemble = self.config["ensemble"]
        ens = train_ensemble(
            spec,
            examples,
            self.config.loss_spec(),
            self.config.train_config(),
            n=ensemble["size"],
            base_seed=ensemble["base_seed"],
            n_jobs=ensemble["n_jobs"],
            mask=mask)
        data.update(ensemble=ens, view=view, agreement=None)
        if spec.task == "classification" and view.dev:
            matrix, mean = inter_model_agreement(ens, view.dev)
            self.logger.info(f"mean pairwise member agreement on dev: "
                             f"{mean:.2f}%")
            data["agreement"] = matrix
        return data

    def history_table(self, ens):
        rows = [
            dict(member=member, seed=ens.seeds[member], **entry)
            for member, history in sorted(ens.history.items())
            for entry in history]
        return pd.DataFrame(rows, columns=["member", "seed", "epoch", "loss"])

    def make_artifacts(self, data):
        save_ensemble(data["ensemble"], self.save_path / "ensemble")
        self.logger.info(
            f"ensemble written to {self.save_path / 'ensemble'}")

    def make_tables(self, data):
        self.history_table(data["ensemble"]).to_csv(
            self.save_path / "history.csv", index=False)
        if data["agreement"] is not None:
            pd.DataFrame(data["agreement"]).to_csv(
                self.save_path / "agreement.csv")

    def make_plots(self, data):
        history = self.history_table(data["ensemble"])
        if not history.empty:
            loss_curves(history, self.save_path / "loss.pdf",
                        title=f"{data['ensemble'].loss.identifier} loss")


class Retraining(EnsembleTraining):
    """Train a new ensemble on the bands of ``paths.mask``."""

    name = "retrain"
    requires_mask = True


class Fusion(EnsembleTraining):
    """Middle fusion: one encoder per branch of ``network.fusion_inputs``.

    A branch named ``<input>_selected`` reads ``<input>`` restricted to
    ``paths.mask``; any other branch reads the dataset input of that name.
    The default is the configured input next to its selected bands.
    """

    name = "fuse"
    requires_mask = True

    def build_spec(self, dataset, mask):
        inputs = {}
        for branch in self.config.fusion_branches():
            source = source_name(branch)
            if source not in dataset.input_names:
                raise DataError(
                    f"fusion branch <{branch}> reads input <{source}>, the "
                    f"dataset has {dataset.input_names}")
            n_features = dataset.n_features(source)
            if branch != source:
                if mask.n_bands != n_features:
                    raise DataError(
                        f"mask covers {mask.n_bands} bands, input "
                        f"<{source}> has {n_features}")
                n_features = len(mask)
            inputs[branch] = n_features
        spec = self.config.fusion_spec(inputs)
        self.logger.info(f"fusion branches: {spec.input_names}")
        return spec
