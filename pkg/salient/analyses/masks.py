from .base import Base
from .utils.plots import importance_bars
from ..exceptions import ConfigError, DataError
from ..loaders.models import save_mask, save_tally
from ..selection.importance import (
    baseline_mask,
    ensemble_importances,
    majority_vote_select)
from ..selection.masking import apply_mask
from ..selection.sffs import sffs


class MaskSelection(Base):
    """Build a feature mask of ``selection.n`` bands.

    ``selection.kind`` is ``majority`` (ensemble vote), ``lowest``,
    ``random``, ``least_important`` or ``sffs``.
    """

    name = "select"

    def extract(self):
        kind = self.config["selection"]["kind"]
        dataset = self.load_dataset()
        ens = None
        if kind in ("majority", "least_important"):
            ens = self.load_ensemble()
            if ens.mask is not None:
                raise ConfigError(
                    "select from an ensemble trained on every band, this "
                    "one already uses a mask")
            dataset = apply_mask(dataset, ens.spec)
        return dict(dataset=dataset, ensemble=ens, kind=kind)

    def input_name(self, data):
        name = self.config["features"]["input_name"]
        available = (data["ensemble"].spec.input_names
                     if data["ensemble"] is not None
                     else data["dataset"].input_names)
        if name not in available:
            raise DataError(
                f"no input <{name}> to select from, available: {available}")
        return name

    def n_bands(self, data):
        name = self.input_name(data)
        if data["ensemble"] is not None:
            return data["ensemble"].spec.branch(name).n_features
        return data["dataset"].n_features(name)

    def transform(self, data):
        selection = self.config["selection"]
        kind, dataset, ens = data["kind"], data["dataset"], data["ensemble"]
        n = selection["n"]
        name = self.input_name(data)
        data.update(tally=None, history=None)
        if kind == "majority":
            mask, tally = majority_vote_select(
                ens, dataset.train, selection["source"], n, branch=name,
                n_jobs=selection["n_jobs"])
            data["tally"] = tally
        elif kind == "sffs":
            mask, count, history = sffs(
                dataset, n, self.config.proxy_config(), input_name=name,
                n_jobs=selection["n_jobs"])
            self.logger.info(f"SFFS trained {count} proxy models")
            data["history"] = history
        elif kind == "least_important":
            importances = ensemble_importances(
                ens, dataset.train, selection["source"], branch=name,
                n_jobs=selection["n_jobs"])
            mask = baseline_mask(
                kind, n, self.n_bands(data), source=selection["source"],
                importances=importances)
        else:
            mask = baseline_mask(
                kind, n, self.n_bands(data), seed=selection["random_seed"])
        self.logger.info(f"{mask.origin} mask: {list(mask.indices)}")
        data["mask"] = mask
        return data

    def make_artifacts(self, data):
        save_mask(self.save_path / "mask.txt", data["mask"])
        if data["tally"] is not None:
            save_tally(self.save_path / "tally.csv", data["tally"])

    def make_tables(self, data):
        if data["history"] is not None:
            data["history"].to_csv(
                self.save_path / "sffs_history.csv", index=False)

    def make_plots(self, data):
        if data["tally"] is not None:
            importance_bars(
                data["tally"].to_frame(), self.save_path / "votes.pdf",
                selected=data["mask"].indices)
