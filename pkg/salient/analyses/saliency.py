import pandas as pd

from .base import Base
from .utils.plots import importance_bars, mean_saliency, saliency_heatmap
from ..exceptions import DataError
from ..selection.importance import ensemble_importances, saliency_maps, vote
from ..selection.masking import apply_mask

MAP_EXAMPLES = 32


class Saliency(Base):
    """Per-member gradient importance of every band on the train split."""

    name = "saliency"

    def extract(self):
        ens = self.load_ensemble()
        dataset = apply_mask(self.load_dataset(), ens.spec, ens.mask)
        return dict(ensemble=ens, dataset=dataset)

    def branch(self, ens):
        name = self.config["features"]["input_name"]
        if name not in ens.spec.input_names:
            raise DataError(
                f"ensemble has no branch <{name}>, it has "
                f"{ens.spec.input_names}")
        return name

    def transform(self, data):
        ens, dataset = data["ensemble"], data["dataset"]
        selection = self.config["selection"]
        importances = ensemble_importances(
            ens, dataset.train, selection["source"], branch=self.branch(ens),
            n_jobs=selection["n_jobs"])
        n = min(selection["n"], len(importances[0]))
        ranked, tally = vote(importances, n)
        self.logger.info(
            f"<{selection['source']}> importance, top {n} bands by vote: "
            f"{ranked}")
        data.update(importances=importances, tally=tally, ranked=ranked)
        return data

    def make_artifacts(self, data):
        importances = data["importances"]
        table = pd.DataFrame(
            [iv.scores for iv in importances],
            columns=[f"band_{b}" for b in range(len(importances[0]))])
        table.insert(0, "member", [iv.model_id for iv in importances])
        table.insert(1, "unit_rule", [iv.unit_rule for iv in importances])
        table.to_csv(self.save_path / "importance.csv", index=False)
        data["tally"].to_frame().to_csv(
            self.save_path / "importance_aggregate.csv", index=False)

    def make_plots(self, data):
        ens, dataset = data["ensemble"], data["dataset"]
        examples = dataset.train[:MAP_EXAMPLES]
        maps = saliency_maps(
            ens.spec, ens.members[0], examples,
            self.config["selection"]["source"], ens.loss, self.branch(ens))
        saliency_heatmap(
            mean_saliency(maps), self.save_path / "saliency_map.pdf",
            title="mean |gradient| of member 0", selected=data["ranked"])
        importance_bars(
            data["tally"].to_frame(), self.save_path / "importance.pdf",
            selected=data["ranked"])
