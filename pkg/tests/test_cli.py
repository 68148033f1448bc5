import pandas as pd
import pytest
import yaml
from click.testing import CliRunner

from salient.config import DEFAULTS
from salient.exceptions import NumericError
from salient.loaders import (
    load_dataset,
    load_ensemble,
    load_mask,
    save_dataset)
from salient.scripts import cli

from .test_loaders import audio_corpus, write_manifest

TINY = [
    "network.filters=3",
    "network.lstm_cells=4",
    "network.dense_units=4",
    "ensemble.size=2",
    "train.epochs=2",
    "train.batch_size=8",
    "selection.n=2",
    "bench.repetitions=3",
    "bench.max_examples=2",
    "bench.include_features=false",
]

CLASSIFICATION = [
    "synth.n_examples=40",
    "synth.n_frames=5",
    "synth.n_bands=6",
    "synth.planted=[1, 4]",
    "synth.effect_size=3.0",
]

REGRESSION = [
    "task=sequence_regression",
    "loss.id=corr+mse:0.5",
    "network.architecture=breathing_spectral",
    "synth.n_examples=20",
    "synth.n_frames=10",
    "synth.n_bands=5",
    "synth.driver_bands=[0, 2]",
]


def invoke(command, out, overrides=(), extra=()):
    args = ["--out", str(out), "--seed", "3"]
    for item in list(TINY) + list(overrides):
        args += ["--set", item]
    result = CliRunner().invoke(
        cli.entry_point, args + list(extra) + [command])
    return result


def run(command, out, overrides=(), extra=()):
    result = invoke(command, out, overrides, extra)
    assert result.exit_code == 0, result.output
    return result


@pytest.fixture
def pipeline(tmp_path):
    """Synthesize a classification set and train an ensemble on it."""
    run("synth", tmp_path / "synth", CLASSIFICATION)
    dataset = tmp_path / "synth" / "dataset"
    paths = [f"paths.dataset={dataset}"]
    run("train", tmp_path / "train", CLASSIFICATION + paths)
    return tmp_path, paths + [f"paths.ensemble={tmp_path / 'train/ensemble'}"]


class TestClassificationPipeline:

    def test_synth_and_train(self, pipeline):
        tmp_path, _ = pipeline
        oracle = pd.read_csv(tmp_path / "synth/oracle.csv")
        assert oracle["band_index"].tolist() == [1, 4]
        ens = load_ensemble(tmp_path / "train/ensemble")
        assert ens.seeds == [3, 4]
        assert ens.spec.branches[0].n_features == 6
        history = pd.read_csv(tmp_path / "train/history.csv")
        assert len(history) == 4
        assert (tmp_path / "train/agreement.csv").is_file()
        saved = yaml.safe_load((tmp_path / "train/config.yaml").read_text())
        assert saved["ensemble"]["base_seed"] == 3

    def test_saliency(self, pipeline):
        tmp_path, paths = pipeline
        run("saliency", tmp_path / "saliency", paths, extra=["--viz"])
        table = pd.read_csv(tmp_path / "saliency/importance.csv")
        assert table["member"].tolist() == [0, 1]
        assert table["unit_rule"].tolist() == ["true_class"] * 2
        assert (tmp_path / "saliency/saliency_map.pdf").is_file()
        aggregate = pd.read_csv(tmp_path / "saliency/importance_aggregate.csv")
        assert aggregate["votes"].sum() == 4

    def test_select_retrain_fuse_eval_bench(self, pipeline):
        tmp_path, paths = pipeline
        run("select", tmp_path / "select", paths)
        mask = load_mask(tmp_path / "select/mask.txt")
        assert len(mask) == 2
        assert mask.origin == "output_grad"
        assert (tmp_path / "select/tally.csv").is_file()

        masked = paths[:1] + [f"paths.mask={tmp_path / 'select/mask.txt'}"]
        run("retrain", tmp_path / "retrain", masked)
        retrained = load_ensemble(tmp_path / "retrain/ensemble")
        assert retrained.mask == mask
        assert retrained.spec.branches[0].n_features == 2

        run("fuse", tmp_path / "fuse", masked)
        fused = load_ensemble(tmp_path / "fuse/ensemble")
        assert fused.spec.input_names == ["spect", "spect_selected"]

        for name in ("train", "retrain", "fuse"):
            scored = paths[:1] + [
                f"paths.ensemble={tmp_path / name / 'ensemble'}",
                "eval.split=test"]
            run("eval", tmp_path / f"eval_{name}", scored)
            metrics = pd.read_csv(tmp_path / f"eval_{name}/metrics.csv")
            assert metrics["split"].tolist() == ["test"]
            assert 0.0 <= metrics["uar"][0] <= 1.0
            assert len(pd.read_csv(
                tmp_path / f"eval_{name}/per_file.csv")) == 8

        bench = paths[:1] + [
            "bench.ensembles=["
            f"{tmp_path / 'train/ensemble'}, {tmp_path / 'retrain/ensemble'}]"]
        run("bench", tmp_path / "bench", bench)
        table = pd.read_csv(tmp_path / "bench/bench.csv")
        assert table["n_features"].tolist() == [6, 2]
        assert list(table.columns) == [
            "system", "n_features", "n_members", "params", "mean_ms",
            "median_ms", "p95_ms"]

    @pytest.mark.parametrize("kind", ["lowest", "random", "sffs",
                                      "least_important"])
    def test_other_masks(self, pipeline, kind):
        tmp_path, paths = pipeline
        run("select", tmp_path / kind, paths + [f"selection.kind={kind}"])
        mask = load_mask(tmp_path / kind / "mask.txt")
        assert mask.origin == kind
        assert len(mask) == 2
        if kind == "sffs":
            history = pd.read_csv(tmp_path / kind / "sffs_history.csv")
            assert history["models_trained"].tolist() == [6, 11]

    def test_reproducible_members(self, pipeline):
        tmp_path, paths = pipeline
        run("train", tmp_path / "again", CLASSIFICATION + paths[:1])
        for i in range(2):
            name = f"ensemble/member_{i:02d}.e2efs"
            assert (tmp_path / "train" / name).read_bytes() == \
                (tmp_path / "again" / name).read_bytes()

    def test_loss_source_needs_labels(self, pipeline):
        tmp_path, paths = pipeline
        dataset = load_dataset(tmp_path / "synth/dataset")
        for example in dataset.train:
            example.target = None
        save_dataset(dataset, tmp_path / "unlabeled")
        result = invoke("select", tmp_path / "select", [
            f"paths.dataset={tmp_path / 'unlabeled'}", paths[1],
            "selection.source=loss"])
        assert result.exit_code == 2
        assert "requires labels" in result.output

    def test_masked_ensemble_cannot_select(self, pipeline):
        tmp_path, paths = pipeline
        run("select", tmp_path / "select", paths + ["selection.kind=lowest"])
        masked = paths[:1] + [f"paths.mask={tmp_path / 'select/mask.txt'}"]
        run("retrain", tmp_path / "retrain", masked)
        result = invoke("select", tmp_path / "again", paths[:1] + [
            f"paths.ensemble={tmp_path / 'retrain/ensemble'}"])
        assert result.exit_code == 1


class TestRegressionPipeline:

    def test_train_and_eval(self, tmp_path):
        run("synth", tmp_path / "synth", REGRESSION)
        paths = [f"paths.dataset={tmp_path / 'synth/dataset'}"]
        run("train", tmp_path / "train", REGRESSION + paths)
        paths.append(f"paths.ensemble={tmp_path / 'train/ensemble'}")
        run("eval", tmp_path / "eval", REGRESSION + paths, extra=["--viz"])
        metrics = pd.read_csv(tmp_path / "eval/metrics.csv")
        assert metrics["loss"].tolist() == ["corr+mse:0.5"]
        assert -1.0 <= metrics["pearson"][0] <= 1.0
        per_file = pd.read_csv(tmp_path / "eval/per_file.csv")
        assert per_file["n_steps"].tolist() == [10] * 4
        run("saliency", tmp_path / "saliency", REGRESSION + paths)
        table = pd.read_csv(tmp_path / "saliency/importance.csv")
        assert table["unit_rule"].tolist() == ["sum"] * 2


class TestFeatures:

    def test_manifest_to_dataset(self, tmp_path):
        manifest = write_manifest(tmp_path, audio_corpus(tmp_path))
        run("features", tmp_path / "out", [
            f"paths.manifest={manifest}", "features.n_mel=16"])
        dataset = load_dataset(tmp_path / "out/dataset")
        assert dataset.n_features("spect") == 16
        assert [e.id for e in dataset.train] == ["u0", "u1"]
        assert dataset.class_names == ["yes", "no"]

    def test_several_inputs_feed_fusion(self, tmp_path):
        manifest = write_manifest(tmp_path, audio_corpus(tmp_path))
        features = [f"paths.manifest={manifest}", "features.n_mel=16",
                    "features.inputs={spect: logmel, ratio: ratio}"]
        run("features", tmp_path / "features", features)
        dataset = tmp_path / "features/dataset"
        assert load_dataset(dataset).input_names == ["spect", "ratio"]

        run("select", tmp_path / "select", [
            f"paths.dataset={dataset}", "selection.kind=lowest"])
        fused = features + [
            f"paths.dataset={dataset}",
            f"paths.mask={tmp_path / 'select/mask.txt'}",
            "network.fusion_inputs=[spect, spect_selected, ratio]"]
        run("fuse", tmp_path / "fuse", fused)
        ens = load_ensemble(tmp_path / "fuse/ensemble")
        assert ens.spec.input_names == ["spect", "spect_selected", "ratio"]
        assert [b.n_features for b in ens.spec.branches] == [16, 2, 1]

        run("bench", tmp_path / "bench", fused + [
            f"paths.ensemble={tmp_path / 'fuse/ensemble'}",
            "bench.include_features=true"])
        table = pd.read_csv(tmp_path / "bench/bench.csv")
        assert table["n_features"].tolist() == [19]

    def test_selection_reads_the_configured_input(self, tmp_path):
        manifest = write_manifest(tmp_path, audio_corpus(tmp_path))
        run("features", tmp_path / "features", [
            f"paths.manifest={manifest}", "features.n_mel=16",
            "features.inputs={ratio: ratio, spect: logmel}"])
        dataset = tmp_path / "features/dataset"
        assert load_dataset(dataset).input_names == ["ratio", "spect"]
        run("select", tmp_path / "select", [
            f"paths.dataset={dataset}", "selection.kind=random"])
        assert load_mask(tmp_path / "select/mask.txt").n_bands == 16

    def test_fusion_branch_needs_its_input(self, tmp_path):
        run("synth", tmp_path / "synth", CLASSIFICATION)
        dataset = tmp_path / "synth/dataset"
        run("select", tmp_path / "select", [
            f"paths.dataset={dataset}", "selection.kind=lowest"])
        result = invoke("fuse", tmp_path / "fuse", CLASSIFICATION + [
            f"paths.dataset={dataset}",
            f"paths.mask={tmp_path / 'select/mask.txt'}",
            "network.fusion_inputs=[spect, ratio]"])
        assert result.exit_code == 2
        assert "ratio" in result.output


class TestErrors:

    def test_unknown_key(self, tmp_path):
        result = invoke("synth", tmp_path, ["train.epochz=3"])
        assert result.exit_code == 1
        assert "epochz" in result.output

    def test_unknown_command(self, tmp_path):
        result = invoke("distill", tmp_path)
        assert result.exit_code == 1

    def test_missing_path(self, tmp_path):
        result = invoke("train", tmp_path)
        assert result.exit_code == 1
        assert "paths.dataset" in result.output

    def test_missing_dataset(self, tmp_path):
        result = invoke("train", tmp_path, [
            f"paths.dataset={tmp_path / 'absent'}"])
        assert result.exit_code == 2

    def test_numeric_error(self, tmp_path, monkeypatch):
        def diverge(stage, kwargs):
            raise NumericError("loss is not finite")
        monkeypatch.setattr(cli, "run_stage", diverge)
        result = invoke("train", tmp_path)
        assert result.exit_code == 3
        assert "not finite" in result.output


class TestMakeConfig:

    def test_template(self, tmp_path):
        path = tmp_path / "config.yaml"
        result = CliRunner().invoke(
            cli.entry_point, ["makecfg", "--config", str(path)])
        assert result.exit_code == 0, result.output
        assert yaml.safe_load(path.read_text()) == DEFAULTS

    def test_template_is_accepted(self, tmp_path):
        path = tmp_path / "config.yaml"
        CliRunner().invoke(cli.entry_point, ["makecfg", "--config", str(path)])
        result = CliRunner().invoke(cli.entry_point, [
            "--config", str(path), "--out", str(tmp_path / "synth"),
            "--set", "synth.n_examples=10", "--set", "synth.n_frames=2",
            "--set", "synth.n_bands=12", "synth"])
        assert result.exit_code == 0, result.output
        assert (tmp_path / "synth/dataset/dataset.csv").is_file()
