import pathlib

import click

from ..analyses.benchmarking import Benchmark
from ..analyses.datasets import FeatureExtraction, Synthesis
from ..analyses.masks import MaskSelection
from ..analyses.saliency import Saliency
from ..analyses.scoring import Evaluation
from ..analyses.training import EnsembleTraining, Fusion, Retraining
from ..config import RunConfig, template
from ..exceptions import SalientError
from .options import common_options, config_options, override_options


class StageError(click.ClickException):
    """Library error reported with its own exit code."""

    def __init__(self, error):
        super().__init__(str(error))
        self.exit_code = error.exit_code


class PipelineGroup(click.Group):
    """Group mapping usage errors to exit code 1 and library errors to
    their exit codes (data 2, numeric 3)."""

    def make_context(self, info_name, args, parent=None, **extra):
        try:
            return super().make_context(info_name, args, parent=parent,
                                        **extra)
        except click.UsageError as err:
            err.exit_code = 1
            raise

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except click.UsageError as err:
            err.exit_code = 1
            raise
        except SalientError as err:
            raise StageError(err) from err


def run_stage(stage, kwargs):
    stage(**kwargs).run()


@click.command()
@click.pass_obj
def features(kwargs):
    """Extract features of the WAV files of paths.manifest."""
    click.echo("Executing feature extraction")
    run_stage(FeatureExtraction, kwargs)


@click.command()
@click.pass_obj
def synth(kwargs):
    """Generate a synthetic dataset with known informative bands."""
    click.echo("Generating synthetic dataset")
    run_stage(Synthesis, kwargs)


@click.command()
@click.pass_obj
def train(kwargs):
    """Train an ensemble on paths.dataset."""
    click.echo("Executing ensemble training")
    run_stage(EnsembleTraining, kwargs)


@click.command()
@click.pass_obj
def saliency(kwargs):
    """Compute per-member gradient importance of every band."""
    click.echo("Executing saliency analysis")
    run_stage(Saliency, kwargs)


@click.command()
@click.pass_obj
def select(kwargs):
    """Write a feature mask (majority vote, baselines or SFFS)."""
    click.echo("Executing feature selection")
    run_stage(MaskSelection, kwargs)


@click.command()
@click.pass_obj
def retrain(kwargs):
    """Train a new ensemble on the bands of paths.mask."""
    click.echo("Executing ensemble retraining on selected bands")
    run_stage(Retraining, kwargs)


@click.command()
@click.pass_obj
def fuse(kwargs):
    """Train a middle-fusion ensemble on all and on the selected bands."""
    click.echo("Executing middle-fusion training")
    run_stage(Fusion, kwargs)


@click.command(name="eval")
@click.pass_obj
def evaluate(kwargs):
    """Evaluate paths.ensemble on eval.split of paths.dataset."""
    click.echo("Executing evaluation")
    run_stage(Evaluation, kwargs)


@click.command()
@click.pass_obj
def bench(kwargs):
    """Measure single-threaded inference latency.

    At the default kernel widths (1, 1) the LSTM dominates and a 10-band
    ensemble is only a few percent faster than a 128-band one; widths
    (8, 6) make it about twice as fast."""
    click.echo("Executing latency benchmark")
    run_stage(Benchmark, kwargs)


@click.command()
@config_options
def makecfg(config):
    """Create a new template configuration file.
    If filename is not given, config.yaml is created in the current directory.

    :param str config: relative path to configuration filename"""
    if not config:
        config = pathlib.Path.cwd() / "config.yaml"
    click.echo(
        f"writing configuration template file to {config}")
    config.write_text(template())


@click.group(cls=PipelineGroup)
@common_options
@config_options
@override_options
@click.pass_context
def entry_point(ctx, **kwargs):
    # pop arguments not used in stages
    configfile = kwargs.pop("config")
    overrides = kwargs.pop("overrides")
    seed = kwargs.pop("seed")
    if ctx.invoked_subcommand == "makecfg":
        return
    if configfile:
        click.echo("Reading input from configuration file")
    else:
        click.echo("Reading input from defaults and arguments")
    kwargs["config"] = RunConfig.from_file(configfile, overrides, seed)
    ctx.obj = kwargs


entry_point.add_command(features)
entry_point.add_command(synth)
entry_point.add_command(train)
entry_point.add_command(saliency)
entry_point.add_command(select)
entry_point.add_command(retrain)
entry_point.add_command(fuse)
entry_point.add_command(evaluate)
entry_point.add_command(bench)
entry_point.add_command(makecfg)
