import pathlib

import click


def config_options(function):
    function = click.option(
        "--config",
        type=pathlib.Path,
        help="Path for YAML configuration file")(function)
    return function


def override_options(function):
    function = click.option(
        "--set", "overrides",
        multiple=True,
        metavar="KEY=VALUE",
        help="override a configuration value, e.g. "
        "train.learning_rate=0.0005 (repeatable)")(function)
    function = click.option(
        "--seed",
        type=int,
        help="seed for ensemble members, generators and random masks")(function)
    return function
