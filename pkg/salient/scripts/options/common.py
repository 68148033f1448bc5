import pathlib

import click


def common_options(function):
    function = click.option(
        "--out", "save_path",
        type=pathlib.Path,
        help="directory where artifacts, tables and plots are saved")(function)
    function = click.option(
        "--tables/--no-tables", "save_tables",
        default=True,
        help="save detail tables as .csv files")(function)
    function = click.option(
        "--viz", "save_plots",
        is_flag=True,
        help="save data visualizations as .pdf")(function)
    function = click.option(
        "-v",
        "--verbose",
        is_flag=True,
        help="set logs to verbose")(function)
    return function
