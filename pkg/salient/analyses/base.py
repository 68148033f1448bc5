import time
import pathlib
import logging
from abc import ABC, abstractmethod

from ..exceptions import ConfigError
from ..loaders.dataset import load_dataset
from ..loaders.models import load_ensemble, load_mask


class Base(ABC):
    """Base class for one stage of the feature selection pipeline.

    A stage extracts its inputs, transforms them, then always writes its
    artifacts (models, masks, metric tables) and the effective
    configuration; detail tables and plots are optional.

    :param RunConfig config: effective run configuration.
    :param str save_path: output directory. If it doesn't exist, it is
        created during execution. Default is the current working directory.
    :param bool save_tables: save detail tables as .csv files.
    :param bool save_plots: save data visualizations as .pdf files.
    :param bool verbose: print verbose output.
    """

    name = "stage"

    def __init__(
            self,
            config,
            save_path=None,
            save_tables=True,
            save_plots=False,
            verbose=False):
        self.config = config
        self._save_path = save_path
        self.save_tables = save_tables
        self.save_plots = save_plots

        # create logger
        self.logger = self.create_logger(verbose)
        self.logger.debug(f"{self.name} configuration:\n{config.to_yaml()}")

    @abstractmethod
    def extract(self):
        """Load the stage inputs"""
        pass

    @abstractmethod
    def transform(self, data):
        """Run the stage computation"""
        pass

    @abstractmethod
    def make_artifacts(self, data):
        """Save the files later stages consume"""
        pass

    def make_tables(self, data):
        """Save detail tables"""
        pass

    def make_plots(self, data):
        """Save data visualizations"""
        pass

    def run(self):
        """Run the complete stage"""
        start = time.time()

        data = self.extract()
        data = self.transform(data)

        self.make_artifacts(data)
        self.config.save(self.save_path / "config.yaml")
        if self.save_tables:
            self.make_tables(data)
        if self.save_plots:
            self.make_plots(data)
        end = time.time()
        self.logger.info(
            f"Execution took {end-start:.2f} seconds "
            f"({(end-start)//60:.0f} minutes).")

        return data

    @property
    def save_path(self):
        """
        Parse ``save_path`` directory. If it doesn't exist, directory is
        created along with parent directories. If not provided, current
        directory is used.

        :return pathlib.Path: Save directory path.
        """
        if self._save_path:
            new_path = pathlib.Path(self._save_path)
            if not new_path.exists():
                self.logger.info("creating directory to save output files...")
                self.logger.debug(f"created path {new_path}")
                new_path.mkdir(parents=True, exist_ok=True)
            return new_path
        self.logger.info("save path not provided, using current directory")
        return pathlib.Path.cwd()

    def require_path(self, key):
        value = self.config["paths"][key]
        if not value:
            raise ConfigError(
                f"{self.name} needs paths.{key} (use --set paths.{key}=...)")
        return pathlib.Path(value)

    def load_dataset(self):
        dataset = load_dataset(self.require_path("dataset"))
        self.logger.info(f"loaded {dataset}")
        return dataset

    def load_ensemble(self):
        ens = load_ensemble(self.require_path("ensemble"))
        self.logger.info(
            f"loaded ensemble of {ens.size} members, loss "
            f"{ens.loss.identifier}, inputs {ens.spec.input_names}")
        return ens

    def load_mask(self):
        mask = load_mask(self.require_path("mask"))
        self.logger.info(
            f"loaded {mask.origin} mask of {len(mask)} bands: "
            f"{list(mask.indices)}")
        return mask

    @staticmethod
    def create_logger(verbose):
        """Create logger.

        :param bool verbose: if True, logging level is DEBUG. Else, it's set
            to INFO.
        :return Logger: logger
        """
        if verbose:
            logging_level = logging.DEBUG
        else:
            logging_level = logging.INFO
        logging_format = "[%(filename)s:%(lineno)s] %(levelname)s: %(message)s"
        logging.basicConfig(level=logging_level, format=logging_format)
        logger = logging.getLogger("salient")
        logger.setLevel(logging_level)
        return logger
