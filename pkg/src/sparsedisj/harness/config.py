"""
Experiment configuration.  An ExperimentConfig is built from the parsed
command line and validated before anything runs.
"""
from dataclasses import dataclass, field
from pathlib import Path
import os

from ..channel import SEED_MASK

JOBS_ENV = "SPARSEDISJ_JOBS"
FORMATS = ("json", "csv")
# subcommands whose figures are Monte Carlo and so need an explicit seed
SEEDED = ("simulate-disjointness", "simulate-exists-equal", "estimate-embedding-error")


class ConfigError(ValueError):
    """An experiment configuration breaks one of its invariants."""
    pass


def default_jobs() -> int:
    v = os.environ.get(JOBS_ENV)
    if v:
        try:
            jobs = int(v)
        except ValueError:
            raise ConfigError(f"{JOBS_ENV}={v!r} is not an integer")
        if jobs < 1:
            raise ConfigError(f"{JOBS_ENV}={jobs} must be at least 1")
        return jobs
    return os.cpu_count() or 1


@dataclass
class ExperimentConfig():
    subcommand: str
    params: dict = field(default_factory=dict)
    seed: int|None = None
    trials: int = 0
    out: str = "-"
    format: str = "json"
    jobs: int = 1

    def __str__(self) -> str:
        return f"{self.subcommand}[seed={self.seed},trials={self.trials},jobs={self.jobs}]"

    def __repr__(self) -> str:
        return f"{str(self.__class__)}:{str(self)}"

    @property
    def config(self) -> dict:
        """
        All configuration state as a dict, the echo written into every report.
        """
        return {
            'subcommand': self.subcommand,
            'params': dict(self.params),
            'seed': self.seed,
            'trials': self.trials,
            'format': self.format,
            'jobs': self.jobs,
        }

    @config.setter
    def config(self, config: dict) -> None:
        """
        Set configuration state from a dict.  Only keys that are present change.
        """
        v = config.get('subcommand', None)
        if v is not None:
            self.subcommand = str(v)
        v = config.get('params', None)
        if v is not None:
            self.params = dict(v)
        v = config.get('seed', None)
        if v is not None:
            self.seed = int(v)
        v = config.get('trials', None)
        if v is not None:
            self.trials = int(v)
        v = config.get('out', None)
        if v is not None:
            self.out = str(v)
        v = config.get('format', None)
        if v is not None:
            self.format = str(v)
        v = config.get('jobs', None)
        if v is not None:
            self.jobs = int(v)

    @property
    def out_path(self) -> Path|None:
        return None if self.out == "-" else Path(self.out)

    def validate(self) -> None:
        if self.subcommand in SEEDED and self.seed is None:
            raise ConfigError(f"{self.subcommand} needs --seed for reproducibility")
        if self.seed is None:
            self.seed = 0
        if not 0 <= self.seed <= SEED_MASK:
            raise ConfigError(f"seed {self.seed} is not an unsigned 64-bit integer")
        if self.trials < 0:
            raise ConfigError(f"trial count must be nonnegative: {self.trials}")
        if self.format not in FORMATS:
            raise ConfigError(f"unknown report format {self.format!r}, expected one of {FORMATS}")
        if self.jobs < 1:
            raise ConfigError(f"--jobs must be at least 1: {self.jobs}")
