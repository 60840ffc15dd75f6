"""
Command line front end: experiment configuration, reports and golden
transcripts.
"""

from .config import ConfigError, ExperimentConfig, JOBS_ENV, default_jobs
from .reports import Report, write_report, csv_text, SWEEP_COLUMNS
from .goldens import GoldenCase, GOLDEN_CASES, GoldenCheck, golden_transcripts, record_goldens
