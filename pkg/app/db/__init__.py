from .models import (
    EXPERIMENT_SUBCOMMANDS,
    CommandSpec,
    ExperimentConfig,
    ReplicaRecord,
    SummaryRow,
    SummaryStats,
)
from .storage import ResultStore, format_report, open_store

__all__ = [
    "EXPERIMENT_SUBCOMMANDS",
    "CommandSpec",
    "ExperimentConfig",
    "ReplicaRecord",
    "SummaryRow",
    "SummaryStats",
    "ResultStore",
    "format_report",
    "open_store"
]
