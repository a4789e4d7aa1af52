from .config import RunConfig, load_config, resolve_workers
from .outputs import emit_outputs, read_records, write_records
from .runner import ExperimentRecord, experiment_seed, run_experiment, run_grid, run_records
from .summary import BlockSummary, pooled_tests, summarize_block, summarize_records

__all__ = [
    "BlockSummary",
    "ExperimentRecord",
    "RunConfig",
    "emit_outputs",
    "experiment_seed",
    "load_config",
    "pooled_tests",
    "read_records",
    "resolve_workers",
    "run_experiment",
    "run_grid",
    "run_records",
    "summarize_block",
    "summarize_records",
    "write_records",
]
