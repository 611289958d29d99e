from .config import ExperimentConfig, ParseError, RunSpec, ValidationError, load_config, parse_config
from .runner import CSV_HEADER, RunResult, execute, exit_code
from .verify import verify_ocp

__all__ = [
    "CSV_HEADER",
    "ExperimentConfig",
    "ParseError",
    "RunResult",
    "RunSpec",
    "ValidationError",
    "execute",
    "exit_code",
    "load_config",
    "parse_config",
    "verify_ocp",
]
