from .base import Backend, BackendError, SolverRequest, SolverResult, lsu_maxsmt, omt_search
from .external import ExternalBackend, default_command
from .oracle import OracleBackend, OracleLimitError, brute_force_solve

__all__ = [
    "Backend", "BackendError", "SolverRequest", "SolverResult",
    "lsu_maxsmt", "omt_search",
    "ExternalBackend", "default_command",
    "OracleBackend", "OracleLimitError", "brute_force_solve",
]
