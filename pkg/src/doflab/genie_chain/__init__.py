"""Genie-chaining outer bounds: step engine, symbolic ledger, scripts and algorithms."""

from .algorithms import realized_script, run_algorithm1, run_algorithm2, successive_intersections
from .engine import (
    ChainRunner,
    GenieRow,
    GenieSpec,
    GenieTooSmall,
    exposed_subspace,
    generic_exposed_dim,
    genie_acceptable,
    interference_matrix,
    resolve_exposed,
)
from .ledger import ChainError, ChainLedger, Inequality, RegistryEntry, ledger_bound, ledger_summary
from .scripts import ChainScript, builtin_names, builtin_script, run_script, script_network

__all__ = [
    "ChainError",
    "ChainLedger",
    "ChainRunner",
    "ChainScript",
    "GenieRow",
    "GenieSpec",
    "GenieTooSmall",
    "Inequality",
    "RegistryEntry",
    "builtin_names",
    "builtin_script",
    "exposed_subspace",
    "generic_exposed_dim",
    "genie_acceptable",
    "interference_matrix",
    "ledger_bound",
    "ledger_summary",
    "realized_script",
    "resolve_exposed",
    "run_algorithm1",
    "run_algorithm2",
    "run_script",
    "script_network",
    "successive_intersections",
]
