"""Encoding selection toolkit for the hamiltonian cycle problem in ASP.

The package covers the full pipeline: generating hard graph instances,
rendering six equivalent ASP encodings, benchmarking them under a cutoff,
extracting instance features, training per-encoding runtime regressors, and
evaluating selection policies against single encodings and the
always-select-best oracle.
"""

__version__ = "0.1.0"

from .graph import (  # noqa: F401
    DEFAULT_BEAM_WIDTH,
    CycleWitness,
    DfsProfile,
    DirectedGraph,
    beam_depths,
    bfs_depths,
    dfs_profile,
    emit_facts,
    hamiltonian_cycle,
    parse_facts,
)
