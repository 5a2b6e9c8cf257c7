"""Dual adaptive Laguerre spectral-filter GNN engine.

Thin wrapper over the compiled core. The heavy lifting (containers,
spectral operators, the recurrence, training) lives in C++; this package
re-exports it for notebooks and scripts.
"""

from ._core import (
    CsrMatrix,
    FoldSummary,
    GraphDataset,
    GraphOperators,
    RunResult,
    SplitSet,
    alpha_of,
    build_l_high,
    build_l_low,
    build_operators,
    build_sym_laplacian,
    cross_validate,
    edge_homophily_ratio,
    laguerre_poly_scalar,
    load_dataset,
    make_folds,
    save_dataset,
    synth_graph,
    theta_for_alpha,
    train_run,
)

__all__ = [
    "CsrMatrix",
    "FoldSummary",
    "GraphDataset",
    "GraphOperators",
    "RunResult",
    "SplitSet",
    "alpha_of",
    "build_l_high",
    "build_l_low",
    "build_operators",
    "build_sym_laplacian",
    "cross_validate",
    "edge_homophily_ratio",
    "laguerre_poly_scalar",
    "load_dataset",
    "make_folds",
    "save_dataset",
    "synth_graph",
    "theta_for_alpha",
    "train_run",
]
