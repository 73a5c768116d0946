"""Sparse AND-OR interaction analysis of small classifiers."""

import json

from ._core import (
    Decomposition,
    Error,
    InvalidArgument,
    Model,
    __version__,
    decompose,
    decompose_sparse,
    extract_salient,
    load_checkpoint,
    masked_output_table,
    mobius_and,
    mobius_or,
    objective,
    planted_table,
    run_cli,
    sparsify,
)
from ._core import match_json as _match_json


def match(decomposition, base, alpha=0.05):
    """Transfer report of `decomposition`'s salient interactions onto `base`."""
    return json.loads(_match_json(decomposition, base, alpha))


__all__ = [
    "Decomposition",
    "Error",
    "InvalidArgument",
    "Model",
    "__version__",
    "decompose",
    "decompose_sparse",
    "extract_salient",
    "load_checkpoint",
    "masked_output_table",
    "match",
    "mobius_and",
    "mobius_or",
    "objective",
    "planted_table",
    "run_cli",
    "sparsify",
]
