"""Web-shopping simulator, BM25 search and policy training from Python."""

from ._shoprl import (
    FormatError,
    InvalidActionError,
    NotFoundError,
    ParameterError,
    Shop,
    StateError,
    bt_preference_prob,
    clipped_surrogate,
    derive_seed,
    featurize,
    run_cli,
    tokenize,
)

__all__ = [
    "FormatError",
    "InvalidActionError",
    "NotFoundError",
    "ParameterError",
    "Shop",
    "StateError",
    "bt_preference_prob",
    "clipped_surrogate",
    "derive_seed",
    "featurize",
    "run_cli",
    "tokenize",
]
