"""Probabilistic phone transcriptions from mismatched crowdsourcing."""

from ._core import (
    BigramModel,
    ChannelModel,
    ContractError,
    DataError,
    EmptyLatticeError,
    Error,
    NoPathError,
    NumericError,
    ParseError,
    PtLattice,
    Seq2Seq,
    __version__,
    align,
    constrain_inventory,
    constrain_lexicon,
    constrain_wlm,
    decode_pt,
    phone_error_rate,
    relative_reduction,
    run_cli,
    train_bigram,
    train_channel,
)

__all__ = [
    "BigramModel",
    "ChannelModel",
    "ContractError",
    "DataError",
    "EmptyLatticeError",
    "Error",
    "NoPathError",
    "NumericError",
    "ParseError",
    "PtLattice",
    "Seq2Seq",
    "__version__",
    "align",
    "constrain_inventory",
    "constrain_lexicon",
    "constrain_wlm",
    "decode_pt",
    "phone_error_rate",
    "relative_reduction",
    "run_cli",
    "train_bigram",
    "train_channel",
]
