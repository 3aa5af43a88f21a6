"""LDPC layer: parity-check matrices, encoding schedules, encoder and decoder."""

from .codec import DecodeFailure, DecodeOutcome, FirstPass, TrialBound, candidates, decode, encode, first_pass, info_of, trial_bound
from .codeword import Codeword, bits_from_string, bits_to_string
from .matrix import (
    MatrixFormatError,
    ParityCheckMatrix,
    TannerGraph,
    bundled_matrix,
    gf2_rank,
    load_alist,
    load_matrix,
    parse_alist,
    parse_matrix,
    syndrome,
    to_alist,
)
from .oracle import RankError, all_codewords, check_full_rank, minimum_distance, nearest_codewords, oracle_encode, rref
from .stopping_set import (
    DEFAULT_MAX_BIT_DEGREE,
    ConstructionError,
    EncodingStoppingSet,
    ParityStep,
    build_stopping_set,
    stopping_set_from_declared,
)

__all__ = [name for name in dir() if not name.startswith("_")]
