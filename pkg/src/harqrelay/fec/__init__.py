"""Concatenated coding chain: RS(255,239) outer code, RCPC inner code."""
from .convolutional import MOTHER_CODE, ConvCode, conv_encode, viterbi_decode
from .rcpc import RcpcFamily, default_family, greedy_family, load_masks, parse_masks
from .reedsolomon import DECODE_FAILURE, RS_255_239, RsCode, rs_decode, rs_encode

__all__ = [
    "ConvCode",
    "MOTHER_CODE",
    "conv_encode",
    "viterbi_decode",
    "RcpcFamily",
    "default_family",
    "greedy_family",
    "load_masks",
    "parse_masks",
    "RsCode",
    "RS_255_239",
    "DECODE_FAILURE",
    "rs_encode",
    "rs_decode",
]
