"""Reed-Muller decoding laboratory."""
from .rm_code import RmCode, dimension, encode, is_codeword, decoding_tree, A_STAR, A_PRIME
from .decoders import (
    AutomorphismDistribution,
    DecoderSpec,
    build_decoder,
    decode_ae,
    decode_ca,
    decode_first_order,
    decode_gmc,
    decode_ml,
    decode_scl,
    decode_spc_wagner,
)
from .complexity import chi_ae, chi_ca, chi_gmc, chi_scl, chi_sel, complexity_report

__version__ = "0.1.0"
