"""Polar and concatenated polar codes over binary-input symmetric channels.

Construction by quantized density evolution, successive-cancellation
decoding, exact ML decoding of short block codes, and Monte-Carlo
simulation, with a CLI front end (`polarfec`).
"""

from .channels import (AWGN_DEFAULT_BINS, ChannelParam,
                       DiscreteSymmetricChannel, discretize_awgn, make_bec,
                       make_bsc, make_channel, parse_channel, read_channel,
                       write_channel)
from .concat import (CalibrationError, ColumnErrorTable, ConcatSpec, DpTables,
                     calibrate_multiplier, column_error_estimate,
                     column_error_table, concat_decode, concat_encode,
                     concat_fer_bound, design_report, dp_allocate, p_f_w,
                     read_assignment, write_assignment)
from .construct import (BitErrorProfile, analyze, bec_bit_errors,
                        choose_frozen, de_bit_densities, de_bit_errors,
                        fer_upper_bound, read_profile, write_profile)
from .density import (BecDensity, LlrGrid, QuantizedDensity, bec_box,
                      bec_star, conv_box, conv_box_fast, conv_star,
                      error_prob)
from .kernels import (G2, G3, Kernel, g3_density_step, g3_llr_step,
                      kernel_llr_exhaustive, read_kernel, write_kernel)
from .polar import (PolarCodeSpec, ScDecoder, ScResult, bit_reversal_perm,
                    encode, generator, polar_transform, read_bits,
                    read_frozen_set, sc_decode, write_bits, write_frozen_set)
from .shortcodes import (CodeTable, LinearBlockCode, UnsupportedCodeError,
                         load_code_table, min_distance, ml_decode,
                         write_code_table)
from .sim import (ConcatCodec, McResult, PolarCodec, ShortCodeCodec, run_mc,
                  sweep, write_sweep_csv)

__version__ = "1.0.0"
__all__ = [
    "AWGN_DEFAULT_BINS", "BecDensity", "BitErrorProfile", "CalibrationError",
    "ChannelParam", "CodeTable", "ColumnErrorTable", "ConcatCodec",
    "ConcatSpec", "DiscreteSymmetricChannel", "DpTables", "Kernel",
    "LinearBlockCode", "LlrGrid", "McResult", "PolarCodeSpec", "PolarCodec",
    "QuantizedDensity", "ScDecoder", "ScResult", "ShortCodeCodec",
    "UnsupportedCodeError", "analyze", "bec_bit_errors", "bec_box",
    "bec_star", "bit_reversal_perm", "calibrate_multiplier", "choose_frozen",
    "column_error_estimate", "column_error_table", "concat_decode",
    "concat_encode", "concat_fer_bound", "conv_box", "conv_box_fast",
    "conv_star", "de_bit_densities", "de_bit_errors", "design_report",
    "discretize_awgn", "dp_allocate", "encode", "error_prob",
    "fer_upper_bound", "g3_density_step", "g3_llr_step", "generator",
    "G2", "G3", "kernel_llr_exhaustive", "load_code_table",
    "make_bec", "make_bsc", "make_channel", "min_distance", "ml_decode",
    "p_f_w", "parse_channel", "polar_transform", "read_assignment",
    "read_bits", "read_channel", "read_frozen_set", "read_kernel",
    "read_profile", "run_mc", "sc_decode", "sweep", "write_assignment",
    "write_bits", "write_channel", "write_code_table", "write_frozen_set",
    "write_kernel", "write_profile", "write_sweep_csv",
]
