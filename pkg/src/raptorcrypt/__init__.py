"""Fountain-code presence thresholds and private subset commitments."""
from .commitment import (Commitment, RevealKey, SelectionSet, Verdict, commit_object,
                         commit_selection, digit_sum_mod10, verify_object, verify_selection)
from .errors import (DuplicateMember, InfeasibleThreshold, InvalidKey, InvalidParameter,
                     InvalidSymbol, MalformedFile, MalformedFragment, MixedKeyId,
                     RaptorCryptError)
from .fountain import (DecodeReport, DegreeDistribution, EncodedSymbol, InputBlock, Outcome,
                       Precode, decode, encode_stream, encode_symbol, make_distribution,
                       symbol_neighbors)
from .primes import gen_prime, is_probable_prime
from .receipt import ReceiptKeyPair, receipt_keygen, receipt_sign, receipt_verify
from .threshold import (Fragment, ThresholdPlan, combine_fragments, max_threshold,
                        plan_threshold, simulate_decodability, split_key)

__version__ = "0.1.0"
