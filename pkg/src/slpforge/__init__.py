"""RePair grammar compression and the binary witness family for its approximation ratio."""

from .repair import Candidate, RoundTrace, Variant, compress
from .slp import SLP, CapacityError, Production, Symbol, expand, parse, serialize, validate
from .witness import build_family, build_small_slp, de_bruijn

__all__ = [
    "SLP", "Candidate", "CapacityError", "Production", "RoundTrace", "Symbol", "Variant",
    "build_family", "build_small_slp", "compress", "de_bruijn", "expand", "parse",
    "serialize", "validate",
]
