"""castsel: syntax-coverage exemplar retrieval for code translation prompts."""

from .fingerprint import FingerprintProfile, fingerprint_tree
from .index import ExemplarDatabase, build_cooccurrence, build_database
from .selector import (
    SelectionConfig,
    SelectionResult,
    select_cast_a,
    select_cast_f,
)
from .tree import TypedTree, parse_sexpr, to_sexpr

__version__ = "0.1.0"

__all__ = [
    "TypedTree",
    "parse_sexpr",
    "to_sexpr",
    "FingerprintProfile",
    "fingerprint_tree",
    "ExemplarDatabase",
    "build_database",
    "build_cooccurrence",
    "SelectionConfig",
    "SelectionResult",
    "select_cast_f",
    "select_cast_a",
    "__version__",
]
