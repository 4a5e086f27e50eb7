"""Numerical lightlike submanifold geometry for bronze semi-Riemannian spaces."""
from .exprdsl import Jet2, eval_jet2, parse_expression
from .semilinalg import SignatureMetric, SubspaceBasis, infer_signature, inner
from .structure import BronzeStructure, LMParams, verify_bronze, verify_compatibility
from .submanifold import Decomposition, ManifoldSpec, decompose, screen_generic_report

__version__ = "0.1.0"

__all__ = [
    "BronzeStructure", "Decomposition", "Jet2", "LMParams", "ManifoldSpec", "SignatureMetric",
    "SubspaceBasis", "decompose", "eval_jet2", "infer_signature", "inner", "parse_expression",
    "screen_generic_report", "verify_bronze", "verify_compatibility",
]
