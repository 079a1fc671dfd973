# TableGen Decoding Module
"""
Table-constrained generation with on-the-fly header relations.
"""

from .constraint import ConstraintState, Phase, TableConstraint, constraint_advance, constraint_mask
from .generator import GenerationOptions, GenerationResult, generate

__all__ = [
    "ConstraintState",
    "Phase",
    "TableConstraint",
    "constraint_advance",
    "constraint_mask",
    "GenerationOptions",
    "GenerationResult",
    "generate",
]
