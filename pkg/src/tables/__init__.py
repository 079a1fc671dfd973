# TableGen Tables Module
"""
Table model, sequence codec and header relations.
"""

from .table import Document, HeaderMode, Table, header_of, validate_document, validate_table
from .codec import DecodeResult, decode_sequence, encode_document, repair
from .relation import RelationLabel, RelationMatrix, RelationState, relation_step, relations_full

__all__ = [
    "Document",
    "HeaderMode",
    "Table",
    "header_of",
    "validate_document",
    "validate_table",
    "DecodeResult",
    "decode_sequence",
    "encode_document",
    "repair",
    "RelationLabel",
    "RelationMatrix",
    "RelationState",
    "relation_step",
    "relations_full",
]
