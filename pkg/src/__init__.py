# TableGen
"""
Text-to-table generation as sequence-to-sequence learning.
Table serialization, table-constrained decoding, relation-aware decoder
self-attention, a desk-scale encoder-decoder and cell-level evaluation.
"""

__version__ = "0.1.0"
