# TableGen Text Module
"""
Word-level vocabulary.
"""

from .vocab import Vocab, build_vocab, decode_text, encode_text

__all__ = ["Vocab", "build_vocab", "decode_text", "encode_text"]
