# TableGen Evaluation Module
"""
Cell-level exact-match scoring and error rate.
"""

from .metrics import CorpusScore, KeyedCell, TableScore, keyed_cells, score_corpus, score_tables

__all__ = ["CorpusScore", "KeyedCell", "TableScore", "keyed_cells", "score_corpus", "score_tables"]
