"""
Character chunking with exact offsets.
"""

from .splitter import Chunk, SplitParams, chunk_document, split_recursive

__all__ = ['Chunk', 'SplitParams', 'chunk_document', 'split_recursive']
