"""Financial knowledge base: ingestion, segmentation, BM25 retrieval."""

from .corpus import Document, EmptyCorpus, IndexNotLoaded, KnowledgeError, read_corpus
from .index import Bm25Index, IngestStats, RetrievalResult, ingest
from .segment import DEFAULT_MAX_CHUNK_TOKENS, Chunk, normalize_whitespace, segment, split_sentences
from .tokenize import index_tokens

__all__ = [
    "Bm25Index",
    "Chunk",
    "DEFAULT_MAX_CHUNK_TOKENS",
    "Document",
    "EmptyCorpus",
    "IndexNotLoaded",
    "IngestStats",
    "KnowledgeError",
    "RetrievalResult",
    "index_tokens",
    "ingest",
    "normalize_whitespace",
    "read_corpus",
    "segment",
    "split_sentences",
]
