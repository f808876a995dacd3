"""BM25 index over segmented document chunks.

Scoring uses Okapi BM25 with the non-negative "plus one" idf variant

    idf(t)  = ln(1 + (N - df + 0.5) / (df + 0.5))
    s(q, c) = sum over unique query terms of
              idf(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * len_c / avg_len))

so scores are always >= 0 and a chunk sharing no term with the query scores
exactly 0. Ties break deterministically by (score desc, doc_id asc, seq asc).

The index is immutable once built; persistence is a versioned directory of
JSON files whose round-trip reproduces retrieval results byte-identically.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import Document, IndexNotLoaded, read_corpus
from .segment import DEFAULT_MAX_CHUNK_TOKENS, Chunk, segment
from .tokenize import index_tokens

FORMAT_VERSION = 1
DEFAULT_K1 = 1.5
DEFAULT_B = 0.75


@dataclass(frozen=True)
class RetrievalResult:
    chunk: Chunk
    score: float
    injected: bool = False  # deliberately irrelevant addition
    guaranteed: bool = False  # force-included source document


@dataclass(frozen=True)
class IngestStats:
    docs: int
    chunks: int
    vocab_size: int
    avg_chunk_tokens: float
    malformed: int = 0

    def to_dict(self) -> dict:
        return {
            "docs": self.docs,
            "chunks": self.chunks,
            "vocab_size": self.vocab_size,
            "avg_chunk_tokens": round(self.avg_chunk_tokens, 3),
            "malformed": self.malformed,
        }


@dataclass
class Bm25Index:
    chunks: list[Chunk]
    documents: dict[str, Document]
    postings: dict[str, list[tuple[int, int]]]  # term -> [(chunk ordinal, tf)]
    avg_len: float
    k1: float = DEFAULT_K1
    b: float = DEFAULT_B
    _lengths: list[int] = field(default_factory=list)

    # -- construction --------------------------------------------------------

    @classmethod
    def build(
        cls,
        documents: list[Document],
        max_chunk_tokens: int = DEFAULT_MAX_CHUNK_TOKENS,
        k1: float = DEFAULT_K1,
        b: float = DEFAULT_B,
    ) -> "Bm25Index":
        chunks: list[Chunk] = []
        for doc in documents:
            chunks.extend(segment(doc.id, doc.body, max_chunk_tokens))
        postings: dict[str, list[tuple[int, int]]] = {}
        lengths: list[int] = []
        for ordinal, chunk in enumerate(chunks):
            tokens = index_tokens(chunk.text)
            lengths.append(len(tokens))
            counts: dict[str, int] = {}
            for token in tokens:
                counts[token] = counts.get(token, 0) + 1
            for term, tf in counts.items():
                postings.setdefault(term, []).append((ordinal, tf))
        avg_len = (sum(lengths) / len(lengths)) if lengths else 0.0
        return cls(
            chunks=chunks,
            documents={d.id: d for d in documents},
            postings=postings,
            avg_len=avg_len,
            k1=k1,
            b=b,
            _lengths=lengths,
        )

    def stats(self, malformed: int = 0) -> IngestStats:
        return IngestStats(
            docs=len(self.documents),
            chunks=len(self.chunks),
            vocab_size=len(self.postings),
            avg_chunk_tokens=self.avg_len,
            malformed=malformed,
        )

    # -- retrieval ------------------------------------------------------------

    def _idf(self, term: str) -> float:
        df = len(self.postings.get(term, ()))
        n = len(self.chunks)
        return math.log(1.0 + (n - df + 0.5) / (df + 0.5))

    def score_all(self, query: str) -> dict[int, float]:
        terms = sorted(set(index_tokens(query)))
        scores: dict[int, float] = {}
        for term in terms:
            posting = self.postings.get(term)
            if not posting:
                continue
            idf = self._idf(term)
            for ordinal, tf in posting:
                length = self._lengths[ordinal]
                denom = tf + self.k1 * (1.0 - self.b + self.b * length / self.avg_len)
                scores[ordinal] = scores.get(ordinal, 0.0) + idf * tf * (self.k1 + 1.0) / denom
        return scores

    def _rank(self, scores: dict[int, float], top_k: int, threshold: float) -> list[RetrievalResult]:
        ranked = sorted(
            ((score, self.chunks[ordinal]) for ordinal, score in scores.items() if score >= threshold),
            key=lambda pair: (-pair[0], pair[1].doc_id, pair[1].seq),
        )
        return [RetrievalResult(chunk=chunk, score=score) for score, chunk in ranked[:top_k]]

    def retrieve(self, query: str, top_k: int = 3, threshold: float = 0.0) -> list[RetrievalResult]:
        return self._rank(self.score_all(query), top_k, threshold)

    def retrieve_for_training(
        self,
        query: str,
        top_k: int = 3,
        threshold: float = 0.0,
        noise_prob: float = 0.25,
        source_doc: str | None = None,
        guarantee_prob: float = 1.0,
        rng: random.Random | None = None,
    ) -> list[RetrievalResult]:
        """Training-time retrieval: optionally appends one deliberately
        irrelevant (zero-overlap) chunk, and force-includes the question's
        source document when retrieval missed it."""
        if not 0.0 <= noise_prob <= 1.0:
            raise ValueError("noise_prob must be within [0, 1]")
        rng = rng or random.Random()
        scores = self.score_all(query)
        results = self._rank(scores, top_k, threshold)

        if source_doc is not None and all(r.chunk.doc_id != source_doc for r in results):
            if guarantee_prob >= 1.0 or rng.random() < guarantee_prob:
                best = self._best_chunk_of(source_doc, scores)
                if best is not None:
                    ordinal, chunk = best
                    results.append(
                        RetrievalResult(chunk=chunk, score=scores.get(ordinal, 0.0), guaranteed=True)
                    )

        if noise_prob > 0.0 and (noise_prob >= 1.0 or rng.random() < noise_prob):
            noise = self._sample_zero_overlap(scores, rng, exclude={r.chunk.doc_id for r in results})
            if noise is not None:
                results.append(RetrievalResult(chunk=noise, score=0.0, injected=True))
        return results

    def _best_chunk_of(self, doc_id: str, scores: dict[int, float]) -> tuple[int, Chunk] | None:
        best: tuple[float, int, Chunk] | None = None
        for ordinal, chunk in enumerate(self.chunks):
            if chunk.doc_id != doc_id:
                continue
            score = scores.get(ordinal, 0.0)
            if best is None or score > best[0] or (score == best[0] and chunk.seq < best[2].seq):
                best = (score, ordinal, chunk)
        return (best[1], best[2]) if best else None

    def _sample_zero_overlap(self, scores: dict[int, float], rng: random.Random, exclude: set[str]) -> Chunk | None:
        candidates = [
            chunk
            for ordinal, chunk in enumerate(self.chunks)
            if ordinal not in scores and chunk.doc_id not in exclude
        ]
        if not candidates:
            return None
        return candidates[rng.randrange(len(candidates))]

    # -- persistence ----------------------------------------------------------

    def save(self, directory: str | Path) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        meta = {
            "format_version": FORMAT_VERSION,
            "k1": self.k1,
            "b": self.b,
            "avg_len": self.avg_len,
            "chunks": len(self.chunks),
        }
        (directory / "meta.json").write_text(
            json.dumps(meta, sort_keys=True, ensure_ascii=False), encoding="utf-8"
        )
        with open(directory / "documents.jsonl", "w", encoding="utf-8") as handle:
            for doc_id in sorted(self.documents):
                handle.write(json.dumps(self.documents[doc_id].to_record(), ensure_ascii=False) + "\n")
        with open(directory / "chunks.jsonl", "w", encoding="utf-8") as handle:
            for chunk, length in zip(self.chunks, self._lengths):
                record = {
                    "doc_id": chunk.doc_id,
                    "seq": chunk.seq,
                    "text": chunk.text,
                    "token_count": chunk.token_count,
                    "oversized": chunk.oversized,
                    "length": length,
                }
                handle.write(json.dumps(record, ensure_ascii=False) + "\n")
        postings_serializable = {term: pairs for term, pairs in sorted(self.postings.items())}
        (directory / "postings.json").write_text(
            json.dumps(postings_serializable, sort_keys=True, ensure_ascii=False), encoding="utf-8"
        )

    @classmethod
    def load(cls, directory: str | Path) -> "Bm25Index":
        directory = Path(directory)
        meta_path = directory / "meta.json"
        if not meta_path.exists():
            raise IndexNotLoaded(f"no index at {directory}")
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        if meta.get("format_version") != FORMAT_VERSION:
            raise IndexNotLoaded(f"unsupported index format {meta.get('format_version')!r}")
        documents: dict[str, Document] = {}
        with open(directory / "documents.jsonl", "r", encoding="utf-8") as handle:
            for line in handle:
                record = json.loads(line)
                documents[record["id"]] = Document(**record)
        chunks: list[Chunk] = []
        lengths: list[int] = []
        with open(directory / "chunks.jsonl", "r", encoding="utf-8") as handle:
            for line in handle:
                record = json.loads(line)
                lengths.append(record.pop("length"))
                chunks.append(Chunk(**record))
        postings_raw = json.loads((directory / "postings.json").read_text(encoding="utf-8"))
        postings = {term: [tuple(pair) for pair in pairs] for term, pairs in postings_raw.items()}
        return cls(
            chunks=chunks,
            documents=documents,
            postings=postings,
            avg_len=meta["avg_len"],
            k1=meta["k1"],
            b=meta["b"],
            _lengths=lengths,
        )


def ingest(
    corpus_path: str | Path,
    index_dir: str | Path | None = None,
    max_chunk_tokens: int = DEFAULT_MAX_CHUNK_TOKENS,
) -> tuple[Bm25Index, IngestStats]:
    """Read a corpus file, build the index, optionally persist it."""
    documents, malformed = read_corpus(corpus_path)
    index = Bm25Index.build(documents, max_chunk_tokens=max_chunk_tokens)
    if index_dir is not None:
        index.save(index_dir)
    return index, index.stats(malformed=malformed)
