"""Paragraph segmentation.

Bodies are whitespace-normalized, split into sentences (CJK 。！？； always
end a sentence; Latin .!? only when followed by whitespace or end of text),
then greedily packed into chunks of at most ``max_chunk_tokens`` indexing
tokens. Sentence slices are contiguous substrings, so concatenating a
document's chunks reproduces the normalized body exactly. A single sentence
longer than the budget becomes its own chunk, flagged oversized.
"""

from __future__ import annotations

from dataclasses import dataclass

from .tokenize import index_tokens

_CJK_BOUNDARY = set("。！？；")
_LATIN_BOUNDARY = set(".!?")

DEFAULT_MAX_CHUNK_TOKENS = 256


@dataclass(frozen=True)
class Chunk:
    doc_id: str
    seq: int
    text: str
    token_count: int
    oversized: bool = False


def normalize_whitespace(text: str) -> str:
    return " ".join(text.split())


def split_sentences(text: str) -> list[str]:
    """Slice text into consecutive sentence substrings covering it exactly."""
    sentences: list[str] = []
    start = 0
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in _CJK_BOUNDARY:
            end = i + 1
            sentences.append(text[start:end])
            start = end
            i = end
        elif ch in _LATIN_BOUNDARY and (i + 1 >= n or text[i + 1] == " "):
            # keep the following space with this sentence so slices stay contiguous
            end = i + 1
            if end < n and text[end] == " ":
                end += 1
            sentences.append(text[start:end])
            start = end
            i = end
        else:
            i += 1
    if start < n:
        sentences.append(text[start:])
    return sentences


def segment(doc_id: str, body: str, max_chunk_tokens: int = DEFAULT_MAX_CHUNK_TOKENS) -> list[Chunk]:
    normalized = normalize_whitespace(body)
    if not normalized:
        return []
    sentences = split_sentences(normalized)

    chunks: list[Chunk] = []
    current: list[str] = []
    current_tokens = 0

    def close() -> None:
        nonlocal current, current_tokens
        if not current:
            return
        text = "".join(current)
        count = len(index_tokens(text))
        chunks.append(
            Chunk(
                doc_id=doc_id,
                seq=len(chunks),
                text=text,
                token_count=count,
                oversized=count > max_chunk_tokens,
            )
        )
        current = []
        current_tokens = 0

    for sentence in sentences:
        tokens = len(index_tokens(sentence))
        if current and current_tokens + tokens > max_chunk_tokens:
            close()
        current.append(sentence)
        current_tokens += tokens
        if current_tokens > max_chunk_tokens:
            # a single sentence over budget stands alone
            close()
    close()
    return chunks
