"""Indexing tokenizer: character bigrams over CJK runs plus lowercased
whitespace words over Latin/digit runs. Identical text always yields an
identical term multiset."""

from __future__ import annotations

_CJK_RANGES = (
    (0x4E00, 0x9FFF),
    (0x3400, 0x4DBF),
    (0xF900, 0xFAFF),
)


def _is_cjk(ch: str) -> bool:
    code = ord(ch)
    return any(lo <= code <= hi for lo, hi in _CJK_RANGES)


def _is_word_char(ch: str) -> bool:
    return ch.isascii() and (ch.isalnum() or ch == "_")


def index_tokens(text: str) -> list[str]:
    tokens: list[str] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if _is_cjk(ch):
            start = i
            while i < n and _is_cjk(text[i]):
                i += 1
            run = text[start:i]
            if len(run) == 1:
                tokens.append(run)
            else:
                tokens.extend(run[j : j + 2] for j in range(len(run) - 1))
        elif _is_word_char(ch):
            start = i
            while i < n and _is_word_char(text[i]):
                i += 1
            tokens.append(text[start:i].lower())
        else:
            i += 1
    return tokens
