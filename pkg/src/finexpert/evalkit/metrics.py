"""Text metrics: normalized exact-match accuracy, token-multiset F1, and
ROUGE-L.

Tokenization for the overlap metrics treats every CJK character as one token
and ASCII alphanumeric runs as lowercased words, the usual convention for
scoring Chinese generation.
"""

from __future__ import annotations

from collections import Counter


class LengthMismatch(Exception):
    pass


_FULLWIDTH = {code: code - 0xFEE0 for code in range(0xFF01, 0xFF5F)}
_FULLWIDTH[0x3000] = 0x20  # ideographic space

_CJK_RANGES = ((0x4E00, 0x9FFF), (0x3400, 0x4DBF), (0xF900, 0xFAFF))


def normalize_text(text: str) -> str:
    """Trim, unify full-width ASCII to half-width, casefold."""
    return text.translate(_FULLWIDTH).strip().casefold()


def _is_cjk(ch: str) -> bool:
    code = ord(ch)
    return any(lo <= code <= hi for lo, hi in _CJK_RANGES)


def overlap_tokens(text: str) -> list[str]:
    """CJK characters as single tokens plus ASCII alphanumeric words."""
    tokens: list[str] = []
    word: list[str] = []
    for ch in normalize_text(text):
        if _is_cjk(ch):
            if word:
                tokens.append("".join(word))
                word = []
            tokens.append(ch)
        elif ch.isascii() and ch.isalnum():
            word.append(ch)
        else:
            if word:
                tokens.append("".join(word))
                word = []
    if word:
        tokens.append("".join(word))
    return tokens


def score_accuracy(preds: list[str], golds: list[str]) -> float:
    """Exact-match fraction after normalization."""
    if len(preds) != len(golds) or not preds:
        raise LengthMismatch(f"{len(preds)} predictions vs {len(golds)} golds")
    hits = sum(1 for p, g in zip(preds, golds) if normalize_text(p) == normalize_text(g))
    return hits / len(preds)


def score_f1(pred: str, gold: str) -> dict[str, float]:
    """Token-multiset overlap F1."""
    pred_tokens = overlap_tokens(pred)
    gold_tokens = overlap_tokens(gold)
    if not pred_tokens and not gold_tokens:
        return {"precision": 1.0, "recall": 1.0, "f1": 1.0}
    if not pred_tokens or not gold_tokens:
        return {"precision": 0.0, "recall": 0.0, "f1": 0.0}
    overlap = sum((Counter(pred_tokens) & Counter(gold_tokens)).values())
    precision = overlap / len(pred_tokens)
    recall = overlap / len(gold_tokens)
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return {"precision": precision, "recall": recall, "f1": f1}


def _lcs(a: list[str], b: list[str]) -> int:
    if not a or not b:
        return 0
    previous = [0] * (len(b) + 1)
    for i in range(1, len(a) + 1):
        current = [0] * (len(b) + 1)
        for j in range(1, len(b) + 1):
            if a[i - 1] == b[j - 1]:
                current[j] = previous[j - 1] + 1
            else:
                current[j] = max(previous[j], current[j - 1])
        previous = current
    return previous[-1]


def score_rouge_l(pred: str, gold: str) -> dict[str, float]:
    """ROUGE-L with beta=1 over the same tokens as score_f1."""
    pred_tokens = overlap_tokens(pred)
    gold_tokens = overlap_tokens(gold)
    if not pred_tokens and not gold_tokens:
        return {"precision": 1.0, "recall": 1.0, "f": 1.0}
    if not pred_tokens or not gold_tokens:
        return {"precision": 0.0, "recall": 0.0, "f": 0.0}
    lcs = _lcs(pred_tokens, gold_tokens)
    precision = lcs / len(pred_tokens)
    recall = lcs / len(gold_tokens)
    f = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return {"precision": precision, "recall": recall, "f": f}
