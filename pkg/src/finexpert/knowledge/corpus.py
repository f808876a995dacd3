"""Corpus file reading.

One JSON record per line with fields id / kind / title / date / source /
body; kind is one of news, report_abstract, other. Malformed lines are
counted and skipped, never fatal.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path


class KnowledgeError(Exception):
    pass


class EmptyCorpus(KnowledgeError):
    pass


class IndexNotLoaded(KnowledgeError):
    pass


KINDS = ("news", "report_abstract", "other")


@dataclass(frozen=True)
class Document:
    id: str
    kind: str
    title: str
    date: str
    source: str
    body: str

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind,
            "title": self.title,
            "date": self.date,
            "source": self.source,
            "body": self.body,
        }


def parse_document(line: str) -> Document | None:
    try:
        record = json.loads(line)
    except json.JSONDecodeError:
        return None
    if not isinstance(record, dict):
        return None
    doc_id = record.get("id")
    body = record.get("body")
    kind = record.get("kind", "other")
    if not doc_id or not isinstance(doc_id, str):
        return None
    if not body or not isinstance(body, str):
        return None
    if kind not in KINDS:
        return None
    return Document(
        id=doc_id,
        kind=kind,
        title=str(record.get("title", "")),
        date=str(record.get("date", "")),
        source=str(record.get("source", "")),
        body=body,
    )


def read_corpus(path: str | Path) -> tuple[list[Document], int]:
    """Returns (documents, malformed line count). Raises EmptyCorpus when no
    valid record survives."""
    documents: list[Document] = []
    seen: set[str] = set()
    malformed = 0
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            if not line.strip():
                continue
            doc = parse_document(line)
            if doc is None or doc.id in seen:
                malformed += 1
                continue
            seen.add(doc.id)
            documents.append(doc)
    if not documents:
        raise EmptyCorpus(f"no valid documents in {path}")
    return documents, malformed
