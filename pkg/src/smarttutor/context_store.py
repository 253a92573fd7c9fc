"""Context-specific document store for the tutor.

Two retrieval modes over the same corpus: exact match on problem index
(instructor-precompiled records) and cosine similarity search over an
embedding index of free-form context documents.
"""

from __future__ import annotations

import hashlib
import math
import re
import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional

from .errors import DimensionMismatch, DuplicateIndexError, ParseError

DEFAULT_EMBED_DIM = 256
DEFAULT_TOP_K = 4
DEFAULT_SCORE_FLOOR = 0.15


class DocSource(Enum):
    PROBLEM_NOTES = "ProblemNotes"
    LECTURE_NOTES = "LectureNotes"
    CONCEPT_EXPLAINER = "ConceptExplainer"


class RetrievalMode(Enum):
    EXACT = "Exact"
    SIMILARITY = "Similarity"


@dataclass(frozen=True)
class ProblemRecord:
    problem_index: str
    statement: str
    reference_solution: str
    method_notes: str = ""
    topic_tags: tuple[str, ...] = ()
    chapter: str = ""


@dataclass(frozen=True)
class ContextDocument:
    doc_id: str
    body: str
    source: DocSource
    linked_problem: Optional[str] = None


@dataclass(frozen=True)
class EmbeddingVector:
    values: tuple[float, ...]
    norm: float

    @property
    def searchable(self) -> bool:
        # zero-norm sentinel (empty text) is excluded from cosine search
        return self.norm > 0.0

    @staticmethod
    def of(values: Iterable[float]) -> "EmbeddingVector":
        vals = tuple(float(v) for v in values)
        return EmbeddingVector(vals, math.sqrt(sum(v * v for v in vals)))


@dataclass(frozen=True)
class RetrievalResult:
    document: ContextDocument
    score: float
    mode: RetrievalMode


@dataclass
class Corpus:
    records: dict[str, ProblemRecord] = field(default_factory=dict)
    documents: dict[str, ContextDocument] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.records)


def lookup_exact(corpus: Corpus, problem_index: str) -> Optional[ProblemRecord]:
    """Exact-match retrieval; absence is a value, not an error."""
    return corpus.records.get(problem_index)


# ---------------------------------------------------------------------------
# Corpus file format
#
# Records start with "@problem <index>" or "@doc <doc_id> <source>" and end
# with "@end".  Field blocks begin with "#statement", "#reference_solution",
# "#method_notes", "#tags", "#body"; the block body runs until the next "#"
# or "@" line.  Unknown field blocks are an error.
# ---------------------------------------------------------------------------

_PROBLEM_FIELDS = {"statement", "reference_solution", "method_notes", "tags", "chapter"}
_DOC_FIELDS = {"body", "linked_problem"}


def load_corpus(path: str) -> Corpus:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_corpus(fh.read())


def parse_corpus(text: str) -> Corpus:
    corpus = Corpus()
    lines = text.splitlines()
    i = 0
    while i < len(lines):
        line = lines[i].strip()
        if not line:
            i += 1
            continue
        if line.startswith("@problem "):
            i = _parse_problem(lines, i, corpus)
        elif line.startswith("@doc "):
            i = _parse_doc(lines, i, corpus)
        else:
            raise ParseError(f"expected record header, got {line!r}", f"line {i + 1}")
    return corpus


def _parse_fields(lines: list[str], i: int, allowed: set[str]) -> tuple[dict[str, str], int]:
    header_line = i + 1
    fields: dict[str, str] = {}
    i += 1
    while i < len(lines):
        line = lines[i]
        stripped = line.strip()
        if stripped == "@end":
            return fields, i + 1
        if stripped.startswith("@"):
            raise ParseError(f"record starting at line {header_line} missing @end", f"line {i + 1}")
        if stripped.startswith("#"):
            name = stripped[1:].strip()
            if name not in allowed:
                raise ParseError(f"unknown field block #{name}", f"line {i + 1}")
            body_lines = []
            i += 1
            while i < len(lines):
                nxt = lines[i].strip()
                if nxt.startswith("#") or nxt.startswith("@"):
                    break
                body_lines.append(lines[i])
                i += 1
            fields[name] = "\n".join(body_lines).strip()
        else:
            raise ParseError(f"unexpected line {stripped!r}", f"line {i + 1}")
    raise ParseError(f"record starting at line {header_line} missing @end", f"line {header_line}")


def _parse_problem(lines: list[str], i: int, corpus: Corpus) -> int:
    header = lines[i].strip()
    index = header[len("@problem "):].strip()
    if not index:
        raise ParseError("empty problem index", f"line {i + 1}")
    fields, nxt = _parse_fields(lines, i, _PROBLEM_FIELDS)
    if index in corpus.records:
        raise DuplicateIndexError(f"duplicate problem index {index!r}")
    tags = tuple(t.strip() for t in fields.get("tags", "").split(",") if t.strip())
    corpus.records[index] = ProblemRecord(
        problem_index=index,
        statement=fields.get("statement", ""),
        reference_solution=fields.get("reference_solution", ""),
        method_notes=fields.get("method_notes", ""),
        topic_tags=tags,
        chapter=fields.get("chapter", ""),
    )
    return nxt


def _parse_doc(lines: list[str], i: int, corpus: Corpus) -> int:
    header = lines[i].strip()
    parts = header.split()
    if len(parts) != 3:
        raise ParseError("@doc header needs <doc_id> <source>", f"line {i + 1}")
    _, doc_id, source_name = parts
    try:
        source = DocSource(source_name)
    except ValueError:
        raise ParseError(f"unknown doc source {source_name!r}", f"line {i + 1}")
    fields, nxt = _parse_fields(lines, i, _DOC_FIELDS)
    if doc_id in corpus.documents:
        raise DuplicateIndexError(f"duplicate doc_id {doc_id!r}")
    body = fields.get("body", "")
    if not body:
        raise ParseError(f"doc {doc_id!r} has empty body", f"line {i + 1}")
    corpus.documents[doc_id] = ContextDocument(
        doc_id=doc_id,
        body=body,
        source=source,
        linked_problem=fields.get("linked_problem") or None,
    )
    return nxt


def serialize_corpus(corpus: Corpus) -> str:
    """Inverse of parse_corpus up to whitespace normalization."""
    out = []
    for rec in corpus.records.values():
        out.append(f"@problem {rec.problem_index}")
        out.append("#statement")
        out.append(rec.statement)
        out.append("#reference_solution")
        out.append(rec.reference_solution)
        if rec.method_notes:
            out.append("#method_notes")
            out.append(rec.method_notes)
        if rec.topic_tags:
            out.append("#tags")
            out.append(", ".join(rec.topic_tags))
        if rec.chapter:
            out.append("#chapter")
            out.append(rec.chapter)
        out.append("@end")
        out.append("")
    for doc in corpus.documents.values():
        out.append(f"@doc {doc.doc_id} {doc.source.value}")
        out.append("#body")
        out.append(doc.body)
        if doc.linked_problem:
            out.append("#linked_problem")
            out.append(doc.linked_problem)
        out.append("@end")
        out.append("")
    return "\n".join(out)


# ---------------------------------------------------------------------------
# Embedding
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"[a-z0-9]+")


class LocalHashEmbedder:
    """Deterministic offline embedder: hash tokens into D buckets, L2-normalize.

    Same text always maps to the same vector, across processes, so retrieval
    tests are reproducible without a remote embedding service.
    """

    def __init__(self, dim: int = DEFAULT_EMBED_DIM):
        if dim < 1:
            raise ValueError("embedding dimension must be positive")
        self.dim = dim

    def embed(self, text: str) -> EmbeddingVector:
        buckets = [0.0] * self.dim
        for token in _TOKEN_RE.findall(text.lower()):
            digest = hashlib.sha1(token.encode("utf-8")).digest()
            idx = int.from_bytes(digest[:4], "big") % self.dim
            buckets[idx] += 1.0
        norm = math.sqrt(sum(b * b for b in buckets))
        if norm == 0.0:
            # zero-text sentinel; flagged non-searchable by the index
            return EmbeddingVector(tuple(buckets), 0.0)
        return EmbeddingVector(tuple(b / norm for b in buckets), 1.0)


def embed(text: str, embedder) -> EmbeddingVector:
    return embedder.embed(text)


# ---------------------------------------------------------------------------
# Vector index: exact cosine full scan, ties broken by ascending doc_id
# ---------------------------------------------------------------------------


class VectorIndex:
    def __init__(self, dim: int = DEFAULT_EMBED_DIM):
        self.dim = dim
        self._entries: dict[str, tuple[ContextDocument, EmbeddingVector]] = {}
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._entries)

    def upsert(self, doc: ContextDocument, vector: EmbeddingVector) -> None:
        if len(vector.values) != self.dim:
            raise DimensionMismatch(
                f"vector dimension {len(vector.values)} != index dimension {self.dim}"
            )
        with self._lock:
            self._entries[doc.doc_id] = (doc, vector)

    def upsert_document(self, doc: ContextDocument, embedder) -> None:
        self.upsert(doc, embedder.embed(doc.body))

    def search_similar(
        self,
        query: EmbeddingVector,
        k: int,
        min_score: Optional[float] = None,
    ) -> list[RetrievalResult]:
        if len(query.values) != self.dim:
            raise DimensionMismatch(
                f"query dimension {len(query.values)} != index dimension {self.dim}"
            )
        if k < 1:
            raise ValueError("k must be >= 1")
        if not query.searchable:
            return []
        with self._lock:
            snapshot = list(self._entries.values())
        scored = []
        for doc, vec in snapshot:
            if not vec.searchable:
                continue
            dot = sum(a * b for a, b in zip(query.values, vec.values))
            score = dot / (query.norm * vec.norm)
            if min_score is not None and score < min_score:
                continue
            scored.append((doc, score))
        scored.sort(key=lambda pair: (-pair[1], pair[0].doc_id))
        return [
            RetrievalResult(document=doc, score=score, mode=RetrievalMode.SIMILARITY)
            for doc, score in scored[:k]
        ]


def build_index(corpus: Corpus, embedder) -> VectorIndex:
    index = VectorIndex(dim=embedder.dim)
    for doc in corpus.documents.values():
        index.upsert_document(doc, embedder)
    return index
