"""JSON-lines corpus reader.

One object per line with ``id``, ``source`` (``online``/``offline``),
``timestamp`` (ISO-8601 date or datetime) and ``text``. Offline records may
carry ``title``/``summary``/``body`` instead; the selected fields are joined
with a single space, in selector order.
"""

import json

from .errors import CorpusError, ParameterError
from .textpipe import Document, Source

ARTICLE_FIELDS = ("title", "summary", "body")


def parse_fields(selector):
    """``"title,summary"`` or ``["title", "summary"]`` -> validated field tuple."""
    if isinstance(selector, str):
        selector = [s.strip() for s in selector.replace("+", ",").split(",") if s.strip()]
    fields = tuple(selector)
    bad = [f for f in fields if f not in ARTICLE_FIELDS]
    if not fields or bad:
        raise ParameterError(f"offline field selector must use {ARTICLE_FIELDS}, got {selector!r}")
    return fields


def record_to_document(rec, fields=("title",), line=None):
    if not isinstance(rec, dict):
        raise CorpusError("record is not a JSON object", line)
    for key in ("id", "source", "timestamp"):
        if key not in rec:
            raise CorpusError(f"missing field {key!r}", line)
    try:
        source = Source(rec["source"])
    except ValueError:
        raise CorpusError(f"unknown source {rec['source']!r} (expected 'online' or 'offline')", line) from None

    if source is Source.OFFLINE and any(f in rec for f in ARTICLE_FIELDS):
        parts = [str(rec[f]) for f in fields if rec.get(f)]
        if not parts and "text" not in rec:
            raise CorpusError(f"offline record has none of the selected fields {fields}", line)
        text = " ".join(parts) if parts else str(rec["text"])
    elif "text" in rec:
        text = str(rec["text"])
    else:
        raise CorpusError("missing field 'text'", line)

    try:
        return Document(str(rec["id"]), source, rec["timestamp"], text)
    except ParameterError as exc:
        raise CorpusError(str(exc), line) from None


def load_corpus(path, fields=("title",)):
    """Read and validate a corpus file; duplicate ids are rejected."""
    fields = parse_fields(fields)
    docs, seen = [], set()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                rec = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"malformed JSON ({exc.msg})", lineno) from None
            doc = record_to_document(rec, fields, lineno)
            if doc.id in seen:
                raise CorpusError(f"duplicate id {doc.id!r}", lineno)
            seen.add(doc.id)
            docs.append(doc)
    return docs


def documents_from_records(records, fields=("title",)):
    """In-memory counterpart of :func:`load_corpus`."""
    fields = parse_fields(fields)
    docs, seen = [], set()
    for i, rec in enumerate(records, start=1):
        doc = record_to_document(rec, fields, i)
        if doc.id in seen:
            raise CorpusError(f"duplicate id {doc.id!r}", i)
        seen.add(doc.id)
        docs.append(doc)
    return docs
