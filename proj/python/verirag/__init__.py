"""Python surface for the verirag core.

Structured results cross the extension boundary as JSON; the wrappers here
decode them so callers deal in plain lists and dicts.
"""

import json

from ._core import (
    Bm25Index,
    accuracy,
    evidence_score,
    extract_rationale,
    faithfulness,
    micro_f1,
    overall_verdict,
    overlap,
    should_rewrite,
    tokenize,
)
from . import _core

__all__ = [
    "Bm25Index",
    "accuracy",
    "answer_query",
    "build_index",
    "cohens_kappa",
    "evidence_score",
    "extract_rationale",
    "faithfulness",
    "micro_f1",
    "overall_verdict",
    "overlap",
    "parse_final_answer",
    "per_category_f1",
    "retrieve",
    "segment",
    "should_rewrite",
    "tokenize",
]


def build_index(documents):
    """Build a BM25 index from dicts with doc_id, body and optional title /
    external_id keys."""
    return Bm25Index.build_json(json.dumps(list(documents)))


def retrieve(index, query, k=20):
    """Top-k passages as dicts with doc_id, text and bm25_score."""
    return json.loads(index.retrieve_json(query, k))


def segment(rationale):
    """Atomic statements of a rationale: dicts with index, text and
    sentence_index."""
    return json.loads(_core.segment_json(rationale))


def parse_final_answer(raw, dataset="bioasq"):
    """Parse a generation into {label, parse_ok, letter_word_conflict}."""
    return json.loads(_core.parse_final_answer_json(raw, dataset))


def cohens_kappa(a, b):
    """Chance-corrected agreement between two equal-length label lists.

    Labels drawn entirely from {CORRECT, INCORRECT} are scored in the binary
    space, otherwise in the full eight-way taxonomy.
    """
    return json.loads(_core.cohens_kappa_json(list(a), list(b)))


def per_category_f1(reference, candidate):
    """Per-category precision/recall/F1 rows, reference as ground truth."""
    return json.loads(_core.per_category_f1_json(list(reference), list(candidate)))


def answer_query(question, documents, dataset="bioasq", k=20, m=5, rerank=True, seed=7):
    """Run the full pipeline over in-memory documents with the deterministic
    built-in clients; returns the complete trace as a dict."""
    return json.loads(
        _core.answer_query_json(question, json.dumps(list(documents)), dataset, k, m, rerank, seed)
    )
