"""Parsers turning public dataset formats into a Corpus.

Supported formats:

* edge lists (SNAP style): ``src<ws>dst`` integer pairs, ``#`` comments;
* transaction lines: whitespace-separated integer item ids, one basket per line;
* MovieLens ratings: ``user::movie::rating::timestamp``;
* Jester dense CSV: first column is the user's rating count, 99 marks unrated.

Ratings are binarized at ingest: MovieLens keeps ratings >= threshold
(default 4), Jester keeps ratings strictly above threshold (default 0).
All external tokens are kept as canonical strings in the Vocabulary.
"""

from __future__ import annotations

import csv

import numpy as np

from .corpus import Corpus, Vocabulary


class ParseError(ValueError):
    """Malformed input line; the message carries the 1-based line number."""


def _finalize(order_keys, per_key_tokens, token_to_id, id_to_token):
    """Assemble Corpus + Vocabulary from per-key token sets (internal)."""
    counts = np.zeros(len(id_to_token), dtype=np.int64)
    records = []
    for key in order_keys:
        toks = per_key_tokens[key]
        if not toks:
            continue
        ids = np.array(sorted(token_to_id[t] for t in toks), dtype=np.int64)
        counts[ids] += 1
        records.append(ids)
    vocab = Vocabulary(token_to_id, id_to_token, counts)
    return Corpus(len(id_to_token), records, vocab)


def read_edge_list(lines, edges: str = "out") -> Corpus:
    """Parse a directed edge list into one record per node.

    ``edges`` selects which adjacency forms a node's record: its out-neighbors
    (``"out"``, default), in-neighbors (``"in"``), or both (``"both"``, i.e.
    treating the graph as undirected). Nodes with an empty adjacency yield no
    record but still occupy a vocabulary slot, so the item space covers every
    node mentioned in the file.
    """
    if edges not in ("out", "in", "both"):
        raise ValueError(f"edges must be 'out', 'in' or 'both', got {edges!r}")
    token_to_id: dict[str, int] = {}
    id_to_token: list[str] = []
    adjacency: dict[str, set[str]] = {}
    source_order: list[str] = []

    def intern(tok: str) -> str:
        if tok not in token_to_id:
            token_to_id[tok] = len(id_to_token)
            id_to_token.append(tok)
        return tok

    def attach(src: str, dst: str) -> None:
        if src not in adjacency:
            adjacency[src] = set()
            source_order.append(src)
        adjacency[src].add(dst)

    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"line {lineno}: expected 'src dst', got {line!r}")
        try:
            src = str(int(parts[0]))
            dst = str(int(parts[1]))
        except ValueError:
            raise ParseError(f"line {lineno}: non-integer node id in {line!r}") from None
        intern(src)
        intern(dst)
        if edges in ("out", "both"):
            attach(src, dst)
        if edges in ("in", "both"):
            attach(dst, src)

    return _finalize(source_order, adjacency, token_to_id, id_to_token)


def read_transactions(lines) -> Corpus:
    """Parse one transaction per line; duplicate items collapse, empty lines skipped."""
    token_to_id: dict[str, int] = {}
    id_to_token: list[str] = []
    raw_records: list[set[str]] = []
    for lineno, line in enumerate(lines, start=1):
        parts = line.split()
        if not parts:
            continue
        toks = set()
        for p in parts:
            try:
                tok = str(int(p))
            except ValueError:
                raise ParseError(
                    f"line {lineno}: non-integer item token {p!r}"
                ) from None
            toks.add(tok)
            if tok not in token_to_id:
                token_to_id[tok] = len(id_to_token)
                id_to_token.append(tok)
        raw_records.append(toks)

    order = range(len(raw_records))
    return _finalize(order, dict(enumerate(raw_records)), token_to_id, id_to_token)


def read_movielens(lines, threshold: float = 4.0) -> Corpus:
    """Parse ``user::movie::rating::timestamp`` lines into per-user records.

    A user's record holds the movies rated at or above ``threshold``; users
    with no qualifying rating are dropped, and only qualifying movies enter
    the vocabulary.
    """
    token_to_id: dict[str, int] = {}
    id_to_token: list[str] = []
    per_user: dict[str, set[str]] = {}
    user_order: list[str] = []
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split("::")
        if len(parts) != 4:
            raise ParseError(
                f"line {lineno}: expected user::movie::rating::timestamp, got {line!r}"
            )
        user, movie = parts[0], parts[1]
        try:
            rating = float(parts[2])
        except ValueError:
            raise ParseError(f"line {lineno}: bad rating {parts[2]!r}") from None
        if rating < threshold:
            continue
        if user not in per_user:
            per_user[user] = set()
            user_order.append(user)
        per_user[user].add(movie)
        if movie not in token_to_id:
            token_to_id[movie] = len(id_to_token)
            id_to_token.append(movie)

    return _finalize(user_order, per_user, token_to_id, id_to_token)


def read_jester(lines, threshold: float = 0.0) -> Corpus:
    """Parse the Jester dense rating matrix into per-user joke records.

    Row layout follows the public distribution: the first column is the
    user's rating count, the remaining columns are jokes, and 99 is the
    unrated sentinel. A user's record holds the jokes rated strictly above
    ``threshold``; users with none are dropped. Every joke column occupies a
    vocabulary slot regardless of how often it is kept.
    """
    token_to_id: dict[str, int] = {}
    id_to_token: list[str] = []
    per_user: dict[int, set[str]] = {}
    user_order: list[int] = []
    n_jokes = None
    for lineno, row in enumerate(csv.reader(lines), start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        if n_jokes is None:
            n_jokes = len(row) - 1
            if n_jokes < 1:
                raise ParseError(f"line {lineno}: row has no joke columns")
            for j in range(n_jokes):
                tok = str(j)
                token_to_id[tok] = j
                id_to_token.append(tok)
        elif len(row) - 1 != n_jokes:
            raise ParseError(
                f"line {lineno}: expected {n_jokes + 1} columns, got {len(row)}"
            )
        kept = set()
        for j, cell in enumerate(row[1:]):
            try:
                rating = float(cell)
            except ValueError:
                raise ParseError(f"line {lineno}: bad rating {cell!r}") from None
            if rating == 99.0:
                continue
            if rating > threshold:
                kept.add(str(j))
        if kept:
            per_user[lineno] = kept
            user_order.append(lineno)

    if n_jokes is None:
        return Corpus(0, [], Vocabulary({}, [], np.zeros(0, dtype=np.int64)))
    return _finalize(user_order, per_user, token_to_id, id_to_token)


def filter_top_items(corpus: Corpus, m: int) -> Corpus:
    """Keep only the ``m`` most frequent items, dropping emptied records.

    Frequency is record membership; ties break toward the lower item id.
    Surviving items are re-indexed densely, preserving their original order.
    """
    if m < 1:
        raise ValueError("m must be positive")
    freq = corpus.item_frequencies()
    order = np.lexsort((np.arange(corpus.n_items), -freq))
    keep = np.sort(order[:m])
    new_id = np.full(corpus.n_items, -1, dtype=np.int64)
    new_id[keep] = np.arange(keep.size)

    records = []
    for rec in corpus.records:
        mapped = new_id[rec]
        mapped = mapped[mapped >= 0]
        if mapped.size:
            records.append(np.sort(mapped))

    vocab = None
    if corpus.vocabulary is not None:
        tokens = [corpus.vocabulary.id_to_token[int(i)] for i in keep]
        counts = np.zeros(keep.size, dtype=np.int64)
        for rec in records:
            counts[rec] += 1
        vocab = Vocabulary({t: i for i, t in enumerate(tokens)}, tokens, counts)
    return Corpus(keep.size, records, vocab)
