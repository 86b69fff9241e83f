"""Core data model for co-occurrence records.

A record is the set of items observed together in one sample (one
transaction, one user's friend list, one user's liked movies). Records are
stored as sorted, duplicate-free int64 arrays; the array for a record is
the support of its binary indicator vector over ``n_items`` items.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .utils import as_id_array, check_sorted_unique, substream


@dataclass
class Vocabulary:
    """Mapping between external tokens and dense item ids.

    ``occurrence_count[i]`` is the number of records containing item ``i``
    (set semantics: duplicates inside one raw record count once).
    """

    token_to_id: dict[str, int]
    id_to_token: list[str]
    occurrence_count: np.ndarray

    def __post_init__(self):
        self.occurrence_count = np.asarray(self.occurrence_count, dtype=np.int64)
        if len(self.token_to_id) != len(self.id_to_token):
            raise ValueError("token_to_id and id_to_token disagree on size")
        if self.occurrence_count.shape != (len(self.id_to_token),):
            raise ValueError("occurrence_count length must equal vocabulary size")
        for i, tok in enumerate(self.id_to_token):
            if self.token_to_id.get(tok) != i:
                raise ValueError("token_to_id and id_to_token are not mutual inverses")

    def __len__(self) -> int:
        return len(self.id_to_token)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Vocabulary)
            and self.id_to_token == other.id_to_token
            and np.array_equal(self.occurrence_count, other.occurrence_count)
        )


def build_vocabulary(raw_records) -> Vocabulary:
    """Assign dense ids to tokens in first-appearance order.

    Counts use record membership: a token repeated within one raw record is
    counted once, matching the binary-vector view of a record.
    """
    token_to_id: dict[str, int] = {}
    id_to_token: list[str] = []
    counts: list[int] = []
    for raw in raw_records:
        seen = set()
        for tok in raw:
            if tok in seen:
                continue
            seen.add(tok)
            idx = token_to_id.get(tok)
            if idx is None:
                token_to_id[tok] = len(id_to_token)
                id_to_token.append(tok)
                counts.append(1)
            else:
                counts[idx] += 1
    return Vocabulary(token_to_id, id_to_token, np.array(counts, dtype=np.int64))


def make_itemset(ids, n_items: int | None = None) -> np.ndarray:
    """Sorted, deduplicated int64 id array; ids must lie in [0, n_items)."""
    arr = as_id_array(ids, n_items)
    return np.unique(arr)


@dataclass
class Corpus:
    """A set of co-occurrence records over ``n_items`` items."""

    n_items: int
    records: list[np.ndarray]
    vocabulary: Vocabulary | None = None

    def __post_init__(self):
        self.n_items = int(self.n_items)
        checked = []
        for rec in self.records:
            rec = as_id_array(rec, self.n_items, name="record")
            if rec.size == 0:
                raise ValueError("empty records are not allowed; drop them at ingest")
            check_sorted_unique(rec, name="record")
            checked.append(rec)
        self.records = checked
        if self.vocabulary is not None and len(self.vocabulary) != self.n_items:
            raise ValueError("vocabulary size must equal n_items")

    def __len__(self) -> int:
        return len(self.records)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Corpus)
            and self.n_items == other.n_items
            and len(self.records) == len(other.records)
            and all(np.array_equal(a, b) for a, b in zip(self.records, other.records))
        )

    def item_frequencies(self) -> np.ndarray:
        """Record-membership count per item."""
        freq = np.zeros(self.n_items, dtype=np.int64)
        for rec in self.records:
            freq[rec] += 1
        return freq

    def subset(self, indices) -> "Corpus":
        """Corpus over the same item space restricted to the given records."""
        return Corpus(
            self.n_items, [self.records[int(i)] for i in indices], self.vocabulary
        )


def as_corpus(X, n_items: int | None = None) -> Corpus:
    """Coerce a Corpus or an iterable of id-iterables into a Corpus.

    For raw input the item count is inferred as ``max id + 1`` unless given.
    """
    if isinstance(X, Corpus):
        return X
    records = [make_itemset(rec) for rec in X]
    if n_items is None:
        n_items = 1 + max((int(r[-1]) for r in records if r.size), default=-1)
    return Corpus(n_items, records)


@dataclass
class FoldSplit:
    """Assignment of every record to exactly one cross-validation fold."""

    fold_of_record: np.ndarray
    k_folds: int

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of_record == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of_record != fold)


def split_folds(corpus: Corpus, k_folds: int, seed: int) -> FoldSplit:
    """Random record-level fold assignment; fold sizes differ by at most one.

    A seeded uniform permutation is dealt round-robin to the folds.
    """
    n = len(corpus)
    if k_folds < 2:
        raise ValueError("k_folds must be at least 2")
    if k_folds > n:
        raise ValueError(f"k_folds={k_folds} exceeds record count {n}")
    perm = substream(seed, "split").permutation(n)
    fold_of_record = np.empty(n, dtype=np.int64)
    fold_of_record[perm] = np.arange(n) % k_folds
    return FoldSplit(fold_of_record, k_folds)


@dataclass(frozen=True, eq=False)
class MaskedRecord:
    """A test record with one held-out item: context plus ground truth."""

    context: np.ndarray
    target: int

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MaskedRecord)
            and self.target == other.target
            and np.array_equal(self.context, other.context)
        )


def mask_one_item(record: np.ndarray, seed: int) -> MaskedRecord:
    """Remove one uniformly chosen item from a record of size >= 2.

    Singleton records are excluded from test masking: an empty context makes
    the prediction task ill-posed.
    """
    record = np.asarray(record, dtype=np.int64)
    if record.size < 2:
        raise ValueError("record must contain at least 2 items to mask one")
    pos = int(substream(seed, "mask").integers(record.size))
    target = int(record[pos])
    context = np.delete(record, pos)
    return MaskedRecord(context, target)
