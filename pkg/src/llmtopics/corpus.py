"""Document collections: loading, preprocessing, category filtering, subset splitting.

The preprocessing pipeline is the standard short-text recipe: lowercase,
drop words shorter than a minimum length, drop words whose corpus-wide
occurrence count falls under a minimum frequency, and drop documents that
end up empty. All values are immutable after construction and safe to
share between threads.
"""

from __future__ import annotations

import random
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path

from sklearn.base import BaseEstimator, TransformerMixin

from .errors import EmptyCorpus, SubsetTooLarge, UnknownCategory
from .validation import check_fitted, check_positive_int

FILTER_ORDERS = ("length_first", "frequency_first")


@dataclass(frozen=True)
class RawDocument:
    """One unprocessed input document, optionally tagged with a category label."""

    text: str
    category: str | None = None

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("RawDocument text must be non-empty after trimming")


@dataclass(frozen=True)
class Document:
    """A preprocessed document: an ordered tuple of lowercase tokens."""

    tokens: tuple[str, ...]
    category: str | None = None

    def __post_init__(self):
        if not self.tokens:
            raise ValueError("Document must contain at least one token")


@dataclass(frozen=True)
class CorpusStats:
    document_count: int
    mean_text_length: float
    vocabulary_size: int


class Corpus:
    """An ordered, immutable collection of preprocessed documents.

    The vocabulary maps each word to its document frequency and is always
    the exact union of tokens over the stored documents. Vocabulary
    insertion order is first-appearance order, so it is reproducible
    across processes.
    """

    def __init__(self, documents: Sequence[Document]):
        docs = tuple(documents)
        if not docs:
            raise EmptyCorpus("corpus must contain at least one document")
        vocabulary: dict[str, int] = {}
        total_tokens = 0
        for doc in docs:
            total_tokens += len(doc.tokens)
            seen = set()
            for word in doc.tokens:
                if word not in seen:
                    seen.add(word)
                    vocabulary[word] = vocabulary.get(word, 0) + 1
        self.documents = docs
        self.vocabulary = vocabulary
        self.stats = CorpusStats(
            document_count=len(docs),
            mean_text_length=total_tokens / len(docs),
            vocabulary_size=len(vocabulary),
        )

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)

    def __getitem__(self, index: int) -> Document:
        return self.documents[index]

    def token_lists(self) -> list[list[str]]:
        return [list(doc.tokens) for doc in self.documents]

    def categories(self) -> list[str]:
        """Distinct category labels in first-appearance order."""
        labels: dict[str, None] = {}
        for doc in self.documents:
            if doc.category is not None and doc.category not in labels:
                labels[doc.category] = None
        return list(labels)

    def category_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for doc in self.documents:
            if doc.category is not None:
                counts[doc.category] = counts.get(doc.category, 0) + 1
        return counts


@dataclass(frozen=True)
class SubsetPlan:
    """A seeded partition of corpus indices into equal-size subsets.

    The remainder that does not fill a whole subset is truncated, never
    silently folded into a short subset.
    """

    subset_size: int
    subsets: tuple[tuple[int, ...], ...]
    truncated_indices: tuple[int, ...]

    @property
    def truncated_count(self) -> int:
        return len(self.truncated_indices)

    def subset_documents(self, corpus: Corpus, subset_index: int) -> list[Document]:
        return [corpus.documents[i] for i in self.subsets[subset_index]]


def tokenize(text: str, strip_edge_punctuation: bool = True) -> list[str]:
    """Lowercase and whitespace-split, optionally stripping non-alphanumeric
    characters from token edges (inner punctuation is kept)."""
    tokens = []
    for piece in text.lower().split():
        if strip_edge_punctuation:
            start, end = 0, len(piece)
            while start < end and not piece[start].isalnum():
                start += 1
            while end > start and not piece[end - 1].isalnum():
                end -= 1
            piece = piece[start:end]
        if piece:
            tokens.append(piece)
    return tokens


def _as_raw_documents(raw: Iterable) -> list[RawDocument]:
    out = []
    for item in raw:
        out.append(item if isinstance(item, RawDocument) else RawDocument(str(item)))
    return out


class CorpusPreprocessor(TransformerMixin, BaseEstimator):
    """Learn a pruned vocabulary on fit, filter documents on transform.

    Parameters
    ----------
    min_freq : int, default 5
        Minimum corpus-wide occurrence count a word needs to stay in the
        vocabulary. Counts total token occurrences, not document frequency.
    min_word_len : int, default 3
        Minimum word length in characters; shorter words are removed.
    filter_order : {"length_first", "frequency_first"}, default "length_first"
        Which filter runs first during fit. With occurrence counting both
        orders provably keep the same vocabulary; the parameter exists so
        the choice is explicit and reported.
    strip_edge_punctuation : bool, default True
        Strip non-alphanumeric characters from token edges while tokenizing.
    """

    def __init__(self, min_freq=5, min_word_len=3, filter_order="length_first",
                 strip_edge_punctuation=True):
        self.min_freq = min_freq
        self.min_word_len = min_word_len
        self.filter_order = filter_order
        self.strip_edge_punctuation = strip_edge_punctuation

    def _check_params(self):
        check_positive_int(self.min_freq, "min_freq")
        check_positive_int(self.min_word_len, "min_word_len")
        if self.filter_order not in FILTER_ORDERS:
            raise ValueError(f"filter_order must be one of {FILTER_ORDERS}")

    def _tokenized(self, raw: list[RawDocument]) -> list[tuple[list[str], str | None]]:
        return [
            (tokenize(doc.text, self.strip_edge_punctuation), doc.category)
            for doc in raw
        ]

    def fit(self, X, y=None):
        self._check_params()
        raw = _as_raw_documents(X)
        if not raw:
            raise EmptyCorpus("cannot fit a preprocessor on zero documents")
        tokenized = self._tokenized(raw)

        counts: dict[str, int] = {}
        if self.filter_order == "length_first":
            for tokens, _ in tokenized:
                for word in tokens:
                    if len(word) >= self.min_word_len:
                        counts[word] = counts.get(word, 0) + 1
            vocabulary = {w: c for w, c in counts.items() if c >= self.min_freq}
        else:
            for tokens, _ in tokenized:
                for word in tokens:
                    counts[word] = counts.get(word, 0) + 1
            vocabulary = {
                w: c for w, c in counts.items()
                if c >= self.min_freq and len(w) >= self.min_word_len
            }
        self.vocabulary_ = vocabulary
        return self

    def transform(self, X) -> Corpus:
        check_fitted(self, "vocabulary_")
        raw = _as_raw_documents(X)
        documents = []
        for tokens, category in self._tokenized(raw):
            kept = tuple(w for w in tokens if w in self.vocabulary_)
            if kept:
                documents.append(Document(tokens=kept, category=category))
        if not documents:
            raise EmptyCorpus("every document became empty after filtering")
        return Corpus(documents)


def preprocess(raw, min_freq: int = 5, min_word_len: int = 3, *,
               filter_order: str = "length_first",
               strip_edge_punctuation: bool = True) -> Corpus:
    """One-shot preprocessing: fit the vocabulary on `raw` and filter it."""
    preprocessor = CorpusPreprocessor(
        min_freq=min_freq,
        min_word_len=min_word_len,
        filter_order=filter_order,
        strip_edge_punctuation=strip_edge_punctuation,
    )
    return preprocessor.fit_transform(raw)


def split_subsets(corpus: Corpus, subset_size: int, seed: int) -> SubsetPlan:
    """Shuffle document indices with `seed` and partition them into
    floor(N / subset_size) subsets of exactly subset_size; the remainder
    is truncated."""
    check_positive_int(subset_size, "subset_size")
    n = len(corpus)
    if n < subset_size:
        raise SubsetTooLarge(
            f"subset_size {subset_size} exceeds corpus size {n}"
        )
    indices = list(range(n))
    random.Random(seed).shuffle(indices)
    n_subsets = n // subset_size
    subsets = tuple(
        tuple(indices[i * subset_size:(i + 1) * subset_size])
        for i in range(n_subsets)
    )
    truncated = tuple(indices[n_subsets * subset_size:])
    return SubsetPlan(subset_size=subset_size, subsets=subsets, truncated_indices=truncated)


def filter_by_category(corpus: Corpus, category: str) -> Corpus:
    """Corpus restricted to documents carrying `category`; vocabulary is
    recomputed over the subset."""
    docs = [doc for doc in corpus.documents if doc.category == category]
    if not docs:
        raise UnknownCategory(f"no document carries category {category!r}")
    return Corpus(docs)


def read_documents(path, labeled: bool = False, labels_path=None) -> list[RawDocument]:
    """Read raw documents from disk.

    Plain format: one document per line, blank lines skipped. With
    ``labeled=True`` each line is ``label<TAB>text``. Alternatively a
    sidecar ``labels_path`` file supplies one label per (non-blank) line.
    """
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    sidecar = None
    if labels_path is not None:
        sidecar = [ln.strip() for ln in Path(labels_path).read_text(encoding="utf-8").splitlines()]

    docs = []
    kept_line_numbers = []
    for i, line in enumerate(lines):
        if not line.strip():
            continue
        kept_line_numbers.append(i)
        if labeled:
            label, sep, text = line.partition("\t")
            if not sep:
                raise ValueError(f"{path}: line {i + 1} has no tab separator")
            docs.append(RawDocument(text=text, category=label.strip()))
        else:
            docs.append(RawDocument(text=line))

    if sidecar is not None:
        if len(sidecar) != len(docs):
            raise ValueError(
                f"label file {labels_path} has {len(sidecar)} labels for {len(docs)} documents"
            )
        docs = [RawDocument(text=d.text, category=label) for d, label in zip(docs, sidecar)]
    return docs
