"""Small input-validation helpers used across estimators and metric functions."""

from sklearn.exceptions import NotFittedError


def check_positive_int(value, name: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return value


def check_non_negative_int(value, name: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value < 0:
        raise ValueError(f"{name} must be a non-negative integer, got {value!r}")
    return value


def check_fitted(estimator, attribute: str) -> None:
    if getattr(estimator, attribute, None) is None:
        raise NotFittedError(
            f"This {type(estimator).__name__} instance is not fitted yet; "
            "call fit before using this method."
        )


def as_token_lists(corpus_like) -> list[list[str]]:
    """Accept a Corpus or a plain list of token lists and return token lists."""
    documents = getattr(corpus_like, "documents", None)
    if documents is not None:
        return [doc.tokens for doc in documents]
    return [list(doc) for doc in corpus_like]
