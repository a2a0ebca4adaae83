"""Shared tokenizer, kept dependency-free so every module can use it."""

import re

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercase and split on maximal runs of non-alphanumeric characters.

    >>> tokenize("The cat, sat!")
    ['the', 'cat', 'sat']
    >>> tokenize("TF-IdF 2.5x")
    ['tf', 'idf', '2', '5x']
    """
    return _TOKEN_RE.findall(text.lower())
