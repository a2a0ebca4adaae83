"""ROUGE-1, ROUGE-2, and ROUGE-SU4 with clipped multiset counting.

No stemming and no stopword removal; precision is the clipped n-gram (or
unigram + skip-bigram) overlap over the candidate's feature count, recall
over the reference's, and F1 their harmonic mean.  ROUGE-SU4 uses ordered
skip-bigrams with at most 4 intervening tokens skipped (index difference
at most 5) and counts unigrams directly in the same feature multiset.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from ._text import tokenize
from .errors import EmptyCorpus

SU4_MAX_INDEX_GAP = 5  # skip-bigram with at most 4 skipped tokens


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float
    metric: str


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def _score(cand_counts: Counter, ref_counts: Counter, metric: str) -> RougeScore:
    overlap = sum((cand_counts & ref_counts).values())
    cand_total = sum(cand_counts.values())
    ref_total = sum(ref_counts.values())
    precision = overlap / cand_total if cand_total else 0.0
    recall = overlap / ref_total if ref_total else 0.0
    return RougeScore(
        precision=precision, recall=recall, f1=_f1(precision, recall), metric=metric
    )


def _ngram_counts(tokens, n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(candidate, reference, n: int) -> RougeScore:
    """Clipped n-gram overlap F1 for n in {1, 2}."""
    if n not in (1, 2):
        raise ValueError(f"rouge_n supports n in {{1, 2}}, got {n}")
    return _score(
        _ngram_counts(candidate, n), _ngram_counts(reference, n), f"R{n}"
    )


def _su4_counts(tokens) -> Counter:
    counts = Counter()
    for i, tok in enumerate(tokens):
        counts[(tok,)] += 1
        for j in range(i + 1, min(i + 1 + SU4_MAX_INDEX_GAP, len(tokens))):
            counts[(tok, tokens[j])] += 1
    return counts


def rouge_su4(candidate, reference) -> RougeScore:
    """Unigram + skip-bigram overlap F1 (gap of at most 4 skipped tokens)."""
    return _score(_su4_counts(candidate), _su4_counts(reference), "SU4")


def evaluate_corpus(pairs) -> dict[str, float]:
    """Mean R1/R2/SU4 F1 over (candidate text, reference text) pairs."""
    pairs = list(pairs)
    if not pairs:
        raise EmptyCorpus("no pairs to evaluate")
    totals = {"rouge_1": 0.0, "rouge_2": 0.0, "rouge_su4": 0.0}
    for candidate_text, reference_text in pairs:
        cand = tokenize(candidate_text)
        ref = tokenize(reference_text)
        totals["rouge_1"] += rouge_n(cand, ref, 1).f1
        totals["rouge_2"] += rouge_n(cand, ref, 2).f1
        totals["rouge_su4"] += rouge_su4(cand, ref).f1
    return {key: value / len(pairs) for key, value in totals.items()}


def format_report(rows) -> str:
    """Aligned table with columns Algorithm / Rouge 1 / Rouge 2 / Rouge SU4.

    ``rows`` holds (name, means-dict) entries; scores print as percentages.
    """
    header = ("Algorithm", "Rouge 1", "Rouge 2", "Rouge SU4")
    table = [header]
    for name, means in rows:
        table.append(
            (
                name,
                f"{100.0 * means['rouge_1']:.2f}",
                f"{100.0 * means['rouge_2']:.2f}",
                f"{100.0 * means['rouge_su4']:.2f}",
            )
        )
    widths = [max(len(row[col]) for row in table) for col in range(len(header))]
    lines = [
        "  ".join(cell.ljust(widths[col]) for col, cell in enumerate(row)).rstrip()
        for row in table
    ]
    return "\n".join(lines)
