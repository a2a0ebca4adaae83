"""End-to-end deck generation: parse, embed, score, select, organize, render."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .document import Paper, sentence_stream
from .embedding import HashedEmbedder, cosine
from .errors import InternalInvariantError
from .features import CorpusStats, FeatureExtractor
from .organize import Cluster, Outline, attach_graphics, cluster_sentences, title_cluster
from .render import LayoutConfig, emit_deck
from .salience import MlpSalienceRegressor
from .selection import (
    EXACT_CAP_DEFAULT,
    FEASIBILITY_TOL,
    Selection,
    SelectionProblem,
    SizeRegressor,
    paper_char_count,
    predict_size,
    select_exact,
    select_heuristic,
)


@dataclass(frozen=True)
class RunConfig:
    theta: float = 0.55
    size: int | None = None
    size_fraction: float = 0.20
    seed: int = 42
    exact_cap: int = EXACT_CAP_DEFAULT
    layout: LayoutConfig = field(default_factory=LayoutConfig)

    def __post_init__(self):
        if not (0.0 < self.size_fraction <= 1.0):
            raise ValueError("size_fraction must be in (0, 1]")
        if not (-1.0 <= self.theta <= 1.0):
            raise ValueError("theta must be in [-1, 1]")


@dataclass
class GenerationResult:
    deck: str
    selection: Selection
    outline: Outline
    warnings: list[str]
    report: dict


def similarity_matrix(vectors) -> np.ndarray:
    """Pairwise cosine matrix with an exactly-unit diagonal."""
    vectors = np.asarray(vectors, dtype=np.float64)
    n = len(vectors)
    sims = np.eye(n, dtype=np.float64)
    for i in range(n):
        for j in range(i + 1, n):
            sims[i, j] = sims[j, i] = cosine(vectors[i], vectors[j])
    return sims


def generate_deck(
    paper: Paper,
    model: MlpSalienceRegressor,
    embedder=None,
    stats: CorpusStats | None = None,
    run: RunConfig | None = None,
    size_model: SizeRegressor | None = None,
) -> GenerationResult:
    if run is None:
        run = RunConfig()
    if embedder is None:
        embedder = HashedEmbedder()

    sentences = sentence_stream(paper)
    vectors = embedder.embed([s.text for s in sentences])
    extractor = FeatureExtractor(embedder=embedder, stats=stats)
    features = extractor.transform(paper, sentence_vectors=vectors)
    scores = model.predict(features) if sentences else np.zeros(0)

    if run.size is not None:
        size = int(run.size)
    else:
        size = predict_size(paper, model=size_model, fraction=run.size_fraction)

    lengths = np.array([len(s.text) for s in sentences], dtype=np.int64)
    problem = SelectionProblem(
        lengths=lengths,
        scores=scores,
        sims=similarity_matrix(vectors),
        size=size,
        theta=run.theta,
    )
    if problem.n <= run.exact_cap:
        solver = "exact"
        selection = select_exact(problem, cap=run.exact_cap)
    else:
        solver = "heuristic"
        selection = select_heuristic(problem)

    if selection.total_length > size:
        raise InternalInvariantError("selection exceeds the size budget")
    if len(selection.chosen) >= 2 and selection.avg_similarity > run.theta + FEASIBILITY_TOL:
        raise InternalInvariantError("selection breaches the redundancy cap")

    warnings: list[str] = []
    if selection.chosen:
        stats_resolved = stats if stats is not None else CorpusStats.default()
        groups = cluster_sentences(selection.chosen, vectors)
        clusters = []
        for members in groups:
            title = title_cluster(
                [sentences[i] for i in members],
                [vectors[i] for i in members],
                embedder,
                stats_resolved.pos_lexicon,
            )
            clusters.append(Cluster(member_indices=tuple(members), title=title))
        outline = Outline(clusters=tuple(clusters))
        outline, warnings = attach_graphics(outline, paper)
        outline.validate()
    else:
        outline = Outline(clusters=())

    deck = emit_deck(outline, paper, run.layout)
    report = {
        "size": size,
        "theta": run.theta,
        "solver": solver,
        "selected_count": len(selection.chosen),
        "total_length": selection.total_length,
        "objective": selection.objective,
        "avg_similarity": selection.avg_similarity,
        "cluster_count": len(outline.clusters),
        "paper_chars": paper_char_count(paper),
        "warnings": warnings,
    }
    return GenerationResult(
        deck=deck,
        selection=selection,
        outline=outline,
        warnings=warnings,
        report=report,
    )
