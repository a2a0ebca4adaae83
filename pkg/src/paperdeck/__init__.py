"""paperdeck: extractive paper-to-slides generation.

Parse a structured paper XML, score each sentence's salience with a
trained MLP, select sentences under size and redundancy constraints,
organize them into titled clusters with attached graphics, and emit a
two-level bullet deck.  Includes labeling, training, and ROUGE tooling.
"""

from .document import (
    GraphicElement,
    Paper,
    RefMark,
    Section,
    Sentence,
    SlideText,
    parse_paper,
    parse_slides,
    sentence_stream,
)
from .embedding import (
    CacheEmbedder,
    HashedEmbedder,
    ProviderConfig,
    cosine,
    embed,
    fnv1a_64,
    make_embedder,
    write_vector_cache,
)
from .features import (
    CorpusStats,
    FeatureExtractor,
    FeatureMatrix,
    FeatureSchema,
    extract_features,
    noun_phrases,
    tokenize,
)
from .metrics import RougeScore, evaluate_corpus, rouge_n, rouge_su4
from .organize import Cluster, Outline, attach_graphics, cluster_sentences, title_cluster
from .pipeline import GenerationResult, RunConfig, generate_deck
from .render import LayoutConfig, emit_deck
from .salience import (
    MlpSalienceRegressor,
    gradient_check,
    label_salience,
    load_model,
    save_model,
    train_on_pairs,
)
from .selection import (
    Selection,
    SelectionProblem,
    SizeRegressor,
    load_size_model,
    paper_char_count,
    paper_size_features,
    predict_size,
    save_size_model,
    select_exact,
    select_heuristic,
    train_size_model,
)

__version__ = "0.1.0"

__all__ = [
    "CacheEmbedder",
    "Cluster",
    "CorpusStats",
    "FeatureExtractor",
    "FeatureMatrix",
    "FeatureSchema",
    "GenerationResult",
    "GraphicElement",
    "HashedEmbedder",
    "LayoutConfig",
    "MlpSalienceRegressor",
    "Outline",
    "Paper",
    "ProviderConfig",
    "RefMark",
    "RougeScore",
    "RunConfig",
    "Section",
    "Selection",
    "SelectionProblem",
    "Sentence",
    "SizeRegressor",
    "SlideText",
    "attach_graphics",
    "cluster_sentences",
    "cosine",
    "embed",
    "emit_deck",
    "evaluate_corpus",
    "extract_features",
    "fnv1a_64",
    "generate_deck",
    "gradient_check",
    "label_salience",
    "load_model",
    "load_size_model",
    "make_embedder",
    "noun_phrases",
    "paper_char_count",
    "paper_size_features",
    "parse_paper",
    "parse_slides",
    "predict_size",
    "rouge_n",
    "rouge_su4",
    "save_model",
    "save_size_model",
    "select_exact",
    "select_heuristic",
    "sentence_stream",
    "title_cluster",
    "tokenize",
    "train_on_pairs",
    "train_size_model",
    "write_vector_cache",
]
