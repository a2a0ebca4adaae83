"""Per-sentence feature extraction: surface, semantic, and contextual groups.

Every sentence of a parsed paper maps to a row of 30 scalar features in a
frozen order (see ``SCALAR_FEATURE_NAMES``) followed by the sentence's own
embedding components.  The scalar block covers reference counts, the
section one-hot, position within the section, phrase/clause counts, length
statistics, TF/IdF means, and cosine similarities with the title, the own
section title, the abstract centroid, and the six nearest neighbours in
document order.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources

import numpy as np
from sklearn.base import BaseEstimator

from ._text import tokenize  # noqa: F401  (public surface of this module)
from .document import Paper, sentence_stream
from .embedding import HashedEmbedder, cosine
from .errors import DimensionMismatch, InternalInvariantError, LengthMismatch, SchemaViolation

SCALAR_FEATURE_NAMES = (
    "ref_count_literature",
    "ref_count_table",
    "ref_count_figure",
    "ref_count_equation",
    "section_abstract",
    "section_introduction",
    "section_background",
    "section_model",
    "section_results",
    "section_conclusion",
    "section_acknowledgement",
    "position_in_section",
    "noun_phrase_count",
    "verb_phrase_count",
    "sub_sentence_count",
    "stopword_pct",
    "char_length",
    "token_count",
    "parse_depth",
    "mean_tf",
    "mean_idf",
    "sim_title",
    "sim_section_title",
    "sim_abstract",
    "sim_prev_1",
    "sim_prev_2",
    "sim_prev_3",
    "sim_next_1",
    "sim_next_2",
    "sim_next_3",
)

SECTION_ONE_HOT = (
    "abstract",
    "introduction",
    "background",
    "model",
    "results",
    "conclusion",
    "acknowledgement",
)

POS_TAGS = ("NOUN", "VERB", "ADJ", "DET", "OTHER")

# Deterministic stand-in for parse-tree depth: 1 + subordinator count, capped.
SUBORDINATORS = frozenset(
    {"that", "which", "because", "although", "while", "when", "if", "since",
     "whereas", "who", "whose", "where"}
)
PARSE_DEPTH_CAP = 10

_CLAUSE_MARKERS = (", and", ", but", ", or")


def _data_text(name: str) -> str:
    return resources.files("paperdeck").joinpath(f"data/{name}").read_text("utf-8")


def load_stopwords() -> frozenset[str]:
    """The bundled English stopword list (part of the feature contract)."""
    return frozenset(w for w in _data_text("stopwords.txt").split() if w)


def load_pos_lexicon() -> dict[str, str]:
    """The bundled word->tag lexicon; words not listed tag as NOUN."""
    lexicon = {}
    for lineno, line in enumerate(_data_text("pos_lexicon.tsv").splitlines(), 1):
        if not line.strip():
            continue
        word, _, tag = line.partition("\t")
        if tag not in POS_TAGS:
            raise SchemaViolation(f"pos lexicon line {lineno}: bad tag {tag!r}")
        lexicon[word] = tag
    return lexicon


def pos_tags(tokens, lexicon) -> list[str]:
    return [lexicon.get(tok, "NOUN") for tok in tokens]


def noun_phrases(tokens, lexicon) -> list[list[str]]:
    """Maximal token runs matching DET? ADJ* NOUN+ (at least one NOUN)."""
    tags = pos_tags(tokens, lexicon)
    phrases = []
    i, n = 0, len(tokens)
    while i < n:
        j = i
        if j < n and tags[j] == "DET":
            j += 1
        while j < n and tags[j] == "ADJ":
            j += 1
        k = j
        while k < n and tags[k] == "NOUN":
            k += 1
        if k > j:
            phrases.append(list(tokens[i:k]))
            i = k
        else:
            i += 1
    return phrases


def verb_phrase_count(tokens, lexicon) -> int:
    """Number of maximal runs of VERB-tagged tokens."""
    count = 0
    prev_verb = False
    for tag in pos_tags(tokens, lexicon):
        is_verb = tag == "VERB"
        if is_verb and not prev_verb:
            count += 1
        prev_verb = is_verb
    return count


def sub_sentence_count(text: str) -> int:
    """1 + semicolons + ', and' / ', but' / ', or' occurrences."""
    return 1 + text.count(";") + sum(text.count(m) for m in _CLAUSE_MARKERS)


def parse_depth(tokens) -> int:
    depth = 1 + sum(1 for tok in tokens if tok in SUBORDINATORS)
    return min(depth, PARSE_DEPTH_CAP)


@dataclass
class CorpusStats:
    """Document frequencies plus the stopword and POS lexica.

    TF is always computed from the paper at hand; IdF needs corpus-level
    document frequencies: idf(w) = ln(doc_count / (1 + df(w))), unseen
    words using df = 0.
    """

    doc_count: int = 1
    doc_frequency: dict[str, int] = field(default_factory=dict)
    stopwords: frozenset[str] = field(default_factory=load_stopwords)
    pos_lexicon: dict[str, str] = field(default_factory=load_pos_lexicon)

    def __post_init__(self):
        if self.doc_count < 1:
            raise SchemaViolation("corpus stats need doc_count >= 1")
        if not self.stopwords:
            raise SchemaViolation("stopword set must be non-empty")
        bad = [w for w, df in self.doc_frequency.items() if df > self.doc_count]
        if bad:
            raise SchemaViolation(
                f"doc frequency exceeds doc_count for {bad[:3]!r}"
            )

    @classmethod
    def default(cls) -> "CorpusStats":
        return cls()

    @classmethod
    def load(cls, path) -> "CorpusStats":
        """Read a stats TSV: header ``#docs=N`` then ``word<TAB>df`` rows."""
        doc_frequency: dict[str, int] = {}
        with open(path, encoding="utf-8") as handle:
            header = handle.readline().strip()
            if not header.startswith("#docs="):
                raise SchemaViolation(f"stats file {path} missing '#docs=' header")
            doc_count = int(header[len("#docs=") :])
            for lineno, line in enumerate(handle, start=2):
                line = line.rstrip("\n")
                if not line:
                    continue
                word, _, df = line.partition("\t")
                if not df:
                    raise SchemaViolation(f"stats file line {lineno}: missing df")
                doc_frequency[word] = int(df)
        return cls(doc_count=doc_count, doc_frequency=doc_frequency)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(f"#docs={self.doc_count}\n")
            for word in sorted(self.doc_frequency):
                handle.write(f"{word}\t{self.doc_frequency[word]}\n")

    def idf(self, word: str) -> float:
        return math.log(self.doc_count / (1 + self.doc_frequency.get(word, 0)))


@dataclass(frozen=True)
class FeatureSchema:
    scalar_names: tuple[str, ...]
    embedding_dim: int

    @property
    def width(self) -> int:
        return len(self.scalar_names) + self.embedding_dim

    def to_dict(self) -> dict:
        return {
            "scalar_names": list(self.scalar_names),
            "embedding_dim": self.embedding_dim,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureSchema":
        return cls(
            scalar_names=tuple(d["scalar_names"]),
            embedding_dim=int(d["embedding_dim"]),
        )


@dataclass
class FeatureMatrix:
    values: np.ndarray  # (n_sentences, schema.width)
    schema: FeatureSchema

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2 or self.values.shape[1] != self.schema.width:
            raise InternalInvariantError(
                f"feature matrix shape {self.values.shape} does not match "
                f"schema width {self.schema.width}"
            )
        if not np.all(np.isfinite(self.values)):
            raise InternalInvariantError("feature matrix contains NaN or inf")


def _renormalized_mean(vectors: np.ndarray) -> np.ndarray:
    mean = vectors.mean(axis=0)
    norm = np.linalg.norm(mean)
    if norm == 0.0:
        return mean
    return mean / norm


class FeatureExtractor(BaseEstimator):
    """Transforms a parsed paper into its per-sentence feature matrix.

    Stateless in the sklearn sense (``fit`` is a no-op); the embedding
    provider and corpus statistics are constructor parameters so the
    extractor composes with pipeline tooling via ``get_params``.
    """

    def __init__(self, embedder=None, stats=None):
        self.embedder = embedder
        self.stats = stats

    def fit(self, X=None, y=None):
        return self

    def transform(self, paper: Paper, sentence_vectors=None) -> FeatureMatrix:
        sentences = sentence_stream(paper)
        stats = self.stats if self.stats is not None else CorpusStats.default()

        if sentence_vectors is not None:
            vectors = np.asarray(sentence_vectors, dtype=np.float64)
            if len(vectors) != len(sentences):
                raise LengthMismatch(
                    f"{len(vectors)} embeddings for {len(sentences)} sentences"
                )
        else:
            vectors = None

        embedder = self.embedder
        if embedder is None:
            dim = vectors.shape[1] if vectors is not None and len(vectors) else None
            embedder = HashedEmbedder(dim=dim) if dim else HashedEmbedder()
        if vectors is None:
            vectors = embedder.embed([s.text for s in sentences])
        elif len(vectors) and vectors.shape[1] != embedder.dim:
            raise DimensionMismatch(
                f"sentence vectors have dim {vectors.shape[1]}, "
                f"embedder produces {embedder.dim}"
            )

        schema = FeatureSchema(
            scalar_names=SCALAR_FEATURE_NAMES, embedding_dim=embedder.dim
        )
        n = len(sentences)
        if n == 0:
            return FeatureMatrix(np.zeros((0, schema.width)), schema)

        title_vec = embedder.embed_one(paper.title)
        section_vecs = [embedder.embed_one(sec.name) for sec in paper.sections]
        n_abstract = len(paper.abstract_sentences)
        if n_abstract:
            abstract_vec = _renormalized_mean(vectors[:n_abstract])
        else:
            abstract_vec = np.zeros(embedder.dim)

        paper_tokens = Counter()
        for s in sentences:
            paper_tokens.update(s.tokens)
        total_tokens = sum(paper_tokens.values())

        section_sizes = [len(sec.sentences) for sec in paper.sections]
        one_hot_index = {kind: i for i, kind in enumerate(SECTION_ONE_HOT)}

        rows = np.zeros((n, schema.width), dtype=np.float64)
        for i, sent in enumerate(sentences):
            row = rows[i]
            for mark in sent.ref_marks:
                if mark.kind == "literature":
                    row[0] += 1.0
                elif mark.kind == "table":
                    row[1] += 1.0
                elif mark.kind == "figure":
                    row[2] += 1.0
                elif mark.kind == "equation":
                    row[3] += 1.0

            if sent.section_index < 0:
                kind = "abstract"
                section_len = n_abstract
            else:
                kind = paper.sections[sent.section_index].kind
                section_len = section_sizes[sent.section_index]
            hot = one_hot_index.get(kind)
            if hot is not None:
                row[4 + hot] = 1.0
            row[11] = sent.position_in_section / section_len

            tokens = sent.tokens
            row[12] = len(noun_phrases(tokens, stats.pos_lexicon))
            row[13] = verb_phrase_count(tokens, stats.pos_lexicon)
            row[14] = sub_sentence_count(sent.text)
            row[15] = sum(1 for t in tokens if t in stats.stopwords) / max(
                1, len(tokens)
            )
            row[16] = len(sent.text)
            row[17] = len(tokens)
            row[18] = parse_depth(tokens)
            if tokens:
                row[19] = sum(
                    paper_tokens[t] / total_tokens for t in tokens
                ) / len(tokens)
                row[20] = sum(stats.idf(t) for t in tokens) / len(tokens)

            vec = vectors[i]
            row[21] = cosine(vec, title_vec)
            if sent.section_index >= 0:
                row[22] = cosine(vec, section_vecs[sent.section_index])
            row[23] = cosine(vec, abstract_vec)
            for slot, delta in enumerate((-1, -2, -3, 1, 2, 3)):
                j = i + delta
                if 0 <= j < n:
                    row[24 + slot] = cosine(vec, vectors[j])
            row[30:] = vec
        return FeatureMatrix(rows, schema)


def extract_features(
    paper: Paper, embeddings, stats: CorpusStats | None = None, embedder=None
) -> FeatureMatrix:
    """Functional wrapper around :class:`FeatureExtractor`.

    ``embeddings[i]`` must correspond to sentence ``global_index i``.  The
    embedder (defaulting to a hashed provider of matching dim) supplies the
    title, section-title, and phrase vectors that the matrix also needs.
    """
    extractor = FeatureExtractor(embedder=embedder, stats=stats)
    return extractor.transform(paper, sentence_vectors=embeddings)
