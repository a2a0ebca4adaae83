import math

import numpy as np
import pytest

from paperdeck import (
    CorpusStats,
    FeatureExtractor,
    FeatureSchema,
    HashedEmbedder,
    cosine,
    extract_features,
    noun_phrases,
    parse_paper,
    sentence_stream,
    tokenize,
)
from paperdeck.errors import InternalInvariantError, LengthMismatch, SchemaViolation
from paperdeck.features import (
    SCALAR_FEATURE_NAMES,
    parse_depth,
    sub_sentence_count,
    verb_phrase_count,
)


class TestTokenize:
    def test_punctuation_split(self):
        assert tokenize("The cat, sat!") == ["the", "cat", "sat"]

    def test_empty(self):
        assert tokenize("") == []

    def test_mixed_alphanumerics(self):
        assert tokenize("TF-IdF 2.5x") == ["tf", "idf", "2", "5x"]


class TestNounPhrases:
    def test_det_adj_noun(self, default_stats):
        lex = default_stats.pos_lexicon
        assert noun_phrases(["the", "quick", "fox", "runs"], lex) == [
            ["the", "quick", "fox"]
        ]

    def test_all_verbs(self, default_stats):
        assert noun_phrases(["is", "was", "runs"], default_stats.pos_lexicon) == []

    def test_two_phrases(self, default_stats):
        lex = default_stats.pos_lexicon
        got = noun_phrases(["deep", "model", "beats", "strong", "baseline"], lex)
        assert got == [["deep", "model"], ["strong", "baseline"]]

    def test_unknown_words_tag_as_noun(self):
        assert noun_phrases(["flurble", "wombat"], {}) == [["flurble", "wombat"]]

    def test_det_alone_is_not_a_phrase(self, default_stats):
        assert noun_phrases(["the", "is"], default_stats.pos_lexicon) == []


class TestScalarHelpers:
    def test_verb_phrase_runs(self, default_stats):
        lex = default_stats.pos_lexicon
        assert verb_phrase_count(["is", "running", "fox", "was", "seen"], lex) == 2
        assert verb_phrase_count(["fox", "den"], lex) == 0

    def test_sub_sentence_count(self):
        assert sub_sentence_count("plain sentence") == 1
        assert sub_sentence_count("a; b; c") == 3
        assert sub_sentence_count("we run, and we jump, but we rest") == 3

    def test_parse_depth_proxy(self):
        assert parse_depth(["simple", "words"]) == 1
        assert parse_depth(["that", "which", "because"]) == 4
        assert parse_depth(["that"] * 40) == 10  # capped


class TestCorpusStats:
    def test_default_idf_is_zero(self, default_stats):
        assert default_stats.idf("anything") == 0.0

    def test_idf_formula(self):
        stats = CorpusStats(doc_count=10, doc_frequency={"seen": 4})
        assert stats.idf("seen") == pytest.approx(math.log(10 / 5))
        assert stats.idf("unseen") == pytest.approx(math.log(10))

    def test_save_load_round_trip(self, tmp_path):
        stats = CorpusStats(doc_count=5, doc_frequency={"a": 2, "b": 5})
        path = tmp_path / "stats.tsv"
        stats.save(path)
        loaded = CorpusStats.load(path)
        assert loaded.doc_count == 5
        assert loaded.doc_frequency == {"a": 2, "b": 5}

    def test_df_above_doc_count_rejected(self):
        with pytest.raises(SchemaViolation):
            CorpusStats(doc_count=1, doc_frequency={"a": 2})

    def test_missing_header_rejected(self, tmp_path):
        path = tmp_path / "stats.tsv"
        path.write_text("a\t1\n", encoding="utf-8")
        with pytest.raises(SchemaViolation):
            CorpusStats.load(path)


def _names():
    return {name: i for i, name in enumerate(SCALAR_FEATURE_NAMES)}


class TestExtractFeatures:
    def test_single_sentence_paper(self, embedder):
        paper = parse_paper(
            "<paper><title>T</title><abstract><s>only one sentence</s></abstract></paper>"
        )
        matrix = FeatureExtractor(embedder=embedder).transform(paper)
        idx = _names()
        row = matrix.values[0]
        for name in ("sim_prev_1", "sim_prev_2", "sim_prev_3",
                     "sim_next_1", "sim_next_2", "sim_next_3"):
            assert row[idx[name]] == 0.0
        assert row[idx["position_in_section"]] == 1.0

    def test_ref_count_features(self, embedder):
        paper = parse_paper(
            '<paper><title>T</title><section name="S" kind="model">'
            '<s>See <ref type="figure" target="fig1"/> and '
            '<ref type="table" target="tab2"/>.</s></section></paper>'
        )
        row = FeatureExtractor(embedder=embedder).transform(paper).values[0]
        idx = _names()
        got = tuple(
            row[idx[name]]
            for name in ("ref_count_literature", "ref_count_table",
                         "ref_count_figure", "ref_count_equation")
        )
        assert got == (0.0, 1.0, 1.0, 0.0)

    def test_stopword_pct_and_tf_idf_oracle(self, embedder):
        # 10 tokens of which 4 are stopwords
        paper = parse_paper(
            '<paper><title>T</title><section name="S" kind="model">'
            "<s>the cat and the dog sat on warm green grass</s></section></paper>"
        )
        stats = CorpusStats(doc_count=2, doc_frequency={"cat": 1, "dog": 2})
        row = FeatureExtractor(embedder=embedder, stats=stats).transform(paper).values[0]
        idx = _names()
        assert row[idx["stopword_pct"]] == pytest.approx(0.4)

        # hand-computed TF/IdF on the toy 2-document corpus
        tokens = tokenize("the cat and the dog sat on warm green grass")
        counts = {t: tokens.count(t) for t in tokens}
        total = len(tokens)
        tf_mean = sum(counts[t] / total for t in tokens) / len(tokens)
        df = {"cat": 1, "dog": 2}
        idf_mean = sum(
            math.log(2 / (1 + df.get(t, 0))) for t in tokens
        ) / len(tokens)
        assert row[idx["mean_tf"]] == pytest.approx(tf_mean, abs=1e-12)
        assert row[idx["mean_idf"]] == pytest.approx(idf_mean, abs=1e-12)

    def test_one_hot_exclusive_and_other_all_zero(self, embedder):
        paper = parse_paper(
            "<paper><title>T</title>"
            "<abstract><s>zero</s></abstract>"
            '<section name="A" kind="results"><s>one</s></section>'
            '<section name="B" kind="weird"><s>two</s></section></paper>'
        )
        matrix = FeatureExtractor(embedder=embedder).transform(paper)
        one_hot = matrix.values[:, 4:11]
        assert one_hot[0].sum() == 1.0 and one_hot[0][0] == 1.0  # abstract
        assert one_hot[1].sum() == 1.0 and one_hot[1][4] == 1.0  # results
        assert one_hot[2].sum() == 0.0  # other -> all zeros

    def test_position_feature_range_and_last_sentence(self, sample_paper, embedder):
        matrix = FeatureExtractor(embedder=embedder).transform(sample_paper)
        idx = _names()
        positions = matrix.values[:, idx["position_in_section"]]
        assert np.all(positions > 0.0)
        assert np.all(positions <= 1.0)
        for section in sample_paper.sections:
            last = section.sentences[-1].global_index
            assert positions[last] == 1.0

    def test_contextual_features_match_direct_recomputation(
        self, sample_paper, embedder
    ):
        sentences = sentence_stream(sample_paper)
        vectors = embedder.embed([s.text for s in sentences])
        matrix = FeatureExtractor(embedder=embedder).transform(
            sample_paper, sentence_vectors=vectors
        )
        idx = _names()
        offsets = {
            "sim_prev_1": -1, "sim_prev_2": -2, "sim_prev_3": -3,
            "sim_next_1": 1, "sim_next_2": 2, "sim_next_3": 3,
        }
        n = len(sentences)
        for i in range(n):
            for name, delta in offsets.items():
                j = i + delta
                expected = cosine(vectors[i], vectors[j]) if 0 <= j < n else 0.0
                assert matrix.values[i, idx[name]] == expected

    def test_semantic_features_match_direct_recomputation(
        self, sample_paper, embedder
    ):
        sentences = sentence_stream(sample_paper)
        vectors = embedder.embed([s.text for s in sentences])
        matrix = FeatureExtractor(embedder=embedder).transform(
            sample_paper, sentence_vectors=vectors
        )
        idx = _names()
        title_vec = embedder.embed_one(sample_paper.title)
        n_abstract = len(sample_paper.abstract_sentences)
        centroid = vectors[:n_abstract].mean(axis=0)
        centroid = centroid / np.linalg.norm(centroid)
        for i, sent in enumerate(sentences):
            assert matrix.values[i, idx["sim_title"]] == cosine(vectors[i], title_vec)
            assert matrix.values[i, idx["sim_abstract"]] == cosine(
                vectors[i], centroid
            )
            if sent.section_index < 0:
                assert matrix.values[i, idx["sim_section_title"]] == 0.0
            else:
                section_vec = embedder.embed_one(
                    sample_paper.sections[sent.section_index].name
                )
                assert matrix.values[i, idx["sim_section_title"]] == cosine(
                    vectors[i], section_vec
                )

    def test_embedding_block_is_the_sentence_vector(self, sample_paper, embedder):
        sentences = sentence_stream(sample_paper)
        vectors = embedder.embed([s.text for s in sentences])
        matrix = FeatureExtractor(embedder=embedder).transform(
            sample_paper, sentence_vectors=vectors
        )
        np.testing.assert_array_equal(matrix.values[:, 30:], vectors)

    def test_width_constant_and_schema(self, sample_paper, embedder):
        matrix = FeatureExtractor(embedder=embedder).transform(sample_paper)
        assert matrix.values.shape == (13, 30 + embedder.dim)
        assert matrix.schema.scalar_names == SCALAR_FEATURE_NAMES
        assert matrix.schema.width == 30 + embedder.dim

    def test_schema_round_trip(self, embedder):
        schema = FeatureSchema(SCALAR_FEATURE_NAMES, embedder.dim)
        assert FeatureSchema.from_dict(schema.to_dict()) == schema

    def test_length_mismatch(self, sample_paper, embedder):
        with pytest.raises(LengthMismatch):
            FeatureExtractor(embedder=embedder).transform(
                sample_paper, sentence_vectors=np.zeros((2, embedder.dim))
            )

    def test_nan_vectors_rejected(self, sample_paper, embedder):
        bad = np.full((13, embedder.dim), np.nan)
        with pytest.raises(InternalInvariantError):
            FeatureExtractor(embedder=embedder).transform(
                sample_paper, sentence_vectors=bad
            )

    def test_functional_wrapper(self, sample_paper, embedder):
        sentences = sentence_stream(sample_paper)
        vectors = embedder.embed([s.text for s in sentences])
        a = extract_features(sample_paper, vectors, embedder=embedder)
        b = FeatureExtractor(embedder=embedder).transform(
            sample_paper, sentence_vectors=vectors
        )
        np.testing.assert_array_equal(a.values, b.values)

    def test_sklearn_params_surface(self):
        extractor = FeatureExtractor(embedder=HashedEmbedder(dim=32))
        params = extractor.get_params()
        assert set(params) == {"embedder", "stats"}
        assert extractor.fit() is extractor
