import math

import pytest

from qppfuse.corpus import Document, Query, build_index
from qppfuse.post_retrieval import (
    POST_PREDICTORS,
    RelevanceModel,
    clarity,
    compute_post_scores,
    nqc,
    rm1,
    rm_rerank_similarity,
    uef,
    wig,
)
from qppfuse.retrieval import DegenerateQueryError, RankedList, retrieve

TOY_PARAMS = dict(k_fb=10, wig_k=5, nqc_k=10, uef_m=10)


def _docs(*texts):
    return [Document(f"d{i+1}", t) for i, t in enumerate(texts)]


def _toy_ranked(index, queries):
    return {q.query_id: retrieve(index, q, k=1000, mu=1000) for q in queries}


@pytest.fixture(scope="module")
def ranked_lists(toy_index, toy_queries):
    return _toy_ranked(toy_index, toy_queries)


class TestRelevanceModel:
    def test_mass_sums_to_one_on_toy(self, toy_index, ranked_lists):
        for ranked in ranked_lists.values():
            model = rm1(toy_index, ranked, k_fb=10, mu=1000)
            assert model.total_mass() == pytest.approx(1.0, abs=1e-9)

    def test_single_feedback_doc(self):
        # with one doc the model is that doc's smoothed distribution,
        # restricted to its vocabulary and renormalized
        index = build_index(_docs("a a b", "c c c c"))
        ranked = retrieve(index, Query("q", ("a",)), mu=1.0)
        model = rm1(index, ranked, k_fb=1, mu=1.0)
        assert set(model.probs) == {"a", "b"}
        p = {t: (tf + 1.0 * index.cf[t] / 7) / (3 + 1.0) for t, tf in [("a", 2), ("b", 1)]}
        z = sum(p.values())
        assert model.probs["a"] == pytest.approx(p["a"] / z, abs=1e-12)
        assert model.probs["b"] == pytest.approx(p["b"] / z, abs=1e-12)

    def test_duplicate_docs_match_single_doc_model(self):
        index = build_index(_docs("a a b", "a a b", "c c"))
        ranked = retrieve(index, Query("q", ("a",)))
        assert len(ranked) == 2
        two = rm1(index, ranked, k_fb=2)
        one = rm1(index, ranked, k_fb=1)
        assert set(two.probs) == set(one.probs)
        for term in two.probs:
            assert two.probs[term] == pytest.approx(one.probs[term], abs=1e-12)

    def test_empty_ranked_list_rejected(self, toy_index):
        with pytest.raises(ValueError):
            rm1(toy_index, RankedList("q", ()))


class TestClarity:
    def test_zero_when_model_equals_collection(self):
        # a single-document corpus: the top document IS the collection, so
        # its smoothed model equals the collection model and the KL is 0
        index = build_index(_docs("a a b c"))
        ranked = retrieve(index, Query("q", ("a",)))
        assert clarity(index, ranked, k_fb=5) == pytest.approx(0.0, abs=1e-12)

    def test_concentrated_model_hand_value(self, toy_index):
        # engineered model: all mass on one term with cf/|C| = 1/100
        index = build_index(_docs("t " + " ".join(["x"] * 99)))
        model = RelevanceModel({"t": 1.0}, 1)
        ranked = RankedList("q", (("d1", -1.0),))
        score = clarity(index, ranked, model=model)
        assert score == pytest.approx(math.log2(100), abs=1e-12)
        assert score == pytest.approx(6.6439, abs=1e-4)

    def test_nonnegative_on_toy(self, toy_index, ranked_lists):
        for ranked in ranked_lists.values():
            assert clarity(toy_index, ranked, k_fb=10) >= -1e-9

    def test_invariant_under_corpus_duplication(self, toy_docs, toy_queries):
        index = build_index(toy_docs)
        doubled = build_index(toy_docs + [Document(d.doc_id + "_copy", d.text) for d in toy_docs])
        for query in toy_queries[:4]:
            a = clarity(index, retrieve(index, query, k=1000), k_fb=10_000)
            b = clarity(doubled, retrieve(doubled, query, k=1000), k_fb=10_000)
            assert b == pytest.approx(a, abs=1e-9)


class TestWig:
    def test_zero_gap(self):
        index = build_index(_docs("t " + " ".join(["x"] * 99)))
        cl = math.log(index.cf["t"] / index.total_tokens)
        ranked = RankedList("q", (("d1", cl), ("d2", cl)))
        assert wig(index, ["t"], ranked, k=5) == pytest.approx(0.0, abs=1e-12)

    def test_hand_value(self):
        index = build_index(_docs("t " + " ".join(["x"] * 99)))
        cl = math.log(0.01)
        ranked = RankedList("q", (("d1", -4.4331),))
        expected = -4.4331 - cl
        assert wig(index, ["t"], ranked, k=5) == pytest.approx(expected, abs=1e-12)
        assert wig(index, ["t"], ranked, k=5) == pytest.approx(0.1721, abs=1e-3)

    def test_query_length_scaling(self):
        # four query terms with identical statistics: the same per-doc gap
        # is scaled by 1/sqrt(4) instead of 1/sqrt(1)
        docs = _docs("a b c d " + " ".join(["x"] * 96))
        index = build_index(docs)
        cl1 = math.log(index.cf["a"] / index.total_tokens)
        cl4 = 4 * cl1
        delta = 2.5
        one = wig(index, ["a"], RankedList("q", (("d1", cl1 + delta),)))
        four = wig(index, ["a", "b", "c", "d"], RankedList("q", (("d1", cl4 + delta),)))
        assert four == pytest.approx(one / 2, rel=1e-12)

    def test_invariant_under_corpus_duplication(self, toy_docs, toy_queries):
        index = build_index(toy_docs)
        doubled = build_index(toy_docs + [Document(d.doc_id + "_copy", d.text) for d in toy_docs])
        for query in toy_queries[:4]:
            a = wig(index, query, retrieve(index, query, k=1000), k=10_000)
            b = wig(doubled, query, retrieve(doubled, query, k=1000), k=10_000)
            assert b == pytest.approx(a, abs=1e-9)


class TestNqc:
    def test_identical_scores_zero(self, toy_index):
        ranked = RankedList("q", (("d1", -2.0), ("d2", -2.0), ("d3", -2.0)))
        assert nqc(toy_index, ["galaxy"], ranked) == 0.0

    def test_formula(self, toy_index):
        ranked = RankedList("q", (("d1", -1.0), ("d2", -3.0)))
        cl = math.log(toy_index.cf["galaxy"] / toy_index.total_tokens)
        assert nqc(toy_index, ["galaxy"], ranked) == pytest.approx(1.0 / abs(cl), rel=1e-12)

    def test_single_doc_zero(self, toy_index):
        ranked = RankedList("q", (("d1", -1.0),))
        assert nqc(toy_index, ["galaxy"], ranked) == 0.0

    def test_zero_collection_likelihood_rejected(self):
        index = build_index(_docs("t t t"))
        ranked = RankedList("q", (("d1", -1.0), ("d1", -2.0)))
        with pytest.raises(DegenerateQueryError):
            nqc(index, ["t"], ranked)

    def test_nonnegative_on_toy(self, toy_index, toy_queries, ranked_lists):
        for query in toy_queries:
            assert nqc(toy_index, query, ranked_lists[query.query_id], k=10) >= 0.0

    def test_invariant_under_corpus_duplication(self, toy_docs, toy_queries):
        index = build_index(toy_docs)
        doubled = build_index(toy_docs + [Document(d.doc_id + "_copy", d.text) for d in toy_docs])
        for query in toy_queries[:4]:
            a = nqc(index, query, retrieve(index, query, k=1000), k=10_000)
            b = nqc(doubled, query, retrieve(doubled, query, k=1000), k=10_000)
            assert b == pytest.approx(a, abs=1e-9)


class TestUef:
    def test_two_docs_give_unit_similarity(self):
        # with two distinct docs any non-constant vectors correlate at +-1
        index = build_index(_docs("a a a b", "a c", "x y"))
        query = Query("q", ("a",))
        ranked = retrieve(index, query)
        assert len(ranked) == 2
        sim = rm_rerank_similarity(index, ranked, m=10, k_fb=10)
        assert abs(sim) == pytest.approx(1.0, abs=1e-12)
        for base, fn in (("NQC", nqc), ("WIG", wig)):
            value = uef(index, query, ranked, base, m=10, k_fb=10, wig_k=5, nqc_k=10)
            base_value = fn(index, query, ranked) if base == "WIG" else nqc(index, query, ranked, k=100)
            assert value == pytest.approx(sim * base_value, rel=1e-12)

    def test_identical_docs_undefined(self):
        index = build_index(_docs("a b", "a b", "z z"))
        query = Query("q", ("a",))
        ranked = retrieve(index, query)
        assert rm_rerank_similarity(index, ranked, m=10, k_fb=10) is None
        assert uef(index, query, ranked, "NQC", m=10, k_fb=10) is None

    def test_recomposition_on_toy(self, toy_index, toy_queries, ranked_lists):
        for query in toy_queries:
            ranked = ranked_lists[query.query_id]
            model = rm1(toy_index, ranked, k_fb=10, mu=1000)
            sim = rm_rerank_similarity(toy_index, ranked, m=10, k_fb=10, model=model)
            for base, base_value in (
                ("NQC", nqc(toy_index, query, ranked, k=10)),
                ("WIG", wig(toy_index, query, ranked, k=5)),
                ("Clarity", clarity(toy_index, ranked, k_fb=10, model=model)),
            ):
                value = uef(toy_index, query, ranked, base, m=10, k_fb=10,
                            wig_k=5, nqc_k=10, model=model)
                assert value == pytest.approx(sim * base_value, rel=1e-12)

    def test_kendall_similarity_option(self, toy_index, toy_queries, ranked_lists):
        query = toy_queries[0]
        ranked = ranked_lists[query.query_id]
        sim = rm_rerank_similarity(toy_index, ranked, m=10, k_fb=10, metric="kendall")
        assert sim is not None and -1.0 <= sim <= 1.0
        value = uef(toy_index, query, ranked, "NQC", m=10, k_fb=10,
                    nqc_k=10, sim_metric="kendall")
        assert value == pytest.approx(sim * nqc(toy_index, query, ranked, k=10), rel=1e-12)

    def test_unknown_similarity_metric_rejected(self, toy_index, ranked_lists):
        with pytest.raises(ValueError):
            rm_rerank_similarity(toy_index, ranked_lists["q01"], metric="cosine")

    def test_unknown_base_rejected(self, toy_index, toy_queries, ranked_lists):
        with pytest.raises(ValueError):
            uef(toy_index, toy_queries[0], ranked_lists["q01"], "SMV")


class TestComputePostScores:
    def test_canonical_names(self, toy_index, toy_queries, ranked_lists):
        scores = compute_post_scores(toy_index, toy_queries[0], ranked_lists["q01"],
                                     **TOY_PARAMS)
        assert tuple(scores.keys()) == POST_PREDICTORS

    def test_matches_individual_calls(self, toy_index, toy_queries, ranked_lists):
        query = toy_queries[3]
        ranked = ranked_lists[query.query_id]
        scores = compute_post_scores(toy_index, query, ranked, **TOY_PARAMS)
        assert scores["NQC"] == nqc(toy_index, query, ranked, k=10)
        assert scores["WIG"] == wig(toy_index, query, ranked, k=5)
        assert scores["Clarity"] == pytest.approx(
            clarity(toy_index, ranked, k_fb=10), abs=1e-12)
