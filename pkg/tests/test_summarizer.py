import numpy as np
import pytest

from aspectsum import (LexRankConfig, Query, Summary, SummarizerError,
                       SummarySentence, SynthConfig, centroid_baseline,
                       extract_summary, lexrank, make_table, seed_filter_baseline,
                       select_pool, sentence_similarity, summarize)
from aspectsum.corpus import AspectSpec, Review, split_sentences
from aspectsum.synthesis import RankedSentence
from oracles import greedy_extract_oracle, lexrank_dense_oracle
from test_synthesis import constant_model, seed_detector_model, toy  # noqa: F401


def ranked(surfaces, table=None, review="r", start=0):
    out = []
    for i, s in enumerate(surfaces):
        sent = split_sentences(s)[0]
        out.append(RankedSentence(review_id=review, review_pos=0,
                                  sentence_index=start + i, surface=sent.raw,
                                  tokens=sent.tokens, score=0.0))
    return out


class TestQuery:
    def test_rejects_all_zero(self):
        with pytest.raises(SummarizerError, match="at least one"):
            Query((0, 0, 0))

    def test_rejects_non_binary(self):
        with pytest.raises(SummarizerError):
            Query((1, 2))

    def test_from_codes(self):
        q = Query.from_codes({2, 0}, 4)
        assert q.indicators == (1, 0, 1, 0)
        assert q.codes == {0, 2}

    def test_from_codes_range_check(self):
        with pytest.raises(SummarizerError, match="out of range"):
            Query.from_codes({5}, 3)

    def test_general(self):
        assert Query.general(3).codes == {0, 1, 2}


class TestSentenceSimilarity:
    def test_identical_sentences(self, hotel_table):
        s = split_sentences("The room was clean.")[0]
        assert sentence_similarity(s, s, hotel_table) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal_vectors(self):
        table = make_table({"aa": np.array([1.0, 0.0]), "bb": np.array([0.0, 1.0])})
        s1 = split_sentences("Aa.")[0]
        s2 = split_sentences("Bb.")[0]
        assert sentence_similarity(s1, s2, table) == pytest.approx(0.0, abs=1e-15)

    def test_zero_vector_convention(self, hotel_table):
        s1 = split_sentences("Qqqq zzzz.")[0]  # all OOV
        s2 = split_sentences("The room.")[0]
        assert sentence_similarity(s1, s2, hotel_table) == 0.0

    def test_matches_scalar_cosine(self, hotel_table):
        s1 = split_sentences("The room was clean and spacious.")[0]
        s2 = split_sentences("Breakfast was tasty.")[0]
        got = sentence_similarity(s1, s2, hotel_table)
        u = np.mean([hotel_table.lookup(t) for t in s1.tokens], axis=0)
        v = np.mean([hotel_table.lookup(t) for t in s2.tokens], axis=0)
        want = float(sum(a * b for a, b in zip(u, v)) /
                     (np.sqrt(sum(a * a for a in u)) * np.sqrt(sum(b * b for b in v))))
        assert got == pytest.approx(want, abs=1e-12)


class TestLexRank:
    def test_single_sentence(self, hotel_table):
        scores = lexrank(ranked(["The room was clean."]), hotel_table)
        assert scores.shape == (1,)
        assert scores[0] == pytest.approx(1.0, abs=1e-12)

    def test_two_identical_sentences(self, hotel_table):
        scores = lexrank(ranked(["The room was clean.", "The room was clean."]),
                         hotel_table)
        assert np.allclose(scores, [0.5, 0.5], atol=1e-9)

    def test_probability_vector(self, hotel_table, hotel_corpus):
        sents = [s for r in hotel_corpus.get_entity("h1") for s in r.sentences]
        scores = lexrank(sents, hotel_table)
        assert (scores >= 0).all()
        assert scores.sum() == pytest.approx(1.0, abs=1e-9)

    def test_matches_dense_oracle(self, hotel_table, hotel_corpus):
        sents = [s for r in hotel_corpus.get_entity("h2") for s in r.sentences][:5]
        config = LexRankConfig(max_iterations=500, convergence_tol=1e-12)
        scores = lexrank(sents, hotel_table, config)
        reprs = [np.mean([hotel_table.lookup(t) for t in s.tokens], axis=0)
                 for s in sents]
        n = len(sents)
        sim = [[0.0] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                nu = np.linalg.norm(reprs[i])
                nv = np.linalg.norm(reprs[j])
                sim[i][j] = 0.0 if nu == 0 or nv == 0 else \
                    float(reprs[i] @ reprs[j] / (nu * nv))
        want = lexrank_dense_oracle(sim, 0.85, 0.1)
        assert np.allclose(scores, want, atol=1e-6)

    def test_all_oov_sentences_share_mass(self, hotel_table):
        scores = lexrank(ranked(["Zzz qqq.", "Xxx www."]), hotel_table)
        assert scores.sum() == pytest.approx(1.0, abs=1e-9)
        assert np.allclose(scores, [0.5, 0.5], atol=1e-9)

    def test_empty_input_rejected(self, hotel_table):
        with pytest.raises(SummarizerError):
            lexrank([], hotel_table)

    def test_scale_invariance(self, hotel_corpus, hotel_table):
        sents = [s for r in hotel_corpus.get_entity("h3") for s in r.sentences]
        scaled = make_table({t: 3.7 * hotel_table.vectors[t]
                             for t in hotel_table.vectors})
        a = lexrank(sents, hotel_table)
        b = lexrank(sents, scaled)
        assert np.allclose(a, b, atol=1e-12)


class TestExtractSummary:
    def test_single_short_sentence(self, hotel_table):
        pool = ranked(["The room was clean."])
        s = extract_summary(pool, np.array([1.0]), hotel_table)
        assert [x.text for x in s.sentences] == ["The room was clean."]
        assert s.token_count == 4

    def test_duplicates_filtered(self, hotel_table):
        pool = ranked(["The room was clean.", "The room was clean."])
        s = extract_summary(pool, np.array([0.6, 0.4]), hotel_table)
        assert len(s.sentences) == 1

    def test_budget_stops_selection(self, hotel_table):
        pool = ranked(["The room was clean.", "Breakfast was tasty.",
                       "The staff were friendly."])
        config = LexRankConfig(summary_token_budget=7)
        s = extract_summary(pool, np.array([0.5, 0.3, 0.2]), hotel_table, config)
        assert s.token_count == 7
        assert len(s.sentences) == 2

    def test_output_in_document_order(self, hotel_table):
        pool = ranked(["First sentence here.", "Second sentence here.",
                       "Third sentence here."])
        # salience prefers the third, then first
        s = extract_summary(pool, np.array([0.3, 0.1, 0.6]), hotel_table,
                            LexRankConfig(summary_token_budget=6))
        assert [x.sentence_index for x in s.sentences] == [0, 2]

    def test_empty_pool(self, hotel_table):
        s = extract_summary([], np.zeros(0), hotel_table)
        assert s.sentences == [] and s.token_count == 0

    def test_matches_greedy_oracle(self, hotel_table, hotel_corpus):
        sents = [s for r in hotel_corpus.get_entity("h4") for s in r.sentences]
        pool = []
        for i, s in enumerate(sents):
            pool.append(RankedSentence(review_id=f"r{i // 3}", review_pos=i // 3,
                                       sentence_index=s.index, surface=s.raw,
                                       tokens=s.tokens, score=0.0))
        rng = np.random.default_rng(8)
        scores = rng.random(len(pool))
        config = LexRankConfig(summary_token_budget=30)
        got = extract_summary(pool, scores, hotel_table, config)

        items = []
        for i, p in enumerate(pool):
            vec = np.mean([hotel_table.lookup(t) for t in p.tokens], axis=0)
            items.append((float(scores[i]), len(p.tokens), vec.tolist(),
                          (p.review_pos, p.sentence_index)))
        want_idx = greedy_extract_oracle(items, 30, 0.8)
        assert [(s.review_id, s.sentence_index) for s in got.sentences] == \
            [(pool[i].review_id, pool[i].sentence_index) for i in want_idx]

    def test_misaligned_scores_rejected(self, hotel_table):
        with pytest.raises(SummarizerError, match="misaligned"):
            extract_summary(ranked(["One two."]), np.zeros(2), hotel_table)

    def test_duplicate_provenance_rejected(self):
        s = SummarySentence("x", "r1", 0, 0.5)
        with pytest.raises(SummarizerError, match="duplicate"):
            Summary(sentences=[s, s], token_count=2, codes=frozenset())


class TestSelectPoolAndSummarize:
    def test_pool_is_ranked_under_controller_budget(self, toy):
        corpus, table, specs = toy
        model = seed_detector_model(table, specs)
        pool = select_pool(corpus.get_entity("e1"), Query.from_codes({0}, 2),
                           model, table, SynthConfig(token_budget=10))
        assert sum(len(s.tokens) for s in pool) <= 10
        assert pool  # something qualified

    def test_pool_depends_only_on_code_set(self, toy):
        corpus, table, specs = toy
        model = seed_detector_model(table, specs)
        q = Query((1, 1))
        pool_a = select_pool(corpus.get_entity("e1"), q, model, table)
        pool_b = select_pool(corpus.get_entity("e1"),
                             Query.from_codes({1, 0}, 2), model, table)
        assert [(s.review_pos, s.sentence_index) for s in pool_a] == \
            [(s.review_pos, s.sentence_index) for s in pool_b]

    def test_summarize_composes(self, hotel_corpus, hotel_table, hotel_model):
        summary = summarize(hotel_corpus.get_entity("h1"), Query.general(6),
                            hotel_model, hotel_table)
        assert summary.sentences
        assert summary.token_count <= LexRankConfig().summary_token_budget
        assert summary.codes == frozenset(range(6))

    def test_summary_sentences_are_verbatim(self, hotel_corpus, hotel_table,
                                            hotel_model):
        reviews = hotel_corpus.get_entity("h3")
        surfaces = {s.raw for r in reviews for s in r.sentences}
        summary = summarize(reviews, Query.general(6), hotel_model, hotel_table)
        for sent in summary.sentences:
            assert sent.text in surfaces

    def test_determinism(self, hotel_corpus, hotel_table, hotel_model):
        reviews = hotel_corpus.get_entity("h2")
        a = summarize(reviews, Query.from_codes({3}, 6), hotel_model, hotel_table)
        b = summarize(reviews, Query.from_codes({3}, 6), hotel_model, hotel_table)
        assert [(s.text, s.review_id, s.salience) for s in a.sentences] == \
            [(s.text, s.review_id, s.salience) for s in b.sentences]

    def test_summary_text_joins_sentences(self, hotel_corpus, hotel_table,
                                          hotel_model):
        summary = summarize(hotel_corpus.get_entity("h5"), Query.general(6),
                            hotel_model, hotel_table)
        assert summary.text == " ".join(s.text for s in summary.sentences)


class TestLexRankConfig:
    def test_validation(self):
        with pytest.raises(SummarizerError):
            LexRankConfig(damping=1.0)
        with pytest.raises(SummarizerError):
            LexRankConfig(damping=0.0)
        with pytest.raises(SummarizerError):
            LexRankConfig(max_iterations=0)
        with pytest.raises(SummarizerError):
            LexRankConfig(convergence_tol=0.0)
        with pytest.raises(SummarizerError):
            LexRankConfig(summary_token_budget=0)


class TestBaselines:
    def test_seed_in_sentence_scores_one(self, hotel_table, hotel_specs):
        cleanliness = next(s for s in hotel_specs if s.name == "cleanliness")
        sents = split_sentences("The room was spotless. We liked the pool.")
        scored = seed_filter_baseline(sents, cleanliness, hotel_table)
        assert scored[0][0].raw == "The room was spotless."
        assert scored[0][1] == pytest.approx(1.0, abs=1e-12)

    def test_oov_only_scores_zero(self, hotel_table, hotel_specs):
        sents = split_sentences("Qqqq zzzz xxxx.")
        scored = seed_filter_baseline(sents, hotel_specs[0], hotel_table)
        assert scored[0][1] == 0.0

    def test_matches_double_loop_oracle(self, hotel_table, hotel_specs,
                                        hotel_corpus):
        spec = next(s for s in hotel_specs if s.name == "food")
        sents = [s for r in hotel_corpus.get_entity("h1") for s in r.sentences]
        scored = seed_filter_baseline(sents, spec, hotel_table)

        def cos(u, v):
            nu, nv = np.linalg.norm(u), np.linalg.norm(v)
            return 0.0 if nu == 0 or nv == 0 else float(u @ v / (nu * nv))

        want = []
        for s in sents:
            best = 0.0
            for t in s.tokens:
                for seed in spec.seeds:
                    best = max(best, cos(hotel_table.lookup(t),
                                         hotel_table.lookup(seed)))
            want.append(best)
        want_order = sorted(range(len(sents)), key=lambda i: -want[i])
        assert [s.raw for s, _ in scored] == [sents[i].raw for i in want_order]
        for (_, got_score), i in zip(scored, want_order):
            assert got_score == pytest.approx(want[i], abs=1e-12)

    def test_centroid_single_review(self, hotel_corpus, hotel_table):
        only = hotel_corpus.get_entity("h1")[:1]
        assert centroid_baseline(only, hotel_table) is only[0]

    def test_centroid_symmetric_tie_lowest_id(self):
        table = make_table({"aa": np.array([1.0, 0.0]), "bb": np.array([-1.0, 0.0]),
                            "cc": np.array([0.0, 1.0]), "dd": np.array([0.0, -1.0])})
        reviews = [Review.from_text("e", "r2", "Aa."),
                   Review.from_text("e", "r1", "Bb.")]
        # centroid is the zero vector: both cosine distances are 1.0
        assert centroid_baseline(reviews, table).review_id == "r1"

    def test_centroid_matches_exhaustive_oracle(self, hotel_corpus, hotel_table):
        reviews = hotel_corpus.get_entity("h4")
        got = centroid_baseline(reviews, hotel_table)

        reprs = []
        for r in reviews:
            sent_means = [np.mean([hotel_table.lookup(t) for t in s.tokens], axis=0)
                          for s in r.sentences]
            reprs.append(np.mean(sent_means, axis=0))
        centroid = np.mean(reprs, axis=0)

        def cosdist(u, v):
            nu, nv = np.linalg.norm(u), np.linalg.norm(v)
            return 1.0 if nu == 0 or nv == 0 else 1.0 - float(u @ v / (nu * nv))

        best = min(range(len(reviews)),
                   key=lambda i: (cosdist(reprs[i], centroid), reviews[i].review_id))
        assert got.review_id == reviews[best].review_id

    def test_centroid_empty_rejected(self, hotel_table):
        with pytest.raises(SummarizerError):
            centroid_baseline([], hotel_table)
