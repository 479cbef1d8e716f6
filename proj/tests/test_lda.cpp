#include <doctest.h>

#include "reclda/error.hpp"
#include "reclda/lda.hpp"
#include "reclda/rng.hpp"
#include "reclda/synth.hpp"
#include "test_support.hpp"

#include <algorithm>
#include <numeric>
#include <set>

using namespace reclda;

namespace {

LdaModel model_from_theta(const std::vector<std::vector<double>>& theta, std::size_t vocab = 3) {
    LdaModel m;
    const std::size_t k = theta.front().size();
    m.config.k = k;
    m.theta = Matrix(theta.size(), k, 0.0);
    for (std::size_t d = 0; d < theta.size(); ++d) {
        m.doc_ids.push_back("d" + std::to_string(d));
        for (std::size_t t = 0; t < k; ++t) m.theta(d, t) = theta[d][t];
    }
    m.beta = Matrix(k, vocab, 1.0 / static_cast<double>(vocab));
    for (std::size_t w = 0; w < vocab; ++w) m.vocabulary.push_back("w" + std::to_string(w));
    return m;
}

LdaModel random_model(std::size_t docs, std::size_t k, std::size_t vocab, std::uint64_t seed) {
    Rng rng(seed);
    LdaModel m;
    m.config.k = k;
    m.theta = Matrix(docs, k, 0.0);
    m.beta = Matrix(k, vocab, 0.0);
    for (std::size_t d = 0; d < docs; ++d) {
        m.doc_ids.push_back("d" + std::to_string(d));
        const auto row = rng.symmetric_dirichlet(k, 0.3);
        for (std::size_t t = 0; t < k; ++t) m.theta(d, t) = row[t];
    }
    for (std::size_t t = 0; t < k; ++t) {
        const auto row = rng.symmetric_dirichlet(vocab, 0.5);
        for (std::size_t w = 0; w < vocab; ++w) m.beta(t, w) = row[w];
    }
    for (std::size_t w = 0; w < vocab; ++w) m.vocabulary.push_back("w" + std::to_string(w));
    return m;
}

Corpus small_synth(std::size_t docs = 60, std::uint64_t seed = 4) {
    return synthesize_corpus(SynthConfig{4, docs, 40, 20, 0.1, 0.1, seed});
}

void check_model_invariants(const LdaModel& m) {
    for (std::size_t d = 0; d < m.theta.rows(); ++d) {
        double s = 0.0;
        for (double v : m.theta.row(d)) {
            CHECK(v > 0.0);
            s += v;
        }
        CHECK(std::abs(s - 1.0) <= 1e-9);
    }
    for (std::size_t k = 0; k < m.beta.rows(); ++k) {
        double s = 0.0;
        for (double v : m.beta.row(k)) {
            CHECK(v > 0.0);
            s += v;
        }
        CHECK(std::abs(s - 1.0) <= 1e-9);
    }
    for (const auto& doc : m.assignments)
        for (auto z : doc) CHECK(z < m.num_topics());
    CHECK(effective_topic_count(m) <= m.config.k);
}

}  // namespace

TEST_CASE("config validation") {
    CHECK_THROWS_AS((LdaConfig{0, 0.1, 0.1, 10, 5, 0}.validate()), ConfigError);
    CHECK_THROWS_AS((LdaConfig{2, 0.0, 0.1, 10, 5, 0}.validate()), ConfigError);
    CHECK_THROWS_AS((LdaConfig{2, 0.1, -1.0, 10, 5, 0}.validate()), ConfigError);
    CHECK_THROWS_AS((LdaConfig{2, 0.1, 0.1, 10, 11, 0}.validate()), ConfigError);
    CHECK_NOTHROW((LdaConfig{2, 0.1, 0.1, 10, 10, 0}.validate()));
    const LdaConfig c{3, 0.2, 0.05, 30, 10, 9};
    CHECK(LdaConfig::from_json(c.to_json()) == c);
}

TEST_CASE("more topics than tokens is rejected") {
    const auto c = corpus_from_tokens({{"x", {"a", "b"}}});
    CHECK_THROWS_WITH_AS(fit(c, LdaConfig{3, 0.1, 0.1, 5, 0, 1}), "more topics than tokens", DataError);
}

TEST_CASE("single topic model") {
    const auto c = corpus_from_tokens({{"1", {"a", "a", "b"}}, {"2", {"b", "c"}}, {"3", {"a"}}});
    const LdaConfig cfg{1, 0.1, 0.2, 20, 10, 5};
    const auto m = fit(c, cfg);
    for (std::size_t d = 0; d < m.num_docs(); ++d) CHECK(m.theta(d, 0) == doctest::Approx(1.0).epsilon(1e-12));
    // counts a:3 b:2 c:1 over 6 tokens, smoothed by eta = 0.2 over V = 3
    const double denom = 6.0 + 3 * 0.2;
    CHECK(m.beta(0, 0) == doctest::Approx((3 + 0.2) / denom).epsilon(1e-12));
    CHECK(m.beta(0, 1) == doctest::Approx((2 + 0.2) / denom).epsilon(1e-12));
    CHECK(m.beta(0, 2) == doctest::Approx((1 + 0.2) / denom).epsilon(1e-12));
    check_model_invariants(m);
}

TEST_CASE("disjoint two-document instance separates the documents") {
    const auto c = testsupport::two_disjoint_docs();
    // the split configurations carry almost all posterior mass
    const auto post = testsupport::enumerate_split_posterior(0.01, 0.01);
    CHECK(post.at({3, 0}) + post.at({0, 3}) > 0.99);
    CHECK(post.at({3, 0}) == doctest::Approx(0.4995999694).epsilon(1e-8));
    CHECK(post.at({3, 3}) == doctest::Approx(0.0003378058971).epsilon(1e-8));
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL}) {
        const auto m = fit(c, LdaConfig{2, 0.01, 0.01, 400, 200, seed});
        const auto dom = dominant_topics(m);
        CHECK(dom[0].contribution > 0.9);
        CHECK(dom[1].contribution > 0.9);
        CHECK(dom[0].dominant_topic != dom[1].dominant_topic);
    }
}

TEST_CASE("fit is deterministic and satisfies the model invariants") {
    const auto c = small_synth();
    const LdaConfig cfg{5, 0.1, 0.1, 40, 20, 77};
    const auto a = fit(c, cfg);
    const auto b = fit(c, cfg);
    CHECK(a.theta == b.theta);
    CHECK(a.beta == b.beta);
    CHECK(serialize_model(a) == serialize_model(b));
    CHECK(a.corpus_fingerprint == c.fingerprint());
    check_model_invariants(a);
    const auto other = fit(c, LdaConfig{5, 0.1, 0.1, 40, 20, 78});
    CHECK(serialize_model(other) != serialize_model(a));
}

TEST_CASE("zero burn-in estimates from the final state") {
    const auto c = small_synth(20);
    const auto m = fit(c, LdaConfig{3, 0.1, 0.1, 5, 5, 1});
    check_model_invariants(m);
}

TEST_CASE("count identities hold after every sweep") {
    const auto c = small_synth(30);
    std::size_t sweeps_seen = 0;
    fit(c, LdaConfig{4, 0.1, 0.1, 15, 5, 3}, [&](std::size_t sweep, const GibbsSampler& g) {
        CHECK(sweep == ++sweeps_seen);
        std::size_t total = 0;
        for (std::size_t d = 0; d < g.num_docs(); ++d) {
            std::size_t s = 0;
            for (std::size_t k = 0; k < g.num_topics(); ++k) s += g.doc_topic(d, k);
            CHECK(s == c.documents[d].tokens.size());
        }
        for (std::size_t k = 0; k < g.num_topics(); ++k) {
            std::size_t s = 0;
            for (std::size_t w = 0; w < g.vocab_size(); ++w) s += g.topic_word(k, w);
            CHECK(s == g.topic_total(k));
            total += g.topic_total(k);
        }
        CHECK(total == c.token_count());
    });
    CHECK(sweeps_seen == 15);
}

TEST_CASE("dominant topic argmax and tie rule") {
    const auto m = model_from_theta({{0.2, 0.5, 0.3}, {0.5, 0.5, 0.0}});
    const auto dom = dominant_topics(m, 2);
    CHECK(dom[0].dominant_topic == 1);
    CHECK(dom[0].contribution == 0.5);
    CHECK(dom[1].dominant_topic == 0);
    CHECK(dom[0].doc_id == "d0");
    CHECK(dom[0].top_keywords.size() == 2);
}

TEST_CASE("dominant topics match an independent row scan") {
    const auto m = random_model(10, 6, 12, 31);
    const auto dom = dominant_topics(m, 3);
    REQUIRE(dom.size() == 10);
    for (std::size_t d = 0; d < 10; ++d) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < 6; ++k)
            if (m.theta(d, k) > m.theta(d, best)) best = k;
        CHECK(dom[d].dominant_topic == best);
        CHECK(dom[d].contribution == m.theta(d, best));
        const auto kw = top_keywords(m, best, 3);
        CHECK(dom[d].top_keywords == kw.terms);
    }
}

TEST_CASE("effective topic count") {
    std::vector<std::vector<double>> rows(6, {0.1, 0.1, 0.6, 0.1, 0.1});
    CHECK(effective_topic_count(model_from_theta(rows)) == 1);
    std::vector<std::vector<double>> spread;
    for (std::size_t k = 0; k < 5; ++k) {
        std::vector<double> r(5, 0.1);
        r[k] = 0.6;
        spread.push_back(r);
    }
    CHECK(effective_topic_count(model_from_theta(spread)) == 5);

    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto m = random_model(20, 10, 5, seed);
        std::set<std::size_t> used;
        for (const auto& a : dominant_topics(m, 1)) used.insert(a.dominant_topic);
        CHECK(effective_topic_count(m) == used.size());
    }
}

TEST_CASE("top keywords") {
    auto m = model_from_theta({{1.0, 0.0}}, 4);
    m.vocabulary = {"graph", "tree", "heap", "list"};
    const double row0[] = {0.1, 0.6, 0.2, 0.1};
    for (std::size_t w = 0; w < 4; ++w) m.beta(0, w) = row0[w];
    const auto kw = top_keywords(m, 0, 3);
    CHECK(kw.terms == std::vector<std::string>{"tree", "heap", "graph"});
    CHECK_FALSE(kw.truncated);
    const auto all = top_keywords(m, 0, 10);
    CHECK(all.terms.size() == 4);
    CHECK(all.truncated);
    CHECK(all.terms.back() == "list");
    CHECK_THROWS_AS(top_keywords(m, 2, 3), ConfigError);

    const auto r = random_model(1, 3, 50, 8);
    for (std::size_t k = 0; k < 3; ++k) {
        std::vector<std::pair<double, std::size_t>> order;
        for (std::size_t w = 0; w < 50; ++w) order.push_back({-r.beta(k, w), w});
        std::sort(order.begin(), order.end());
        const auto got = top_keywords(r, k, 7);
        for (std::size_t i = 0; i < 7; ++i) CHECK(got.ids[i] == order[i].second);
    }
}

TEST_CASE("model json round trip") {
    const auto c = small_synth(20);
    const auto m = fit(c, LdaConfig{3, 0.1, 0.1, 10, 5, 2});
    const auto text = serialize_model(m);
    const auto back = parse_model(text);
    CHECK(serialize_model(back) == text);
    CHECK(back.config == m.config);
    CHECK(back.corpus_fingerprint == m.corpus_fingerprint);
    CHECK(back.assignments == m.assignments);
    CHECK(parse_hex64(hex64(0xdeadbeef01234567ULL)) == 0xdeadbeef01234567ULL);
    CHECK_THROWS_AS(parse_model("{}"), DataError);
}
