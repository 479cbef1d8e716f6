#include <doctest.h>

#include "reclda/error.hpp"
#include "reclda/hdp.hpp"
#include "reclda/rng.hpp"
#include "reclda/synth.hpp"

#include <algorithm>
#include <numeric>

using namespace reclda;

namespace {

void check_estimate(const HdpEstimate& e) {
    REQUIRE(e.topic_weights.size() == e.truncation);
    const double total = std::accumulate(e.topic_weights.begin(), e.topic_weights.end(), 0.0);
    CHECK(std::abs(total - 1.0) <= 1e-9);
    CHECK(std::is_sorted(e.topic_weights.rbegin(), e.topic_weights.rend()));
    for (double w : e.topic_weights) CHECK(w >= 0.0);
    CHECK(e.hdp3() <= e.hdp2());
    CHECK(e.hdp2() <= e.hdp1());
    CHECK(e.hdp1() <= e.truncation);
}

}  // namespace

TEST_CASE("escalation on uniform weights hits the strict boundary") {
    const std::vector<double> w(10, 0.1);
    const auto e = escalate(w, 100);
    CHECK(e.hdp1() == 10);
    REQUIRE(e.thresholds[1].has_value());
    CHECK(*e.thresholds[1] == doctest::Approx(0.1));
    CHECK(e.hdp2() == 1);
    CHECK(e.hdp3() == 1);
    CHECK_FALSE(e.degenerate[0]);
    CHECK(e.degenerate[1]);
    CHECK(e.degenerate[2]);
    CHECK_FALSE(e.thresholds[2].has_value());
}

TEST_CASE("escalation hand example") {
    const std::vector<double> w{0.5, 0.3, 0.1, 0.05, 0.05};
    const auto e = escalate(w, 100);
    CHECK(e.hdp1() == 5);
    CHECK(*e.thresholds[0] == doctest::Approx(0.01));
    CHECK(*e.thresholds[1] == doctest::Approx(0.2));
    CHECK(e.hdp2() == 2);
    CHECK(*e.thresholds[2] == doctest::Approx(0.5));
    CHECK(e.hdp3() == 1);
    CHECK(e.degenerate[2]);
    CHECK_FALSE(e.degenerate[1]);
}

TEST_CASE("escalation is monotone on random vectors") {
    Rng rng(2024);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t t = 1 + rng.below(60);
        const auto w = rng.symmetric_dirichlet(t, 0.05 + rng.uniform());
        const auto e = escalate(w, 1 + rng.below(1000));
        CHECK(e.hdp3() <= e.hdp2());
        CHECK(e.hdp2() <= e.hdp1());
        CHECK(e.hdp3() >= 1);
    }
    CHECK(count_above(std::vector<double>{0.2, 0.2, 0.6}, 0.2) == 1);
    CHECK_THROWS_AS(escalate(std::vector<double>{1.0}, 0), ConfigError);
}

TEST_CASE("config validation") {
    HdpConfig c;
    c.truncation = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.truncation = 5;
    c.gamma = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("identical documents concentrate on one topic") {
    std::vector<std::pair<std::string, std::vector<std::string>>> docs;
    for (int d = 0; d < 30; ++d) docs.push_back({"d" + std::to_string(d), {"sort", "merge", "array", "split", "sort"}});
    const auto c = corpus_from_tokens(docs);
    HdpConfig cfg;
    cfg.gamma = 0.1;
    cfg.eta_doc = 0.1;
    cfg.beta_prior = 0.01;
    cfg.sweeps = 100;
    cfg.burn_in = 50;
    cfg.seed = 3;
    const auto e = fit_hdp(c, cfg);
    check_estimate(e);
    CHECK(e.truncation == 30);
    CHECK(e.topic_weights[0] > 0.5);
}

TEST_CASE("synthetic corpus: estimate invariants, determinism and json round trip") {
    const auto c = synthesize_corpus(SynthConfig{4, 80, 60, 25, 0.1, 0.1, 12});
    HdpConfig cfg;
    cfg.sweeps = 60;
    cfg.burn_in = 30;
    cfg.seed = 8;
    const auto a = fit_hdp(c, cfg);
    check_estimate(a);
    CHECK(a.corpus_size == c.size());
    const auto b = fit_hdp(c, cfg);
    CHECK(serialize_estimate(a) == serialize_estimate(b));
    const auto back = estimate_from_json(estimate_to_json(a));
    CHECK(serialize_estimate(back) == serialize_estimate(a));

    cfg.truncation = 12;
    cfg.refit_escalation = true;
    const auto r = fit_hdp(c, cfg);
    check_estimate(r);
    CHECK(r.truncation == 12);
}
