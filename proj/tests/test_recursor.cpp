#include <doctest.h>

#include "reclda/error.hpp"
#include "reclda/recursor.hpp"
#include "reclda/synth.hpp"
#include "test_support.hpp"

using namespace reclda;
using testsupport::scripted_fitter;

namespace {

RecursionTrace scripted(std::size_t initial_k, std::vector<std::size_t> effective, Guards guards = {}) {
    return run_recursion(initial_k, guards, 42, scripted_fitter(std::move(effective)));
}

std::vector<double> ratios(const RecursionTrace& t) {
    std::vector<double> r;
    for (const auto& s : t.steps) r.push_back(s.ratio.value());
    return r;
}

}  // namespace

TEST_CASE("immediate convergence") {
    const auto t = scripted(12, {12});
    CHECK(t.steps.size() == 1);
    CHECK(t.outcome == Outcome::Success);
    CHECK(t.steps[0].ratio.is_one());
    CHECK(t.final_k() == 12);
    CHECK(classify_outcome(t) == Outcome::Success);
}

TEST_CASE("descending chain to success") {
    const auto t = scripted(30, {21, 17, 15, 15});
    REQUIRE(t.steps.size() == 4);
    CHECK(t.outcome == Outcome::Success);
    const auto r = ratios(t);
    CHECK(r[0] == doctest::Approx(0.700).epsilon(1e-3));
    CHECK(r[1] == doctest::Approx(0.810).epsilon(1e-3));
    CHECK(r[2] == doctest::Approx(0.882).epsilon(1e-3));
    CHECK(r[3] == 1.0);
    for (std::size_t i = 1; i < t.steps.size(); ++i) CHECK(t.steps[i].k_specified == t.steps[i - 1].k_effective);
    CHECK(t.initial_k() == 30);
    CHECK(t.final_k() == 15);
}

TEST_CASE("ratios 0.7, 0.9, 1.0 succeed") {
    const auto t = scripted(100, {70, 63, 63});
    CHECK(ratios(t) == std::vector<double>{0.7, 0.9, 1.0});
    CHECK(t.outcome == Outcome::Success);
}

TEST_CASE("gamma guard") {
    // 0.9 then 0.6
    const auto t = scripted(50, {45, 27});
    CHECK(t.steps.size() == 2);
    CHECK(t.outcome == Outcome::FailureGammaDrop);
    CHECK_FALSE(t.final_model.has_value());
    CHECK(classify_outcome(t) == Outcome::FailureGammaDrop);
}

TEST_CASE("gamma guard compares exactly") {
    // 0.9 -> 0.7 is a drop of exactly 2/10, which does not exceed 0.2
    const auto t = scripted(100, {90, 63, 63});
    CHECK(t.outcome == Outcome::Success);
    CHECK(t.steps.size() == 3);
    CHECK(drop_exceeds({9, 10}, {7, 10}, 0.2) == false);
    CHECK(drop_exceeds({9, 10}, {6, 10}, 0.2) == true);
    CHECK(drop_exceeds({1, 3}, {1, 3}, 1e-300) == false);
    CHECK(strictly_less({2, 3}, {3, 4}));
    CHECK_FALSE(strictly_less({2, 4}, {1, 2}));
}

TEST_CASE("steady decrease guard") {
    // ratios 0.9, 0.85, 0.8, 0.75: three consecutive decreases exceed eta_guard = 2
    Guards g;
    g.eta_guard = 2;
    const auto t = scripted(1000, {900, 765, 612, 459}, g);
    CHECK(ratios(t) == std::vector<double>{0.9, 0.85, 0.8, 0.75});
    CHECK(t.outcome == Outcome::FailureSteadyDecrease);
    CHECK(t.steps.size() == 4);

    // an increase resets the run
    const auto reset = scripted(1000, {900, 765, 688, 550, 550}, g);
    CHECK(reset.outcome == Outcome::Success);
}

TEST_CASE("step cap") {
    Guards g;
    g.max_steps = 4;
    const auto t = scripted(100, {90, 85, 76, 72, 72}, g);
    CHECK(t.steps.size() == 4);
    CHECK(t.outcome == Outcome::FailureStepCap);
    CHECK(classify_outcome(t) == Outcome::FailureStepCap);

    g.max_steps = 1;
    CHECK(scripted(10, {9}, g).outcome == Outcome::FailureStepCap);
    CHECK(scripted(10, {10}, g).outcome == Outcome::Success);
}

TEST_CASE("guards and fitter output are validated") {
    CHECK_THROWS_AS(scripted(10, {10}, Guards{0.0, 3, 50}), ConfigError);
    CHECK_THROWS_AS(scripted(10, {10}, Guards{0.2, 0, 50}), ConfigError);
    CHECK_THROWS_AS(scripted(10, {10}, Guards{0.2, 3, 0}), ConfigError);
    CHECK_THROWS_AS(scripted(0, {1}), ConfigError);
    CHECK_THROWS_AS(scripted(10, {11}), DataError);
    CHECK_THROWS_AS(scripted(10, {0}), DataError);
}

TEST_CASE("per-step seeds derive from the base seed") {
    const auto t = scripted(30, {21, 17, 15, 15});
    for (const auto& s : t.steps) CHECK(s.seed == step_seed(42, s.step_index));
    CHECK(t.steps[0].seed != t.steps[1].seed);
}

TEST_CASE("classify rejects inconsistent traces") {
    auto t = scripted(30, {21, 17, 15, 15});
    auto broken = t;
    broken.steps[2].k_specified = 16;
    broken.steps[2].ratio.specified = 16;
    CHECK_THROWS_AS(classify_outcome(broken), DataError);

    auto too_long = t;
    auto extra = too_long.steps.back();
    extra.step_index = 5;
    too_long.steps.push_back(extra);
    CHECK_THROWS_AS(classify_outcome(too_long), DataError);

    auto unfinished = t;
    unfinished.steps.pop_back();
    CHECK_THROWS_AS(classify_outcome(unfinished), DataError);
}

TEST_CASE("trace jsonl round trip") {
    const auto t = scripted(30, {21, 17, 15, 15});
    const auto text = serialize_trace(t);
    const auto back = parse_trace(text);
    CHECK(serialize_trace(back) == text);
    CHECK(back.outcome == t.outcome);
    CHECK(back.guards == t.guards);
    CHECK_THROWS_AS(parse_trace("{\"type\":\"step\"}\n"), DataError);
}

TEST_CASE("recursion with real fits") {
    const auto c = synthesize_corpus(SynthConfig{3, 60, 40, 25, 0.1, 0.1, 5});
    RecursionConfig cfg;
    cfg.initial_k_source = InitialKSource::Explicit;
    cfg.explicit_k = 6;
    cfg.lda_template = LdaConfig{0, 0.1, 0.1, 40, 20, 9};
    const auto a = run_recursion(c, cfg);
    const auto b = run_recursion(c, cfg);
    CHECK(serialize_trace(a) == serialize_trace(b));
    CHECK(classify_outcome(a) == a.outcome);
    for (const auto& s : a.steps) {
        CHECK(s.k_effective >= 1);
        CHECK(s.k_effective <= s.k_specified);
    }
    if (a.outcome == Outcome::Success) {
        REQUIRE(a.final_model.has_value());
        CHECK(a.final_model->num_topics() == a.final_k());
        CHECK(model_fingerprint(*a.final_model) == a.steps.back().model_fingerprint);
    }
    CHECK(initial_k_source_from_string(to_string(InitialKSource::Hdp2)) == InitialKSource::Hdp2);
    CHECK(outcome_from_string(to_string(Outcome::FailureStepCap)) == Outcome::FailureStepCap);
}
