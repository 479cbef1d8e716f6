#include "reclda/recursor.hpp"

#include <sstream>

#include <boost/multiprecision/cpp_int.hpp>

#include "reclda/error.hpp"
#include "reclda/rng.hpp"

namespace reclda {

using boost::multiprecision::cpp_rational;

std::string to_string(Outcome outcome) {
    switch (outcome) {
        case Outcome::Success: return "Success";
        case Outcome::FailureGammaDrop: return "FailureGammaDrop";
        case Outcome::FailureSteadyDecrease: return "FailureSteadyDecrease";
        case Outcome::FailureStepCap: return "FailureStepCap";
    }
    return "Unknown";
}

Outcome outcome_from_string(const std::string& s) {
    for (auto o : {Outcome::Success, Outcome::FailureGammaDrop, Outcome::FailureSteadyDecrease,
                   Outcome::FailureStepCap}) {
        if (to_string(o) == s) return o;
    }
    throw DataError("unknown outcome '" + s + "'");
}

std::string to_string(InitialKSource source) {
    switch (source) {
        case InitialKSource::Explicit: return "explicit";
        case InitialKSource::Hdp1: return "hdp1";
        case InitialKSource::Hdp2: return "hdp2";
        case InitialKSource::Hdp3: return "hdp3";
    }
    return "unknown";
}

InitialKSource initial_k_source_from_string(const std::string& s) {
    for (auto src : {InitialKSource::Explicit, InitialKSource::Hdp1, InitialKSource::Hdp2, InitialKSource::Hdp3}) {
        if (to_string(src) == s) return src;
    }
    throw ConfigError("unknown initial K source '" + s + "'");
}

void Guards::validate() const {
    if (!(gamma_guard > 0.0) || gamma_guard > 1.0) throw ConfigError("gamma_guard must be in (0, 1]");
    if (eta_guard < 1) throw ConfigError("eta_guard must be >= 1");
    if (max_steps < 1) throw ConfigError("max_steps must be >= 1");
}

nlohmann::json Guards::to_json() const {
    return {{"gamma_guard", gamma_guard}, {"eta_guard", eta_guard}, {"max_steps", max_steps}};
}

Guards Guards::from_json(const nlohmann::json& j) {
    Guards g;
    g.gamma_guard = j.value("gamma_guard", g.gamma_guard);
    g.eta_guard = j.value("eta_guard", g.eta_guard);
    g.max_steps = j.value("max_steps", g.max_steps);
    return g;
}

nlohmann::json RecursionConfig::to_json() const {
    return {{"guards", guards.to_json()},
            {"lda", lda_template.to_json()},
            {"initial_k_source", to_string(initial_k_source)},
            {"explicit_k", explicit_k}};
}

RecursionConfig RecursionConfig::from_json(const nlohmann::json& j) {
    RecursionConfig c;
    if (j.contains("guards")) c.guards = Guards::from_json(j.at("guards"));
    if (j.contains("lda")) c.lda_template = LdaConfig::from_json(j.at("lda"));
    if (j.contains("initial_k_source")) c.initial_k_source = initial_k_source_from_string(j.at("initial_k_source"));
    c.explicit_k = j.value("explicit_k", c.explicit_k);
    return c;
}

namespace {

cpp_rational as_rational(const EfficiencyRatio& r) {
    return cpp_rational(static_cast<unsigned long long>(r.effective), static_cast<unsigned long long>(r.specified));
}

}  // namespace

bool drop_exceeds(const EfficiencyRatio& previous, const EfficiencyRatio& current, double bound) {
    return as_rational(previous) - as_rational(current) > cpp_rational(bound);
}

bool strictly_less(const EfficiencyRatio& a, const EfficiencyRatio& b) { return as_rational(a) < as_rational(b); }

std::uint64_t step_seed(std::uint64_t base_seed, std::size_t step_index) { return derive_seed(base_seed, step_index); }

namespace {

// Exit condition after appending `steps[t]`, or nullopt to continue.
// `decrease_run` carries the count of consecutive strict decreases.
std::optional<Outcome> exit_condition(const std::vector<RecursionStep>& steps, std::size_t t, const Guards& guards,
                                      std::size_t& decrease_run) {
    const auto& cur = steps[t];
    if (cur.ratio.is_one()) return Outcome::Success;
    if (t > 0) {
        const auto& prev = steps[t - 1].ratio;
        if (drop_exceeds(prev, cur.ratio, guards.gamma_guard)) return Outcome::FailureGammaDrop;
        decrease_run = strictly_less(cur.ratio, prev) ? decrease_run + 1 : 0;
    }
    if (decrease_run > guards.eta_guard) return Outcome::FailureSteadyDecrease;
    if (t + 1 >= guards.max_steps) return Outcome::FailureStepCap;
    return std::nullopt;
}

}  // namespace

RecursionTrace run_recursion(std::size_t initial_k, const Guards& guards, std::uint64_t base_seed,
                             const Fitter& fitter) {
    guards.validate();
    if (initial_k < 1) throw ConfigError("initial topic count must be >= 1");

    RecursionTrace trace;
    trace.guards = guards;
    std::size_t k = initial_k;
    std::size_t decrease_run = 0;
    for (std::size_t t = 0;; ++t) {
        RecursionStep step;
        step.step_index = t + 1;
        step.k_specified = k;
        step.seed = step_seed(base_seed, step.step_index);
        auto result = fitter(k, step.seed);
        if (result.k_effective < 1 || result.k_effective > k) {
            throw DataError("fitter reported " + std::to_string(result.k_effective) + " effective topics for K = " +
                            std::to_string(k));
        }
        step.k_effective = result.k_effective;
        step.ratio = {result.k_effective, k};
        step.model_fingerprint = result.model_fingerprint;
        trace.steps.push_back(step);

        if (auto outcome = exit_condition(trace.steps, t, guards, decrease_run)) {
            trace.outcome = *outcome;
            if (*outcome == Outcome::Success) trace.final_model = std::move(result.model);
            return trace;
        }
        k = result.k_effective;
    }
}

Fitter lda_fitter(const Corpus& corpus, const LdaConfig& lda_template) {
    return [&corpus, lda_template](std::size_t k, std::uint64_t seed) {
        auto config = lda_template;
        config.k = k;
        config.seed = seed;
        FitResult result;
        auto model = fit(corpus, config);
        result.k_effective = effective_topic_count(model);
        result.model_fingerprint = model_fingerprint(model);
        result.model = std::move(model);
        return result;
    };
}

RecursionTrace run_recursion(const Corpus& corpus, const RecursionConfig& config, const HdpConfig& hdp_config,
                             const std::optional<HdpEstimate>& estimate) {
    std::size_t k = config.explicit_k;
    if (config.initial_k_source != InitialKSource::Explicit) {
        const auto est = estimate ? *estimate : fit_hdp(corpus, hdp_config);
        switch (config.initial_k_source) {
            case InitialKSource::Hdp1: k = est.hdp1(); break;
            case InitialKSource::Hdp2: k = est.hdp2(); break;
            default: k = est.hdp3(); break;
        }
    }
    if (k < 1) throw ConfigError("initial topic count must be >= 1");
    return run_recursion(k, config.guards, config.lda_template.seed, lda_fitter(corpus, config.lda_template));
}

Outcome classify_outcome(const RecursionTrace& trace) {
    if (trace.steps.empty()) throw DataError("empty recursion trace");
    for (std::size_t t = 0; t < trace.steps.size(); ++t) {
        const auto& s = trace.steps[t];
        if (s.k_effective < 1 || s.k_effective > s.k_specified || s.ratio.effective != s.k_effective ||
            s.ratio.specified != s.k_specified) {
            throw DataError("inconsistent trace: step " + std::to_string(t + 1) + " has invalid counts");
        }
        if (t > 0 && s.k_specified != trace.steps[t - 1].k_effective) {
            throw DataError("inconsistent trace: step " + std::to_string(t + 1) + " does not chain from step " +
                            std::to_string(t));
        }
    }
    std::size_t decrease_run = 0;
    for (std::size_t t = 0; t < trace.steps.size(); ++t) {
        if (auto outcome = exit_condition(trace.steps, t, trace.guards, decrease_run)) {
            if (t + 1 != trace.steps.size()) {
                throw DataError("inconsistent trace: continues past exit at step " + std::to_string(t + 1));
            }
            return *outcome;
        }
    }
    throw DataError("inconsistent trace: ends without an exit condition");
}

std::string serialize_trace(const RecursionTrace& trace) {
    std::ostringstream out;
    for (const auto& s : trace.steps) {
        nlohmann::json j = {{"type", "step"},
                            {"step", s.step_index},
                            {"k_specified", s.k_specified},
                            {"k_effective", s.k_effective},
                            {"ratio_num", s.ratio.effective},
                            {"ratio_den", s.ratio.specified},
                            {"ratio", s.ratio.value()},
                            {"seed", s.seed},
                            {"model_fingerprint", hex64(s.model_fingerprint)}};
        out << j.dump() << '\n';
    }
    nlohmann::json end = {{"type", "outcome"},
                          {"outcome", to_string(trace.outcome)},
                          {"steps", trace.steps.size()},
                          {"final_k", trace.final_k()},
                          {"guards", trace.guards.to_json()}};
    out << end.dump() << '\n';
    return out.str();
}

RecursionTrace parse_trace(const std::string& jsonl) {
    RecursionTrace trace;
    std::istringstream in(jsonl);
    std::string line;
    bool ended = false;
    std::size_t line_no = 0;
    try {
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            if (ended) throw DataError("trace has records after the outcome record");
            const auto j = nlohmann::json::parse(line);
            const auto type = j.at("type").get<std::string>();
            if (type == "step") {
                RecursionStep s;
                s.step_index = j.at("step").get<std::size_t>();
                s.k_specified = j.at("k_specified").get<std::size_t>();
                s.k_effective = j.at("k_effective").get<std::size_t>();
                s.ratio = {j.at("ratio_num").get<std::size_t>(), j.at("ratio_den").get<std::size_t>()};
                s.seed = j.at("seed").get<std::uint64_t>();
                s.model_fingerprint = parse_hex64(j.at("model_fingerprint").get<std::string>());
                trace.steps.push_back(s);
            } else if (type == "outcome") {
                trace.outcome = outcome_from_string(j.at("outcome").get<std::string>());
                trace.guards = Guards::from_json(j.at("guards"));
                ended = true;
            } else {
                throw DataError("unknown trace record type '" + type + "'");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError("invalid trace at line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!ended) throw DataError("trace has no outcome record");
    return trace;
}

}  // namespace reclda
