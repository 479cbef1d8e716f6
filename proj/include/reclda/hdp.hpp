#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "reclda/corpus.hpp"

namespace reclda {

struct HdpConfig {
    /// Top-level concentration.
    double gamma = 1.0;
    /// Topic-word concentration.
    double beta_prior = 0.1;
    /// Document-level concentration.
    double eta_doc = 1.0;
    /// Maximum topic count; unset means the corpus size.
    std::optional<std::size_t> truncation;
    std::size_t sweeps = 200;
    std::size_t burn_in = 100;
    std::uint64_t seed = 0;
    /// Refit the model for each escalation stage instead of re-thresholding one fit.
    bool refit_escalation = false;

    void validate() const;
    nlohmann::json to_json() const;
    static HdpConfig from_json(const nlohmann::json& j);
};

/// Significant-topic counts under thresholds 1/n, 1/hdp1, 1/hdp2.
struct Escalation {
    std::array<std::size_t, 3> counts{};
    /// Threshold used at each stage; unset for stages skipped after a zero count.
    std::array<std::optional<double>, 3> thresholds{};
    /// Stage produced a zero count (or followed one); its count was clamped to 1.
    std::array<bool, 3> degenerate{};

    std::size_t hdp1() const { return counts[0]; }
    std::size_t hdp2() const { return counts[1]; }
    std::size_t hdp3() const { return counts[2]; }
};

/// Number of weights strictly above `threshold`.
std::size_t count_above(std::span<const double> weights, double threshold);

Escalation escalate(std::span<const double> topic_weights, std::size_t corpus_size);

struct HdpEstimate {
    /// Posterior-mean top-level topic proportions, sorted descending, length T.
    std::vector<double> topic_weights;
    Escalation escalation;
    HdpConfig config;
    std::size_t truncation = 0;
    std::size_t corpus_size = 0;

    std::size_t hdp1() const { return escalation.hdp1(); }
    std::size_t hdp2() const { return escalation.hdp2(); }
    std::size_t hdp3() const { return escalation.hdp3(); }
};

/// Truncated direct-assignment Gibbs sampler for the HDP topic model. Returns
/// the mean of the top-level proportions over post-burn-in sweeps, sorted
/// descending and normalized.
std::vector<double> hdp_topic_weights(const Corpus& corpus, const HdpConfig& config);

HdpEstimate fit_hdp(const Corpus& corpus, const HdpConfig& config);

nlohmann::json estimate_to_json(const HdpEstimate& estimate);
HdpEstimate estimate_from_json(const nlohmann::json& j);
std::string serialize_estimate(const HdpEstimate& estimate);

}  // namespace reclda
