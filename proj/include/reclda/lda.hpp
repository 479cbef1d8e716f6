#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "reclda/corpus.hpp"
#include "reclda/matrix.hpp"
#include "reclda/rng.hpp"

namespace reclda {

using TopicId = std::uint32_t;

struct LdaConfig {
    std::size_t k = 0;
    double alpha = 0.1;
    double eta = 0.1;
    std::size_t sweeps = 200;
    std::size_t burn_in = 100;
    std::uint64_t seed = 0;

    /// Throws ConfigError on k < 1, non-positive concentrations or burn_in > sweeps.
    void validate() const;

    nlohmann::json to_json() const;
    static LdaConfig from_json(const nlohmann::json& j);

    friend bool operator==(const LdaConfig&, const LdaConfig&) = default;
};

/// Fitted topic model. theta is D x K, beta is K x V; rows are probability vectors.
struct LdaModel {
    LdaConfig config;
    std::vector<std::string> vocabulary;
    std::vector<std::string> doc_ids;
    Matrix theta;
    Matrix beta;
    /// Topic label of every token from the final sweep.
    std::vector<std::vector<TopicId>> assignments;
    std::uint64_t corpus_fingerprint = 0;

    std::size_t num_topics() const { return beta.rows(); }
    std::size_t num_docs() const { return theta.rows(); }
    std::size_t vocab_size() const { return beta.cols(); }
};

struct TopicAssignment {
    std::string doc_id;
    TopicId dominant_topic = 0;
    double contribution = 0.0;
    std::vector<std::string> top_keywords;
};

struct KeywordList {
    std::vector<std::string> terms;
    std::vector<TermId> ids;
    std::vector<double> weights;
    /// Set when fewer than the requested count were available.
    bool truncated = false;
};

/// Collapsed Gibbs sampler state for a fixed topic count. Exposed so callers
/// can step sweep by sweep and inspect the count tables.
class GibbsSampler {
public:
    GibbsSampler(const Corpus& corpus, const LdaConfig& config);

    void sweep();

    std::size_t num_topics() const { return k_; }
    std::size_t vocab_size() const { return v_; }
    std::size_t num_docs() const { return doc_topic_.size() / k_; }

    std::uint32_t doc_topic(std::size_t d, std::size_t k) const { return doc_topic_[d * k_ + k]; }
    std::uint32_t topic_word(std::size_t k, std::size_t w) const { return topic_word_[k * v_ + w]; }
    std::uint32_t topic_total(std::size_t k) const { return topic_total_[k]; }
    const std::vector<std::vector<TopicId>>& assignments() const { return assignments_; }

    const std::vector<std::uint32_t>& doc_topic_counts() const { return doc_topic_; }
    const std::vector<std::uint32_t>& topic_word_counts() const { return topic_word_; }

private:
    const Corpus& corpus_;
    LdaConfig config_;
    std::size_t k_;
    std::size_t v_;
    Rng rng_;
    std::vector<std::uint32_t> doc_topic_;
    std::vector<std::uint32_t> topic_word_;
    std::vector<std::uint32_t> topic_total_;
    std::vector<std::vector<TopicId>> assignments_;
    std::vector<double> weights_;
};

/// Called after each sweep with the 1-based sweep index.
using SweepObserver = std::function<void(std::size_t sweep, const GibbsSampler&)>;

/// Fit LDA by collapsed Gibbs sampling. Distributions are estimated from
/// counts averaged over the post-burn-in sweeps (the final state when there
/// are none). Deterministic in (corpus, config).
LdaModel fit(const Corpus& corpus, const LdaConfig& config, const SweepObserver& observer = {});

/// Argmax of each theta row, lowest index on ties.
std::vector<TopicAssignment> dominant_topics(const LdaModel& model, std::size_t keywords = 10);

std::size_t effective_topic_count(const LdaModel& model);

/// m highest-weight terms of a topic, descending, ties by term id.
KeywordList top_keywords(const LdaModel& model, std::size_t topic, std::size_t m);

/// Deterministic text form: config, fingerprints, vocabulary, theta/beta with
/// 12 fixed decimals, assignments.
std::string serialize_model(const LdaModel& model);
LdaModel parse_model(const std::string& text);
std::uint64_t model_fingerprint(const LdaModel& model);

std::string hex64(std::uint64_t v);
std::uint64_t parse_hex64(const std::string& s);

}  // namespace reclda
