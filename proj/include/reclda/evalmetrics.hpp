#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "reclda/corpus.hpp"
#include "reclda/lda.hpp"

namespace reclda {

struct PerplexityResult {
    double value = 0.0;
    std::size_t held_out_tokens = 0;
    double log_likelihood = 0.0;
    /// Held-out tokens dropped because the training vocabulary lacks them.
    std::size_t oov_tokens = 0;
};

struct FoldInConfig {
    std::size_t sweeps = 50;
    std::size_t burn_in = 25;
    std::uint64_t seed = 0;
};

/// exp(-log_likelihood / tokens).
double perplexity_from_log_likelihood(double log_likelihood, std::size_t tokens);

/// Topic proportions of one held-out document by Gibbs sampling with beta frozen.
std::vector<double> fold_in(const LdaModel& model, const std::vector<TermId>& model_tokens,
                            const FoldInConfig& config);

/// Held-out perplexity. Tokens are matched to the model vocabulary by term;
/// unknown terms are dropped and counted. Each document is folded in with a
/// seed derived from its content, so the result does not depend on document order.
PerplexityResult perplexity(const LdaModel& model, const Corpus& held_out, const FoldInConfig& config = {});

struct CoherenceResult {
    std::vector<double> per_topic;
    double aggregate = 0.0;
};

/// Document frequency and co-document frequency of terms in a corpus.
class CooccurrenceIndex {
public:
    explicit CooccurrenceIndex(const Corpus& corpus);
    std::size_t doc_frequency(TermId w) const;
    std::size_t co_doc_frequency(TermId a, TermId b) const;

private:
    // sorted document indices per term
    std::vector<std::vector<std::uint32_t>> postings_;
};

/// Score of a ranked word list: sum over i > j of log((D(w_i, w_j) + 1) / D(w_j)).
double umass_score(const CooccurrenceIndex& index, const std::vector<TermId>& ranked_words);

/// Pluggable topic-coherence measure: per-topic scores for a model against a corpus.
using CoherenceMeasure = std::function<CoherenceResult(const LdaModel&, const Corpus&, std::size_t top_m)>;

/// UMass coherence of each topic's top_m words. top_m must be >= 2; top words
/// are mapped into `corpus` by term and must occur in it.
CoherenceResult umass_coherence(const LdaModel& model, const Corpus& corpus, std::size_t top_m = 10);

struct GridPoint {
    double alpha = 0.0;
    double eta = 0.0;
};

struct TuningEntry {
    GridPoint point;
    CoherenceResult coherence;
};

struct TuningResult {
    GridPoint best;
    CoherenceResult best_coherence;
    std::vector<TuningEntry> entries;
};

/// {0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0} squared, alpha-major.
std::vector<GridPoint> default_grid();

/// One fit per grid point with the template's seed; the highest aggregate
/// coherence wins, earliest point on ties. Points run on up to `parallelism` threads.
TuningResult tune_hyperparams(const Corpus& corpus, std::size_t k, const std::vector<GridPoint>& grid,
                              const LdaConfig& lda_template = {}, std::size_t top_m = 10,
                              std::size_t parallelism = 1, const CoherenceMeasure& measure = umass_coherence);

/// alpha,eta,aggregate_coherence per grid point with 6 decimals.
std::string tuning_csv(const TuningResult& result);

}  // namespace reclda
