#include "reclda/evalmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "reclda/error.hpp"
#include "reclda/format.hpp"
#include "reclda/parallel.hpp"
#include "reclda/rng.hpp"

namespace reclda {

double perplexity_from_log_likelihood(double log_likelihood, std::size_t tokens) {
    if (tokens == 0) throw DataError("perplexity needs at least one token");
    return std::exp(-log_likelihood / static_cast<double>(tokens));
}

std::vector<double> fold_in(const LdaModel& model, const std::vector<TermId>& tokens, const FoldInConfig& config) {
    const std::size_t k = model.num_topics();
    const double alpha = model.config.alpha;
    Rng rng(config.seed);
    std::vector<std::uint32_t> z(tokens.size());
    std::vector<double> counts(k, 0.0);
    for (auto& label : z) {
        label = static_cast<std::uint32_t>(rng.below(k));
        counts[label] += 1.0;
    }
    std::vector<double> sum(k, 0.0);
    std::vector<double> weights(k);
    std::size_t samples = 0;
    for (std::size_t s = 1; s <= config.sweeps; ++s) {
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            counts[z[i]] -= 1.0;
            double total = 0.0;
            for (std::size_t t = 0; t < k; ++t) {
                weights[t] = (counts[t] + alpha) * model.beta(t, tokens[i]);
                total += weights[t];
            }
            z[i] = static_cast<std::uint32_t>(rng.categorical(weights, total));
            counts[z[i]] += 1.0;
        }
        if (s > config.burn_in) {
            for (std::size_t t = 0; t < k; ++t) sum[t] += counts[t];
            ++samples;
        }
    }
    if (samples == 0) {
        sum = counts;
        samples = 1;
    }
    std::vector<double> theta(k);
    const double denom = static_cast<double>(tokens.size()) + static_cast<double>(k) * alpha;
    for (std::size_t t = 0; t < k; ++t) theta[t] = (sum[t] / static_cast<double>(samples) + alpha) / denom;
    return theta;
}

PerplexityResult perplexity(const LdaModel& model, const Corpus& held_out, const FoldInConfig& config) {
    Vocabulary model_vocab(model.vocabulary);
    PerplexityResult result;
    std::vector<double> doc_log_lik;
    for (const auto& doc : held_out.documents) {
        std::vector<TermId> tokens;
        Fnv1a h;
        h.add(doc.id.data(), doc.id.size());
        for (auto t : doc.tokens) {
            const auto& term = held_out.vocabulary.term(t);
            h.add(term.data(), term.size());
            h.add_value('\0');
            if (auto id = model_vocab.find(term)) {
                tokens.push_back(*id);
            } else {
                ++result.oov_tokens;
            }
        }
        if (tokens.empty()) continue;
        FoldInConfig doc_config = config;
        doc_config.seed = derive_seed(config.seed, h.value());
        const auto theta = fold_in(model, tokens, doc_config);
        double ll = 0.0;
        for (auto w : tokens) {
            double p = 0.0;
            for (std::size_t k = 0; k < theta.size(); ++k) p += theta[k] * model.beta(k, w);
            ll += std::log(p);
        }
        doc_log_lik.push_back(ll);
        result.held_out_tokens += tokens.size();
    }
    if (result.held_out_tokens == 0) throw DataError("all held-out tokens are out of vocabulary");
    // summation order fixed independently of document order
    std::sort(doc_log_lik.begin(), doc_log_lik.end());
    for (double ll : doc_log_lik) result.log_likelihood += ll;
    result.value = perplexity_from_log_likelihood(result.log_likelihood, result.held_out_tokens);
    return result;
}

CooccurrenceIndex::CooccurrenceIndex(const Corpus& corpus) : postings_(corpus.vocabulary.size()) {
    for (std::size_t d = 0; d < corpus.size(); ++d) {
        for (auto w : corpus.documents[d].tokens) {
            auto& list = postings_[w];
            if (list.empty() || list.back() != d) list.push_back(static_cast<std::uint32_t>(d));
        }
    }
}

std::size_t CooccurrenceIndex::doc_frequency(TermId w) const { return w < postings_.size() ? postings_[w].size() : 0; }

std::size_t CooccurrenceIndex::co_doc_frequency(TermId a, TermId b) const {
    if (a >= postings_.size() || b >= postings_.size()) return 0;
    const auto& x = postings_[a];
    const auto& y = postings_[b];
    std::size_t i = 0, j = 0, n = 0;
    while (i < x.size() && j < y.size()) {
        if (x[i] < y[j]) {
            ++i;
        } else if (y[j] < x[i]) {
            ++j;
        } else {
            ++n;
            ++i;
            ++j;
        }
    }
    return n;
}

double umass_score(const CooccurrenceIndex& index, const std::vector<TermId>& words) {
    double score = 0.0;
    for (std::size_t i = 1; i < words.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            const auto dj = index.doc_frequency(words[j]);
            if (dj == 0) throw DataError("top word does not occur in the reference corpus");
            score += std::log((static_cast<double>(index.co_doc_frequency(words[i], words[j])) + 1.0) /
                              static_cast<double>(dj));
        }
    }
    return score;
}

CoherenceResult umass_coherence(const LdaModel& model, const Corpus& corpus, std::size_t top_m) {
    if (top_m < 2) throw ConfigError("coherence needs top_m >= 2");
    const CooccurrenceIndex index(corpus);
    CoherenceResult result;
    for (std::size_t k = 0; k < model.num_topics(); ++k) {
        const auto top = top_keywords(model, k, top_m);
        std::vector<TermId> words;
        for (const auto& term : top.terms) {
            const auto id = corpus.vocabulary.find(term);
            if (!id) throw DataError("top word '" + term + "' does not occur in the reference corpus");
            words.push_back(*id);
        }
        result.per_topic.push_back(umass_score(index, words));
    }
    double sum = 0.0;
    for (double s : result.per_topic) sum += s;
    result.aggregate = result.per_topic.empty() ? 0.0 : sum / static_cast<double>(result.per_topic.size());
    return result;
}

std::vector<GridPoint> default_grid() {
    const double values[] = {0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0};
    std::vector<GridPoint> grid;
    for (double a : values) {
        for (double e : values) grid.push_back({a, e});
    }
    return grid;
}

TuningResult tune_hyperparams(const Corpus& corpus, std::size_t k, const std::vector<GridPoint>& grid,
                              const LdaConfig& lda_template, std::size_t top_m, std::size_t parallelism,
                              const CoherenceMeasure& measure) {
    if (grid.empty()) throw ConfigError("tuning grid is empty");
    for (const auto& p : grid) {
        if (!(p.alpha > 0.0) || !(p.eta > 0.0)) throw ConfigError("grid points need alpha, eta > 0");
    }
    TuningResult result;
    result.entries.resize(grid.size());
    parallel_for(grid.size(), parallelism, [&](std::size_t i) {
        auto config = lda_template;
        config.k = k;
        config.alpha = grid[i].alpha;
        config.eta = grid[i].eta;
        const auto model = fit(corpus, config);
        result.entries[i] = {grid[i], measure(model, corpus, top_m)};
    });
    std::size_t best = 0;
    for (std::size_t i = 1; i < result.entries.size(); ++i) {
        if (result.entries[i].coherence.aggregate > result.entries[best].coherence.aggregate) best = i;
    }
    result.best = result.entries[best].point;
    result.best_coherence = result.entries[best].coherence;
    return result;
}

std::string tuning_csv(const TuningResult& result) {
    std::ostringstream out;
    out << "alpha,eta,aggregate_coherence\n";
    for (const auto& e : result.entries) {
        out << fixed(e.point.alpha, 6) << ',' << fixed(e.point.eta, 6) << ',' << fixed(e.coherence.aggregate, 6)
            << '\n';
    }
    return out.str();
}

}  // namespace reclda
