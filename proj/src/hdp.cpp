#include "reclda/hdp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "reclda/error.hpp"
#include "reclda/rng.hpp"

namespace reclda {

void HdpConfig::validate() const {
    if (!(gamma > 0.0)) throw ConfigError("gamma must be > 0");
    if (!(beta_prior > 0.0)) throw ConfigError("beta_prior must be > 0");
    if (!(eta_doc > 0.0)) throw ConfigError("eta_doc must be > 0");
    if (truncation && *truncation < 1) throw ConfigError("truncation must be >= 1");
    if (burn_in > sweeps) throw ConfigError("burn_in must not exceed sweeps");
}

nlohmann::json HdpConfig::to_json() const {
    nlohmann::json j = {{"gamma", gamma},   {"beta_prior", beta_prior}, {"eta_doc", eta_doc},
                        {"truncation", nullptr}, {"sweeps", sweeps},   {"burn_in", burn_in},
                        {"seed", seed},     {"refit_escalation", refit_escalation}};
    if (truncation) j["truncation"] = *truncation;
    return j;
}

HdpConfig HdpConfig::from_json(const nlohmann::json& j) {
    HdpConfig c;
    c.gamma = j.value("gamma", c.gamma);
    c.beta_prior = j.value("beta_prior", c.beta_prior);
    c.eta_doc = j.value("eta_doc", c.eta_doc);
    if (j.contains("truncation") && !j.at("truncation").is_null()) c.truncation = j.at("truncation").get<std::size_t>();
    c.sweeps = j.value("sweeps", c.sweeps);
    c.burn_in = j.value("burn_in", c.burn_in);
    c.seed = j.value("seed", c.seed);
    c.refit_escalation = j.value("refit_escalation", c.refit_escalation);
    return c;
}

std::size_t count_above(std::span<const double> weights, double threshold) {
    return static_cast<std::size_t>(std::count_if(weights.begin(), weights.end(), [&](double w) { return w > threshold; }));
}

namespace {

// Shared stage logic; weights_for(stage) supplies the distribution for each stage.
Escalation escalate_with(const std::function<std::span<const double>(std::size_t)>& weights_for,
                         std::size_t corpus_size) {
    if (corpus_size < 1) throw ConfigError("corpus size must be >= 1");
    Escalation e;
    double threshold = 1.0 / static_cast<double>(corpus_size);
    bool stopped = false;
    for (std::size_t stage = 0; stage < 3; ++stage) {
        if (stopped) {
            e.counts[stage] = 1;
            e.degenerate[stage] = true;
            continue;
        }
        e.thresholds[stage] = threshold;
        const auto count = count_above(weights_for(stage), threshold);
        if (count == 0) {
            stopped = true;
            e.counts[stage] = 1;
            e.degenerate[stage] = true;
            continue;
        }
        e.counts[stage] = count;
        threshold = 1.0 / static_cast<double>(count);
    }
    return e;
}

class HdpSampler {
public:
    HdpSampler(const Corpus& corpus, const HdpConfig& config, std::size_t truncation)
        : corpus_(corpus),
          config_(config),
          t_(truncation),
          v_(corpus.vocabulary.size()),
          rng_(config.seed),
          doc_topic_(corpus.size() * truncation, 0),
          word_topic_(corpus.vocabulary.size() * truncation, 0),
          topic_total_(truncation, 0),
          inv_denom_(truncation, 1.0 / (static_cast<double>(corpus.vocabulary.size()) * config.beta_prior)),
          global_(truncation, 1.0 / static_cast<double>(truncation)),
          position_(truncation, 0) {
        assignments_.resize(corpus.size());
        // sequential initialization: each token drawn given the tokens placed before it
        for (std::size_t d = 0; d < corpus.size(); ++d) {
            const auto& tokens = corpus.documents[d].tokens;
            assignments_[d].resize(tokens.size());
            for (std::size_t i = 0; i < tokens.size(); ++i) {
                const auto k = draw(d, tokens[i]);
                assignments_[d][i] = static_cast<std::uint32_t>(k);
                add(d, tokens[i], k);
            }
        }
    }

    void sweep() {
        for (std::size_t d = 0; d < corpus_.size(); ++d) {
            const auto& tokens = corpus_.documents[d].tokens;
            auto& z = assignments_[d];
            for (std::size_t i = 0; i < tokens.size(); ++i) {
                remove(d, tokens[i], z[i]);
                const auto k = draw(d, tokens[i]);
                z[i] = static_cast<std::uint32_t>(k);
                add(d, tokens[i], k);
            }
        }
        resample_global();
    }

    const std::vector<double>& global() const { return global_; }

private:
    // Topics with no tokens share the same count factors, so their total mass
    // is handled as one bucket and only split when that bucket is drawn.
    std::size_t draw(std::size_t d, TermId w) {
        const std::uint32_t* nd = &doc_topic_[d * t_];
        const std::uint32_t* nw = &word_topic_[static_cast<std::size_t>(w) * t_];
        const double eta = config_.eta_doc;
        const double beta = config_.beta_prior;
        double total = 0.0;
        weights_.resize(active_.size() + 1);
        for (std::size_t i = 0; i < active_.size(); ++i) {
            const auto k = active_[i];
            const double p = (nd[k] + eta * global_[k]) * (nw[k] + beta) * inv_denom_[k];
            weights_[i] = p;
            total += p;
        }
        const double idle = std::max(idle_mass_, 0.0) * eta / static_cast<double>(v_);
        weights_[active_.size()] = idle;
        total += idle;
        const auto pick = rng_.categorical(weights_, total);
        if (pick < active_.size()) return active_[pick];
        return draw_idle();
    }

    std::size_t draw_idle() {
        double total = 0.0;
        for (std::size_t k = 0; k < t_; ++k) {
            if (topic_total_[k] == 0) total += global_[k];
        }
        double u = rng_.uniform() * total;
        std::size_t last = t_;
        for (std::size_t k = 0; k < t_; ++k) {
            if (topic_total_[k] != 0) continue;
            last = k;
            u -= global_[k];
            if (u < 0.0) return k;
        }
        if (last == t_) throw std::logic_error("no idle topic available");
        return last;
    }

    void add(std::size_t d, TermId w, std::size_t k) {
        ++doc_topic_[d * t_ + k];
        ++word_topic_[static_cast<std::size_t>(w) * t_ + k];
        if (topic_total_[k]++ == 0) {
            position_[k] = active_.size();
            active_.push_back(static_cast<std::uint32_t>(k));
            idle_mass_ -= global_[k];
        }
        inv_denom_[k] = 1.0 / (topic_total_[k] + v_ * config_.beta_prior);
    }

    void remove(std::size_t d, TermId w, std::size_t k) {
        --doc_topic_[d * t_ + k];
        --word_topic_[static_cast<std::size_t>(w) * t_ + k];
        if (--topic_total_[k] == 0) {
            const auto pos = position_[k];
            active_[pos] = active_.back();
            position_[active_[pos]] = pos;
            active_.pop_back();
            idle_mass_ += global_[k];
        }
        inv_denom_[k] = 1.0 / (topic_total_[k] + v_ * config_.beta_prior);
    }

    void refresh_idle_mass() {
        idle_mass_ = 0.0;
        for (std::size_t k = 0; k < t_; ++k) {
            if (topic_total_[k] == 0) idle_mass_ += global_[k];
        }
    }

    // Table counts by the Antoniak construction, then the top-level weights
    // from their Dirichlet posterior.
    void resample_global() {
        std::vector<double> tables(t_, 0.0);
        const double eta = config_.eta_doc;
        for (std::size_t d = 0; d < corpus_.size(); ++d) {
            const std::uint32_t* nd = &doc_topic_[d * t_];
            for (const auto k : active_) {
                if (nd[k] == 0) continue;
                const double a = eta * global_[k];
                std::size_t m = 1;
                for (std::uint32_t l = 1; l < nd[k]; ++l) {
                    if (rng_.bernoulli(a / (a + l))) ++m;
                }
                tables[k] += static_cast<double>(m);
            }
        }
        const double base = config_.gamma / static_cast<double>(t_);
        for (auto& m : tables) m += base;
        global_ = rng_.dirichlet(tables);
        refresh_idle_mass();
    }

    const Corpus& corpus_;
    HdpConfig config_;
    std::size_t t_;
    std::size_t v_;
    Rng rng_;
    std::vector<std::uint32_t> doc_topic_;
    std::vector<std::uint32_t> word_topic_;
    std::vector<std::uint32_t> topic_total_;
    std::vector<double> inv_denom_;
    std::vector<double> global_;
    std::vector<double> weights_;
    std::vector<std::uint32_t> active_;
    std::vector<std::size_t> position_;
    double idle_mass_ = 1.0;
    std::vector<std::vector<std::uint32_t>> assignments_;
};

std::size_t resolve_truncation(const Corpus& corpus, const HdpConfig& config) {
    return config.truncation.value_or(corpus.size());
}

}  // namespace

Escalation escalate(std::span<const double> topic_weights, std::size_t corpus_size) {
    return escalate_with([&](std::size_t) { return topic_weights; }, corpus_size);
}

std::vector<double> hdp_topic_weights(const Corpus& corpus, const HdpConfig& config) {
    config.validate();
    if (corpus.size() == 0) throw DataError("empty corpus");
    const auto truncation = resolve_truncation(corpus, config);
    HdpSampler sampler(corpus, config, truncation);

    std::vector<double> mean(truncation, 0.0);
    std::size_t samples = 0;
    for (std::size_t s = 1; s <= config.sweeps; ++s) {
        sampler.sweep();
        if (s > config.burn_in) {
            const auto& g = sampler.global();
            for (std::size_t k = 0; k < truncation; ++k) mean[k] += g[k];
            ++samples;
        }
    }
    if (samples == 0) mean = sampler.global();

    std::sort(mean.begin(), mean.end(), std::greater<>());
    double total = 0.0;
    for (double w : mean) total += w;
    for (auto& w : mean) w /= total;
    return mean;
}

HdpEstimate fit_hdp(const Corpus& corpus, const HdpConfig& config) {
    config.validate();
    HdpEstimate est;
    est.config = config;
    est.truncation = resolve_truncation(corpus, config);
    est.corpus_size = corpus.size();
    est.topic_weights = hdp_topic_weights(corpus, config);

    if (!config.refit_escalation) {
        est.escalation = escalate(est.topic_weights, corpus.size());
        return est;
    }
    std::vector<std::vector<double>> stage_weights{est.topic_weights};
    est.escalation = escalate_with(
        [&](std::size_t stage) -> std::span<const double> {
            while (stage_weights.size() <= stage) {
                auto refit = config;
                refit.seed = derive_seed(config.seed, stage_weights.size());
                stage_weights.push_back(hdp_topic_weights(corpus, refit));
            }
            return stage_weights[stage];
        },
        corpus.size());
    return est;
}

nlohmann::json estimate_to_json(const HdpEstimate& e) {
    nlohmann::json thresholds = nlohmann::json::array();
    for (const auto& t : e.escalation.thresholds) {
        thresholds.push_back(t ? nlohmann::json(*t) : nlohmann::json(nullptr));
    }
    return {{"topic_weights", e.topic_weights},
            {"hdp1", e.hdp1()},
            {"hdp2", e.hdp2()},
            {"hdp3", e.hdp3()},
            {"thresholds", thresholds},
            {"degenerate_flags", e.escalation.degenerate},
            {"truncation", e.truncation},
            {"corpus_size", e.corpus_size},
            {"config", e.config.to_json()}};
}

HdpEstimate estimate_from_json(const nlohmann::json& j) {
    try {
        HdpEstimate e;
        e.topic_weights = j.at("topic_weights").get<std::vector<double>>();
        e.escalation.counts = {j.at("hdp1").get<std::size_t>(), j.at("hdp2").get<std::size_t>(),
                               j.at("hdp3").get<std::size_t>()};
        for (std::size_t i = 0; i < 3; ++i) {
            const auto& t = j.at("thresholds").at(i);
            if (!t.is_null()) e.escalation.thresholds[i] = t.get<double>();
            e.escalation.degenerate[i] = j.at("degenerate_flags").at(i).get<bool>();
        }
        e.truncation = j.at("truncation").get<std::size_t>();
        e.corpus_size = j.at("corpus_size").get<std::size_t>();
        e.config = HdpConfig::from_json(j.at("config"));
        return e;
    } catch (const nlohmann::json::exception& ex) {
        throw DataError(std::string("invalid HDP estimate JSON: ") + ex.what());
    }
}

std::string serialize_estimate(const HdpEstimate& estimate) { return estimate_to_json(estimate).dump(2) + "\n"; }

}  // namespace reclda
