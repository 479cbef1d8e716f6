#include "reclda/synth.hpp"

#include <string>

#include "reclda/error.hpp"
#include "reclda/rng.hpp"

namespace reclda {

void SynthConfig::validate() const {
    if (true_k < 1 || docs < 1 || vocab < 1 || doc_len < 1) {
        throw ConfigError("synthetic corpus dimensions must all be >= 1");
    }
    if (!(alpha > 0.0) || !(eta > 0.0)) throw ConfigError("synthetic concentrations must be > 0");
}

namespace {

std::string padded(char prefix, std::size_t value, std::size_t count) {
    const auto width = std::to_string(count > 0 ? count - 1 : 0).size();
    auto digits = std::to_string(value);
    return std::string(1, prefix) + std::string(width > digits.size() ? width - digits.size() : 0, '0') + digits;
}

}  // namespace

SynthCorpus synthesize(const SynthConfig& config) {
    config.validate();
    Rng rng(config.seed);
    SynthCorpus out;
    out.beta = Matrix(config.true_k, config.vocab);
    for (std::size_t k = 0; k < config.true_k; ++k) {
        const auto row = rng.symmetric_dirichlet(config.vocab, config.eta);
        std::copy(row.begin(), row.end(), out.beta.row(k).begin());
    }
    out.theta = Matrix(config.docs, config.true_k);
    for (std::size_t d = 0; d < config.docs; ++d) {
        const auto theta = rng.symmetric_dirichlet(config.true_k, config.alpha);
        std::copy(theta.begin(), theta.end(), out.theta.row(d).begin());
        std::string text;
        std::vector<std::uint32_t> topics;
        for (std::size_t i = 0; i < config.doc_len; ++i) {
            const auto z = rng.categorical(theta, 1.0);
            const auto w = rng.categorical(out.beta.row(z), 1.0);
            if (i) text.push_back(' ');
            text += padded('w', w, config.vocab);
            topics.push_back(static_cast<std::uint32_t>(z));
        }
        out.records.push_back({padded('d', d, config.docs), std::move(text)});
        out.topics.push_back(std::move(topics));
    }
    return out;
}

Corpus synthesize_corpus(const SynthConfig& config) {
    return preprocess(synthesize(config).records, PreprocessConfig::defaults(), "synthetic");
}

}  // namespace reclda
