#pragma once

#include <cstdint>
#include <vector>

#include "reclda/corpus.hpp"
#include "reclda/matrix.hpp"

namespace reclda {

struct SynthConfig {
    std::size_t true_k = 8;
    std::size_t docs = 500;
    std::size_t vocab = 200;
    std::size_t doc_len = 40;
    double alpha = 0.1;
    double eta = 0.1;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Corpus drawn from the LDA generative process, with its ground truth.
struct SynthCorpus {
    std::vector<RawRecord> records;
    Matrix theta;
    Matrix beta;
    /// Topic of every generated token.
    std::vector<std::vector<std::uint32_t>> topics;
};

/// theta_d ~ Dir(alpha), beta_k ~ Dir(eta), z ~ theta_d, w ~ beta_z.
/// Terms are named w000, w001, ... so they survive default preprocessing.
SynthCorpus synthesize(const SynthConfig& config);

/// Synthetic corpus passed straight through default preprocessing.
Corpus synthesize_corpus(const SynthConfig& config);

}  // namespace reclda
