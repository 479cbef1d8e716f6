#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "reclda/corpus.hpp"
#include "reclda/hdp.hpp"
#include "reclda/lda.hpp"

namespace reclda {

enum class Outcome { Success, FailureGammaDrop, FailureSteadyDecrease, FailureStepCap };

std::string to_string(Outcome outcome);
Outcome outcome_from_string(const std::string& s);

/// Where the first topic count comes from.
enum class InitialKSource { Explicit, Hdp1, Hdp2, Hdp3 };

std::string to_string(InitialKSource source);
InitialKSource initial_k_source_from_string(const std::string& s);

/// Termination guards. Any one of them ends a run that has not reached ratio 1.
struct Guards {
    /// Largest allowed single-step drop in efficiency ratio, in (0, 1].
    double gamma_guard = 0.2;
    /// Largest allowed run of consecutive strict decreases.
    std::size_t eta_guard = 3;
    /// Hard cap on steps.
    std::size_t max_steps = 50;

    void validate() const;
    nlohmann::json to_json() const;
    static Guards from_json(const nlohmann::json& j);

    friend bool operator==(const Guards&, const Guards&) = default;
};

struct RecursionConfig {
    Guards guards;
    /// k is ignored; seed is the base seed from which per-step seeds derive.
    LdaConfig lda_template;
    InitialKSource initial_k_source = InitialKSource::Hdp2;
    std::size_t explicit_k = 0;

    nlohmann::json to_json() const;
    static RecursionConfig from_json(const nlohmann::json& j);
};

/// k_effective / k_specified kept as integers.
struct EfficiencyRatio {
    std::size_t effective = 0;
    std::size_t specified = 1;

    double value() const { return static_cast<double>(effective) / static_cast<double>(specified); }
    bool is_one() const { return effective == specified; }
};

/// True when the ratio fell from `previous` to `current` by strictly more than `bound`.
/// Evaluated exactly on the rationals and the binary value of `bound`.
bool drop_exceeds(const EfficiencyRatio& previous, const EfficiencyRatio& current, double bound);

/// Strict decrease, evaluated exactly.
bool strictly_less(const EfficiencyRatio& a, const EfficiencyRatio& b);

struct RecursionStep {
    std::size_t step_index = 0;
    std::size_t k_specified = 0;
    std::size_t k_effective = 0;
    EfficiencyRatio ratio;
    std::uint64_t seed = 0;
    std::uint64_t model_fingerprint = 0;
};

struct RecursionTrace {
    std::vector<RecursionStep> steps;
    Outcome outcome = Outcome::Success;
    Guards guards;
    std::optional<LdaModel> final_model;

    std::size_t initial_k() const { return steps.empty() ? 0 : steps.front().k_specified; }
    std::size_t final_k() const { return steps.empty() ? 0 : steps.back().k_effective; }
};

/// What one fit reports back to the controller.
struct FitResult {
    std::size_t k_effective = 0;
    std::uint64_t model_fingerprint = 0;
    std::optional<LdaModel> model;
};

/// Fits a model with `k` topics using `seed`.
using Fitter = std::function<FitResult(std::size_t k, std::uint64_t seed)>;

/// Seed of step `step_index` (1-based) under `base_seed`.
std::uint64_t step_seed(std::uint64_t base_seed, std::size_t step_index);

/// Recursion controller: fit, measure the efficiency ratio, stop on ratio 1
/// or a guard, otherwise refit with the effective count.
RecursionTrace run_recursion(std::size_t initial_k, const Guards& guards, std::uint64_t base_seed,
                             const Fitter& fitter);

/// Fitter backed by collapsed-Gibbs LDA on `corpus` with `lda_template`.
Fitter lda_fitter(const Corpus& corpus, const LdaConfig& lda_template);

/// Resolve the initial K from `config` (fitting HDP with `hdp_config` when
/// needed and no estimate is supplied) and run the recursion with LDA fits.
RecursionTrace run_recursion(const Corpus& corpus, const RecursionConfig& config,
                             const HdpConfig& hdp_config = {},
                             const std::optional<HdpEstimate>& estimate = std::nullopt);

/// Re-derive the outcome from the steps and guards alone. Throws DataError if
/// the steps break chaining or continue past an exit condition.
Outcome classify_outcome(const RecursionTrace& trace);

/// One JSON object per step, then a terminal outcome record.
std::string serialize_trace(const RecursionTrace& trace);
RecursionTrace parse_trace(const std::string& jsonl);

}  // namespace reclda
