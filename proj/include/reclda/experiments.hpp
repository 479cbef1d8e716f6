#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "reclda/corpus.hpp"
#include "reclda/hdp.hpp"
#include "reclda/lda.hpp"
#include "reclda/recursor.hpp"

namespace reclda {

/// Mode of the values; among several modes the one closest to the mean,
/// the smaller one when two are equally close. Always an element of `values`.
std::size_t mean_mode(std::span<const std::size_t> values);

/// Documents per dominant topic, zero-count topics included.
std::vector<std::size_t> emit_histogram_data(const LdaModel& model);

struct ExperimentPlan {
    /// Corpus JSON path; relative paths resolve against the plan file's directory.
    std::string corpus_source;
    /// Include the unpermuted order as a cell family alongside the permutations.
    bool include_original = true;
    std::vector<std::uint64_t> permutation_seeds;
    /// Ascending; empty means the full corpus only.
    std::vector<std::size_t> prefix_sizes;
    std::size_t runs_per_cell = 100;
    RecursionConfig recursion;
    HdpConfig hdp;
    std::uint64_t base_seed = 0;
    std::size_t parallelism = 1;

    void validate(std::size_t corpus_size) const;
    nlohmann::json to_json() const;
    static ExperimentPlan from_json(const nlohmann::json& j);
};

/// Termination-step statistics over the runs of one cell.
struct RunStatistics {
    std::size_t runs = 0;
    std::size_t mean_mode_final_k = 0;
    double failure_rate = 0.0;
    std::map<std::string, std::size_t> outcome_counts;
    /// histogram[t - 1] = runs whose trace has t steps.
    std::vector<std::size_t> termination_histogram;
    std::vector<double> cumulative_proportion;
    std::vector<double> marginal_proportion;

    friend bool operator==(const RunStatistics&, const RunStatistics&) = default;
};

RunStatistics aggregate_traces(std::span<const RecursionTrace> traces);

struct WallTimes {
    /// HDP fit plus one LDA fit at HDP-2.
    double hdp_path_seconds = 0.0;
    /// HDP fit plus the mean wall time of one full recursion.
    double recursive_path_seconds = 0.0;
};

struct CellReport {
    std::string name;
    std::optional<std::uint64_t> permutation_seed;
    std::size_t prefix_size = 0;
    bool failed = false;
    std::string error;
    std::size_t hdp1 = 0;
    std::size_t hdp2 = 0;
    std::size_t hdp3 = 0;
    RunStatistics stats;
    std::vector<std::size_t> histogram_hdp2;
    std::vector<std::size_t> histogram_final;
    WallTimes wall_times;
    std::vector<RecursionTrace> traces;
};

struct ExperimentReport {
    ExperimentPlan plan;
    std::vector<CellReport> cells;
    std::vector<std::string> failed_cells;
};

/// Run every (ordering, prefix) cell: one HDP fit per cell, an LDA fit at
/// HDP-2 for the baseline histogram, then R recursions from the plan's
/// initial K. A failing cell is recorded and the plan continues.
ExperimentReport run_plan(const ExperimentPlan& plan, const Corpus& corpus);

/// Full report as JSON. Wall times are excluded so identical plans give
/// identical bytes; they go to timing.csv.
std::string report_json(const ExperimentReport& report);

std::string final_k_csv(const ExperimentReport& report);
std::string termination_csv(const ExperimentReport& report);
std::string timing_csv(const ExperimentReport& report);
std::string histogram_csv(const CellReport& cell);

struct FinalKRow {
    std::string cell;
    std::size_t hdp1 = 0;
    std::size_t hdp2 = 0;
    std::size_t mean_mode_k = 0;
    friend bool operator==(const FinalKRow&, const FinalKRow&) = default;
};
struct TerminationRow {
    std::string cell;
    std::size_t step = 0;
    double marginal = 0.0;
    double cumulative = 0.0;
    friend bool operator==(const TerminationRow&, const TerminationRow&) = default;
};

std::vector<FinalKRow> parse_final_k_csv(const std::string& text);
std::vector<TerminationRow> parse_termination_csv(const std::string& text);
std::string write_final_k_csv(const std::vector<FinalKRow>& rows);
std::string write_termination_csv(const std::vector<TerminationRow>& rows);

/// Writes report.json, final_k.csv, termination.csv, timing.csv,
/// histogram_<cell>.csv and traces/<cell>.jsonl (one trace after another).
void write_report(const ExperimentReport& report, const std::filesystem::path& dir);

/// Split a concatenated archive of JSONL traces into traces.
std::vector<RecursionTrace> parse_trace_archive(const std::string& text);

/// Recompute each cell's run statistics from the archived traces in `dir`
/// and return report.json as it would be produced from them.
std::string rebuild_report_json(const std::filesystem::path& dir);

}  // namespace reclda
