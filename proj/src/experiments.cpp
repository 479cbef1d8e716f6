#include "reclda/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>

#include "reclda/error.hpp"
#include "reclda/format.hpp"
#include "reclda/parallel.hpp"
#include "reclda/rng.hpp"

namespace reclda {

std::size_t mean_mode(std::span<const std::size_t> values) {
    if (values.empty()) throw ConfigError("mean_mode of an empty list");
    std::map<std::size_t, std::size_t> freq;
    unsigned long long sum = 0;
    for (auto v : values) {
        ++freq[v];
        sum += v;
    }
    std::size_t top = 0;
    for (const auto& [v, c] : freq) top = std::max(top, c);
    const auto n = static_cast<unsigned long long>(values.size());
    // |v - sum/n| compared as |v*n - sum|; map order visits smaller values first
    std::optional<std::size_t> best;
    unsigned long long best_dist = 0;
    for (const auto& [v, c] : freq) {
        if (c != top) continue;
        const unsigned long long scaled = static_cast<unsigned long long>(v) * n;
        const unsigned long long dist = scaled > sum ? scaled - sum : sum - scaled;
        if (!best || dist < best_dist) {
            best = v;
            best_dist = dist;
        }
    }
    return *best;
}

std::vector<std::size_t> emit_histogram_data(const LdaModel& model) {
    std::vector<std::size_t> counts(model.num_topics(), 0);
    for (const auto& a : dominant_topics(model, 0)) ++counts[a.dominant_topic];
    return counts;
}

void ExperimentPlan::validate(std::size_t corpus_size) const {
    if (runs_per_cell < 1) throw ConfigError("runs_per_cell must be >= 1");
    if (!include_original && permutation_seeds.empty()) throw ConfigError("plan has no orderings");
    for (std::size_t i = 0; i < prefix_sizes.size(); ++i) {
        if (prefix_sizes[i] < 1 || prefix_sizes[i] > corpus_size) {
            throw ConfigError("prefix size " + std::to_string(prefix_sizes[i]) + " outside [1, " +
                              std::to_string(corpus_size) + "]");
        }
        if (i > 0 && prefix_sizes[i] <= prefix_sizes[i - 1]) throw ConfigError("prefix sizes must be ascending");
    }
    recursion.guards.validate();
    if (recursion.initial_k_source == InitialKSource::Explicit && recursion.explicit_k < 1) {
        throw ConfigError("explicit initial K must be >= 1");
    }
    hdp.validate();
}

nlohmann::json ExperimentPlan::to_json() const {
    return {{"corpus", corpus_source},
            {"include_original", include_original},
            {"permutation_seeds", permutation_seeds},
            {"prefix_sizes", prefix_sizes},
            {"runs_per_cell", runs_per_cell},
            {"recursion", recursion.to_json()},
            {"hdp", hdp.to_json()},
            {"base_seed", base_seed}};
}

ExperimentPlan ExperimentPlan::from_json(const nlohmann::json& j) {
    try {
        ExperimentPlan p;
        p.corpus_source = j.value("corpus", p.corpus_source);
        p.include_original = j.value("include_original", p.include_original);
        if (j.contains("permutation_seeds")) p.permutation_seeds = j.at("permutation_seeds").get<std::vector<std::uint64_t>>();
        if (j.contains("prefix_sizes")) p.prefix_sizes = j.at("prefix_sizes").get<std::vector<std::size_t>>();
        p.runs_per_cell = j.value("runs_per_cell", p.runs_per_cell);
        if (j.contains("recursion")) p.recursion = RecursionConfig::from_json(j.at("recursion"));
        if (j.contains("hdp")) p.hdp = HdpConfig::from_json(j.at("hdp"));
        p.base_seed = j.value("base_seed", p.base_seed);
        p.parallelism = j.value("parallelism", p.parallelism);
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid plan JSON: ") + e.what());
    }
}

RunStatistics aggregate_traces(std::span<const RecursionTrace> traces) {
    RunStatistics s;
    s.runs = traces.size();
    if (traces.empty()) return s;
    std::vector<std::size_t> final_k;
    std::size_t failures = 0;
    std::size_t longest = 0;
    for (const auto& t : traces) {
        final_k.push_back(t.final_k());
        ++s.outcome_counts[to_string(t.outcome)];
        if (t.outcome != Outcome::Success) ++failures;
        longest = std::max(longest, t.steps.size());
    }
    s.mean_mode_final_k = mean_mode(final_k);
    const double runs = static_cast<double>(s.runs);
    s.failure_rate = static_cast<double>(failures) / runs;
    s.termination_histogram.assign(longest, 0);
    for (const auto& t : traces) ++s.termination_histogram[t.steps.size() - 1];
    std::size_t running = 0;
    for (auto count : s.termination_histogram) {
        running += count;
        s.marginal_proportion.push_back(static_cast<double>(count) / runs);
        s.cumulative_proportion.push_back(static_cast<double>(running) / runs);
    }
    return s;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct CellSpec {
    std::string name;
    std::optional<std::uint64_t> permutation_seed;
    std::size_t prefix_size;
};

std::vector<CellSpec> enumerate_cells(const ExperimentPlan& plan, std::size_t corpus_size) {
    std::vector<std::optional<std::uint64_t>> orderings;
    if (plan.include_original) orderings.push_back(std::nullopt);
    for (auto s : plan.permutation_seeds) orderings.push_back(s);
    std::vector<std::size_t> sizes = plan.prefix_sizes;
    if (sizes.empty()) sizes.push_back(corpus_size);
    std::vector<CellSpec> cells;
    for (const auto& ord : orderings) {
        for (auto n : sizes) {
            std::string name = (ord ? "perm" + std::to_string(*ord) : std::string("orig")) + "_n" + std::to_string(n);
            cells.push_back({std::move(name), ord, n});
        }
    }
    return cells;
}

constexpr std::uint64_t kHdpStream = 0x4844500000000000ULL;
constexpr std::uint64_t kBaselineStream = 0x4241534500000000ULL;

void run_cell(const ExperimentPlan& plan, const Corpus& corpus, std::size_t cell_index, CellReport& cell) {
    const Corpus ordered = cell.permutation_seed ? permute(corpus, *cell.permutation_seed) : corpus;
    const Corpus data = prefix(ordered, cell.prefix_size);

    auto hdp_config = plan.hdp;
    hdp_config.seed = derive_seed(plan.base_seed, cell_index, kHdpStream);
    const auto hdp_start = Clock::now();
    const auto estimate = fit_hdp(data, hdp_config);
    const double hdp_seconds = seconds_since(hdp_start);
    cell.hdp1 = estimate.hdp1();
    cell.hdp2 = estimate.hdp2();
    cell.hdp3 = estimate.hdp3();

    auto baseline = plan.recursion.lda_template;
    baseline.k = estimate.hdp2();
    baseline.seed = derive_seed(plan.base_seed, cell_index, kBaselineStream);
    const auto baseline_start = Clock::now();
    const auto baseline_model = fit(data, baseline);
    cell.wall_times.hdp_path_seconds = hdp_seconds + seconds_since(baseline_start);
    cell.histogram_hdp2 = emit_histogram_data(baseline_model);

    const std::size_t runs = plan.runs_per_cell;
    cell.traces.resize(runs);
    std::vector<double> run_seconds(runs, 0.0);
    parallel_for(runs, plan.parallelism, [&](std::size_t r) {
        auto config = plan.recursion;
        config.lda_template.seed = derive_seed(plan.base_seed, cell_index, r + 1);
        const auto start = Clock::now();
        auto trace = run_recursion(data, config, hdp_config, estimate);
        run_seconds[r] = seconds_since(start);
        // only the first run's model is kept, for the final-topic histogram
        if (r != 0) trace.final_model.reset();
        cell.traces[r] = std::move(trace);
    });
    double total = 0.0;
    for (double s : run_seconds) total += s;
    cell.wall_times.recursive_path_seconds = hdp_seconds + total / static_cast<double>(runs);
    if (cell.traces.front().final_model) cell.histogram_final = emit_histogram_data(*cell.traces.front().final_model);
    cell.stats = aggregate_traces(cell.traces);
}

nlohmann::json stats_json(const RunStatistics& s) {
    nlohmann::json termination = nlohmann::json::array();
    for (std::size_t t = 0; t < s.termination_histogram.size(); ++t) {
        termination.push_back({{"step", t + 1},
                               {"count", s.termination_histogram[t]},
                               {"marginal", s.marginal_proportion[t]},
                               {"cumulative", s.cumulative_proportion[t]}});
    }
    return {{"runs", s.runs},
            {"mean_mode_final_k", s.mean_mode_final_k},
            {"failure_rate", s.failure_rate},
            {"outcome_counts", s.outcome_counts},
            {"termination", termination}};
}

std::size_t to_size(const std::string& s, const char* what) {
    try {
        std::size_t used = 0;
        const auto v = std::stoull(s, &used);
        if (used != s.size()) throw DataError(std::string("bad ") + what + " value '" + s + "'");
        return static_cast<std::size_t>(v);
    } catch (const std::logic_error&) {
        throw DataError(std::string("bad ") + what + " value '" + s + "'");
    }
}

double to_double(const std::string& s, const char* what) {
    try {
        std::size_t used = 0;
        const auto v = std::stod(s, &used);
        if (used != s.size()) throw DataError(std::string("bad ") + what + " value '" + s + "'");
        return v;
    } catch (const std::logic_error&) {
        throw DataError(std::string("bad ") + what + " value '" + s + "'");
    }
}

std::vector<std::vector<std::string>> csv_body(const std::string& text, const std::vector<std::string>& header) {
    auto rows = parse_csv(text);
    if (rows.empty() || rows.front() != header) throw DataError("unexpected CSV header");
    rows.erase(rows.begin());
    return rows;
}

}  // namespace

ExperimentReport run_plan(const ExperimentPlan& plan, const Corpus& corpus) {
    plan.validate(corpus.size());
    ExperimentReport report;
    report.plan = plan;
    const auto specs = enumerate_cells(plan, corpus.size());
    for (std::size_t i = 0; i < specs.size(); ++i) {
        CellReport cell;
        cell.name = specs[i].name;
        cell.permutation_seed = specs[i].permutation_seed;
        cell.prefix_size = specs[i].prefix_size;
        try {
            run_cell(plan, corpus, i, cell);
        } catch (const std::exception& e) {
            cell.failed = true;
            cell.error = e.what();
            cell.traces.clear();
            report.failed_cells.push_back(cell.name);
        }
        report.cells.push_back(std::move(cell));
    }
    return report;
}

std::string report_json(const ExperimentReport& report) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : report.cells) {
        nlohmann::json j = {{"name", c.name},
                            {"permutation_seed", nullptr},
                            {"prefix_size", c.prefix_size},
                            {"failed", c.failed}};
        if (c.permutation_seed) j["permutation_seed"] = *c.permutation_seed;
        if (c.failed) {
            j["error"] = c.error;
        } else {
            j["hdp1"] = c.hdp1;
            j["hdp2"] = c.hdp2;
            j["hdp3"] = c.hdp3;
            j["stats"] = stats_json(c.stats);
            j["histogram_hdp2"] = c.histogram_hdp2;
            j["histogram_final"] = c.histogram_final;
        }
        cells.push_back(std::move(j));
    }
    nlohmann::json out = {{"plan", report.plan.to_json()}, {"cells", cells}, {"failed_cells", report.failed_cells}};
    return out.dump(2) + "\n";
}

std::string final_k_csv(const ExperimentReport& report) {
    std::vector<FinalKRow> rows;
    for (const auto& c : report.cells) {
        if (!c.failed) rows.push_back({c.name, c.hdp1, c.hdp2, c.stats.mean_mode_final_k});
    }
    return write_final_k_csv(rows);
}

std::string termination_csv(const ExperimentReport& report) {
    std::vector<TerminationRow> rows;
    for (const auto& c : report.cells) {
        if (c.failed) continue;
        for (std::size_t t = 0; t < c.stats.termination_histogram.size(); ++t) {
            rows.push_back({c.name, t + 1, c.stats.marginal_proportion[t], c.stats.cumulative_proportion[t]});
        }
    }
    return write_termination_csv(rows);
}

std::string timing_csv(const ExperimentReport& report) {
    std::ostringstream out;
    out << "cell,hdp_path_seconds,recursive_path_seconds\n";
    for (const auto& c : report.cells) {
        if (c.failed) continue;
        out << csv_field(c.name) << ',' << fixed(c.wall_times.hdp_path_seconds, 6) << ','
            << fixed(c.wall_times.recursive_path_seconds, 6) << '\n';
    }
    return out.str();
}

std::string histogram_csv(const CellReport& cell) {
    std::ostringstream out;
    out << "model,topic,count\n";
    for (std::size_t k = 0; k < cell.histogram_hdp2.size(); ++k) out << "hdp2," << k << ',' << cell.histogram_hdp2[k] << '\n';
    for (std::size_t k = 0; k < cell.histogram_final.size(); ++k) out << "final," << k << ',' << cell.histogram_final[k] << '\n';
    return out.str();
}

std::string write_final_k_csv(const std::vector<FinalKRow>& rows) {
    std::ostringstream out;
    out << "cell,hdp1,hdp2,mean_mode_k\n";
    for (const auto& r : rows) out << csv_field(r.cell) << ',' << r.hdp1 << ',' << r.hdp2 << ',' << r.mean_mode_k << '\n';
    return out.str();
}

std::string write_termination_csv(const std::vector<TerminationRow>& rows) {
    std::ostringstream out;
    out << "cell,step,marginal,cumulative\n";
    for (const auto& r : rows) {
        out << csv_field(r.cell) << ',' << r.step << ',' << fixed(r.marginal, 6) << ',' << fixed(r.cumulative, 6) << '\n';
    }
    return out.str();
}

std::vector<FinalKRow> parse_final_k_csv(const std::string& text) {
    std::vector<FinalKRow> rows;
    for (const auto& f : csv_body(text, {"cell", "hdp1", "hdp2", "mean_mode_k"})) {
        rows.push_back({f[0], to_size(f[1], "hdp1"), to_size(f[2], "hdp2"), to_size(f[3], "mean_mode_k")});
    }
    return rows;
}

std::vector<TerminationRow> parse_termination_csv(const std::string& text) {
    std::vector<TerminationRow> rows;
    for (const auto& f : csv_body(text, {"cell", "step", "marginal", "cumulative"})) {
        rows.push_back({f[0], to_size(f[1], "step"), to_double(f[2], "marginal"), to_double(f[3], "cumulative")});
    }
    return rows;
}

void write_report(const ExperimentReport& report, const std::filesystem::path& dir) {
    write_file(dir / "report.json", report_json(report));
    write_file(dir / "final_k.csv", final_k_csv(report));
    write_file(dir / "termination.csv", termination_csv(report));
    write_file(dir / "timing.csv", timing_csv(report));
    for (const auto& c : report.cells) {
        if (c.failed) continue;
        write_file(dir / ("histogram_" + c.name + ".csv"), histogram_csv(c));
        std::string archive;
        for (const auto& t : c.traces) archive += serialize_trace(t);
        write_file(dir / "traces" / (c.name + ".jsonl"), archive);
    }
}

std::vector<RecursionTrace> parse_trace_archive(const std::string& text) {
    std::vector<RecursionTrace> traces;
    std::istringstream in(text);
    std::string line;
    std::string current;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        current += line;
        current.push_back('\n');
        if (line.find("\"type\":\"outcome\"") != std::string::npos) {
            traces.push_back(parse_trace(current));
            current.clear();
        }
    }
    if (!current.empty()) throw DataError("trace archive ends inside a trace");
    return traces;
}

std::string rebuild_report_json(const std::filesystem::path& dir) {
    nlohmann::json report;
    try {
        report = nlohmann::json::parse(read_file(dir / "report.json"));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("invalid report JSON: ") + e.what());
    }
    for (auto& cell : report.at("cells")) {
        if (cell.at("failed").get<bool>()) continue;
        const auto name = cell.at("name").get<std::string>();
        const auto traces = parse_trace_archive(read_file(dir / "traces" / (name + ".jsonl")));
        cell["stats"] = stats_json(aggregate_traces(traces));
    }
    return report.dump(2) + "\n";
}

}  // namespace reclda
