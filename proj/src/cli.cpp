#include "reclda/cli.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "reclda/corpus.hpp"
#include "reclda/error.hpp"
#include "reclda/evalmetrics.hpp"
#include "reclda/experiments.hpp"
#include "reclda/format.hpp"
#include "reclda/hdp.hpp"
#include "reclda/lda.hpp"
#include "reclda/recursor.hpp"
#include "reclda/synth.hpp"

namespace fs = std::filesystem;

namespace reclda {

namespace {

struct Globals {
    std::uint64_t seed = 0;
    std::string config_path;
    std::string output_dir = ".";
    std::size_t parallelism = 1;
    CLI::Option* seed_opt = nullptr;

    nlohmann::json config() const {
        if (config_path.empty()) return nlohmann::json::object();
        try {
            return nlohmann::json::parse(read_file(config_path));
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("invalid config file: " + std::string(e.what()));
        }
    }
    nlohmann::json section(const char* name) const {
        const auto c = config();
        return c.contains(name) ? c.at(name) : nlohmann::json::object();
    }
    fs::path out(const std::string& name) const { return fs::path(output_dir) / name; }
};

template <typename T>
void apply(const CLI::Option* opt, T& target, const T& value) {
    if (opt->count() > 0) target = value;
}

// LDA flags shared by fit, recurse and tune.
struct LdaFlags {
    double alpha = 0.1, eta = 0.1;
    std::size_t sweeps = 200, burn_in = 100;
    CLI::Option *alpha_opt{}, *eta_opt{}, *sweeps_opt{}, *burn_opt{};

    void add(CLI::App* app) {
        alpha_opt = app->add_option("--alpha", alpha, "Document-topic concentration");
        eta_opt = app->add_option("--eta", eta, "Topic-word concentration");
        sweeps_opt = app->add_option("--sweeps", sweeps, "Gibbs sweeps");
        burn_opt = app->add_option("--burn-in", burn_in, "Sweeps discarded before averaging");
    }
    LdaConfig resolve(const Globals& g) const {
        auto c = LdaConfig::from_json(g.section("lda"));
        apply(alpha_opt, c.alpha, alpha);
        apply(eta_opt, c.eta, eta);
        apply(sweeps_opt, c.sweeps, sweeps);
        apply(burn_opt, c.burn_in, burn_in);
        apply(g.seed_opt, c.seed, g.seed);
        return c;
    }
};

struct HdpFlags {
    double gamma = 1.0, beta_prior = 0.1, eta_doc = 1.0;
    std::size_t truncation = 0, sweeps = 200, burn_in = 100;
    bool refit = false;
    CLI::Option *gamma_opt{}, *beta_opt{}, *eta_opt{}, *trunc_opt{}, *sweeps_opt{}, *burn_opt{}, *refit_opt{};

    void add(CLI::App* app) {
        gamma_opt = app->add_option("--gamma", gamma, "Top-level concentration");
        beta_opt = app->add_option("--beta-prior", beta_prior, "Topic-word concentration");
        eta_opt = app->add_option("--eta-doc", eta_doc, "Document-level concentration");
        trunc_opt = app->add_option("--truncation", truncation, "Topic truncation level (default: corpus size)");
        sweeps_opt = app->add_option("--hdp-sweeps", sweeps, "HDP Gibbs sweeps");
        burn_opt = app->add_option("--hdp-burn-in", burn_in, "HDP burn-in sweeps");
        refit_opt = app->add_flag("--refit-escalation", refit, "Refit HDP for each escalation stage");
    }
    HdpConfig resolve(const Globals& g) const {
        auto c = HdpConfig::from_json(g.section("hdp"));
        apply(gamma_opt, c.gamma, gamma);
        apply(beta_opt, c.beta_prior, beta_prior);
        apply(eta_opt, c.eta_doc, eta_doc);
        if (trunc_opt->count()) c.truncation = truncation;
        apply(sweeps_opt, c.sweeps, sweeps);
        apply(burn_opt, c.burn_in, burn_in);
        apply(refit_opt, c.refit_escalation, refit);
        apply(g.seed_opt, c.seed, g.seed);
        return c;
    }
};

Corpus load_corpus(const std::string& path) { return parse_corpus(read_file(path)); }

void report_written(std::ostream& out, const fs::path& p) { out << "wrote " << p.string() << '\n'; }

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Recursive LDA topic-count refinement seeded by a truncated HDP", "reclda"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    g.seed_opt = app.add_option("--seed", g.seed, "Seed for every stochastic stage");
    app.add_option("--config", g.config_path, "JSON config with preprocess/lda/hdp/recursion sections");
    app.add_option("--output-dir", g.output_dir, "Directory for written artifacts");
    app.add_option("--parallelism", g.parallelism, "Worker threads for experiment and tune")->check(CLI::PositiveNumber);

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus from the LDA generative process");
    SynthConfig synth_cfg;
    synth->add_option("--true-k", synth_cfg.true_k, "Number of generating topics");
    synth->add_option("--docs", synth_cfg.docs, "Documents");
    synth->add_option("--vocab", synth_cfg.vocab, "Vocabulary size");
    synth->add_option("--doc-len", synth_cfg.doc_len, "Tokens per document");
    synth->add_option("--gen-alpha", synth_cfg.alpha, "Dirichlet concentration of document-topic rows");
    synth->add_option("--gen-eta", synth_cfg.eta, "Dirichlet concentration of topic-word rows");

    // preprocess
    auto* pre = app.add_subcommand("preprocess", "Clean raw questions into a corpus snapshot");
    std::string input, format = "csv", id_col = "id", text_col = "question";
    pre->add_option("--input", input, "CSV file or blank-line separated text file")->required();
    pre->add_option("--format", format, "csv or blocks")->check(CLI::IsMember({"csv", "blocks"}));
    auto* id_opt = pre->add_option("--id-col", id_col, "CSV id column");
    auto* text_opt = pre->add_option("--text-col", text_col, "CSV question column");

    // permute
    auto* perm = app.add_subcommand("permute", "Reorder a corpus by a seeded shuffle, optionally take a prefix");
    std::string corpus_path;
    std::size_t prefix_len = 0;
    perm->add_option("--corpus", corpus_path, "Corpus JSON")->required();
    auto* prefix_opt = perm->add_option("--prefix", prefix_len, "Keep the first N documents");

    // hdp
    auto* hdp = app.add_subcommand("hdp", "Estimate HDP-1/2/3 topic counts");
    hdp->add_option("--corpus", corpus_path, "Corpus JSON")->required();
    HdpFlags hdp_flags;
    hdp_flags.add(hdp);

    // fit
    auto* fit_cmd = app.add_subcommand("fit", "Fit LDA with a fixed topic count");
    std::size_t k = 0;
    fit_cmd->add_option("--corpus", corpus_path, "Corpus JSON")->required();
    fit_cmd->add_option("--k", k, "Topic count")->required();
    LdaFlags fit_flags;
    fit_flags.add(fit_cmd);

    // recurse
    auto* rec = app.add_subcommand("recurse", "Refit on the effective topic count until the ratio reaches 1");
    std::string init_k = "hdp2", hdp_path;
    double gamma_guard = 0.2;
    std::size_t eta_guard = 3, max_steps = 50;
    rec->add_option("--corpus", corpus_path, "Corpus JSON")->required();
    auto* init_opt = rec->add_option("--init-k", init_k, "hdp1, hdp2, hdp3 or an explicit integer");
    rec->add_option("--hdp", hdp_path, "Existing HDP estimate JSON (otherwise HDP is fitted)");
    auto* gg_opt = rec->add_option("--gamma-guard", gamma_guard, "Largest allowed single-step ratio drop");
    auto* eg_opt = rec->add_option("--eta-guard", eta_guard, "Largest allowed run of ratio decreases");
    auto* ms_opt = rec->add_option("--max-steps", max_steps, "Hard step cap");
    LdaFlags rec_flags;
    rec_flags.add(rec);
    HdpFlags rec_hdp_flags;
    rec_hdp_flags.add(rec);

    // tune
    auto* tune = app.add_subcommand("tune", "Pick alpha and eta by UMass coherence over a grid");
    std::size_t top_m = 10;
    std::vector<double> grid_values;
    tune->add_option("--corpus", corpus_path, "Corpus JSON")->required();
    tune->add_option("--k", k, "Topic count")->required();
    tune->add_option("--grid-values", grid_values, "Values used for both alpha and eta (default grid otherwise)");
    tune->add_option("--top-m", top_m, "Top words per topic for coherence");
    LdaFlags tune_flags;
    tune_flags.add(tune);

    // perplexity
    auto* perp = app.add_subcommand("perplexity", "Held-out perplexity of a fitted model");
    std::string model_path, held_out_path;
    std::size_t fold_sweeps = 50, fold_burn = 25;
    perp->add_option("--model", model_path, "Model JSON")->required();
    perp->add_option("--held-out", held_out_path, "Held-out corpus JSON")->required();
    perp->add_option("--fold-in-sweeps", fold_sweeps, "Fold-in Gibbs sweeps");
    perp->add_option("--fold-in-burn-in", fold_burn, "Fold-in burn-in sweeps");

    // experiment
    auto* exp = app.add_subcommand("experiment", "Run a multi-cell experiment plan");
    std::string plan_path;
    exp->add_option("--plan", plan_path, "Plan JSON")->required();

    // export-clusters
    auto* exp_clusters = app.add_subcommand("export-clusters", "Dominant topic and keywords per document");
    exp_clusters->add_option("--model", model_path, "Model JSON")->required();
    exp_clusters->add_option("--top-m", top_m, "Keywords per topic");

    std::vector<std::string> argv_storage;
    argv_storage.push_back("reclda");
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_storage) argv.push_back(a.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        fs::create_directories(g.output_dir);

        if (synth->parsed()) {
            auto cfg = synth_cfg;
            apply(g.seed_opt, cfg.seed, g.seed);
            const auto data = synthesize(cfg);
            std::ostringstream csv;
            csv << "id,question\n";
            for (const auto& r : data.records) csv << csv_field(r.id) << ',' << csv_field(r.text) << '\n';
            write_file(g.out("synth.csv"), csv.str());
            nlohmann::json truth = {{"true_k", cfg.true_k}, {"docs", cfg.docs}, {"vocab", cfg.vocab},
                                    {"doc_len", cfg.doc_len}, {"alpha", cfg.alpha}, {"eta", cfg.eta},
                                    {"seed", cfg.seed}, {"topics", data.topics}};
            write_file(g.out("synth_truth.json"), truth.dump() + "\n");
            report_written(out, g.out("synth.csv"));
            return kExitOk;
        }

        if (pre->parsed()) {
            const auto section = g.section("preprocess");
            auto cfg = PreprocessConfig::from_json(section);
            CsvColumns cols{section.value("id_col", std::string("id")), section.value("text_col", std::string("question"))};
            apply(id_opt, cols.id, id_col);
            apply(text_opt, cols.text, text_col);
            const auto records = ingest(input, format == "csv" ? InputFormat::Csv : InputFormat::TextBlocks, cols);
            const auto corpus = preprocess(records, cfg, fs::path(input).filename().string());
            write_file(g.out("corpus.json"), serialize_corpus(corpus));
            out << "documents: " << corpus.size() << " (dropped " << records.size() - corpus.size()
                << ")  vocabulary: " << corpus.vocabulary.size() << '\n';
            report_written(out, g.out("corpus.json"));
            return kExitOk;
        }

        if (perm->parsed()) {
            auto corpus = permute(load_corpus(corpus_path), g.seed);
            std::string name = "corpus_perm" + std::to_string(g.seed);
            if (prefix_opt->count()) {
                corpus = prefix(corpus, prefix_len);
                name += "_n" + std::to_string(prefix_len);
            }
            write_file(g.out(name + ".json"), serialize_corpus(corpus));
            report_written(out, g.out(name + ".json"));
            return kExitOk;
        }

        if (hdp->parsed()) {
            const auto est = fit_hdp(load_corpus(corpus_path), hdp_flags.resolve(g));
            write_file(g.out("hdp.json"), serialize_estimate(est));
            out << "hdp1 " << est.hdp1() << "  hdp2 " << est.hdp2() << "  hdp3 " << est.hdp3() << '\n';
            report_written(out, g.out("hdp.json"));
            return kExitOk;
        }

        if (fit_cmd->parsed()) {
            auto cfg = fit_flags.resolve(g);
            cfg.k = k;
            const auto model = fit(load_corpus(corpus_path), cfg);
            write_file(g.out("model.json"), serialize_model(model));
            out << "effective topics " << effective_topic_count(model) << " of " << k << '\n';
            report_written(out, g.out("model.json"));
            return kExitOk;
        }

        if (rec->parsed()) {
            const auto corpus = load_corpus(corpus_path);
            const auto section = g.section("recursion");
            auto cfg = RecursionConfig::from_json(section);
            cfg.lda_template = rec_flags.resolve(g);
            apply(gg_opt, cfg.guards.gamma_guard, gamma_guard);
            apply(eg_opt, cfg.guards.eta_guard, eta_guard);
            apply(ms_opt, cfg.guards.max_steps, max_steps);
            if (init_opt->count() || !section.contains("initial_k_source")) {
                if (!init_k.empty() && std::all_of(init_k.begin(), init_k.end(), [](unsigned char ch) { return std::isdigit(ch) != 0; })) {
                    cfg.initial_k_source = InitialKSource::Explicit;
                    cfg.explicit_k = std::stoul(init_k);
                } else {
                    cfg.initial_k_source = initial_k_source_from_string(init_k);
                }
            }
            std::optional<HdpEstimate> estimate;
            if (!hdp_path.empty()) {
                estimate = estimate_from_json(nlohmann::json::parse(read_file(hdp_path)));
            }
            const auto trace = run_recursion(corpus, cfg, rec_hdp_flags.resolve(g), estimate);
            write_file(g.out("trace.jsonl"), serialize_trace(trace));
            report_written(out, g.out("trace.jsonl"));
            for (const auto& s : trace.steps) {
                out << "step " << s.step_index << ": K " << s.k_specified << " -> " << s.k_effective << "  ratio "
                    << fixed(s.ratio.value(), 3) << '\n';
            }
            out << to_string(trace.outcome) << '\n';
            if (trace.final_model) {
                write_file(g.out("final_model.json"), serialize_model(*trace.final_model));
                report_written(out, g.out("final_model.json"));
            }
            return trace.outcome == Outcome::Success ? kExitOk : kExitRecursionFailure;
        }

        if (tune->parsed()) {
            const auto corpus = load_corpus(corpus_path);
            std::vector<GridPoint> grid;
            if (grid_values.empty()) {
                grid = default_grid();
            } else {
                for (double a : grid_values) {
                    for (double e : grid_values) grid.push_back({a, e});
                }
            }
            const auto result = tune_hyperparams(corpus, k, grid, tune_flags.resolve(g), top_m, g.parallelism);
            write_file(g.out("tuning.csv"), tuning_csv(result));
            out << "best alpha " << result.best.alpha << "  eta " << result.best.eta << "  coherence "
                << fixed(result.best_coherence.aggregate, 6) << '\n';
            report_written(out, g.out("tuning.csv"));
            return kExitOk;
        }

        if (perp->parsed()) {
            const auto model = parse_model(read_file(model_path));
            FoldInConfig fc{fold_sweeps, fold_burn, g.seed_opt->count() ? g.seed : model.config.seed};
            const auto r = perplexity(model, load_corpus(held_out_path), fc);
            nlohmann::json j = {{"perplexity", r.value}, {"held_out_tokens", r.held_out_tokens},
                                {"log_likelihood", r.log_likelihood}, {"oov_tokens", r.oov_tokens}};
            write_file(g.out("perplexity.json"), j.dump(2) + "\n");
            out << "perplexity " << fixed(r.value, 6) << " over " << r.held_out_tokens << " tokens ("
                << r.oov_tokens << " out of vocabulary)\n";
            return kExitOk;
        }

        if (exp->parsed()) {
            nlohmann::json pj;
            try {
                pj = nlohmann::json::parse(read_file(plan_path));
            } catch (const nlohmann::json::exception& e) {
                throw ConfigError("invalid plan JSON: " + std::string(e.what()));
            }
            auto plan = ExperimentPlan::from_json(pj);
            apply(g.seed_opt, plan.base_seed, g.seed);
            if (!pj.contains("parallelism")) plan.parallelism = g.parallelism;
            fs::path source = plan.corpus_source;
            if (source.is_relative()) source = fs::path(plan_path).parent_path() / source;
            const auto report = run_plan(plan, load_corpus(source.string()));
            write_report(report, g.output_dir);
            for (const auto& c : report.cells) {
                if (c.failed) {
                    out << c.name << ": FAILED " << c.error << '\n';
                } else {
                    out << c.name << ": hdp1 " << c.hdp1 << " hdp2 " << c.hdp2 << " mean-mode K "
                        << c.stats.mean_mode_final_k << " failure rate " << fixed(c.stats.failure_rate, 3) << '\n';
                }
            }
            report_written(out, g.out("report.json"));
            return kExitOk;
        }

        if (exp_clusters->parsed()) {
            const auto model = parse_model(read_file(model_path));
            std::ostringstream clusters, topics;
            clusters << "doc_id,dominant_topic,contribution,keywords\n";
            for (const auto& a : dominant_topics(model, top_m)) {
                std::string kw;
                for (const auto& t : a.top_keywords) kw += (kw.empty() ? "" : " ") + t;
                clusters << csv_field(a.doc_id) << ',' << a.dominant_topic << ',' << fixed(a.contribution, 6) << ',' << kw << '\n';
            }
            const auto histogram = emit_histogram_data(model);
            topics << "topic,documents,keywords\n";
            for (std::size_t t = 0; t < model.num_topics(); ++t) {
                std::string kw;
                for (const auto& term : top_keywords(model, t, top_m).terms) kw += (kw.empty() ? "" : " ") + term;
                topics << t << ',' << histogram[t] << ',' << kw << '\n';
            }
            write_file(g.out("clusters.csv"), clusters.str());
            write_file(g.out("topics.csv"), topics.str());
            report_written(out, g.out("clusters.csv"));
            report_written(out, g.out("topics.csv"));
            return kExitOk;
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DataError& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const nlohmann::json::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}

}  // namespace reclda
