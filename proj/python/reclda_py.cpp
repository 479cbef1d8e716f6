#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "reclda/cli.hpp"
#include "reclda/corpus.hpp"
#include "reclda/error.hpp"
#include "reclda/evalmetrics.hpp"
#include "reclda/experiments.hpp"
#include "reclda/hdp.hpp"
#include "reclda/lda.hpp"
#include "reclda/recursor.hpp"
#include "reclda/synth.hpp"

#include <sstream>

namespace py = pybind11;
using namespace reclda;

namespace {

std::vector<std::vector<double>> rows(const Matrix& m) {
    std::vector<std::vector<double>> out(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) out[r].assign(m.row(r).begin(), m.row(r).end());
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Recursive LDA topic-count refinement seeded by a truncated HDP";

    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    py::class_<RawRecord>(m, "RawRecord")
        .def(py::init<>())
        .def(py::init([](std::string id, std::string text) { return RawRecord{std::move(id), std::move(text)}; }),
             py::arg("id"), py::arg("text"))
        .def_readwrite("id", &RawRecord::id)
        .def_readwrite("text", &RawRecord::text);

    py::class_<PreprocessConfig>(m, "PreprocessConfig")
        .def(py::init(&PreprocessConfig::defaults))
        .def_readwrite("stopwords", &PreprocessConfig::stopwords)
        .def_readwrite("code_keywords", &PreprocessConfig::code_keywords)
        .def_readwrite("punctuation", &PreprocessConfig::punctuation);

    py::class_<Corpus>(m, "Corpus")
        .def_property_readonly("size", &Corpus::size)
        .def_property_readonly("vocabulary", [](const Corpus& c) { return c.vocabulary.terms(); })
        .def_property_readonly("doc_ids",
                               [](const Corpus& c) {
                                   std::vector<std::string> ids;
                                   for (const auto& d : c.documents) ids.push_back(d.id);
                                   return ids;
                               })
        .def_property_readonly("documents",
                               [](const Corpus& c) {
                                   std::vector<std::vector<TermId>> docs;
                                   for (const auto& d : c.documents) docs.push_back(d.tokens);
                                   return docs;
                               })
        .def("fingerprint", &Corpus::fingerprint)
        .def("to_json", &serialize_corpus)
        .def_static("from_json", &parse_corpus);

    m.def("ingest_csv", [](const std::string& text, const std::string& id_col, const std::string& text_col) {
        return ingest_csv_text(text, CsvColumns{id_col, text_col});
    }, py::arg("text"), py::arg("id_col") = "id", py::arg("text_col") = "question");
    m.def("ingest_blocks", &ingest_blocks_text, py::arg("text"));
    m.def("clean_text", &clean_text, py::arg("text"), py::arg("config") = PreprocessConfig::defaults());
    m.def("preprocess", [](const std::vector<RawRecord>& records, const PreprocessConfig& config) {
        return preprocess(records, config);
    }, py::arg("records"), py::arg("config") = PreprocessConfig::defaults());
    m.def("permute", &permute, py::arg("corpus"), py::arg("seed"));
    m.def("prefix", &prefix, py::arg("corpus"), py::arg("k"));
    m.def("synthesize_corpus", [](std::size_t true_k, std::size_t docs, std::size_t vocab, std::size_t doc_len,
                                  std::uint64_t seed) {
        return synthesize_corpus(SynthConfig{true_k, docs, vocab, doc_len, 0.1, 0.1, seed});
    }, py::arg("true_k") = 8, py::arg("docs") = 500, py::arg("vocab") = 200, py::arg("doc_len") = 40,
       py::arg("seed") = 0);

    py::class_<LdaConfig>(m, "LdaConfig")
        .def(py::init([](std::size_t k, double alpha, double eta, std::size_t sweeps, std::size_t burn_in,
                         std::uint64_t seed) { return LdaConfig{k, alpha, eta, sweeps, burn_in, seed}; }),
             py::arg("k") = 0, py::arg("alpha") = 0.1, py::arg("eta") = 0.1, py::arg("sweeps") = 200,
             py::arg("burn_in") = 100, py::arg("seed") = 0)
        .def_readwrite("k", &LdaConfig::k)
        .def_readwrite("alpha", &LdaConfig::alpha)
        .def_readwrite("eta", &LdaConfig::eta)
        .def_readwrite("sweeps", &LdaConfig::sweeps)
        .def_readwrite("burn_in", &LdaConfig::burn_in)
        .def_readwrite("seed", &LdaConfig::seed);

    py::class_<LdaModel>(m, "LdaModel")
        .def_readonly("config", &LdaModel::config)
        .def_readonly("vocabulary", &LdaModel::vocabulary)
        .def_readonly("doc_ids", &LdaModel::doc_ids)
        .def_property_readonly("theta", [](const LdaModel& mo) { return rows(mo.theta); })
        .def_property_readonly("beta", [](const LdaModel& mo) { return rows(mo.beta); })
        .def_readonly("assignments", &LdaModel::assignments)
        .def_property_readonly("num_topics", &LdaModel::num_topics)
        .def("to_json", &serialize_model)
        .def_static("from_json", &parse_model);

    py::class_<TopicAssignment>(m, "TopicAssignment")
        .def_readonly("doc_id", &TopicAssignment::doc_id)
        .def_readonly("dominant_topic", &TopicAssignment::dominant_topic)
        .def_readonly("contribution", &TopicAssignment::contribution)
        .def_readonly("top_keywords", &TopicAssignment::top_keywords);

    m.def("fit", [](const Corpus& c, const LdaConfig& cfg) { return fit(c, cfg); }, py::arg("corpus"),
          py::arg("config"), py::call_guard<py::gil_scoped_release>());
    m.def("dominant_topics", &dominant_topics, py::arg("model"), py::arg("keywords") = 10);
    m.def("effective_topic_count", &effective_topic_count, py::arg("model"));
    m.def("top_keywords", [](const LdaModel& mo, std::size_t topic, std::size_t count) {
        return top_keywords(mo, topic, count).terms;
    }, py::arg("model"), py::arg("topic"), py::arg("m"));

    py::class_<HdpConfig>(m, "HdpConfig")
        .def(py::init<>())
        .def_readwrite("gamma", &HdpConfig::gamma)
        .def_readwrite("beta_prior", &HdpConfig::beta_prior)
        .def_readwrite("eta_doc", &HdpConfig::eta_doc)
        .def_readwrite("truncation", &HdpConfig::truncation)
        .def_readwrite("sweeps", &HdpConfig::sweeps)
        .def_readwrite("burn_in", &HdpConfig::burn_in)
        .def_readwrite("seed", &HdpConfig::seed)
        .def_readwrite("refit_escalation", &HdpConfig::refit_escalation);

    py::class_<HdpEstimate>(m, "HdpEstimate")
        .def_readonly("topic_weights", &HdpEstimate::topic_weights)
        .def_property_readonly("hdp1", &HdpEstimate::hdp1)
        .def_property_readonly("hdp2", &HdpEstimate::hdp2)
        .def_property_readonly("hdp3", &HdpEstimate::hdp3)
        .def_property_readonly("thresholds", [](const HdpEstimate& e) {
            return std::vector<std::optional<double>>(e.escalation.thresholds.begin(), e.escalation.thresholds.end());
        })
        .def_property_readonly("degenerate", [](const HdpEstimate& e) {
            return std::vector<bool>(e.escalation.degenerate.begin(), e.escalation.degenerate.end());
        })
        .def("to_json", &serialize_estimate);

    m.def("fit_hdp", &fit_hdp, py::arg("corpus"), py::arg("config") = HdpConfig{},
          py::call_guard<py::gil_scoped_release>());
    m.def("escalate", [](const std::vector<double>& weights, std::size_t n) {
        const auto e = escalate(weights, n);
        return py::make_tuple(e.hdp1(), e.hdp2(), e.hdp3(),
                              std::vector<std::optional<double>>(e.thresholds.begin(), e.thresholds.end()),
                              std::vector<bool>(e.degenerate.begin(), e.degenerate.end()));
    }, py::arg("topic_weights"), py::arg("corpus_size"));

    py::class_<RecursionStep>(m, "RecursionStep")
        .def_readonly("step_index", &RecursionStep::step_index)
        .def_readonly("k_specified", &RecursionStep::k_specified)
        .def_readonly("k_effective", &RecursionStep::k_effective)
        .def_property_readonly("efficiency_ratio", [](const RecursionStep& s) { return s.ratio.value(); });

    py::class_<RecursionTrace>(m, "RecursionTrace")
        .def_readonly("steps", &RecursionTrace::steps)
        .def_property_readonly("outcome", [](const RecursionTrace& t) { return to_string(t.outcome); })
        .def_property_readonly("final_k", &RecursionTrace::final_k)
        .def_readonly("final_model", &RecursionTrace::final_model)
        .def("to_jsonl", &serialize_trace);

    m.def("run_recursion", [](const Corpus& corpus, std::size_t initial_k, double alpha, double eta,
                              std::size_t sweeps, std::size_t burn_in, std::uint64_t seed, double gamma_guard,
                              std::size_t eta_guard, std::size_t max_steps) {
        LdaConfig lda{0, alpha, eta, sweeps, burn_in, seed};
        return run_recursion(initial_k, Guards{gamma_guard, eta_guard, max_steps}, seed, lda_fitter(corpus, lda));
    }, py::arg("corpus"), py::arg("initial_k"), py::arg("alpha") = 0.1, py::arg("eta") = 0.1,
       py::arg("sweeps") = 200, py::arg("burn_in") = 100, py::arg("seed") = 0, py::arg("gamma_guard") = 0.2,
       py::arg("eta_guard") = 3, py::arg("max_steps") = 50, py::call_guard<py::gil_scoped_release>());
    m.def("run_scripted_recursion", [](const std::vector<std::size_t>& effective, std::size_t initial_k,
                                       double gamma_guard, std::size_t eta_guard, std::size_t max_steps) {
        std::size_t call = 0;
        Fitter fitter = [&](std::size_t, std::uint64_t) {
            if (call >= effective.size()) throw DataError("script exhausted");
            return FitResult{effective[call++], 0, std::nullopt};
        };
        return run_recursion(initial_k, Guards{gamma_guard, eta_guard, max_steps}, 0, fitter);
    }, py::arg("effective"), py::arg("initial_k"), py::arg("gamma_guard") = 0.2, py::arg("eta_guard") = 3,
       py::arg("max_steps") = 50);

    m.def("perplexity", [](const LdaModel& model, const Corpus& held_out, std::uint64_t seed) {
        const auto r = perplexity(model, held_out, FoldInConfig{50, 25, seed});
        return py::make_tuple(r.value, r.held_out_tokens, r.log_likelihood, r.oov_tokens);
    }, py::arg("model"), py::arg("held_out"), py::arg("seed") = 0);
    m.def("umass_coherence", [](const LdaModel& model, const Corpus& corpus, std::size_t top_m) {
        const auto r = umass_coherence(model, corpus, top_m);
        return py::make_tuple(r.per_topic, r.aggregate);
    }, py::arg("model"), py::arg("corpus"), py::arg("top_m") = 10);

    m.def("mean_mode", [](const std::vector<std::size_t>& values) { return mean_mode(values); }, py::arg("values"));
    m.def("emit_histogram_data", &emit_histogram_data, py::arg("model"));

    m.def("run_cli", [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
            py::gil_scoped_release release;
            code = run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
    }, py::arg("args"));
}
