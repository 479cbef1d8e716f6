#include "reclda/lda.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "reclda/error.hpp"
#include "reclda/format.hpp"

namespace reclda {

void LdaConfig::validate() const {
    if (k < 1) throw ConfigError("topic count k must be >= 1");
    if (!(alpha > 0.0)) throw ConfigError("alpha must be > 0");
    if (!(eta > 0.0)) throw ConfigError("eta must be > 0");
    if (burn_in > sweeps) throw ConfigError("burn_in must not exceed sweeps");
}

nlohmann::json LdaConfig::to_json() const {
    return {{"k", k}, {"alpha", alpha}, {"eta", eta}, {"sweeps", sweeps}, {"burn_in", burn_in}, {"seed", seed}};
}

LdaConfig LdaConfig::from_json(const nlohmann::json& j) {
    LdaConfig c;
    c.k = j.value("k", c.k);
    c.alpha = j.value("alpha", c.alpha);
    c.eta = j.value("eta", c.eta);
    c.sweeps = j.value("sweeps", c.sweeps);
    c.burn_in = j.value("burn_in", c.burn_in);
    c.seed = j.value("seed", c.seed);
    return c;
}

GibbsSampler::GibbsSampler(const Corpus& corpus, const LdaConfig& config)
    : corpus_(corpus),
      config_(config),
      k_(config.k),
      v_(corpus.vocabulary.size()),
      rng_(config.seed),
      doc_topic_(corpus.size() * config.k, 0),
      topic_word_(config.k * corpus.vocabulary.size(), 0),
      topic_total_(config.k, 0),
      weights_(config.k, 0.0) {
    config_.validate();
    if (corpus.size() == 0) throw DataError("empty corpus");
    if (k_ > corpus.token_count()) throw DataError("more topics than tokens");

    assignments_.resize(corpus.size());
    for (std::size_t d = 0; d < corpus.size(); ++d) {
        const auto& tokens = corpus.documents[d].tokens;
        auto& z = assignments_[d];
        z.resize(tokens.size());
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            const auto k = static_cast<TopicId>(rng_.below(k_));
            z[i] = k;
            ++doc_topic_[d * k_ + k];
            ++topic_word_[k * v_ + tokens[i]];
            ++topic_total_[k];
        }
    }
}

void GibbsSampler::sweep() {
    const double alpha = config_.alpha;
    const double eta = config_.eta;
    const double v_eta = static_cast<double>(v_) * eta;
    for (std::size_t d = 0; d < corpus_.size(); ++d) {
        const auto& tokens = corpus_.documents[d].tokens;
        auto& z = assignments_[d];
        std::uint32_t* nd = &doc_topic_[d * k_];
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            const auto w = tokens[i];
            const auto old = z[i];
            --nd[old];
            --topic_word_[old * v_ + w];
            --topic_total_[old];

            double total = 0.0;
            for (std::size_t k = 0; k < k_; ++k) {
                const double p = (nd[k] + alpha) * (topic_word_[k * v_ + w] + eta) / (topic_total_[k] + v_eta);
                weights_[k] = p;
                total += p;
            }
            const auto k = static_cast<TopicId>(rng_.categorical(weights_, total));

            z[i] = k;
            ++nd[k];
            ++topic_word_[k * v_ + w];
            ++topic_total_[k];
        }
    }
}

LdaModel fit(const Corpus& corpus, const LdaConfig& config, const SweepObserver& observer) {
    GibbsSampler sampler(corpus, config);
    const std::size_t k = config.k;
    const std::size_t v = corpus.vocabulary.size();
    const std::size_t docs = corpus.size();

    std::vector<double> doc_topic_sum(docs * k, 0.0);
    std::vector<double> topic_word_sum(k * v, 0.0);
    std::size_t samples = 0;

    for (std::size_t s = 1; s <= config.sweeps; ++s) {
        sampler.sweep();
        if (observer) observer(s, sampler);
        if (s > config.burn_in) {
            const auto& dt = sampler.doc_topic_counts();
            const auto& tw = sampler.topic_word_counts();
            for (std::size_t i = 0; i < dt.size(); ++i) doc_topic_sum[i] += dt[i];
            for (std::size_t i = 0; i < tw.size(); ++i) topic_word_sum[i] += tw[i];
            ++samples;
        }
    }
    if (samples == 0) {
        const auto& dt = sampler.doc_topic_counts();
        const auto& tw = sampler.topic_word_counts();
        std::copy(dt.begin(), dt.end(), doc_topic_sum.begin());
        std::copy(tw.begin(), tw.end(), topic_word_sum.begin());
        samples = 1;
    }
    const double inv = 1.0 / static_cast<double>(samples);

    LdaModel model;
    model.config = config;
    model.vocabulary = corpus.vocabulary.terms();
    model.corpus_fingerprint = corpus.fingerprint();
    model.theta = Matrix(docs, k);
    model.beta = Matrix(k, v);
    for (std::size_t d = 0; d < docs; ++d) {
        model.doc_ids.push_back(corpus.documents[d].id);
        const double denom = static_cast<double>(corpus.documents[d].tokens.size()) + k * config.alpha;
        for (std::size_t t = 0; t < k; ++t) {
            model.theta(d, t) = (doc_topic_sum[d * k + t] * inv + config.alpha) / denom;
        }
    }
    for (std::size_t t = 0; t < k; ++t) {
        double n_k = 0.0;
        for (std::size_t w = 0; w < v; ++w) n_k += topic_word_sum[t * v + w] * inv;
        const double denom = n_k + v * config.eta;
        for (std::size_t w = 0; w < v; ++w) model.beta(t, w) = (topic_word_sum[t * v + w] * inv + config.eta) / denom;
    }
    model.assignments = sampler.assignments();
    return model;
}

std::vector<TopicAssignment> dominant_topics(const LdaModel& model, std::size_t keywords) {
    std::vector<TopicAssignment> out;
    out.reserve(model.num_docs());
    for (std::size_t d = 0; d < model.num_docs(); ++d) {
        const auto row = model.theta.row(d);
        // max_element returns the first maximum, giving the lowest-index tie rule
        const auto best = static_cast<TopicId>(std::max_element(row.begin(), row.end()) - row.begin());
        TopicAssignment a;
        a.doc_id = d < model.doc_ids.size() ? model.doc_ids[d] : std::to_string(d);
        a.dominant_topic = best;
        a.contribution = row[best];
        if (keywords > 0 && model.vocab_size() > 0) a.top_keywords = top_keywords(model, best, keywords).terms;
        out.push_back(std::move(a));
    }
    return out;
}

std::size_t effective_topic_count(const LdaModel& model) {
    std::vector<bool> used(model.num_topics(), false);
    std::size_t count = 0;
    for (const auto& a : dominant_topics(model, 0)) {
        if (!used[a.dominant_topic]) {
            used[a.dominant_topic] = true;
            ++count;
        }
    }
    return count;
}

KeywordList top_keywords(const LdaModel& model, std::size_t topic, std::size_t m) {
    if (topic >= model.num_topics()) {
        throw ConfigError("topic " + std::to_string(topic) + " out of range (K = " +
                          std::to_string(model.num_topics()) + ")");
    }
    if (m < 1) throw ConfigError("keyword count must be >= 1");
    const auto row = model.beta.row(topic);
    std::vector<TermId> ids(row.size());
    std::iota(ids.begin(), ids.end(), TermId{0});
    const std::size_t take = std::min(m, ids.size());
    std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(take), ids.end(),
                      [&](TermId a, TermId b) { return row[a] > row[b] || (row[a] == row[b] && a < b); });
    KeywordList out;
    out.truncated = m > ids.size();
    for (std::size_t i = 0; i < take; ++i) {
        out.ids.push_back(ids[i]);
        out.weights.push_back(row[ids[i]]);
        out.terms.push_back(ids[i] < model.vocabulary.size() ? model.vocabulary[ids[i]] : std::to_string(ids[i]));
    }
    return out;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::uint64_t parse_hex64(const std::string& s) {
    try {
        std::size_t used = 0;
        const auto v = std::stoull(s, &used, 16);
        if (used != s.size()) throw DataError("bad hex value '" + s + "'");
        return v;
    } catch (const std::logic_error&) {
        throw DataError("bad hex value '" + s + "'");
    }
}

namespace {

void write_matrix(std::ostringstream& out, const Matrix& m) {
    out << '[';
    for (std::size_t r = 0; r < m.rows(); ++r) {
        if (r) out << ',';
        out << '[';
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (c) out << ',';
            out << fixed(m(r, c), 12);
        }
        out << ']';
    }
    out << ']';
}

Matrix read_matrix(const nlohmann::json& j) {
    const std::size_t rows = j.size();
    const std::size_t cols = rows ? j.at(0).size() : 0;
    Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        if (j.at(r).size() != cols) throw DataError("ragged matrix in model JSON");
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
    }
    return m;
}

}  // namespace

std::string serialize_model(const LdaModel& model) {
    std::ostringstream out;
    out << "{\"config\":" << model.config.to_json().dump()
        << ",\"corpus_fingerprint\":\"" << hex64(model.corpus_fingerprint) << '"'
        << ",\"vocabulary\":" << nlohmann::json(model.vocabulary).dump()
        << ",\"doc_ids\":" << nlohmann::json(model.doc_ids).dump() << ",\"theta\":";
    write_matrix(out, model.theta);
    out << ",\"beta\":";
    write_matrix(out, model.beta);
    out << ",\"assignments\":" << nlohmann::json(model.assignments).dump() << "}\n";
    return out.str();
}

LdaModel parse_model(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        LdaModel m;
        m.config = LdaConfig::from_json(j.at("config"));
        m.corpus_fingerprint = parse_hex64(j.at("corpus_fingerprint").get<std::string>());
        m.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
        m.doc_ids = j.at("doc_ids").get<std::vector<std::string>>();
        m.theta = read_matrix(j.at("theta"));
        m.beta = read_matrix(j.at("beta"));
        m.assignments = j.at("assignments").get<std::vector<std::vector<TopicId>>>();
        if (m.beta.cols() != m.vocabulary.size() || m.theta.cols() != m.beta.rows()) {
            throw DataError("model JSON dimensions disagree");
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("invalid model JSON: ") + e.what());
    }
}

std::uint64_t model_fingerprint(const LdaModel& model) {
    const auto text = serialize_model(model);
    Fnv1a h;
    h.add(text.data(), text.size());
    return h.value();
}

}  // namespace reclda
