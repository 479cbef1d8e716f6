#include "reclda/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "reclda/error.hpp"
#include "reclda/rng.hpp"

namespace reclda {

namespace {

// NLTK English stopword list.
const char* const kEnglishStopwords[] = {
    "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "you're", "you've",
    "you'll", "you'd", "your", "yours", "yourself", "yourselves", "he", "him", "his", "himself",
    "she", "she's", "her", "hers", "herself", "it", "it's", "its", "itself", "they", "them",
    "their", "theirs", "themselves", "what", "which", "who", "whom", "this", "that", "that'll",
    "these", "those", "am", "is", "are", "was", "were", "be", "been", "being", "have", "has",
    "had", "having", "do", "does", "did", "doing", "a", "an", "the", "and", "but", "if", "or",
    "because", "as", "until", "while", "of", "at", "by", "for", "with", "about", "against",
    "between", "into", "through", "during", "before", "after", "above", "below", "to", "from",
    "up", "down", "in", "out", "on", "off", "over", "under", "again", "further", "then", "once",
    "here", "there", "when", "where", "why", "how", "all", "any", "both", "each", "few", "more",
    "most", "other", "some", "such", "no", "nor", "not", "only", "own", "same", "so", "than",
    "too", "very", "s", "t", "can", "will", "just", "don", "don't", "should", "should've", "now",
    "d", "ll", "m", "o", "re", "ve", "y", "ain", "aren", "aren't", "couldn", "couldn't", "didn",
    "didn't", "doesn", "doesn't", "hadn", "hadn't", "hasn", "hasn't", "haven", "haven't", "isn",
    "isn't", "ma", "mightn", "mightn't", "mustn", "mustn't", "needn", "needn't", "shan", "shan't",
    "shouldn", "shouldn't", "wasn", "wasn't", "weren", "weren't", "won", "won't", "wouldn",
    "wouldn't"};

const char* const kCodeKeywords[] = {"BigO", "Modulo", "for", "if", "while", "else", "print"};

constexpr const char* kAsciiPunctuation = "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~";

std::string ascii_lower(std::string s) {
    for (auto& c : s) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return s;
}

bool is_word_char(unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' ||
           c >= 0x80;
}

std::vector<std::string> split_whitespace(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

// Vocabulary in first-occurrence order over the documents.
Corpus build_corpus(const std::vector<std::pair<std::string, std::vector<std::string>>>& docs,
                    Provenance provenance) {
    Corpus corpus;
    corpus.provenance = std::move(provenance);
    for (const auto& [id, terms] : docs) {
        if (terms.empty()) continue;
        Document doc{id, {}};
        doc.tokens.reserve(terms.size());
        for (const auto& t : terms) doc.tokens.push_back(corpus.vocabulary.intern(t));
        corpus.documents.push_back(std::move(doc));
    }
    if (corpus.documents.empty()) throw DataError("empty corpus");
    return corpus;
}

}  // namespace

Vocabulary::Vocabulary(std::vector<std::string> terms) {
    for (auto& t : terms) {
        if (index_.count(t)) throw DataError("duplicate vocabulary term '" + t + "'");
        index_.emplace(t, static_cast<TermId>(terms_.size()));
        terms_.push_back(std::move(t));
    }
}

TermId Vocabulary::intern(const std::string& term) {
    auto it = index_.find(term);
    if (it != index_.end()) return it->second;
    const auto id = static_cast<TermId>(terms_.size());
    index_.emplace(term, id);
    terms_.push_back(term);
    return id;
}

std::optional<TermId> Vocabulary::find(const std::string& term) const {
    auto it = index_.find(term);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::size_t Corpus::token_count() const {
    std::size_t n = 0;
    for (const auto& d : documents) n += d.tokens.size();
    return n;
}

std::uint64_t Corpus::fingerprint() const {
    Fnv1a h;
    for (const auto& t : vocabulary.terms()) {
        h.add(t.data(), t.size());
        h.add_value('\0');
    }
    for (const auto& d : documents) {
        h.add(d.id.data(), d.id.size());
        h.add_value(static_cast<std::uint64_t>(d.tokens.size()));
        h.add(d.tokens.data(), d.tokens.size() * sizeof(TermId));
    }
    return h.value();
}

PreprocessConfig PreprocessConfig::defaults() {
    PreprocessConfig c;
    c.stopwords.assign(std::begin(kEnglishStopwords), std::end(kEnglishStopwords));
    c.code_keywords.assign(std::begin(kCodeKeywords), std::end(kCodeKeywords));
    c.punctuation = kAsciiPunctuation;
    return c;
}

PreprocessConfig PreprocessConfig::from_json(const nlohmann::json& j) {
    auto c = defaults();
    if (j.contains("stopwords")) c.stopwords = j.at("stopwords").get<std::vector<std::string>>();
    if (j.contains("code_keywords")) c.code_keywords = j.at("code_keywords").get<std::vector<std::string>>();
    if (j.contains("punctuation")) c.punctuation = j.at("punctuation").get<std::string>();
    return c;
}

nlohmann::json PreprocessConfig::to_json() const {
    return {{"stopwords", stopwords}, {"code_keywords", code_keywords}, {"punctuation", punctuation}};
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool field_was_quoted = false;
    std::size_t row_number = 1;
    std::size_t quote_start_row = 0;

    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_was_quoted = false;
    };
    auto end_row = [&] {
        end_field();
        // a bare newline at end of file or blank line yields a single empty field
        if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
        row.clear();
        ++row_number;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                if (!field.empty() || field_was_quoted) {
                    throw DataError("malformed CSV at row " + std::to_string(row_number) +
                                    ": stray quote inside unquoted field");
                }
                in_quotes = true;
                field_was_quoted = true;
                quote_start_row = row_number;
                break;
            case ',':
                end_field();
                break;
            case '\r':
                if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
                end_row();
                break;
            case '\n':
                end_row();
                break;
            default:
                if (field_was_quoted) {
                    throw DataError("malformed CSV at row " + std::to_string(row_number) +
                                    ": text after closing quote");
                }
                field.push_back(c);
        }
    }
    if (in_quotes) {
        throw DataError("malformed CSV at row " + std::to_string(quote_start_row) + ": unterminated quote");
    }
    if (!field.empty() || field_was_quoted || !row.empty()) end_row();

    if (!rows.empty()) {
        const auto width = rows.front().size();
        for (std::size_t r = 1; r < rows.size(); ++r) {
            if (rows[r].size() != width) {
                throw DataError("malformed CSV at row " + std::to_string(r + 1) + ": expected " +
                                std::to_string(width) + " fields, found " + std::to_string(rows[r].size()));
            }
        }
    }
    return rows;
}

std::vector<RawRecord> ingest_csv_text(const std::string& text, const CsvColumns& columns) {
    std::string body = text;
    if (body.rfind("\xEF\xBB\xBF", 0) == 0) body.erase(0, 3);
    auto rows = parse_csv(body);
    if (rows.empty()) throw DataError("CSV has no header row");
    const auto& header = rows.front();
    auto column = [&](const std::string& name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw DataError("missing required column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    };
    const auto id_col = column(columns.id);
    const auto text_col = column(columns.text);

    std::vector<RawRecord> records;
    std::unordered_set<std::string> seen;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        RawRecord rec{rows[r][id_col], rows[r][text_col]};
        if (rec.id.empty()) throw DataError("empty id at CSV row " + std::to_string(r + 1));
        if (!seen.insert(rec.id).second) {
            throw DataError("duplicate id '" + rec.id + "' at CSV row " + std::to_string(r + 1));
        }
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<RawRecord> ingest_blocks_text(const std::string& text) {
    std::vector<RawRecord> records;
    std::string block;
    std::istringstream in(text);
    std::string line;
    auto flush = [&] {
        if (!block.empty()) {
            records.push_back({"q" + std::to_string(records.size() + 1), block});
            block.clear();
        }
    };
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) {
            flush();
            continue;
        }
        if (!block.empty()) block.push_back('\n');
        block += line;
    }
    flush();
    return records;
}

std::vector<RawRecord> ingest(const std::filesystem::path& path, InputFormat format, const CsvColumns& columns) {
    const auto text = read_file(path);
    return format == InputFormat::Csv ? ingest_csv_text(text, columns) : ingest_blocks_text(text);
}

std::vector<std::string> clean_text(const std::string& text, const PreprocessConfig& config) {
    // (1) tag code keywords found as whole tokens, case-sensitive
    std::unordered_set<std::string> raw_tokens;
    for (std::size_t i = 0; i < text.size();) {
        if (!is_word_char(static_cast<unsigned char>(text[i]))) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && is_word_char(static_cast<unsigned char>(text[j]))) ++j;
        raw_tokens.insert(text.substr(i, j - i));
        i = j;
    }
    std::string tagged;
    for (const auto& kw : config.code_keywords) {
        if (raw_tokens.count(kw)) {
            tagged += kw;
            tagged.push_back(' ');
        }
    }
    tagged += text;

    // (2) lowercase, (3) punctuation to spaces
    std::string cleaned = ascii_lower(std::move(tagged));
    for (auto& c : cleaned) {
        if (config.punctuation.find(c) != std::string::npos) c = ' ';
    }

    // (4) whitespace tokenize, (5) stopwords; keyword tags are never stopwords
    std::unordered_set<std::string> stop;
    for (const auto& s : config.stopwords) stop.insert(ascii_lower(s));
    for (const auto& kw : config.code_keywords) stop.erase(ascii_lower(kw));

    std::vector<std::string> out;
    for (auto& tok : split_whitespace(cleaned)) {
        if (!stop.count(tok)) out.push_back(std::move(tok));
    }
    return out;
}

Corpus preprocess(const std::vector<RawRecord>& records, const PreprocessConfig& config, std::string source) {
    std::vector<std::pair<std::string, std::vector<std::string>>> docs;
    docs.reserve(records.size());
    for (const auto& rec : records) docs.emplace_back(rec.id, clean_text(rec.text, config));
    return build_corpus(docs, Provenance{std::move(source), {}, std::nullopt});
}

Corpus corpus_from_tokens(const std::vector<std::pair<std::string, std::vector<std::string>>>& docs,
                          std::string source) {
    return build_corpus(docs, Provenance{std::move(source), {}, std::nullopt});
}

Corpus permute(const Corpus& corpus, std::uint64_t seed) {
    Corpus out = corpus;
    Rng rng(seed);
    shuffle(out.documents, rng);
    out.provenance.permutation_seeds.push_back(seed);
    return out;
}

Corpus prefix(const Corpus& corpus, std::size_t k) {
    if (k < 1 || k > corpus.size()) {
        throw ConfigError("prefix length " + std::to_string(k) + " outside [1, " +
                          std::to_string(corpus.size()) + "]");
    }
    std::vector<std::pair<std::string, std::vector<std::string>>> docs;
    docs.reserve(k);
    for (std::size_t d = 0; d < k; ++d) {
        std::vector<std::string> terms;
        terms.reserve(corpus.documents[d].tokens.size());
        for (auto t : corpus.documents[d].tokens) terms.push_back(corpus.vocabulary.term(t));
        docs.emplace_back(corpus.documents[d].id, std::move(terms));
    }
    auto prov = corpus.provenance;
    prov.prefix_length = k;
    return build_corpus(docs, std::move(prov));
}

nlohmann::json corpus_to_json(const Corpus& corpus) {
    nlohmann::json prov = {{"source", corpus.provenance.source},
                           {"permutation_seeds", corpus.provenance.permutation_seeds},
                           {"prefix_length", nullptr}};
    if (corpus.provenance.prefix_length) prov["prefix_length"] = *corpus.provenance.prefix_length;
    nlohmann::json docs = nlohmann::json::array();
    for (const auto& d : corpus.documents) docs.push_back({{"id", d.id}, {"tokens", d.tokens}});
    return {{"provenance", prov}, {"vocabulary", corpus.vocabulary.terms()}, {"documents", docs}};
}

Corpus corpus_from_json(const nlohmann::json& j) {
    try {
        Corpus c;
        const auto& prov = j.at("provenance");
        c.provenance.source = prov.at("source").get<std::string>();
        c.provenance.permutation_seeds = prov.at("permutation_seeds").get<std::vector<std::uint64_t>>();
        if (!prov.at("prefix_length").is_null()) c.provenance.prefix_length = prov.at("prefix_length").get<std::size_t>();
        c.vocabulary = Vocabulary(j.at("vocabulary").get<std::vector<std::string>>());
        for (const auto& d : j.at("documents")) {
            Document doc{d.at("id").get<std::string>(), d.at("tokens").get<std::vector<TermId>>()};
            if (doc.tokens.empty()) throw DataError("document '" + doc.id + "' has no tokens");
            for (auto t : doc.tokens) {
                if (t >= c.vocabulary.size()) throw DataError("token id out of range in document '" + doc.id + "'");
            }
            c.documents.push_back(std::move(doc));
        }
        if (c.documents.empty()) throw DataError("empty corpus");
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("invalid corpus JSON: ") + e.what());
    }
}

std::string serialize_corpus(const Corpus& corpus) { return corpus_to_json(corpus).dump() + "\n"; }

Corpus parse_corpus(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("invalid corpus JSON: ") + e.what());
    }
    return corpus_from_json(j);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << contents;
}

}  // namespace reclda
