#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace reclda {

using TermId = std::uint32_t;

struct RawRecord {
    std::string id;
    std::string text;
};

struct Document {
    std::string id;
    std::vector<TermId> tokens;
};

class Vocabulary {
public:
    Vocabulary() = default;
    /// Terms must be unique; ids follow the given order.
    explicit Vocabulary(std::vector<std::string> terms);

    /// Id for `term`, inserting it at the end if new.
    TermId intern(const std::string& term);
    std::optional<TermId> find(const std::string& term) const;

    const std::string& term(TermId id) const { return terms_.at(id); }
    const std::vector<std::string>& terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }

    friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.terms_ == b.terms_; }

private:
    std::vector<std::string> terms_;
    std::unordered_map<std::string, TermId> index_;
};

struct Provenance {
    std::string source;
    /// Seeds of every permute() applied, oldest first.
    std::vector<std::uint64_t> permutation_seeds;
    std::optional<std::size_t> prefix_length;

    friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct Corpus {
    std::vector<Document> documents;
    Vocabulary vocabulary;
    Provenance provenance;

    std::size_t size() const { return documents.size(); }
    std::size_t token_count() const;
    /// Stable hash of vocabulary and documents (provenance excluded).
    std::uint64_t fingerprint() const;
};

struct PreprocessConfig {
    std::vector<std::string> stopwords;
    std::vector<std::string> code_keywords;
    std::string punctuation;

    /// English stopword list, the course-code keyword tags, and ASCII punctuation.
    static PreprocessConfig defaults();
    static PreprocessConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

enum class InputFormat { Csv, TextBlocks };

struct CsvColumns {
    std::string id = "id";
    std::string text = "question";
};

/// Parse RFC 4180 CSV text into rows of fields. Throws DataError naming the
/// 1-based row on unterminated quotes or ragged rows.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

std::vector<RawRecord> ingest_csv_text(const std::string& text, const CsvColumns& columns = {});
std::vector<RawRecord> ingest_blocks_text(const std::string& text);
std::vector<RawRecord> ingest(const std::filesystem::path& path, InputFormat format,
                              const CsvColumns& columns = {});

/// Tokenize one raw string through the cleaning pipeline (tagging, lowercase,
/// punctuation strip, whitespace split, stopword removal).
std::vector<std::string> clean_text(const std::string& text, const PreprocessConfig& config);

Corpus preprocess(const std::vector<RawRecord>& records, const PreprocessConfig& config,
                  std::string source = "records");

Corpus permute(const Corpus& corpus, std::uint64_t seed);

/// First k documents, vocabulary rebuilt from the subset.
Corpus prefix(const Corpus& corpus, std::size_t k);

/// Build a corpus from already tokenized documents (vocabulary in first-seen order).
Corpus corpus_from_tokens(const std::vector<std::pair<std::string, std::vector<std::string>>>& docs,
                          std::string source = "tokens");

nlohmann::json corpus_to_json(const Corpus& corpus);
Corpus corpus_from_json(const nlohmann::json& j);
std::string serialize_corpus(const Corpus& corpus);
Corpus parse_corpus(const std::string& text);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace reclda
