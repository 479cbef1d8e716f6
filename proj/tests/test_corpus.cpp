#include <doctest.h>

#include "reclda/corpus.hpp"
#include "reclda/error.hpp"
#include "reclda/rng.hpp"
#include "test_support.hpp"

#include <algorithm>
#include <set>

using namespace reclda;

namespace {

PreprocessConfig bare_config() {
    PreprocessConfig c = PreprocessConfig::defaults();
    c.stopwords.clear();
    c.code_keywords.clear();
    return c;
}

Corpus numbered_corpus(std::size_t n) {
    std::vector<std::pair<std::string, std::vector<std::string>>> docs;
    for (std::size_t i = 0; i < n; ++i) {
        docs.push_back({"q" + std::to_string(i), {"t" + std::to_string(i % 37), "u" + std::to_string(i % 11)}});
    }
    return corpus_from_tokens(docs);
}

std::vector<std::string> ids_of(const Corpus& c) {
    std::vector<std::string> ids;
    for (const auto& d : c.documents) ids.push_back(d.id);
    return ids;
}

void check_corpus_invariants(const Corpus& c) {
    REQUIRE(c.size() >= 1);
    for (const auto& d : c.documents) {
        CHECK_FALSE(d.tokens.empty());
        for (TermId t : d.tokens) CHECK(t < c.vocabulary.size());
    }
    std::set<std::string> terms(c.vocabulary.terms().begin(), c.vocabulary.terms().end());
    CHECK(terms.size() == c.vocabulary.size());
    for (std::size_t i = 0; i < c.vocabulary.size(); ++i) {
        CHECK(c.vocabulary.find(c.vocabulary.term(static_cast<TermId>(i))) == static_cast<TermId>(i));
    }
}

}  // namespace

TEST_CASE("csv ingestion keeps file order") {
    const auto recs = ingest_csv_text("id,question\n1,first\n2,second\n3,third\n");
    REQUIRE(recs.size() == 3);
    CHECK(recs[0].id == "1");
    CHECK(recs[1].text == "second");
    CHECK(recs[2].id == "3");
}

TEST_CASE("csv quoted field with embedded comma, quote and newline") {
    // oracle rows produced by Python's csv module on the same text
    const std::string text = "id,question\r\nq1,\"Sort a, b and c\"\r\nq2,\"He said \"\"hi\"\"\"\r\nq3,\"two\nlines\"\r\n";
    const auto recs = ingest_csv_text(text);
    REQUIRE(recs.size() == 3);
    CHECK(recs[0].text == "Sort a, b and c");
    CHECK(recs[1].text == "He said \"hi\"");
    CHECK(recs[2].text == "two\nlines");
}

TEST_CASE("csv column selection and errors") {
    const auto recs = ingest_csv_text("text,key\nhello,k1\n", CsvColumns{"key", "text"});
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].id == "k1");
    CHECK(recs[0].text == "hello");

    CHECK_THROWS_WITH_AS(ingest_csv_text("id,body\n1,x\n"), "missing required column 'question'", DataError);
    CHECK_THROWS_AS(ingest_csv_text("id,question\n1,\"unterminated\n"), DataError);
    CHECK_THROWS_AS(ingest_csv_text("id,question\n1,a,b\n"), DataError);
    CHECK_THROWS_AS(ingest_csv_text("id,question\n1,a\n1,b\n"), DataError);
    CHECK_THROWS_AS(ingest_csv_text("id,question\n,a\n"), DataError);
    try {
        ingest_csv_text("id,question\n1,a\n2,b,c\n");
        FAIL("expected error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("row 3") != std::string::npos);
    }
}

TEST_CASE("csv with 1303 rows yields 1303 records") {
    std::string text = "id,question\n";
    for (int i = 1; i <= 1303; ++i) text += "q" + std::to_string(i) + ",question number " + std::to_string(i) + "\n";
    CHECK(ingest_csv_text(text).size() == 1303);
}

TEST_CASE("text blocks are split on blank lines") {
    const auto recs = ingest_blocks_text("first question\nstill first\n\n\nsecond\n\n");
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].id == "q1");
    CHECK(recs[0].text == "first question\nstill first");
    CHECK(recs[1].id == "q2");
}

TEST_CASE("hand-traced cleaning of a code question") {
    PreprocessConfig cfg = PreprocessConfig::defaults();
    cfg.code_keywords = {"for", "BigO"};
    // "Big-O" is not the whole token BigO, so only `for` is tagged; "o" is a stopword.
    CHECK(clean_text("What is the Big-O of this for loop?", cfg) ==
          std::vector<std::string>{"for", "big", "for", "loop"});
    CHECK(clean_text("Compute the BigO for this", cfg) ==
          std::vector<std::string>{"for", "bigo", "compute", "bigo", "for"});
    // keyword matching is on whole tokens only
    CHECK(clean_text("format forever", cfg) == std::vector<std::string>{"format", "forever"});
}

TEST_CASE("lowercase and punctuation stripping") {
    const auto cfg = bare_config();
    CHECK(clean_text("HELLO, hello!", cfg) == std::vector<std::string>{"hello", "hello"});
    const auto c = preprocess({{"x", "HELLO, hello!"}}, cfg);
    CHECK(c.vocabulary.terms() == std::vector<std::string>{"hello"});
    // idempotent on its own output
    const auto once = clean_text("Tree-Traversal: (in-order) VS pre_order!!", PreprocessConfig::defaults());
    std::string joined;
    for (const auto& t : once) joined += t + " ";
    CHECK(clean_text(joined, PreprocessConfig::defaults()) == once);
}

TEST_CASE("preprocess drops empty documents and rejects an empty corpus") {
    const auto c = preprocess({{"1", "binary tree depth"}, {"2", ""}, {"3", "the of and"}},
                              PreprocessConfig::defaults());
    REQUIRE(c.size() == 1);
    CHECK(c.documents[0].id == "1");
    check_corpus_invariants(c);
    CHECK_THROWS_AS(preprocess({{"1", ""}, {"2", "the"}}, PreprocessConfig::defaults()), DataError);
}

TEST_CASE("vocabulary terms respect the cleaning invariants") {
    const auto cfg = PreprocessConfig::defaults();
    const auto c = preprocess({{"1", "Write a FOR loop; print the Sum."}, {"2", "If x > 3, else while..."}}, cfg);
    check_corpus_invariants(c);
    std::set<std::string> stops(cfg.stopwords.begin(), cfg.stopwords.end());
    for (const auto& t : c.vocabulary.terms()) {
        CHECK(std::none_of(t.begin(), t.end(), [](unsigned char ch) { return std::isupper(ch); }));
        CHECK(t.find_first_of(cfg.punctuation) == std::string::npos);
        const bool is_tag = std::any_of(cfg.code_keywords.begin(), cfg.code_keywords.end(), [&](const std::string& k) {
            std::string lower = k;
            std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
            return lower == t;
        });
        if (!is_tag) CHECK(stops.count(t) == 0);
    }
}

TEST_CASE("permute is deterministic and preserves the id multiset") {
    const auto c = numbered_corpus(50);
    const auto p1 = permute(c, 7);
    const auto p2 = permute(c, 7);
    CHECK(ids_of(p1) == ids_of(p2));
    CHECK(p1.provenance.permutation_seeds == std::vector<std::uint64_t>{7});
    for (std::uint64_t seed : {1ULL, 2ULL, 99ULL, 123456789ULL}) {
        auto a = ids_of(permute(c, seed));
        auto b = ids_of(c);
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        CHECK(a == b);
    }
    CHECK(permute(c, 7).vocabulary == c.vocabulary);
}

TEST_CASE("five seeds on 1303 documents give pairwise different orders") {
    const auto c = numbered_corpus(1303);
    std::vector<std::vector<std::string>> orders;
    for (std::uint64_t seed : {11ULL, 22ULL, 33ULL, 44ULL, 55ULL}) orders.push_back(ids_of(permute(c, seed)));
    for (std::size_t i = 0; i < orders.size(); ++i)
        for (std::size_t j = i + 1; j < orders.size(); ++j) CHECK(orders[i] != orders[j]);
}

TEST_CASE("prefix") {
    const auto c = numbered_corpus(1303);
    const auto full = prefix(c, c.size());
    CHECK(ids_of(full) == ids_of(c));
    CHECK(full.vocabulary == c.vocabulary);
    CHECK(full.provenance.prefix_length == c.size());

    const auto p = prefix(c, 100);
    CHECK(p.size() == 100);
    check_corpus_invariants(p);
    for (std::size_t i = 0; i < 100; ++i) CHECK(p.documents[i].id == c.documents[i].id);

    auto original = ids_of(p);
    auto shuffled = ids_of(prefix(permute(c, 5), 100));
    std::sort(original.begin(), original.end());
    std::sort(shuffled.begin(), shuffled.end());
    CHECK(original != shuffled);

    CHECK_THROWS_AS(prefix(c, 0), ConfigError);
    CHECK_THROWS_AS(prefix(c, c.size() + 1), ConfigError);
}

TEST_CASE("corpus json round trip") {
    const auto c = permute(numbered_corpus(20), 3);
    const auto text = serialize_corpus(c);
    const auto back = parse_corpus(text);
    CHECK(serialize_corpus(back) == text);
    CHECK(back.fingerprint() == c.fingerprint());
    CHECK(back.provenance == c.provenance);
    CHECK_THROWS_AS(parse_corpus(R"({"provenance":{"source":"x","permutation_seeds":[],"prefix_length":null},"vocabulary":["a"],"documents":[{"id":"1","tokens":[3]}]})"),
                    DataError);
}
