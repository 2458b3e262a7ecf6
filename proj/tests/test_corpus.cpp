#include <doctest.h>

#include <cmath>
#include <sstream>

#include "vmfdoc/corpus.hpp"
#include "vmfdoc/errors.hpp"
#include "vmfdoc/vecops.hpp"

using namespace vmfdoc;

namespace {

EmbeddingTable table_from(const std::string& text, EmbeddingLoadStats* stats = nullptr) {
    std::istringstream in(text);
    return load_embeddings(in, stats);
}

const StopwordSet kNoStopwords;

}  // namespace

TEST_CASE("embedding loader normalizes rows") {
    EmbeddingTable t = table_from("2 3\na 3 4 0\nb 0 0 1\n");
    CHECK(t.dim == 3);
    CHECK(t.size() == 2);
    REQUIRE(t.lookup("a").has_value());
    const UnitVector& a = t.vec(*t.lookup("a"));
    CHECK(a[0] == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(a[1] == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(a[2] == 0.0);
    const UnitVector& b = t.vec(*t.lookup("b"));
    CHECK(b[2] == 1.0);
    CHECK_FALSE(t.lookup("missing").has_value());
    CHECK(t.fingerprint != 0);
}

TEST_CASE("embedding loader skips degenerate and duplicate rows") {
    EmbeddingLoadStats stats;
    EmbeddingTable t = table_from("3 3\na 1 0 0\nc 0 0 0\na 0 1 0\n", &stats);
    CHECK(t.size() == 1);
    CHECK(stats.skipped_zero_norm == 1);
    CHECK(stats.skipped_duplicates == 1);
    CHECK(stats.rows_read == 3);
    // First occurrence wins.
    CHECK(t.vec(*t.lookup("a"))[0] == 1.0);
}

TEST_CASE("embedding loader rejects malformed input") {
    CHECK_THROWS_AS(table_from(""), ParseError);
    CHECK_THROWS_AS(table_from("x y\n"), ParseError);
    CHECK_THROWS_AS(table_from("1 1\na 1\n"), ParseError);
    try {
        table_from("2 3\na 1 0 0\nb 1 0\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    CHECK_THROWS_AS(table_from("2 3\na 1 0 0\n"), ParseError);  // row count short
    CHECK_THROWS_AS(table_from("1 3\na 1 nan 0\n"), ParseError);
}

TEST_CASE("embedding serialization round-trips bit-exactly") {
    EmbeddingTable t = table_from("3 4\nfoo 0.1 -0.7 0.33 2\nbar -1 2 -3 4\nbaz 1e-3 2e-3 0.5 1\n");
    std::ostringstream out;
    save_embeddings(out, t);
    EmbeddingTable back = table_from(out.str());
    REQUIRE(back.size() == t.size());
    CHECK(back.dim == t.dim);
    CHECK(back.fingerprint == t.fingerprint);
    for (const auto& [word, idx] : t.vocab) {
        REQUIRE(back.lookup(word).has_value());
        const UnitVector& v1 = t.vec(idx);
        const UnitVector& v2 = back.vec(*back.lookup(word));
        for (std::size_t j = 0; j < v1.dim(); ++j) CHECK(v1[j] == v2[j]);
    }
}

TEST_CASE("preprocessing") {
    StopwordSet stop{"the"};
    CHECK(preprocess("The Cat sat", stop) == std::vector<std::string>{"cat", "sat"});
    CHECK(preprocess("", kNoStopwords).empty());
    CHECK(preprocess("C++11 naïve", kNoStopwords) == std::vector<std::string>{"c", "na", "ve"});
    CHECK(preprocess("  tabs\tand\nnewlines ", kNoStopwords) ==
          std::vector<std::string>{"tabs", "and", "newlines"});
    CHECK(preprocess("the THE The", stop).empty());
}

TEST_CASE("preprocessing is idempotent") {
    StopwordSet stop{"of", "and"};
    for (const char* text : {"The Quick-Brown Fox, of 2024!", "a b c", "weirdémix of THINGS"}) {
        auto once = preprocess(text, stop);
        std::string joined;
        for (const auto& w : once) {
            if (!joined.empty()) joined += ' ';
            joined += w;
        }
        CHECK(preprocess(joined, stop) == once);
    }
}

TEST_CASE("stopword loading") {
    std::istringstream in("# comment\nthe\n\na\nan\n");
    StopwordSet set = load_stopwords(in);
    CHECK(set.size() == 3);
    CHECK(set.count("the") == 1);
    CHECK(set.count("#") == 0);
}

TEST_CASE("corpus TSV reader") {
    std::istringstream in("# header comment\nd1\t0\tsome text here\nd2\t\tunlabeled doc\nd3\t2\ttext\twith\ttabs\n");
    auto docs = read_corpus_tsv(in);
    REQUIRE(docs.size() == 3);
    CHECK(docs[0].id == "d1");
    CHECK(docs[0].label == 0);
    CHECK(docs[0].text == "some text here");
    CHECK_FALSE(docs[1].label.has_value());
    CHECK(docs[2].text == "text\twith\ttabs");

    std::istringstream bad("d1 no tabs at all\n");
    CHECK_THROWS_AS(read_corpus_tsv(bad), ParseError);
    std::istringstream badlabel("d1\tx\ttext\n");
    CHECK_THROWS_AS(read_corpus_tsv(badlabel), ParseError);
}

TEST_CASE("corpus construction") {
    EmbeddingTable t = table_from("3 3\ncat 1 0 0\nsat 0 1 0\nmat 0 0 1\n");
    std::vector<RawDoc> raw{{"d1", 0, "cat sat"}, {"d2", 1, "zebra zebra"}, {"d3", 0, "cat cat"}};
    auto [corpus, report] = build_corpus(raw, t, kNoStopwords);
    CHECK(corpus.size() == 2);
    CHECK(report.docs_in == 3);
    CHECK(report.docs_kept == 2);
    CHECK(report.oov_tokens == 2);
    CHECK(report.kept_tokens == 4);
    REQUIRE(report.dropped_ids.size() == 1);
    CHECK(report.dropped_ids[0] == "d2");

    // Bag multiplicity is preserved.
    const Document& d3 = corpus.docs[1];
    CHECK(d3.id == "d3");
    REQUIRE(d3.length() == 2);
    CHECK(d3.tokens[0] == d3.tokens[1]);

    std::vector<RawDoc> hopeless{{"d1", 0, "zebra"}};
    CHECK_THROWS_AS(build_corpus(hopeless, t, kNoStopwords), EmptyCorpusError);
}

TEST_CASE("token sums") {
    EmbeddingTable t = table_from("2 3\ncat 1 0 0\nsat 0 1 0\n");
    std::vector<RawDoc> raw{{"a", 0, "cat"}, {"b", 0, "cat cat"}, {"c", 0, "cat sat"}};
    auto [corpus, report] = build_corpus(raw, t, kNoStopwords);
    auto s1 = doc_token_sum(corpus.docs[0], t);
    CHECK(s1 == std::vector<double>{1.0, 0.0, 0.0});
    auto s2 = doc_token_sum(corpus.docs[1], t);
    CHECK(s2 == std::vector<double>{2.0, 0.0, 0.0});
    auto s3 = doc_token_sum(corpus.docs[2], t);
    CHECK(s3 == std::vector<double>{1.0, 1.0, 0.0});

    // Triangle inequality: ||sum|| <= l, equality only for identical tokens.
    CHECK(norm2(s2) == doctest::Approx(2.0));
    CHECK(norm2(s3) < 2.0);
}
