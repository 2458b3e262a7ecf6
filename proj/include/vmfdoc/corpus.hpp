#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "vmfdoc/directional.hpp"

namespace vmfdoc {

// Pretrained word embeddings, unit-normalized on load.
struct EmbeddingTable {
    int dim = 0;
    std::unordered_map<std::string, std::size_t> vocab;
    std::vector<UnitVector> vectors;
    // Stable content hash over (dim, words, normalized vector bits) in file order.
    std::uint64_t fingerprint = 0;

    std::size_t size() const { return vectors.size(); }
    const UnitVector& vec(std::size_t idx) const { return vectors[idx]; }
    std::optional<std::size_t> lookup(std::string_view word) const;
};

struct EmbeddingLoadStats {
    std::size_t rows_read = 0;
    std::size_t skipped_zero_norm = 0;
    std::size_t skipped_duplicates = 0;
};

struct Document {
    std::string id;
    std::optional<int> label;
    std::vector<std::size_t> tokens;  // embedding indices, multiplicity preserved

    std::size_t length() const { return tokens.size(); }
};

struct Corpus {
    std::vector<Document> docs;
    const EmbeddingTable* table = nullptr;

    std::size_t size() const { return docs.size(); }
};

struct RawDoc {
    std::string id;
    std::optional<int> label;
    std::string text;
};

struct IngestReport {
    std::size_t docs_in = 0;
    std::size_t docs_kept = 0;
    std::size_t oov_tokens = 0;
    std::size_t kept_tokens = 0;
    std::vector<std::string> dropped_ids;  // empty after preprocessing/OOV filtering
};

using StopwordSet = std::unordered_set<std::string>;

// word2vec text format: header "M K", then M lines "word v1 ... vK".
// Vectors are l2-normalized; zero-norm rows and duplicate words are skipped
// and counted in stats. Throws ParseError with the offending line number.
EmbeddingTable load_embeddings(std::istream& in, EmbeddingLoadStats* stats = nullptr);

// Writes the table back in word2vec text format at 17 significant digits,
// which round-trips bit-exactly through load_embeddings.
void save_embeddings(std::ostream& out, const EmbeddingTable& table);

// One word per line; blank lines and '#' comments ignored.
StopwordSet load_stopwords(std::istream& in);

// Lowercase, keep maximal [a-z] runs (everything else separates), drop stopwords.
std::vector<std::string> preprocess(std::string_view text, const StopwordSet& stopwords);

// TSV, one document per line: id<TAB>label<TAB>text. Label may be empty;
// '#'-prefixed lines are comments.
std::vector<RawDoc> read_corpus_tsv(std::istream& in);

// Preprocesses and indexes raw documents against the table. OOV tokens are
// dropped; documents left empty are excluded and listed in the report.
// Throws EmptyCorpusError if nothing survives.
std::pair<Corpus, IngestReport> build_corpus(const std::vector<RawDoc>& raw,
                                             const EmbeddingTable& table,
                                             const StopwordSet& stopwords);

// Sum of the document's token vectors with multiplicity; not normalized.
std::vector<double> doc_token_sum(const Document& doc, const EmbeddingTable& table);

}  // namespace vmfdoc
