#include "vmfdoc/corpus.hpp"

#include <cctype>
#include <charconv>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

#include "vmfdoc/errors.hpp"
#include "vmfdoc/rng.hpp"
#include "vmfdoc/vecops.hpp"

namespace vmfdoc {

namespace {

bool parse_double(std::string_view s, double& out) {
    const char* begin = s.data();
    const char* end = begin + s.size();
    auto res = std::from_chars(begin, end, out);
    return res.ec == std::errc{} && res.ptr == end && std::isfinite(out);
}

bool parse_int(std::string_view s, long long& out) {
    const char* begin = s.data();
    const char* end = begin + s.size();
    auto res = std::from_chars(begin, end, out);
    return res.ec == std::errc{} && res.ptr == end;
}

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > start) fields.push_back(line.substr(start, i - start));
    }
    return fields;
}

void hash_doubles(std::uint64_t& h, const double* p, std::size_t n) {
    h = fnv1a64(p, n * sizeof(double), h);
}

}  // namespace

std::optional<std::size_t> EmbeddingTable::lookup(std::string_view word) const {
    auto it = vocab.find(std::string(word));
    if (it == vocab.end()) return std::nullopt;
    return it->second;
}

EmbeddingTable load_embeddings(std::istream& in, EmbeddingLoadStats* stats) {
    EmbeddingLoadStats local;
    EmbeddingLoadStats& st = stats ? *stats : local;
    st = EmbeddingLoadStats{};

    std::string line;
    if (!std::getline(in, line)) throw ParseError("missing embedding header", 1);
    auto header = split_ws(line);
    long long m = 0, k = 0;
    if (header.size() != 2 || !parse_int(header[0], m) || !parse_int(header[1], k))
        throw ParseError("embedding header must be \"M K\"", 1);
    if (m < 1) throw ParseError("embedding count must be positive", 1);
    if (k < 2) throw ParseError("embedding dimension must be at least 2", 1);

    EmbeddingTable table;
    table.dim = static_cast<int>(k);
    table.vocab.reserve(static_cast<std::size_t>(m));
    table.vectors.reserve(static_cast<std::size_t>(m));

    std::uint64_t h = fnv1a64(&table.dim, sizeof(table.dim));
    std::vector<double> buf(static_cast<std::size_t>(k));
    for (long long row = 0; row < m; ++row) {
        std::size_t lineno = static_cast<std::size_t>(row) + 2;
        if (!std::getline(in, line))
            throw ParseError("unexpected end of file, expected " + std::to_string(m) + " rows", lineno);
        auto fields = split_ws(line);
        if (fields.size() != static_cast<std::size_t>(k) + 1)
            throw ParseError("expected word and " + std::to_string(k) + " values, got " +
                                 std::to_string(fields.empty() ? 0 : fields.size() - 1),
                             lineno);
        for (long long j = 0; j < k; ++j) {
            if (!parse_double(fields[static_cast<std::size_t>(j) + 1], buf[static_cast<std::size_t>(j)]))
                throw ParseError("bad value \"" + std::string(fields[static_cast<std::size_t>(j) + 1]) + "\"",
                                 lineno);
        }
        ++st.rows_read;
        std::string word(fields[0]);
        if (table.vocab.count(word)) {
            ++st.skipped_duplicates;
            continue;
        }
        if (norm2(buf) <= kZeroNormEps) {
            ++st.skipped_zero_norm;
            continue;
        }
        UnitVector v = UnitVector::normalize(buf);
        h = fnv1a64(word.data(), word.size(), h);
        hash_doubles(h, v.values().data(), v.values().size());
        table.vocab.emplace(std::move(word), table.vectors.size());
        table.vectors.push_back(std::move(v));
    }
    table.fingerprint = h;
    return table;
}

void save_embeddings(std::ostream& out, const EmbeddingTable& table) {
    std::vector<const std::string*> words(table.vectors.size(), nullptr);
    for (const auto& [word, idx] : table.vocab) words[idx] = &word;
    out << table.vectors.size() << ' ' << table.dim << '\n';
    char num[40];
    for (std::size_t i = 0; i < table.vectors.size(); ++i) {
        out << *words[i];
        for (double x : table.vectors[i].values()) {
            std::snprintf(num, sizeof(num), "%.17g", x);
            out << ' ' << num;
        }
        out << '\n';
    }
}

StopwordSet load_stopwords(std::istream& in) {
    StopwordSet set;
    std::string line;
    while (std::getline(in, line)) {
        auto fields = split_ws(line);
        if (fields.empty() || fields[0][0] == '#') continue;
        set.emplace(fields[0]);
    }
    return set;
}

std::vector<std::string> preprocess(std::string_view text, const StopwordSet& stopwords) {
    std::vector<std::string> tokens;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty() && !stopwords.count(cur)) tokens.push_back(cur);
        cur.clear();
    };
    for (char ch : text) {
        unsigned char c = static_cast<unsigned char>(ch);
        if (c >= 'A' && c <= 'Z') c = static_cast<unsigned char>(c - 'A' + 'a');
        if (c >= 'a' && c <= 'z')
            cur.push_back(static_cast<char>(c));
        else
            flush();
    }
    flush();
    return tokens;
}

std::vector<RawDoc> read_corpus_tsv(std::istream& in) {
    std::vector<RawDoc> docs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto tab1 = line.find('\t');
        if (tab1 == std::string::npos) throw ParseError("expected id<TAB>label<TAB>text", lineno);
        auto tab2 = line.find('\t', tab1 + 1);
        if (tab2 == std::string::npos) throw ParseError("expected id<TAB>label<TAB>text", lineno);
        RawDoc doc;
        doc.id = line.substr(0, tab1);
        if (doc.id.empty()) throw ParseError("empty document id", lineno);
        std::string label = line.substr(tab1 + 1, tab2 - tab1 - 1);
        if (!label.empty()) {
            long long v = 0;
            if (!parse_int(label, v)) throw ParseError("label \"" + label + "\" is not an integer", lineno);
            doc.label = static_cast<int>(v);
        }
        doc.text = line.substr(tab2 + 1);
        docs.push_back(std::move(doc));
    }
    return docs;
}

std::pair<Corpus, IngestReport> build_corpus(const std::vector<RawDoc>& raw,
                                             const EmbeddingTable& table,
                                             const StopwordSet& stopwords) {
    Corpus corpus;
    corpus.table = &table;
    IngestReport report;
    report.docs_in = raw.size();
    for (const RawDoc& rd : raw) {
        Document doc;
        doc.id = rd.id;
        doc.label = rd.label;
        for (const std::string& word : preprocess(rd.text, stopwords)) {
            if (auto idx = table.lookup(word))
                doc.tokens.push_back(*idx);
            else
                ++report.oov_tokens;
        }
        if (doc.tokens.empty()) {
            report.dropped_ids.push_back(rd.id);
            continue;
        }
        report.kept_tokens += doc.tokens.size();
        corpus.docs.push_back(std::move(doc));
    }
    report.docs_kept = corpus.docs.size();
    if (corpus.docs.empty()) throw EmptyCorpusError("no document survived preprocessing");
    return {std::move(corpus), report};
}

std::vector<double> doc_token_sum(const Document& doc, const EmbeddingTable& table) {
    std::vector<double> sum(static_cast<std::size_t>(table.dim), 0.0);
    for (std::size_t idx : doc.tokens) add_into(sum, table.vec(idx));
    return sum;
}

}  // namespace vmfdoc
