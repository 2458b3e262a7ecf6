#pragma once

#include <string>
#include <vector>

#include "vmfdoc/corpus.hpp"
#include "vmfdoc/directional.hpp"
#include "vmfdoc/rng.hpp"

namespace vmfdoc::testing {

// Fills the table from raw vectors (normalized on the way in) with words w0..wN.
inline void fill_table(EmbeddingTable& table, const std::vector<std::vector<double>>& vectors) {
    table.dim = static_cast<int>(vectors.at(0).size());
    table.vocab.clear();
    table.vectors.clear();
    std::uint64_t h = fnv1a64(&table.dim, sizeof(table.dim));
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        std::string word = "w" + std::to_string(i);
        UnitVector v = UnitVector::normalize(vectors[i]);
        h = fnv1a64_str(word, h);
        h = fnv1a64(v.values().data(), v.values().size() * sizeof(double), h);
        table.vocab.emplace(std::move(word), table.vectors.size());
        table.vectors.push_back(std::move(v));
    }
    table.fingerprint = h;
}

inline Corpus corpus_from_tokens(const EmbeddingTable& table,
                                 const std::vector<std::vector<std::size_t>>& docs,
                                 const std::vector<int>& labels = {}) {
    Corpus corpus;
    corpus.table = &table;
    for (std::size_t n = 0; n < docs.size(); ++n) {
        Document doc;
        doc.id = "doc" + std::to_string(n);
        if (n < labels.size()) doc.label = labels[n];
        doc.tokens = docs[n];
        corpus.docs.push_back(std::move(doc));
    }
    return corpus;
}

// Random vocabulary on the sphere plus documents of uniformly chosen tokens.
inline Corpus random_corpus(EmbeddingTable& table, int dim, std::size_t vocab_size,
                            std::size_t n_docs, std::size_t doc_len, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::vector<double>> vectors(vocab_size, std::vector<double>(dim));
    for (auto& v : vectors)
        for (double& x : v) x = rng.normal();
    fill_table(table, vectors);
    std::vector<std::vector<std::size_t>> docs(n_docs);
    for (auto& doc : docs) {
        doc.resize(doc_len);
        for (auto& t : doc) t = static_cast<std::size_t>(rng.next_u64() % vocab_size);
    }
    return corpus_from_tokens(table, docs);
}

}  // namespace vmfdoc::testing
