#include <doctest.h>

#include <cmath>
#include <vector>

#include "test_helpers.hpp"
#include "vmfdoc/baselines.hpp"
#include "vmfdoc/errors.hpp"
#include "vmfdoc/vecops.hpp"

using namespace vmfdoc;
using vmfdoc::testing::corpus_from_tokens;
using vmfdoc::testing::fill_table;

TEST_CASE("average pooling") {
    EmbeddingTable table;
    fill_table(table, {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {-1.0, 0.0, 0.0}});
    Corpus corpus = corpus_from_tokens(table, {{0}, {0, 1}, {0, 2}, {0, 0, 1}});

    CHECK(cbow_vector(corpus.docs[0], table) == std::vector<double>{1.0, 0.0, 0.0});
    CHECK(cbow_vector(corpus.docs[1], table) == std::vector<double>{0.5, 0.5, 0.0});
    // Cancelling tokens are allowed and produce the zero vector.
    CHECK(norm2(cbow_vector(corpus.docs[2], table)) == 0.0);

    Document empty;
    CHECK_THROWS_AS(cbow_vector(empty, table), EmptyDocumentError);
}

TEST_CASE("average pooling is order-invariant and bag-linear") {
    EmbeddingTable table;
    fill_table(table, {{2.0, 1.0, 0.0}, {0.0, 1.0, 1.0}, {1.0, -1.0, 3.0}});
    Corpus corpus =
        corpus_from_tokens(table, {{0, 1, 2, 0}, {0, 0, 1, 2}, {0, 1}, {2, 0}, {0, 1, 2, 0, 0, 1, 2}});
    auto a = cbow_vector(corpus.docs[0], table);
    auto b = cbow_vector(corpus.docs[1], table);
    for (std::size_t j = 0; j < 3; ++j) CHECK(a[j] == doctest::Approx(b[j]).epsilon(1e-15));

    // v(A ++ B) * (lA + lB) == v(A) * lA + v(B) * lB
    auto va = cbow_vector(corpus.docs[2], table);
    auto vb = cbow_vector(corpus.docs[3], table);
    Document both;
    both.tokens = {0, 1, 2, 0};
    auto vab = cbow_vector(both, table);
    for (std::size_t j = 0; j < 3; ++j)
        CHECK(vab[j] * 4.0 == doctest::Approx(va[j] * 2.0 + vb[j] * 2.0).epsilon(1e-12));
}

TEST_CASE("single-component mixture reduces to one vMF fit") {
    std::vector<double> centre{0.6, 0.0, 0.8};
    auto points = sample_vmf(VmfParams{UnitVector::normalize(centre), 30.0}, 400, 5);
    MovmfConfig cfg;
    auto [model, trace] = movmf_fit(points, 1, cfg);
    REQUIRE(model.clusters() == 1);
    CHECK(model.weights[0] == doctest::Approx(1.0).epsilon(1e-12));

    ResultantStats st = mean_resultant(points);
    for (std::size_t j = 0; j < 3; ++j)
        CHECK(model.means[0][j] == doctest::Approx(st.direction[j]).epsilon(1e-9));
    CHECK(model.kappas[0] == doctest::Approx(estimate_kappa(st.rbar, 3)).epsilon(1e-6));
}

TEST_CASE("two antipodal bundles are recovered") {
    std::vector<double> up{0.0, 0.0, 1.0};
    UnitVector mu_up = UnitVector::normalize(up);
    std::vector<double> down{0.0, 0.0, -1.0};
    UnitVector mu_down = UnitVector::normalize(down);
    auto a = sample_vmf(VmfParams{mu_up, 200.0}, 300, 41);
    auto b = sample_vmf(VmfParams{mu_down, 200.0}, 300, 42);
    std::vector<UnitVector> points;
    points.insert(points.end(), a.begin(), a.end());
    points.insert(points.end(), b.begin(), b.end());

    MovmfConfig cfg;
    cfg.seed = 3;
    auto [model, trace] = movmf_fit(points, 2, cfg);

    double c0 = dot(model.means[0], mu_up);
    double best_up = std::max(c0, dot(model.means[1], mu_up));
    double best_down = std::max(dot(model.means[0], mu_down), dot(model.means[1], mu_down));
    CHECK(best_up >= 0.99);
    CHECK(best_down >= 0.99);
    CHECK(model.weights[0] == doctest::Approx(0.5).epsilon(0.1));
    CHECK(model.kappas[0] == doctest::Approx(200.0).epsilon(0.2));

    for (std::size_t i = 1; i < trace.loglik.size(); ++i)
        CHECK(trace.loglik[i] >= trace.loglik[i - 1] - 1e-6 * std::abs(trace.loglik[i - 1]));
}

TEST_CASE("shared concentration option ties the clusters together") {
    std::vector<double> up{0.0, 0.0, 1.0};
    std::vector<double> side{1.0, 0.0, 0.0};
    auto a = sample_vmf(VmfParams{UnitVector::normalize(up), 100.0}, 200, 1);
    auto b = sample_vmf(VmfParams{UnitVector::normalize(side), 20.0}, 200, 2);
    std::vector<UnitVector> points;
    points.insert(points.end(), a.begin(), a.end());
    points.insert(points.end(), b.begin(), b.end());
    MovmfConfig cfg;
    cfg.shared_kappa = true;
    auto [model, trace] = movmf_fit(points, 2, cfg);
    CHECK(model.kappas[0] == model.kappas[1]);
}

TEST_CASE("mixture fitting is deterministic for a fixed seed") {
    std::vector<UnitVector> points;
    Rng rng(77);
    for (int i = 0; i < 100; ++i) {
        std::vector<double> v(4);
        for (double& x : v) x = rng.normal();
        points.push_back(UnitVector::normalize(v));
    }
    MovmfConfig cfg;
    cfg.seed = 12;
    cfg.max_iters = 15;
    auto [m1, t1] = movmf_fit(points, 3, cfg);
    auto [m2, t2] = movmf_fit(points, 3, cfg);
    CHECK(t1.loglik == t2.loglik);
    for (std::size_t c = 0; c < 3; ++c) {
        CHECK(m1.weights[c] == m2.weights[c]);
        CHECK(m1.kappas[c] == m2.kappas[c]);
        for (int j = 0; j < 4; ++j) CHECK(m1.means[c][j] == m2.means[c][j]);
    }
}

TEST_CASE("assignment picks the dominant cluster with a stable tie rule") {
    std::vector<double> e1{1.0, 0.0, 0.0};
    std::vector<double> e2{-1.0, 0.0, 0.0};
    MovmfModel model;
    model.weights = {0.5, 0.5};
    model.means = {UnitVector::normalize(e1), UnitVector::normalize(e2)};
    model.kappas = {10.0, 10.0};

    auto [idx, resp] = movmf_assign(model, std::vector<double>{1.0, 0.0, 0.0});
    CHECK(idx == 0);
    CHECK(resp[0] > 0.99);
    double total = resp[0] + resp[1];
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

    // Equidistant point: exact tie goes to the lowest index.
    auto [tie_idx, tie_resp] = movmf_assign(model, std::vector<double>{0.0, 1.0, 0.0});
    CHECK(tie_idx == 0);
    CHECK(tie_resp[0] == doctest::Approx(0.5).epsilon(1e-12));

    CHECK_THROWS_AS(movmf_assign(model, std::vector<double>{1.0, 0.0}), DimensionMismatchError);
}

TEST_CASE("mixture responsibilities sum to one for every point") {
    Rng rng(31);
    std::vector<UnitVector> points;
    for (int i = 0; i < 60; ++i) {
        std::vector<double> v(5);
        for (double& x : v) x = rng.normal();
        points.push_back(UnitVector::normalize(v));
    }
    MovmfConfig cfg;
    cfg.seed = 4;
    auto [model, trace] = movmf_fit(points, 4, cfg);
    for (const auto& p : points) {
        auto [idx, resp] = movmf_assign(model, p);
        double total = 0.0;
        for (double r : resp) total += r;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("mixture input validation") {
    std::vector<UnitVector> two{UnitVector::basis(3, 0), UnitVector::basis(3, 1)};
    MovmfConfig cfg;
    CHECK_THROWS_AS(movmf_fit(two, 3, cfg), InvalidArgumentError);
    CHECK_THROWS_AS(movmf_fit(two, 0, cfg), InvalidArgumentError);
    std::vector<UnitVector> mixed{UnitVector::basis(3, 0), UnitVector::basis(4, 0)};
    CHECK_THROWS_AS(movmf_fit(mixed, 1, cfg), DimensionMismatchError);
}
