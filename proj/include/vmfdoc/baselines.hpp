#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "vmfdoc/corpus.hpp"
#include "vmfdoc/directional.hpp"

namespace vmfdoc {

// Average of the document's token vectors; may be (near-)zero for bags that
// cancel. Throws EmptyDocumentError on an empty bag.
std::vector<double> cbow_vector(const Document& doc, const EmbeddingTable& table);

struct MovmfConfig {
    int max_iters = 100;
    double tol = 1e-6;
    std::uint64_t seed = 0;
    bool shared_kappa = false;
};

struct MovmfModel {
    std::vector<double> weights;     // mixing simplex
    std::vector<UnitVector> means;
    std::vector<double> kappas;

    std::size_t clusters() const { return weights.size(); }
    int dim() const { return means.empty() ? 0 : static_cast<int>(means[0].dim()); }
};

struct MovmfTrace {
    std::vector<double> loglik;  // one entry per EM iteration, under the entering parameters
    int iterations = 0;
    bool converged = false;
    std::size_t reinitialized_clusters = 0;
};

// Soft EM for a mixture of vMF components. Means are seeded by a farthest-
// point sweep over the input; clusters whose responsibility mass collapses
// are re-seeded from the worst-covered point and counted in the trace.
std::pair<MovmfModel, MovmfTrace> movmf_fit(const std::vector<UnitVector>& points, int clusters,
                                            const MovmfConfig& cfg);

// Posterior responsibilities for one point and the argmax cluster
// (ties resolved to the lowest index).
std::pair<std::size_t, std::vector<double>> movmf_assign(const MovmfModel& model,
                                                         std::span<const double> x);

}  // namespace vmfdoc
