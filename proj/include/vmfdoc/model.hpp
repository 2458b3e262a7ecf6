#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "vmfdoc/corpus.hpp"
#include "vmfdoc/directional.hpp"

namespace vmfdoc {

struct ModelConfig {
    int dim = 0;
    double kappa0_init = 1500.0;
    double kappa_doc_lo = 1000.0;
    double kappa_doc_hi = 1500.0;
    int max_iters = 100;
    double tol = 1e-5;
    std::uint64_t seed = 0;
    int infer_rounds = 10;

    void validate() const;  // throws InvalidArgumentError
};

// Corpus-level prior vMF plus one variational vMF posterior per document.
struct DocModel {
    VmfParams prior;                  // mu0, kappa0
    std::vector<double> doc_kappa;    // per-document token concentration
    std::vector<UnitVector> var_mu;   // variational mean directions
    std::vector<double> var_kappa;    // variational concentrations
    ModelConfig config;
    std::uint64_t embedding_fingerprint = 0;

    std::size_t num_docs() const { return doc_kappa.size(); }
    int dim() const { return static_cast<int>(prior.mu.dim()); }
};

struct FitTrace {
    std::vector<double> elbo;  // [0] = after init, then one entry per EM iteration
    int iterations = 0;
    bool converged = false;
};

struct EStepResult {
    UnitVector mu;
    double kappa;
};

struct InferResult {
    UnitVector mu;
    double kappa_prime;
    double kappa_doc;
};

enum class ReprMode { MeanDirection, PosteriorExpectation };

// Seeded initialization: variational means from normalized uniform cubes,
// doc concentrations uniform in [lo, hi], prior mean from the mean of the
// variational means. Per-document draws are keyed by document id, so the
// result is independent of document order.
DocModel init_model(const Corpus& corpus, const ModelConfig& cfg);

// Closed-form variational update for one document:
// kappa' = ||kappa0*mu0 + doc_kappa*token_sum||, mu' = that vector normalized.
EStepResult e_step_doc(const VmfParams& prior, double doc_kappa, std::span<const double> token_sum);
EStepResult e_step_doc(const DocModel& model, const Corpus& corpus, std::size_t n);

// Expected document vector under the variational posterior: A_K(kappa'_n) * mu'_n.
std::vector<double> posterior_mean(const DocModel& model, std::size_t n);

struct MStepInfo {
    bool prior_direction_kept = false;  // resultant degenerated; previous mu0 retained
};

// Closed-form parameter updates from the current variational state.
MStepInfo m_step(DocModel& model, const Corpus& corpus);

// Variational bound contribution of a single document.
double doc_elbo_term(const VmfParams& prior, double doc_kappa, std::span<const double> token_sum,
                     double token_count, const UnitVector& var_mu, double var_kappa);

// Full-corpus evidence lower bound for the current state.
double elbo(const DocModel& model, const Corpus& corpus);

// Variational EM until the relative bound change drops below cfg.tol or
// cfg.max_iters is reached. The E-step is data-parallel across documents;
// results are identical for any thread count.
std::pair<DocModel, FitTrace> fit(const Corpus& corpus, const ModelConfig& cfg, int threads = 1);

// Held-out inference with the prior frozen: the document concentration starts
// at the mean of the training values, then infer_rounds alternations of the
// variational update and the concentration re-estimate.
InferResult infer(const DocModel& model, const Document& doc, const EmbeddingTable& table);

std::vector<double> doc_repr(const DocModel& model, std::size_t n, ReprMode mode);
std::vector<double> doc_repr(const InferResult& state, ReprMode mode);

// Versioned binary container; round-trips losslessly at full double precision.
void save_model(std::ostream& out, const DocModel& model);
DocModel load_model(std::istream& in);

}  // namespace vmfdoc
