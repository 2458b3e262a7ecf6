#include "vmfdoc/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vmfdoc/errors.hpp"
#include "vmfdoc/rng.hpp"
#include "vmfdoc/vecops.hpp"

namespace vmfdoc {

std::vector<double> cbow_vector(const Document& doc, const EmbeddingTable& table) {
    if (doc.tokens.empty()) throw EmptyDocumentError("cannot pool an empty document");
    std::vector<double> v = doc_token_sum(doc, table);
    scale(v, 1.0 / static_cast<double>(doc.length()));
    return v;
}

namespace {

constexpr double kInitKappa = 10.0;

double logsumexp(std::span<const double> xs) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : xs) m = std::max(m, x);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : xs) s += std::exp(x - m);
    return m + std::log(s);
}

// Index of the point with the largest min-angle to the chosen set;
// ties go to the lowest index.
std::size_t farthest_point(const std::vector<UnitVector>& points,
                           const std::vector<std::size_t>& chosen) {
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size(); ++i) {
        double nearest = std::numeric_limits<double>::infinity();
        for (std::size_t c : chosen) nearest = std::min(nearest, 1.0 - dot(points[i], points[c]));
        if (nearest > best_score) {
            best_score = nearest;
            best = i;
        }
    }
    return best;
}

std::size_t farthest_from_means(const std::vector<UnitVector>& points,
                                const std::vector<UnitVector>& means) {
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size(); ++i) {
        double nearest = std::numeric_limits<double>::infinity();
        for (const UnitVector& m : means) nearest = std::min(nearest, 1.0 - dot(points[i], m));
        if (nearest > best_score) {
            best_score = nearest;
            best = i;
        }
    }
    return best;
}

}  // namespace

std::pair<MovmfModel, MovmfTrace> movmf_fit(const std::vector<UnitVector>& points, int clusters,
                                            const MovmfConfig& cfg) {
    if (clusters < 1) throw InvalidArgumentError("cluster count must be at least 1");
    std::size_t m = static_cast<std::size_t>(clusters);
    std::size_t n = points.size();
    if (n < m) throw InvalidArgumentError("need at least as many points as clusters");
    int dim = static_cast<int>(points[0].dim());
    for (const UnitVector& p : points)
        if (static_cast<int>(p.dim()) != dim)
            throw DimensionMismatchError("points have mixed dimensions");
    if (cfg.max_iters < 1) throw InvalidArgumentError("max_iters must be at least 1");
    if (!(cfg.tol > 0.0)) throw InvalidArgumentError("tolerance must be positive");

    MovmfModel model;
    model.weights.assign(m, 1.0 / static_cast<double>(m));
    model.kappas.assign(m, kInitKappa);
    Rng rng(cfg.seed);
    std::vector<std::size_t> chosen{static_cast<std::size_t>(rng.next_u64() % n)};
    while (chosen.size() < m) chosen.push_back(farthest_point(points, chosen));
    for (std::size_t c : chosen) model.means.push_back(points[c]);

    MovmfTrace trace;
    std::vector<std::vector<double>> resp(n, std::vector<double>(m));
    std::vector<double> logp(m), log_norm(m);
    for (int iter = 1; iter <= cfg.max_iters; ++iter) {
        for (std::size_t c = 0; c < m; ++c)
            log_norm[c] = log_norm_const(dim, model.kappas[c]);
        double loglik = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t c = 0; c < m; ++c) {
                logp[c] = std::log(model.weights[c]) + log_norm[c] +
                          model.kappas[c] * dot(model.means[c], points[i]);
            }
            double lse = logsumexp(logp);
            loglik += lse;
            for (std::size_t c = 0; c < m; ++c) resp[i][c] = std::exp(logp[c] - lse);
        }
        double prev = trace.loglik.empty() ? 0.0 : trace.loglik.back();
        trace.loglik.push_back(loglik);
        trace.iterations = iter;
        if (iter > 1 && std::abs(loglik - prev) <= cfg.tol * std::abs(prev)) {
            trace.converged = true;
            break;
        }

        std::vector<double> mass(m, 0.0);
        std::vector<std::vector<double>> resultant(m, std::vector<double>(dim, 0.0));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t c = 0; c < m; ++c) {
                mass[c] += resp[i][c];
                axpy(resultant[c], resp[i][c], points[i]);
            }
        }
        double shared_resultant = 0.0;
        for (std::size_t c = 0; c < m; ++c) {
            if (mass[c] < 1e-8) {
                ++trace.reinitialized_clusters;
                model.means[c] = points[farthest_from_means(points, model.means)];
                model.kappas[c] = kInitKappa;
                mass[c] = 1.0;
                continue;
            }
            double rnorm = norm2(resultant[c]);
            if (rnorm > kZeroNormEps) model.means[c] = UnitVector::normalize(resultant[c]);
            double rbar = std::min(rnorm / mass[c], 1.0 - 1e-15);
            model.kappas[c] = std::clamp(estimate_kappa(rbar, dim), kKappaMin, kKappaMax);
            shared_resultant += rnorm;
        }
        double total_mass = 0.0;
        for (double w : mass) total_mass += w;
        for (std::size_t c = 0; c < m; ++c) model.weights[c] = mass[c] / total_mass;
        if (cfg.shared_kappa) {
            double rbar = std::min(shared_resultant / total_mass, 1.0 - 1e-15);
            double shared = std::clamp(estimate_kappa(rbar, dim), kKappaMin, kKappaMax);
            std::fill(model.kappas.begin(), model.kappas.end(), shared);
        }
    }
    return {std::move(model), std::move(trace)};
}

std::pair<std::size_t, std::vector<double>> movmf_assign(const MovmfModel& model,
                                                         std::span<const double> x) {
    if (static_cast<int>(x.size()) != model.dim())
        throw DimensionMismatchError("point dimension does not match the mixture");
    std::size_t m = model.clusters();
    std::vector<double> logp(m);
    for (std::size_t c = 0; c < m; ++c) {
        logp[c] = std::log(model.weights[c]) + log_norm_const(model.dim(), model.kappas[c]) +
                  model.kappas[c] * dot(model.means[c], x);
    }
    double lse = logsumexp(logp);
    std::vector<double> resp(m);
    std::size_t best = 0;
    for (std::size_t c = 0; c < m; ++c) {
        resp[c] = std::exp(logp[c] - lse);
        if (resp[c] > resp[best]) best = c;
    }
    return {best, std::move(resp)};
}

}  // namespace vmfdoc
