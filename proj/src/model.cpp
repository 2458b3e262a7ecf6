#include "vmfdoc/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <exception>
#include <istream>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>

#include "vmfdoc/errors.hpp"
#include "vmfdoc/rng.hpp"
#include "vmfdoc/vecops.hpp"

namespace vmfdoc {

namespace {

double clamp_kappa(double kappa) {
    return std::clamp(kappa, kKappaMin, kKappaMax);
}

// Mean resultant length for the per-document concentration update,
// clamped into the estimator's domain.
double doc_rbar(const std::vector<double>& post_mean, const std::vector<double>& token_sum,
                double token_count) {
    double r = dot(post_mean, token_sum) / token_count;
    return std::max(r, 0.0);
}

}  // namespace

void ModelConfig::validate() const {
    if (dim < 2) throw InvalidArgumentError("dimension must be at least 2");
    if (!(kappa0_init >= 0.0 && kappa0_init <= kKappaMax))
        throw InvalidArgumentError("kappa0_init out of range");
    if (!(kappa_doc_lo > 0.0 && kappa_doc_lo <= kappa_doc_hi && kappa_doc_hi <= kKappaMax))
        throw InvalidArgumentError("document concentration range invalid");
    if (!(tol > 0.0)) throw InvalidArgumentError("tolerance must be positive");
    if (max_iters < 1) throw InvalidArgumentError("max_iters must be at least 1");
    if (infer_rounds < 1) throw InvalidArgumentError("infer_rounds must be at least 1");
}

DocModel init_model(const Corpus& corpus, const ModelConfig& cfg) {
    cfg.validate();
    if (corpus.docs.empty()) throw EmptyCorpusError("cannot initialize from an empty corpus");
    if (corpus.table->dim != cfg.dim)
        throw DimensionMismatchError("config dimension " + std::to_string(cfg.dim) +
                                     " vs embedding dimension " + std::to_string(corpus.table->dim));

    std::size_t n_docs = corpus.size();
    std::size_t dim = static_cast<std::size_t>(cfg.dim);
    std::vector<UnitVector> var_mu;
    var_mu.reserve(n_docs);
    std::vector<double> doc_kappa(n_docs), var_kappa(n_docs);
    std::vector<double> mean(dim, 0.0), cube(dim);
    for (std::size_t n = 0; n < n_docs; ++n) {
        Rng rng(cfg.seed ^ fnv1a64_str(corpus.docs[n].id));
        for (std::size_t j = 0; j < dim; ++j) cube[j] = rng.uniform(-0.5, 0.5);
        while (norm2(cube) <= kZeroNormEps)
            for (std::size_t j = 0; j < dim; ++j) cube[j] = rng.uniform(-0.5, 0.5);
        var_mu.push_back(UnitVector::normalize(cube));
        doc_kappa[n] = rng.uniform(cfg.kappa_doc_lo, cfg.kappa_doc_hi);
        var_kappa[n] = doc_kappa[n];
        add_into(mean, var_mu.back());
    }
    UnitVector mu0 = norm2(mean) > kZeroNormEps ? UnitVector::normalize(mean)
                                                : UnitVector::basis(static_cast<int>(dim), 0);
    DocModel model{VmfParams{std::move(mu0), cfg.kappa0_init}, std::move(doc_kappa),
                   std::move(var_mu), std::move(var_kappa), cfg, corpus.table->fingerprint};
    return model;
}

EStepResult e_step_doc(const VmfParams& prior, double doc_kappa, std::span<const double> token_sum) {
    if (token_sum.size() != prior.mu.dim())
        throw DimensionMismatchError("token sum dimension does not match the prior");
    std::vector<double> v(token_sum.begin(), token_sum.end());
    scale(v, doc_kappa);
    axpy(v, prior.kappa, prior.mu);
    double n = norm2(v);
    if (n <= kZeroNormEps)
        throw DegenerateResultantError("variational resultant has vanishing norm");
    return {UnitVector::normalize(v), std::min(n, kKappaMax)};
}

EStepResult e_step_doc(const DocModel& model, const Corpus& corpus, std::size_t n) {
    return e_step_doc(model.prior, model.doc_kappa[n],
                      doc_token_sum(corpus.docs[n], *corpus.table));
}

std::vector<double> posterior_mean(const DocModel& model, std::size_t n) {
    std::vector<double> v(model.var_mu[n].values().begin(), model.var_mu[n].values().end());
    scale(v, bessel_ratio(model.dim(), model.var_kappa[n]));
    return v;
}

MStepInfo m_step(DocModel& model, const Corpus& corpus) {
    MStepInfo info;
    int dim = model.dim();
    std::size_t n_docs = model.num_docs();
    std::vector<double> agg(static_cast<std::size_t>(dim), 0.0);
    std::vector<std::vector<double>> post(n_docs);
    for (std::size_t n = 0; n < n_docs; ++n) {
        post[n] = posterior_mean(model, n);
        add_into(agg, post[n]);
    }
    double agg_norm = norm2(agg);
    double kappa0;
    if (agg_norm <= kZeroNormEps) {
        info.prior_direction_kept = true;
        kappa0 = kKappaMin;
    } else {
        model.prior.mu = UnitVector::normalize(agg);
        kappa0 = clamp_kappa(estimate_kappa(agg_norm / static_cast<double>(n_docs), dim));
    }
    model.prior.kappa = kappa0;
    for (std::size_t n = 0; n < n_docs; ++n) {
        const Document& doc = corpus.docs[n];
        std::vector<double> sum = doc_token_sum(doc, *corpus.table);
        double rbar = doc_rbar(post[n], sum, static_cast<double>(doc.length()));
        model.doc_kappa[n] = clamp_kappa(estimate_kappa(rbar, dim));
    }
    return info;
}

double doc_elbo_term(const VmfParams& prior, double doc_kappa, std::span<const double> token_sum,
                     double token_count, const UnitVector& var_mu, double var_kappa) {
    int dim = static_cast<int>(prior.mu.dim());
    double a = bessel_ratio(dim, var_kappa);
    double prior_term = log_norm_const(dim, prior.kappa) + prior.kappa * a * dot(prior.mu, var_mu);
    double token_term =
        token_count * log_norm_const(dim, doc_kappa) + doc_kappa * a * dot(token_sum, var_mu);
    double entropy_term = log_norm_const(dim, var_kappa) + var_kappa * a;
    return prior_term + token_term - entropy_term;
}

double elbo(const DocModel& model, const Corpus& corpus) {
    double total = 0.0;
    for (std::size_t n = 0; n < model.num_docs(); ++n) {
        const Document& doc = corpus.docs[n];
        total += doc_elbo_term(model.prior, model.doc_kappa[n], doc_token_sum(doc, *corpus.table),
                               static_cast<double>(doc.length()), model.var_mu[n],
                               model.var_kappa[n]);
    }
    return total;
}

namespace {

void e_step_all(DocModel& model, const Corpus& corpus, int threads) {
    std::size_t n_docs = model.num_docs();
    auto run_range = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t n = lo; n < hi; ++n) {
            EStepResult r = e_step_doc(model, corpus, n);
            model.var_mu[n] = std::move(r.mu);
            model.var_kappa[n] = r.kappa;
        }
    };
    if (threads <= 1 || n_docs < 2) {
        run_range(0, n_docs);
        return;
    }
    std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(threads), n_docs);
    std::size_t chunk = (n_docs + n_threads - 1) / n_threads;
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (std::size_t t = 0; t < n_threads; ++t) {
        std::size_t lo = t * chunk;
        std::size_t hi = std::min(lo + chunk, n_docs);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] {
            try {
                run_range(lo, hi);
            } catch (...) {
                std::lock_guard guard(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

std::pair<DocModel, FitTrace> fit(const Corpus& corpus, const ModelConfig& cfg, int threads) {
    DocModel model = init_model(corpus, cfg);
    FitTrace trace;
    trace.elbo.push_back(elbo(model, corpus));
    for (int iter = 1; iter <= cfg.max_iters; ++iter) {
        e_step_all(model, corpus, threads);
        m_step(model, corpus);
        double bound = elbo(model, corpus);
        double prev = trace.elbo.back();
        trace.elbo.push_back(bound);
        trace.iterations = iter;
        if (std::abs(bound - prev) <= cfg.tol * std::abs(prev)) {
            trace.converged = true;
            break;
        }
    }
    return {std::move(model), std::move(trace)};
}

InferResult infer(const DocModel& model, const Document& doc, const EmbeddingTable& table) {
    if (doc.tokens.empty()) throw EmptyDocumentError("cannot infer an empty document");
    if (table.dim != model.dim())
        throw DimensionMismatchError("embedding dimension does not match the model");
    double kappa_doc =
        std::accumulate(model.doc_kappa.begin(), model.doc_kappa.end(), 0.0) /
        static_cast<double>(model.num_docs());
    std::vector<double> sum = doc_token_sum(doc, table);
    double count = static_cast<double>(doc.length());
    EStepResult state{model.prior.mu, kappa_doc};
    for (int round = 0; round < model.config.infer_rounds; ++round) {
        state = e_step_doc(model.prior, kappa_doc, sum);
        std::vector<double> post(state.mu.values().begin(), state.mu.values().end());
        scale(post, bessel_ratio(model.dim(), state.kappa));
        kappa_doc = clamp_kappa(estimate_kappa(doc_rbar(post, sum, count), model.dim()));
    }
    return {std::move(state.mu), state.kappa, kappa_doc};
}

std::vector<double> doc_repr(const DocModel& model, std::size_t n, ReprMode mode) {
    if (mode == ReprMode::PosteriorExpectation) return posterior_mean(model, n);
    return {model.var_mu[n].values().begin(), model.var_mu[n].values().end()};
}

std::vector<double> doc_repr(const InferResult& state, ReprMode mode) {
    std::vector<double> v(state.mu.values().begin(), state.mu.values().end());
    if (mode == ReprMode::PosteriorExpectation)
        scale(v, bessel_ratio(state.mu.dim(), state.kappa_prime));
    return v;
}

namespace {

constexpr char kMagic[8] = {'V', 'M', 'F', 'D', 'O', 'C', '\0', '\0'};
constexpr std::uint32_t kFormatVersion = 1;

template <typename T>
void put(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
    T value;
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw ParseError("truncated model file");
    return value;
}

void put_doubles(std::ostream& out, const double* p, std::size_t n) {
    out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}

void get_doubles(std::istream& in, double* p, std::size_t n) {
    in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw ParseError("truncated model file");
}

}  // namespace

void save_model(std::ostream& out, const DocModel& model) {
    out.write(kMagic, sizeof(kMagic));
    put(out, kFormatVersion);
    put(out, static_cast<std::uint32_t>(model.dim()));
    put(out, static_cast<std::uint64_t>(model.num_docs()));
    put(out, model.embedding_fingerprint);
    const ModelConfig& cfg = model.config;
    put(out, static_cast<std::int32_t>(cfg.dim));
    put(out, cfg.kappa0_init);
    put(out, cfg.kappa_doc_lo);
    put(out, cfg.kappa_doc_hi);
    put(out, static_cast<std::int32_t>(cfg.max_iters));
    put(out, cfg.tol);
    put(out, cfg.seed);
    put(out, static_cast<std::int32_t>(cfg.infer_rounds));
    put_doubles(out, model.prior.mu.values().data(), model.prior.mu.values().size());
    put(out, model.prior.kappa);
    put_doubles(out, model.doc_kappa.data(), model.doc_kappa.size());
    put_doubles(out, model.var_kappa.data(), model.var_kappa.size());
    for (const UnitVector& mu : model.var_mu)
        put_doubles(out, mu.values().data(), mu.values().size());
}

DocModel load_model(std::istream& in) {
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw ParseError("not a model file");
    auto version = get<std::uint32_t>(in);
    if (version != kFormatVersion)
        throw ParseError("unsupported model format version " + std::to_string(version));
    auto dim = get<std::uint32_t>(in);
    auto n_docs = get<std::uint64_t>(in);
    auto fingerprint = get<std::uint64_t>(in);
    if (dim < 2 || n_docs < 1) throw ParseError("corrupt model header");
    ModelConfig cfg;
    cfg.dim = get<std::int32_t>(in);
    cfg.kappa0_init = get<double>(in);
    cfg.kappa_doc_lo = get<double>(in);
    cfg.kappa_doc_hi = get<double>(in);
    cfg.max_iters = get<std::int32_t>(in);
    cfg.tol = get<double>(in);
    cfg.seed = get<std::uint64_t>(in);
    cfg.infer_rounds = get<std::int32_t>(in);
    std::vector<double> mu0(dim);
    get_doubles(in, mu0.data(), mu0.size());
    double kappa0 = get<double>(in);
    std::vector<double> doc_kappa(n_docs), var_kappa(n_docs);
    get_doubles(in, doc_kappa.data(), n_docs);
    get_doubles(in, var_kappa.data(), n_docs);
    std::vector<UnitVector> var_mu;
    var_mu.reserve(n_docs);
    std::vector<double> row(dim);
    for (std::uint64_t n = 0; n < n_docs; ++n) {
        get_doubles(in, row.data(), row.size());
        var_mu.push_back(UnitVector::from_unit(row));
    }
    return DocModel{VmfParams{UnitVector::from_unit(mu0), kappa0}, std::move(doc_kappa),
                    std::move(var_mu), std::move(var_kappa), cfg, fingerprint};
}

}  // namespace vmfdoc
