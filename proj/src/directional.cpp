#include "vmfdoc/directional.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vmfdoc/rng.hpp"
#include "vmfdoc/vecops.hpp"

namespace vmfdoc {

namespace {

constexpr double kPi = 3.141592653589793238462643;
constexpr double kLog2Pi = 1.837877066409345483560659;

// Large-argument (Hankel) expansion is used once x clears this bound; below
// it the power series converges in O(x) terms without cancellation.
double hankel_cutoff(double nu) {
    return std::max(500.0, 10.0 * (nu * nu + 10.0));
}

// log of S = sum_k (x^2/4)^k / (k! (nu+1)_k), the unit-leading-term series
// factor of I_nu. All terms are positive; the running sum is rescaled to
// dodge overflow for large x.
double log_series_sum(double nu, double x) {
    const double q = 0.25 * x * x;
    double term = 1.0;
    double sum = 1.0;
    double log_scale = 0.0;
    const long max_terms = 4000000;
    for (long k = 1; k <= max_terms; ++k) {
        term *= q / (static_cast<double>(k) * (nu + static_cast<double>(k)));
        sum += term;
        if (sum > 1e270) {
            sum *= 1e-270;
            term *= 1e-270;
            log_scale += 270.0 * 2.302585092994045684017991;
        }
        if (term < sum * 1e-18) {
            return std::log(sum) + log_scale;
        }
    }
    throw Error("log_bessel_i: series failed to converge");
}

// Asymptotic factor sum_k (-1)^k a_k(nu) / x^k with a_k the Hankel
// coefficients; valid (to ~1e-15) for x >= hankel_cutoff(nu).
double hankel_factor(double nu, double x) {
    const double mu4 = 4.0 * nu * nu;
    double term = 1.0;
    double sum = 1.0;
    double prev_abs = std::numeric_limits<double>::max();
    for (int k = 1; k <= 60; ++k) {
        const double odd = 2.0 * k - 1.0;
        term *= -(mu4 - odd * odd) / (8.0 * k * x);
        if (std::abs(term) >= prev_abs) break; // asymptotic tail turned
        sum += term;
        prev_abs = std::abs(term);
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return sum;
}

double log_bessel_i_hankel(double nu, double x) {
    return x - 0.5 * std::log(2.0 * kPi * x) + std::log(hankel_factor(nu, x));
}

// log(I_nu(x) / (x/2)^nu), finite and continuous down to x = 0 where it
// equals -lgamma(nu+1). This is the quantity the normalizing constant needs;
// forming it directly avoids the log(x) cancellation near zero.
double log_bessel_i_over_power(double nu, double x) {
    if (x < hankel_cutoff(nu)) {
        return log_series_sum(nu, x) - std::lgamma(nu + 1.0);
    }
    return log_bessel_i_hankel(nu, x) - nu * std::log(0.5 * x);
}

// I_{nu+1}(x) / I_nu(x) by the Gauss continued fraction, evaluated with the
// modified Lentz algorithm.
double bessel_ratio_cf(double nu, double x) {
    const double tiny = 1e-300;
    double f = tiny;
    double c = f;
    double d = 0.0;
    const long max_iter = static_cast<long>(2.0 * x) + 20000;
    for (long j = 1; j <= max_iter; ++j) {
        const double b = 2.0 * (nu + static_cast<double>(j)) / x;
        d = b + d;
        if (d == 0.0) d = tiny;
        c = b + 1.0 / c;
        if (c == 0.0) c = tiny;
        d = 1.0 / d;
        const double delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-16) return f;
    }
    throw Error("bessel_ratio: continued fraction failed to converge");
}

void check_dim(int dim) {
    if (dim < 2) throw InvalidArgumentError("dimension must be >= 2, got " + std::to_string(dim));
}

void check_kappa(double kappa) {
    if (!(kappa >= 0.0) || !(kappa <= kKappaMax)) {
        throw InvalidArgumentError("kappa out of range [0, " + std::to_string(kKappaMax) +
                                   "]: " + std::to_string(kappa));
    }
}

} // namespace

UnitVector UnitVector::normalize(std::span<const double> v) {
    if (v.size() < 2) throw InvalidArgumentError("unit vectors need dimension >= 2");
    const double n = norm2(v);
    if (!(n > kZeroNormEps)) throw ZeroNormError("cannot normalize a (near-)zero vector");
    std::vector<double> out(v.begin(), v.end());
    // Identity on vectors already unit: keeps normalization idempotent and
    // embedding round-trips bit-exact.
    if (std::abs(n - 1.0) > kZeroNormEps) {
        for (double& x : out) x /= n;
    }
    return UnitVector(std::move(out));
}

UnitVector UnitVector::from_unit(std::vector<double> v) {
    if (v.size() < 2) throw InvalidArgumentError("unit vectors need dimension >= 2");
    const double n = norm2(v);
    if (std::abs(n - 1.0) > 1e-9) {
        throw InvalidArgumentError("vector is not unit length (norm " + std::to_string(n) + ")");
    }
    return UnitVector(std::move(v));
}

UnitVector UnitVector::basis(int dim, int axis) {
    if (dim < 2 || axis < 0 || axis >= dim)
        throw InvalidArgumentError("basis axis out of range");
    std::vector<double> v(static_cast<std::size_t>(dim), 0.0);
    v[static_cast<std::size_t>(axis)] = 1.0;
    return UnitVector(std::move(v));
}

UnitVector normalize(std::span<const double> v) {
    return UnitVector::normalize(v);
}

VmfParams::VmfParams(UnitVector mean_direction, double concentration)
    : mu(std::move(mean_direction)), kappa(concentration) {
    if (!std::isfinite(kappa)) throw InvalidArgumentError("kappa must be finite");
    check_kappa(kappa);
}

double log_bessel_i(double order, double x) {
    if (std::isnan(order) || std::isnan(x) || order < 0.0 || x < 0.0) {
        throw InvalidArgumentError("log_bessel_i requires order >= 0 and x >= 0");
    }
    if (x == 0.0) {
        return order == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
    }
    if (x >= hankel_cutoff(order)) {
        return log_bessel_i_hankel(order, x);
    }
    return order * std::log(0.5 * x) - std::lgamma(order + 1.0) + log_series_sum(order, x);
}

double bessel_ratio(int dim, double kappa) {
    check_dim(dim);
    check_kappa(kappa);
    if (kappa == 0.0) return 0.0;
    const double nu = 0.5 * dim - 1.0;
    if (kappa >= hankel_cutoff(nu + 1.0)) {
        // The e^x / sqrt(2 pi x) prefactors cancel; the ratio of the two
        // asymptotic factors is accurate to machine precision here.
        return hankel_factor(nu + 1.0, kappa) / hankel_factor(nu, kappa);
    }
    return bessel_ratio_cf(nu, kappa);
}

double log_norm_const(int dim, double kappa) {
    check_dim(dim);
    check_kappa(kappa);
    const double nu = 0.5 * dim - 1.0;
    return nu * 0.693147180559945309417232 - (nu + 1.0) * kLog2Pi -
           log_bessel_i_over_power(nu, kappa);
}

double vmf_log_density(const UnitVector& x, const VmfParams& p) {
    if (x.dim() != p.mu.dim()) {
        throw DimensionMismatchError("vmf_log_density: point dim " + std::to_string(x.dim()) +
                                     " vs mean dim " + std::to_string(p.mu.dim()));
    }
    return log_norm_const(static_cast<int>(x.dim()), p.kappa) + p.kappa * dot(x, p.mu);
}

double estimate_kappa(double rbar, int dim) {
    check_dim(dim);
    if (!(rbar >= 0.0) || rbar >= 1.0) {
        throw InvalidArgumentError("estimate_kappa requires rbar in [0, 1), got " +
                                   std::to_string(rbar));
    }
    const double k = rbar * (static_cast<double>(dim) - rbar * rbar) / (1.0 - rbar * rbar);
    return std::clamp(k, 0.0, kKappaMax);
}

std::vector<UnitVector> sample_vmf(const VmfParams& p, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw InvalidArgumentError("sample_vmf requires n >= 1");
    const std::size_t dim = p.mu.dim();
    const double kappa = p.kappa;
    const double m1 = static_cast<double>(dim) - 1.0;

    // Wood's envelope parameters. The rationalized form of b is stable for
    // large kappa; kappa = 0 gives b = 1, x0 = 0 and every proposal accepts.
    const double b = m1 / (2.0 * kappa + std::sqrt(4.0 * kappa * kappa + m1 * m1));
    const double x0 = (1.0 - b) / (1.0 + b);
    const double c = kappa * x0 + m1 * std::log(1.0 - x0 * x0);

    Rng rng(seed);
    std::vector<UnitVector> out;
    out.reserve(n);
    std::vector<double> z(dim);
    std::vector<double> s(dim);
    for (std::size_t i = 0; i < n; ++i) {
        double w = 0.0;
        for (int tries = 0;; ++tries) {
            if (tries > 100000) throw Error("sample_vmf: rejection sampler stalled");
            const double zbeta = rng.beta(0.5 * m1, 0.5 * m1);
            w = (1.0 - (1.0 + b) * zbeta) / (1.0 - (1.0 - b) * zbeta);
            const double u = rng.uniform_pos();
            if (kappa * w + m1 * std::log(1.0 - x0 * w) - c >= std::log(u)) break;
        }
        // Uniform tangent direction: project a Gaussian off mu and normalize.
        double tnorm = 0.0;
        do {
            for (std::size_t j = 0; j < dim; ++j) z[j] = rng.normal();
            const double proj = dot(z, p.mu);
            for (std::size_t j = 0; j < dim; ++j) z[j] -= proj * p.mu[j];
            tnorm = norm2(z);
        } while (tnorm <= kZeroNormEps);
        const double tang = std::sqrt(std::max(0.0, 1.0 - w * w));
        for (std::size_t j = 0; j < dim; ++j) s[j] = w * p.mu[j] + tang * z[j] / tnorm;
        out.push_back(UnitVector::normalize(s));
    }
    return out;
}

ResultantStats mean_resultant(const std::vector<UnitVector>& vs) {
    if (vs.empty()) throw InvalidArgumentError("mean_resultant: empty input");
    const std::size_t dim = vs.front().dim();
    std::vector<double> sum(dim, 0.0);
    for (const auto& v : vs) {
        if (v.dim() != dim) throw DimensionMismatchError("mean_resultant: mixed dimensions");
        add_into(sum, v);
    }
    const double n = norm2(sum);
    if (n <= kZeroNormEps) {
        throw DegenerateResultantError("mean_resultant: resultant has (near-)zero norm");
    }
    const double rbar = std::min(n / static_cast<double>(vs.size()), 1.0);
    return ResultantStats{UnitVector::normalize(sum), rbar, vs.size()};
}

} // namespace vmfdoc
