#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vmfdoc/errors.hpp"

namespace vmfdoc {

// Concentration bounds. Values beyond kKappaMax overflow nothing here (all
// Bessel work is done in log space) but stop being statistically meaningful,
// so estimators clamp to this range.
inline constexpr double kKappaMax = 1e6;
inline constexpr double kKappaMin = 1e-3;
inline constexpr double kZeroNormEps = 1e-12;

// A point on the unit hypersphere S^{K-1}, K >= 2. Construction goes through
// normalize()/from_unit() so the norm invariant holds for every live object.
class UnitVector {
public:
    static UnitVector normalize(std::span<const double> v);
    // Accepts a vector that is already unit up to 1e-9; throws otherwise.
    static UnitVector from_unit(std::vector<double> v);
    // Standard basis vector e_axis in dimension dim.
    static UnitVector basis(int dim, int axis);

    std::size_t dim() const { return v_.size(); }
    double operator[](std::size_t i) const { return v_[i]; }
    const std::vector<double>& values() const { return v_; }
    operator std::span<const double>() const { return v_; }

private:
    explicit UnitVector(std::vector<double> v) : v_(std::move(v)) {}
    std::vector<double> v_;
};

struct VmfParams {
    UnitVector mu;
    double kappa; // >= 0, <= kKappaMax

    VmfParams(UnitVector mean_direction, double concentration);
};

struct ResultantStats {
    UnitVector direction;
    double rbar;       // mean resultant length, in [0, 1]
    std::size_t count; // number of vectors summed
};

// v / ||v||; identity (bit-exact) on vectors already unit to within 1e-12.
UnitVector normalize(std::span<const double> v);

// log I_nu(x) for nu >= 0, x >= 0, with no intermediate overflow for x up to
// 1e6 and beyond. Returns -inf for x == 0 with nu > 0.
double log_bessel_i(double order, double x);

// A_K(kappa) = I_{K/2}(kappa) / I_{K/2-1}(kappa), in [0, 1).
// Strictly increasing in kappa; A_K(0) = 0.
double bessel_ratio(int dim, double kappa);

// log c_K(kappa) where c_K(kappa) = kappa^{K/2-1} / ((2 pi)^{K/2} I_{K/2-1}(kappa)).
// Continuous at kappa -> 0 with limit log(Gamma(K/2) / (2 pi^{K/2})).
double log_norm_const(int dim, double kappa);

// log f(x | mu, kappa) = log c_K(kappa) + kappa * mu . x
double vmf_log_density(const UnitVector& x, const VmfParams& p);

// Banerjee closed-form approximation kappa ~= rbar (K - rbar^2) / (1 - rbar^2),
// clamped to [0, kKappaMax].
double estimate_kappa(double rbar, int dim);

// n i.i.d. draws via Wood's rejection sampler with a tangent-normal
// decomposition. Deterministic for a given seed.
std::vector<UnitVector> sample_vmf(const VmfParams& p, std::size_t n, std::uint64_t seed);

// rbar = ||sum v_i|| / n and the direction of the sum. Throws
// DegenerateResultantError when the sum's norm is below kZeroNormEps.
ResultantStats mean_resultant(const std::vector<UnitVector>& vs);

} // namespace vmfdoc
