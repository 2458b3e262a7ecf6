#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace vmfdoc {

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> v) {
    return std::sqrt(dot(v, v));
}

inline void scale(std::span<double> v, double c) {
    for (double& x : v) x *= c;
}

// y += a * x
inline void axpy(std::span<double> y, double a, std::span<const double> x) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

// y += x
inline void add_into(std::span<double> y, std::span<const double> x) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += x[i];
}

inline std::vector<double> scaled(std::span<const double> v, double c) {
    std::vector<double> out(v.begin(), v.end());
    scale(out, c);
    return out;
}

} // namespace vmfdoc
