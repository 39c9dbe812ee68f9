#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace tarkit {

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

/// Cosine similarity; defined as 0 when either vector has zero norm.
inline double cosine(std::span<const double> a, std::span<const double> b) {
    double na = norm(a), nb = norm(b);
    if (na == 0 || nb == 0) return 0;
    return dot(a, b) / (na * nb);
}

/// Sum with a fixed midpoint-splitting reduction tree. Concatenating a
/// sequence with itself doubles the result exactly (the halves reduce
/// identically and scaling by two is exact), and error grows O(log n).
inline double pairwise_sum(std::span<const double> xs) {
    if (xs.size() <= 2) {
        double s = 0;
        for (double x : xs) s += x;
        return s;
    }
    size_t half = xs.size() / 2;
    return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

inline double mean(std::span<const double> xs) {
    if (xs.empty()) return 0;
    double s = 0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

/// Population standard deviation (divides by n, not n-1).
inline double stdev(std::span<const double> xs) {
    if (xs.empty()) return 0;
    double m = mean(xs);
    double s = 0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(xs.size()));
}

}  // namespace tarkit
