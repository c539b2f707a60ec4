#pragma once

#include <cmath>
#include <numbers>
#include <vector>

namespace rtfs::math {

inline constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343819;

/// Standard normal density.
inline double norm_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

/// Standard normal CDF through erfc, accurate in both tails.
inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// N(x) - 1/2 without cancellation near 0.
inline double norm_cdf_minus_half(double x) { return 0.5 * std::erf(x / std::numbers::sqrt2); }

/// Gauss-Legendre rule on [-1, 1].
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point rule by Newton iteration on P_n.
GaussLegendreRule gauss_legendre(int n);

/// Shared 5-point rule used by the time quadratures.
const GaussLegendreRule& gauss_legendre5();

/// Composite Gauss-Legendre over [a, b] with `panels` equal panels.
template <class F>
double composite_gauss_legendre(F&& f, double a, double b, int panels, const GaussLegendreRule& rule) {
    const double h = (b - a) / panels;
    double sum = 0.0;
    for (int k = 0; k < panels; ++k) {
        const double mid = a + (k + 0.5) * h;
        double panel = 0.0;
        for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
            panel += rule.weights[j] * f(mid + 0.5 * h * rule.nodes[j]);
        }
        sum += 0.5 * h * panel;
    }
    return sum;
}

}  // namespace rtfs::math
