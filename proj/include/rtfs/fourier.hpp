#pragma once

// Contour-integral (extended Fourier transform) pricing and the adaptive
// Gauss–Lobatto rule it runs on.

#include <cmath>
#include <complex>
#include <functional>
#include <type_traits>
#include <vector>

#include "rtfs/core.hpp"

namespace rtfs {

using cplx = std::complex<double>;

struct QuadratureConfig {
    double nu = 1.5;        ///< contour height Im z, must exceed 1
    double z_max = 200.0;   ///< |Re z| bound of the main interval
    double tol = 1e-10;     ///< absolute tolerance, in price per unit of spot
    int max_depth = 20;     ///< bisection depth limit
    int initial_panels = 8; ///< panels before adaptive refinement
    long max_evals = 2'000'000;  ///< integrand evaluations per adaptive integral
    /// Integrate |Re z| > z_max too, through x = z_max / s. Off = hard truncation.
    bool tails = true;

    void validate() const;
};

/// Adaptive quadrature ran out of depth; `estimate` is the best value obtained.
struct AccuracyError : NumericalError {
    AccuracyError(const std::string& what, cplx estimate, double error_estimate)
        : NumericalError(what), estimate(estimate), error_estimate(error_estimate) {}
    cplx estimate;
    double error_estimate;
};

/// Consecutive samples too far apart for the winding to be tracked.
struct SamplingError : NumericalError {
    using NumericalError::NumericalError;
};

namespace detail {

template <class V>
struct LobattoAccumulator {
    V sum{};
    double err = 0.0;
    bool failed = false;
    long evals = 0;
    long max_evals = 0;
};

template <class F, class V>
void lobatto_recurse(F& f, double a, double b, V fa, V fb, double tol, int depth, int max_depth,
                     LobattoAccumulator<V>& acc) {
    static const double kAlpha = std::sqrt(2.0 / 3.0);
    static const double kBeta = 1.0 / std::sqrt(5.0);
    const double m = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const V f1 = f(m - kAlpha * h);
    const V f2 = f(m - kBeta * h);
    const V f3 = f(m);
    const V f4 = f(m + kBeta * h);
    const V f5 = f(m + kAlpha * h);
    acc.evals += 5;
    const V lob4 = (h / 6.0) * (fa + fb + 5.0 * (f2 + f4));
    const V kron7 = (h / 1470.0) * (77.0 * (fa + fb) + 432.0 * (f1 + f5) + 625.0 * (f2 + f4) + 672.0 * f3);
    const double err = std::abs(kron7 - lob4);
    // the last three clauses stop refinement at roundoff level
    if (err <= tol || err <= 1e-15 * std::abs(kron7) || m - kAlpha * h <= a || m + kAlpha * h >= b) {
        acc.sum += kron7;
        acc.err += err;
        return;
    }
    if (depth >= max_depth || acc.evals >= acc.max_evals) {
        acc.sum += kron7;
        acc.err += err;
        acc.failed = true;
        return;
    }
    // split at the interior Kronrod nodes so their values are reused as endpoints
    const double xs[7] = {a, m - kAlpha * h, m - kBeta * h, m, m + kBeta * h, m + kAlpha * h, b};
    const V fs[7] = {fa, f1, f2, f3, f4, f5, fb};
    for (int i = 0; i < 6; ++i) {
        lobatto_recurse(f, xs[i], xs[i + 1], fs[i], fs[i + 1], tol * (xs[i + 1] - xs[i]) / (b - a), depth + 1,
                        max_depth, acc);
    }
}

}  // namespace detail

/// Adaptive Gauss–Lobatto (4-point rule, 7-point Kronrod extension) of a real or
/// complex integrand on [a, b]. Subintervals are visited in a fixed order so the
/// result does not depend on anything but the inputs. Throws AccuracyError when
/// an interval hits max_depth, or the evaluation budget runs out, without meeting
/// its share of tol.
template <class F>
auto gauss_lobatto(F&& f, double a, double b, double tol, int max_depth = 20, int initial_panels = 1,
                   long max_evals = 2'000'000) {
    using V = std::decay_t<decltype(f(a))>;
    if (!(b > a)) throw DomainError("gauss_lobatto: need a < b");
    if (!(tol > 0.0)) throw ConfigError("gauss_lobatto: tol must be > 0");
    if (initial_panels < 1) throw ConfigError("gauss_lobatto: initial_panels must be >= 1");
    detail::LobattoAccumulator<V> acc;
    acc.max_evals = max_evals;
    const double h = (b - a) / initial_panels;
    V left = f(a);
    for (int k = 0; k < initial_panels; ++k) {
        const double x0 = a + k * h;
        const double x1 = (k + 1 == initial_panels) ? b : a + (k + 1) * h;
        const V right = f(x1);
        detail::lobatto_recurse(f, x0, x1, left, right, tol * (x1 - x0) / (b - a), 0, max_depth, acc);
        left = right;
    }
    if (acc.failed) {
        throw AccuracyError(acc.evals >= max_evals ? "gauss_lobatto: evaluation budget exhausted"
                                                   : "gauss_lobatto: max_depth exceeded",
                            cplx(acc.sum), acc.err);
    }
    return acc.sum;
}

template <class F>
auto gauss_lobatto(F&& f, double a, double b, const QuadratureConfig& cfg) {
    return gauss_lobatto(std::forward<F>(f), a, b, cfg.tol, cfg.max_depth, cfg.initial_panels, cfg.max_evals);
}

/// Integral of a real integrand over [z_max, inf) through x = z_max / s; f must decay at infinity.
template <class F>
double gauss_lobatto_upper_tail(F&& f, double z_max, const QuadratureConfig& cfg) {
    auto mapped = [&](double s) -> double {
        if (s <= 0.0) return 0.0;
        const double x = z_max / s;
        return f(x) * z_max / (s * s);
    };
    return gauss_lobatto(mapped, 0.0, 1.0, cfg.tol, cfg.max_depth, cfg.initial_panels, cfg.max_evals);
}

// ---------------------------------------------------------------------------
// Characteristic functions
// ---------------------------------------------------------------------------

enum class BranchMode { PrincipalLog, RotationCount };

/// phi(z, dt) = E[exp(i z log(S_{u+dt} / S_u))] under the pricing measure, so
/// phi(0, dt) = 1 and phi(-i, dt) = e^{r dt}.
struct CharFn {
    std::function<cplx(cplx, double)> evaluator;
    BranchMode branch_mode = BranchMode::PrincipalLog;

    cplx operator()(cplx z, double dt) const { return evaluator(z, dt); }
};

/// Log-normal increments with volatility sigma and rate r.
CharFn gaussian_char_fn(double sigma, double r);

/// VG increment char fn with the drift (r + omega) dt, principal logarithm.
/// NumericalError when the logarithm's argument vanishes.
cplx vg_char(cplx z, double dt, const VarianceGammaParams& p);
CharFn vg_char_fn(const VarianceGammaParams& p);

/// Logs of phi_seq whose imaginary parts are continuous along the sequence.
/// SamplingError if two consecutive arguments differ by pi or more.
std::vector<cplx> rotation_count_log(const std::vector<cplx>& phi_seq);

/// Vanilla call from the contour integral along Im z = nu:
/// e^{-r dt} K / (2 pi) int e^{-i z log(S/K)} phi(-z, dt) / (i z - z^2) dz.
double vanilla_call_fourier(double u, double S, double K, double T, const CharFn& cf, double r,
                            const QuadratureConfig& cfg = {});

/// RTFS call in VG with tau ~ Exp(lambda); the time integral is done in closed form
/// inside the contour integrand.
PriceEstimate vg_rtfs_price(const RTFSContract& c, const VarianceGammaParams& p, double lambda,
                            const QuadratureConfig& cfg = {});

}  // namespace rtfs
