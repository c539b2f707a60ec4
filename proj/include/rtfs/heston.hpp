#pragma once

// Heston RTFS pricing: vanilla call by contour integration, conditional law of
// the variance, forward-start prices and the outer time integral.

#include <memory>
#include <vector>

#include "rtfs/core.hpp"
#include "rtfs/fourier.hpp"

namespace rtfs {

/// E(sigma_u) = sigma0 e^{-kappa u} + theta (1 - e^{-kappa u}).
double expected_variance(double sigma0, double u, const HestonParams& p);

/// log phi(w) = A(w) + D(w) * v for the log-return over tau, v the variance at the start.
struct HestonExponents {
    cplx A;  ///< i w r tau + C(w)
    cplx D;
};

/// Heston characteristic function restricted to a pricing contour w = -(x + i nu).
///
/// Uses the original formulation, whose complex logarithm jumps branch along the
/// contour; a dense table of the argument on x in [0, z_max] is unwrapped by
/// rotation counting and refined until consecutive steps stay below pi/2. Off the
/// table (other contours, |x| > z_max) the branch-stable "little trap" form with
/// the principal logarithm is used.
class HestonCharFn {
public:
    HestonCharFn(const HestonParams& p, double tau, double nu, double z_max);

    HestonExponents exponents(cplx w) const;
    cplx operator()(cplx w, double v) const;

    /// Principal-logarithm little-trap form, valid anywhere.
    static HestonExponents little_trap(const HestonParams& p, double tau, cplx w);

    const std::vector<double>& grid() const { return x_; }
    /// Continuous imaginary part of log((1 - g e^{d tau}) / (1 - g)) on the grid.
    const std::vector<double>& unwrapped_arg() const { return arg_; }
    double tau() const { return tau_; }

private:
    struct Raw {
        cplx b_plus_d;
        cplx D;
        double log_re;
        double arg_principal;
    };
    Raw raw(cplx w) const;
    HestonExponents assemble(cplx w, const Raw& r, double arg) const;
    double continuous_arg(double x, double principal) const;

    HestonParams p_;
    double tau_;
    double nu_;
    double z_max_;
    std::vector<double> x_;
    std::vector<double> arg_;
};

/// CharFn for a fixed horizon tau and start variance v; evaluating it at any other dt throws.
CharFn heston_char_fn(const HestonParams& p, double v, double tau, const QuadratureConfig& cfg = {});

/// Heston call at u with start variance sigma_u.
double heston_call(double u, double S, double K, double sigma_u, double T, const HestonParams& p,
                   const QuadratureConfig& cfg = {});

/// Coefficients of the conditional law of sigma_u given sigma_t (dt = u - t):
/// B sigma_u is noncentral chi-square with R degrees of freedom and noncentrality Lam.
struct HestonCondDensityParams {
    double B = 0.0;
    double Lam = 0.0;
    double R = 0.0;
};

/// B = 4 k / (c^2 (1 - e^{-k dt})), Lam = B e^{-k dt} sigma_t, R = 4 kappa theta / c^2,
/// with k = kappa - rho c. DomainError when k <= 0 or dt <= 0.
HestonCondDensityParams heston_density_params(double sigma_t, double dt, const HestonParams& p);

/// (B/2) e^{-(B s + Lam)/2} (B s / Lam)^{(R/2 - 1)/2} I_{R/2-1}(sqrt(Lam B s)).
double heston_cond_density(double sigma, double sigma_t, double dt, const HestonParams& p);

/// Nodes and weights (density included) for integrating against the conditional law.
struct DensityRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Composite Gauss-Legendre when the law sits away from 0, tanh-sinh otherwise.
struct DensityQuadrature {
    int panels = 16;
    int points = 8;
    int de_nodes = 128;
    double tail = 1e-10;  ///< probability left out above the upper truncation point
};

DensityRule heston_density_rule(double sigma_t, double dt, const HestonParams& p, const DensityQuadrature& q = {});

enum class HestonMode { MeanApprox, FullDensity };

std::string to_string(HestonMode m);

/// Forward-start call struck at alpha S_u. MeanApprox prices the call at E(sigma_u);
/// FullDensity integrates the call against the conditional variance law.
double heston_fs_price(double t, double u, double T, double S_t, double sigma_t, const HestonParams& p,
                       HestonMode mode, const QuadratureConfig& cfg = {}, double alpha = 1.0);

/// RTFS call with tau ~ Exp(lambda); p.sigma0 is the variance at the valuation time.
PriceEstimate heston_rtfs_price(const RTFSContract& c, const HestonParams& p, double lambda,
                                HestonMode mode = HestonMode::FullDensity, const QuadratureConfig& cfg = {});

}  // namespace rtfs
