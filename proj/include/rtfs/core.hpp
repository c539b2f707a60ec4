#pragma once

// Contract, model and hazard data model for random-time forward-start (RTFS)
// options, plus the generic "integrate forward-start prices against the law of
// the strike-determination time" pricing skeleton.

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

namespace rtfs {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct StateError : std::logic_error {
    using std::logic_error::logic_error;
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Contract
// ---------------------------------------------------------------------------

/// Strike-determination time has not occurred yet (tau > t).
struct Unrealized {};

/// Strike-determination time tau <= t has occurred and S_tau was recorded.
struct Realized {
    double tau = 0.0;
    double spot_at_tau = 0.0;
};

using TauState = std::variant<Unrealized, Realized>;

/// Call paying (S_T - alpha * S_{tau ^ T})^+ at T.
struct RTFSContract {
    double t = 0.0;       ///< valuation time
    double T = 1.0;       ///< maturity
    double alpha = 1.0;   ///< strike percentage, in (0, 1]
    double spot = 100.0;  ///< S_t
    TauState tau_state = Unrealized{};

    bool realized() const { return std::holds_alternative<Realized>(tau_state); }
    const Realized& realization() const;

    /// Throws DomainError when an invariant is violated.
    void validate() const;
};

// ---------------------------------------------------------------------------
// Models
// ---------------------------------------------------------------------------

struct BlackScholesParams {
    double sigma = 0.2;
    double r = 0.0;
};

/// Merton jump diffusion: Poisson(nu) jumps with log size ~ N(mu, delta^2).
struct MertonParams {
    double sigma = 0.2;
    double r = 0.0;
    double nu = 0.0;
    double mu = 0.0;
    double delta = 0.0;

    double jump_mean() const;  ///< kappa = E[e^J] - 1
};

/// Variance Gamma X = b*Y + c*W_Y with Y a gamma process (mean rate 1, variance rate mu).
struct VarianceGammaParams {
    double b = -0.1463;
    double c = 0.1213;
    double mu = 0.1686;
    double r = 0.0;

    /// omega = log(1 - b*mu - mu*c^2/2) / mu, the martingale drift correction.
    double omega() const;
};

/// Heston with variance process d sigma = kappa (theta - sigma) dt + vol_of_vol sqrt(sigma) dW.
/// sigma0 is the instantaneous variance at the valuation time.
struct HestonParams {
    double sigma0 = 0.09;
    double kappa = 4.0;
    double theta = 0.06;
    double vol_of_vol = 0.65;
    double rho = -0.9;
    double r = 0.0;
};

using ModelParams = std::variant<BlackScholesParams, MertonParams, VarianceGammaParams, HestonParams>;

void validate(const BlackScholesParams& p);
void validate(const MertonParams& p);
void validate(const VarianceGammaParams& p);
void validate(const HestonParams& p);
void validate(const ModelParams& p);

double risk_free_rate(const ModelParams& p);
std::string model_name(const ModelParams& p);

// ---------------------------------------------------------------------------
// Hazard models for the strike-determination time
// ---------------------------------------------------------------------------

struct ConstantHazard {
    double lambda = 1.0;
};

/// Nonnegative, piecewise-continuous intensity lambda(s).
struct DeterministicHazard {
    std::function<double(double)> lambda;
};

/// Positive factor Z driving the affine intensity; independent of the asset.
struct ConstantZ {
    double value = 1.0;
};

/// dZ = kappa (theta - Z) dt + sigma sqrt(Z) dW.
struct CirZ {
    double z0 = 1.0;
    double kappa = 1.0;
    double theta = 1.0;
    double sigma = 0.1;
};

using ZProcess = std::variant<ConstantZ, CirZ>;

/// lambda_u = a(u) S_u + b(u) Z_u.
struct AffineHazard {
    std::function<double(double)> a;
    std::function<double(double)> b;
    ZProcess z = ConstantZ{};
};

using HazardModel = std::variant<ConstantHazard, DeterministicHazard, AffineHazard>;

/// Gamma_u - Gamma_t for the deterministic variants.
double integrated_hazard(const HazardModel& h, double t, double u, int panels = 64);

/// Q(tau > u | tau > t) = exp(-(Gamma_u - Gamma_t)).
double survival(const HazardModel& h, double t, double u, int panels = 64);

/// B(t, T) for a constant short rate.
double discount(double r, double t, double T);

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

enum class Method { ClosedForm, Fourier, Quadrature, MonteCarlo };

std::string to_string(Method m);

struct PriceEstimate {
    double value = 0.0;
    std::optional<double> std_error;
    Method method = Method::ClosedForm;

    std::optional<double> ci95_halfwidth() const;
    /// Full length of the 95% confidence interval, as reported in the tables.
    std::optional<double> ci95_length() const;
};

// ---------------------------------------------------------------------------
// Pricing skeleton
// ---------------------------------------------------------------------------

/// u -> c(t, u, T) / S_t, the forward-start price per unit of spot.
using UnitPriceFn = std::function<double(double)>;

/// (t, S, K, T) -> vanilla call price.
using VanillaFn = std::function<double(double, double, double, double)>;

constexpr int kDefaultTimePanels = 64;

/// Integral of f(u) against the law of tau on (t, T] given tau > t, i.e.
/// int_t^T f(u) lambda_u exp(-int_t^u lambda) du. Composite 5-point
/// Gauss-Legendre in the probability variable s = F(u), graded as
/// s = F(T) (1 - (1 - y)^2) so the sqrt(T - u) behaviour of forward-start
/// prices at u -> T is smoothed out.
double integrate_over_tau_law(const HazardModel& h, double t, double T, const UnitPriceFn& f,
                              int panels = kDefaultTimePanels);

/// S_t * int_t^T fs_unit_price(u) dF(u) + (1 - alpha) S_t Q(tau > T | tau > t).
PriceEstimate rtfs_price_by_quadrature(const RTFSContract& c, const HazardModel& h,
                                       const UnitPriceFn& fs_unit_price,
                                       int panels = kDefaultTimePanels);

/// Realized tau: plain vanilla with strike alpha * S_tau.
double realized_branch_price(const RTFSContract& c, const VanillaFn& vanilla);

}  // namespace rtfs
