#include "rtfs/core.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "rtfs/math.hpp"

namespace rtfs {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double checked_intensity(const DeterministicHazard& h, double s) {
    const double l = h.lambda(s);
    if (!(l >= 0.0)) throw DomainError("hazard: intensity must be nonnegative, got " + std::to_string(l));
    return l;
}

double deterministic_gamma(const DeterministicHazard& h, double t, double u, int panels) {
    if (u == t) return 0.0;
    return math::composite_gauss_legendre([&](double s) { return checked_intensity(h, s); }, t, u,
                                          panels, math::gauss_legendre5());
}

// Law of tau on (t, T] given tau > t, with an inverse CDF.
class TauLaw {
public:
    TauLaw(const HazardModel& h, double t, double T, int panels) : t_(t), T_(T) {
        std::visit(Overloaded{
                       [&](const ConstantHazard& c) {
                           if (!(c.lambda >= 0.0)) throw DomainError("hazard: lambda must be nonnegative");
                           lambda_ = c.lambda;
                           gamma_T_ = c.lambda * (T - t);
                       },
                       [&](const DeterministicHazard& d) {
                           if (!d.lambda) throw ConfigError("hazard: missing intensity function");
                           det_ = &d;
                           build_grid(d, panels);
                       },
                       [&](const AffineHazard&) {
                           throw DomainError(
                               "hazard: affine intensities depend on the asset path; use the Monte Carlo pricer");
                       },
                   },
                   h);
    }

    /// F(T) = Q(tau <= T | tau > t).
    double mass() const { return -std::expm1(-gamma_T_); }

    /// u such that Q(tau <= u | tau > t) = s, clamped to [t, T].
    double inverse(double s) const {
        const double target = -std::log1p(-s);
        if (!std::isfinite(target) || target >= gamma_T_) return T_;
        if (!det_) return std::min(T_, t_ + target / lambda_);
        // locate the grid panel, then bisect inside it
        const auto it = std::upper_bound(cum_.begin(), cum_.end(), target);
        const std::size_t k = std::clamp<std::size_t>(it - cum_.begin(), 1, cum_.size() - 1) - 1;
        double lo = grid_[k], hi = grid_[k + 1];
        const double base = cum_[k];
        for (int iter = 0; iter < 60; ++iter) {
            const double mid = 0.5 * (lo + hi);
            const double g = base + math::composite_gauss_legendre(
                                        [&](double s) { return checked_intensity(*det_, s); }, grid_[k], mid, 1,
                                        math::gauss_legendre5());
            (g < target ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }

private:
    void build_grid(const DeterministicHazard& d, int panels) {
        grid_.resize(panels + 1);
        cum_.resize(panels + 1);
        const double h = (T_ - t_) / panels;
        cum_[0] = 0.0;
        for (int k = 0; k <= panels; ++k) grid_[k] = t_ + k * h;
        grid_[panels] = T_;
        for (int k = 0; k < panels; ++k) {
            cum_[k + 1] = cum_[k] + deterministic_gamma(d, grid_[k], grid_[k + 1], 1);
        }
        gamma_T_ = cum_[panels];
    }

    double t_, T_;
    double lambda_ = 0.0;
    double gamma_T_ = 0.0;
    const DeterministicHazard* det_ = nullptr;
    std::vector<double> grid_, cum_;
};

}  // namespace

const Realized& RTFSContract::realization() const {
    if (const auto* r = std::get_if<Realized>(&tau_state)) return *r;
    throw StateError("contract: strike-determination time has not been realized");
}

void RTFSContract::validate() const {
    if (!(t >= 0.0)) throw DomainError("contract: t must be >= 0");
    if (!(T > t)) throw DomainError("contract: T must be > t");
    if (!(spot > 0.0)) throw DomainError("contract: spot must be > 0");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("contract: alpha must be in (0, 1]");
    if (const auto* r = std::get_if<Realized>(&tau_state)) {
        if (!(r->tau <= t)) throw DomainError("contract: realized tau must be <= t");
        if (!(r->spot_at_tau > 0.0)) throw DomainError("contract: recorded S_tau must be > 0");
    }
}

double MertonParams::jump_mean() const { return std::exp(mu + 0.5 * delta * delta) - 1.0; }

double VarianceGammaParams::omega() const { return std::log(1.0 - b * mu - 0.5 * mu * c * c) / mu; }

void validate(const BlackScholesParams& p) {
    if (!(p.sigma > 0.0)) throw DomainError("sigma must be > 0");
    if (!std::isfinite(p.r)) throw DomainError("r must be finite");
}

void validate(const MertonParams& p) {
    if (!(p.sigma > 0.0)) throw DomainError("sigma must be > 0");
    if (!std::isfinite(p.r)) throw DomainError("r must be finite");
    if (!(p.nu >= 0.0)) throw DomainError("jump intensity nu must be >= 0");
    if (!(p.delta >= 0.0)) throw DomainError("jump volatility delta must be >= 0");
    if (!std::isfinite(p.mu)) throw DomainError("jump mean mu must be finite");
}

void validate(const VarianceGammaParams& p) {
    if (!(p.c > 0.0)) throw DomainError("VG c must be > 0");
    if (!(p.mu > 0.0)) throw DomainError("VG mu must be > 0");
    if (!std::isfinite(p.b)) throw DomainError("VG b must be finite");
    if (!std::isfinite(p.r)) throw DomainError("r must be finite");
    if (!(1.0 - p.b * p.mu - 0.5 * p.mu * p.c * p.c > 0.0)) {
        throw DomainError("VG requires 1 - b*mu - mu*c^2/2 > 0");
    }
}

void validate(const HestonParams& p) {
    if (!(p.sigma0 > 0.0)) throw DomainError("Heston sigma0 must be > 0");
    if (!(p.kappa > 0.0)) throw DomainError("Heston kappa must be > 0");
    if (!(p.theta > 0.0)) throw DomainError("Heston theta must be > 0");
    if (!(p.vol_of_vol > 0.0)) throw DomainError("Heston vol_of_vol must be > 0");
    if (!(p.rho > -1.0 && p.rho < 1.0)) throw DomainError("Heston rho must be in (-1, 1)");
    if (!std::isfinite(p.r)) throw DomainError("r must be finite");
}

void validate(const ModelParams& p) {
    std::visit([](const auto& m) { validate(m); }, p);
}

double risk_free_rate(const ModelParams& p) {
    return std::visit([](const auto& m) { return m.r; }, p);
}

std::string model_name(const ModelParams& p) {
    return std::visit(Overloaded{
                          [](const BlackScholesParams&) { return std::string("bs"); },
                          [](const MertonParams&) { return std::string("merton"); },
                          [](const VarianceGammaParams&) { return std::string("vg"); },
                          [](const HestonParams&) { return std::string("heston"); },
                      },
                      p);
}

double integrated_hazard(const HazardModel& h, double t, double u, int panels) {
    if (u < t) throw DomainError("hazard: u must be >= t");
    if (panels < 1) throw ConfigError("hazard: panels must be >= 1");
    return std::visit(Overloaded{
                          [&](const ConstantHazard& c) {
                              if (!(c.lambda >= 0.0)) throw DomainError("hazard: lambda must be nonnegative");
                              return c.lambda * (u - t);
                          },
                          [&](const DeterministicHazard& d) {
                              if (!d.lambda) throw ConfigError("hazard: missing intensity function");
                              return deterministic_gamma(d, t, u, panels);
                          },
                          [&](const AffineHazard&) -> double {
                              throw DomainError("hazard: survival of an affine intensity is path dependent");
                          },
                      },
                      h);
}

double survival(const HazardModel& h, double t, double u, int panels) {
    return std::exp(-integrated_hazard(h, t, u, panels));
}

double discount(double r, double t, double T) {
    if (T < t) throw DomainError("discount: T must be >= t");
    return std::exp(-r * (T - t));
}

std::string to_string(Method m) {
    switch (m) {
        case Method::ClosedForm: return "closed-form";
        case Method::Fourier: return "fourier";
        case Method::Quadrature: return "quadrature";
        case Method::MonteCarlo: return "monte-carlo";
    }
    return "unknown";
}

std::optional<double> PriceEstimate::ci95_halfwidth() const {
    if (!std_error) return std::nullopt;
    return 1.96 * *std_error;
}

std::optional<double> PriceEstimate::ci95_length() const {
    if (!std_error) return std::nullopt;
    return 2.0 * 1.96 * *std_error;
}

double integrate_over_tau_law(const HazardModel& h, double t, double T, const UnitPriceFn& f, int panels) {
    if (panels < 2) throw ConfigError("quadrature: at least 2 panels are required");
    if (!(T > t)) throw DomainError("quadrature: T must be > t");
    const TauLaw law(h, t, T, panels);
    const double mass = law.mass();
    if (mass == 0.0) return 0.0;
    auto integrand = [&](double y) {
        const double s = mass * (1.0 - (1.0 - y) * (1.0 - y));
        return f(law.inverse(s)) * 2.0 * mass * (1.0 - y);
    };
    return math::composite_gauss_legendre(integrand, 0.0, 1.0, panels, math::gauss_legendre5());
}

PriceEstimate rtfs_price_by_quadrature(const RTFSContract& c, const HazardModel& h,
                                       const UnitPriceFn& fs_unit_price, int panels) {
    if (panels < 2) throw ConfigError("quadrature: at least 2 panels are required");
    c.validate();
    if (c.realized()) throw StateError("quadrature: contract is realized; use the realized branch");
    const double body = integrate_over_tau_law(h, c.t, c.T, fs_unit_price, panels);
    const double guaranteed = (1.0 - c.alpha) * survival(h, c.t, c.T, panels);
    return {c.spot * (body + guaranteed), std::nullopt, Method::Quadrature};
}

double realized_branch_price(const RTFSContract& c, const VanillaFn& vanilla) {
    const Realized& r = c.realization();
    return vanilla(c.t, c.spot, c.alpha * r.spot_at_tau, c.T);
}

}  // namespace rtfs
