#include "rtfs/heston.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_bessel.h>

#include <algorithm>
#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <cmath>
#include <numbers>

#include "rtfs/math.hpp"

namespace rtfs {

namespace {

constexpr cplx kI{0.0, 1.0};
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_variance_arg(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be > 0");
}

// e^{-x} I_nu(x) for any real order, through I_{-a} = I_a + (2/pi) sin(a pi) K_a.
double bessel_i_scaled(double order, double x) {
    gsl_sf_result res;
    if (order >= 0.0) {
        if (gsl_sf_bessel_Inu_scaled_e(order, x, &res) != GSL_SUCCESS) {
            throw NumericalError("heston_cond_density: Bessel I evaluation failed");
        }
        return res.val;
    }
    const double a = -order;
    gsl_sf_result k;
    if (gsl_sf_bessel_Inu_scaled_e(a, x, &res) != GSL_SUCCESS || gsl_sf_bessel_Knu_scaled_e(a, x, &k) != GSL_SUCCESS) {
        throw NumericalError("heston_cond_density: Bessel evaluation failed");
    }
    // K_a(x) e^{-x} = k.val e^{-2x}
    return res.val + (2.0 / std::numbers::pi) * std::sin(a * std::numbers::pi) * k.val * std::exp(-2.0 * x);
}

struct GslHandlerOff {
    GslHandlerOff() { gsl_set_error_handler_off(); }
};
const GslHandlerOff gsl_handler_off;

}  // namespace

double expected_variance(double sigma0, double u, const HestonParams& p) {
    if (!(u >= 0.0)) throw DomainError("expected_variance: u must be >= 0");
    const double e = std::exp(-p.kappa * u);
    return sigma0 * e + p.theta * (1.0 - e);
}

// ---------------------------------------------------------------------------
// Characteristic function
// ---------------------------------------------------------------------------

HestonCharFn::HestonCharFn(const HestonParams& p, double tau, double nu, double z_max)
    : p_(p), tau_(tau), nu_(nu), z_max_(z_max) {
    validate(p);
    if (!(tau > 0.0)) throw DomainError("heston: tau must be > 0");
    if (!(z_max > 0.0)) throw ConfigError("heston: z_max must be > 0");

    for (int n = std::max(256, static_cast<int>(4.0 * z_max)); n <= (1 << 20); n *= 2) {
        std::vector<double> xs(n + 1);
        std::vector<cplx> unit(n + 1);
        for (int j = 0; j <= n; ++j) {
            xs[j] = z_max * j / n;
            unit[j] = std::polar(1.0, raw(cplx(-xs[j], -nu)).arg_principal);
        }
        std::vector<cplx> logs;
        try {
            logs = rotation_count_log(unit);
        } catch (const SamplingError&) {
            continue;
        }
        double max_step = 0.0;
        for (int j = 1; j <= n; ++j) max_step = std::max(max_step, std::abs(logs[j].imag() - logs[j - 1].imag()));
        if (max_step >= 0.5 * std::numbers::pi) continue;

        // anchor the first point on the branch of the little-trap form
        const cplx w0(0.0, -nu);
        const Raw r0 = raw(w0);
        const cplx c_ref = little_trap(p, tau, w0).A - kI * w0 * p.r * tau;
        const cplx l_ref = 0.5 * (r0.b_plus_d * tau - c_ref * p.vol_of_vol * p.vol_of_vol / (p.kappa * p.theta));
        const double shift = kTwoPi * std::round((l_ref.imag() - logs[0].imag()) / kTwoPi);

        x_ = std::move(xs);
        arg_.resize(n + 1);
        for (int j = 0; j <= n; ++j) arg_[j] = logs[j].imag() + shift;
        return;
    }
    throw SamplingError("heston: could not resolve the characteristic-function branch along the contour");
}

HestonCharFn::Raw HestonCharFn::raw(cplx w) const {
    const double c2 = p_.vol_of_vol * p_.vol_of_vol;
    const cplx b = p_.kappa - p_.rho * p_.vol_of_vol * kI * w;
    const cplx d = std::sqrt(b * b + c2 * (kI * w + w * w));
    const cplx g = (b + d) / (b - d);
    const cplx em = std::exp(-d * tau_);
    const cplx q1 = em - g;
    const cplx q0 = 1.0 - g;
    Raw r;
    r.b_plus_d = b + d;
    r.D = (b + d) / c2 * (em - 1.0) / q1;
    // log((1 - g e^{d tau}) / (1 - g)) = d tau + log(e^{-d tau} - g) - log(1 - g)
    r.log_re = (d * tau_).real() + std::log(std::abs(q1)) - std::log(std::abs(q0));
    r.arg_principal = std::remainder((d * tau_).imag() + std::arg(q1) - std::arg(q0), kTwoPi);
    return r;
}

HestonExponents HestonCharFn::assemble(cplx w, const Raw& r, double arg) const {
    const double c2 = p_.vol_of_vol * p_.vol_of_vol;
    const cplx L(r.log_re, arg);
    const cplx C = p_.kappa * p_.theta / c2 * (r.b_plus_d * tau_ - 2.0 * L);
    return {kI * w * p_.r * tau_ + C, r.D};
}

double HestonCharFn::continuous_arg(double x, double principal) const {
    const int n = static_cast<int>(x_.size()) - 1;
    const double h = z_max_ / n;
    const int j = std::clamp(static_cast<int>(x / h), 0, n - 1);
    const double t = (x - x_[j]) / h;
    const double guess = arg_[j] + t * (arg_[j + 1] - arg_[j]);
    return principal + kTwoPi * std::round((guess - principal) / kTwoPi);
}

HestonExponents HestonCharFn::exponents(cplx w) const {
    if (std::abs(w.imag() + nu_) <= 1e-12 * std::max(1.0, nu_)) {
        const double x = -w.real();
        if (std::abs(x) <= z_max_) {
            // phi(-conj(w)) = conj(phi(w)) folds x < 0 onto the table
            const bool flip = x < 0.0;
            const cplx q = flip ? -std::conj(w) : w;
            const Raw r = raw(q);
            const HestonExponents e = assemble(q, r, continuous_arg(std::abs(x), r.arg_principal));
            return flip ? HestonExponents{std::conj(e.A), std::conj(e.D)} : e;
        }
    }
    return little_trap(p_, tau_, w);
}

cplx HestonCharFn::operator()(cplx w, double v) const {
    const HestonExponents e = exponents(w);
    return std::exp(e.A + e.D * v);
}

HestonExponents HestonCharFn::little_trap(const HestonParams& p, double tau, cplx w) {
    const double c2 = p.vol_of_vol * p.vol_of_vol;
    const cplx b = p.kappa - p.rho * p.vol_of_vol * kI * w;
    const cplx d = std::sqrt(b * b + c2 * (kI * w + w * w));
    const cplx g = (b - d) / (b + d);
    const cplx em = std::exp(-d * tau);
    const cplx D = (b - d) / c2 * (1.0 - em) / (1.0 - g * em);
    const cplx C = p.kappa * p.theta / c2 * ((b - d) * tau - 2.0 * std::log((1.0 - g * em) / (1.0 - g)));
    return {kI * w * p.r * tau + C, D};
}

CharFn heston_char_fn(const HestonParams& p, double v, double tau, const QuadratureConfig& cfg) {
    auto tracker = std::make_shared<const HestonCharFn>(p, tau, cfg.nu, cfg.z_max);
    return {[tracker, v, tau](cplx z, double dt) {
                if (std::abs(dt - tau) > 1e-14 * std::max(1.0, tau)) {
                    throw DomainError("heston_char_fn: bound to a different horizon");
                }
                return (*tracker)(z, v);
            },
            BranchMode::RotationCount};
}

double heston_call(double u, double S, double K, double sigma_u, double T, const HestonParams& p,
                   const QuadratureConfig& cfg) {
    validate(p);
    check_variance_arg(sigma_u, "heston_call: sigma_u");
    if (!(T > u)) throw DomainError("heston_call: T must be > u");
    return vanilla_call_fourier(u, S, K, T, heston_char_fn(p, sigma_u, T - u, cfg), p.r, cfg);
}

// ---------------------------------------------------------------------------
// Conditional variance law
// ---------------------------------------------------------------------------

HestonCondDensityParams heston_density_params(double sigma_t, double dt, const HestonParams& p) {
    validate(p);
    if (!(dt > 0.0)) throw DomainError("heston density: dt must be > 0");
    if (!(sigma_t >= 0.0)) throw DomainError("heston density: sigma_t must be >= 0");
    const double k = p.kappa - p.rho * p.vol_of_vol;
    if (!(k > 0.0)) throw DomainError("heston density: kappa - rho * vol_of_vol must be > 0");
    const double c2 = p.vol_of_vol * p.vol_of_vol;
    HestonCondDensityParams out;
    out.B = 4.0 * k / (c2 * -std::expm1(-k * dt));
    out.Lam = out.B * std::exp(-k * dt) * sigma_t;
    out.R = 4.0 * p.kappa * p.theta / c2;
    return out;
}

double heston_cond_density(double sigma, double sigma_t, double dt, const HestonParams& p) {
    const HestonCondDensityParams q = heston_density_params(sigma_t, dt, p);
    if (!(sigma >= 0.0)) return 0.0;
    const double order = 0.5 * q.R - 1.0;
    const double bs = q.B * sigma;
    if (bs == 0.0) {
        if (order > 0.0) return 0.0;
        if (order == 0.0) return 0.5 * q.B * std::exp(-0.5 * q.Lam);
        return HUGE_VAL;
    }
    const double x = std::sqrt(q.Lam * bs);
    if (x < 1e-3) {
        // series of (B s / Lam)^{order/2} I_order(x), finite as Lam -> 0
        const double y = 0.25 * q.Lam * bs;
        double term = 1.0 / std::tgamma(order + 1.0);
        double sum = term;
        for (int k = 1; k < 8; ++k) {
            term *= y / (k * (k + order));
            sum += term;
        }
        return 0.5 * q.B * std::exp(-0.5 * (bs + q.Lam) + order * std::log(0.5 * bs)) * sum;
    }
    const double log_f = std::log(0.5 * q.B) - 0.5 * (bs + q.Lam) + 0.5 * order * (std::log(bs) - std::log(q.Lam)) +
                         std::log(bessel_i_scaled(order, x)) + x;
    return std::exp(log_f);
}

DensityRule heston_density_rule(double sigma_t, double dt, const HestonParams& p, const DensityQuadrature& dq) {
    const HestonCondDensityParams q = heston_density_params(sigma_t, dt, p);
    if (dq.panels < 1 || dq.points < 2 || !(dq.tail > 0.0 && dq.tail < 0.5)) {
        throw ConfigError("heston density rule: bad quadrature settings");
    }
    double lo, hi;
    if (q.Lam > 1e4) {
        // quantile search gets slow here and the law is close to normal
        const double sd = std::sqrt(2.0 * (q.R + 2.0 * q.Lam));
        lo = std::max(0.0, q.R + q.Lam - 9.0 * sd);
        hi = q.R + q.Lam + 9.0 * sd;
    } else {
        const boost::math::non_central_chi_squared law(q.R, q.Lam);
        lo = boost::math::quantile(law, dq.tail);
        hi = boost::math::quantile(boost::math::complement(law, dq.tail));
    }
    lo /= q.B;
    hi /= q.B;

    const math::GaussLegendreRule rule = math::gauss_legendre(dq.points);
    DensityRule out;
    out.nodes.reserve(dq.panels * dq.points);
    out.weights.reserve(dq.panels * dq.points);
    auto push = [&](double s, double w) {
        out.nodes.push_back(s);
        out.weights.push_back(w * heston_cond_density(s, sigma_t, dt, p));
    };
    if (lo > 0.1 * hi) {
        const double h = (hi - lo) / dq.panels;
        for (int k = 0; k < dq.panels; ++k) {
            for (int j = 0; j < dq.points; ++j) {
                push(lo + h * (k + 0.5 + 0.5 * rule.nodes[j]), 0.5 * h * rule.weights[j]);
            }
        }
    } else {
        // tanh-sinh on [0, hi]: the s^{R/2-1} behaviour at the origin costs nothing
        const double tmax = 3.2;
        const double step = 2.0 * tmax / dq.de_nodes;
        for (int k = 0; k <= dq.de_nodes; ++k) {
            const double tk = -tmax + k * step;
            const double arg = 0.5 * std::numbers::pi * std::sinh(tk);
            // 1 + tanh(arg) = 2 / (1 + e^{-2 arg}) keeps small nodes accurate
            const double s = hi / (1.0 + std::exp(-2.0 * arg));
            const double ch = std::cosh(arg);
            const double w = 0.5 * hi * step * 0.5 * std::numbers::pi * std::cosh(tk) / (ch * ch);
            if (s > 0.0 && w > 0.0) push(s, w);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Forward-start and RTFS prices
// ---------------------------------------------------------------------------

std::string to_string(HestonMode m) { return m == HestonMode::MeanApprox ? "mean" : "full"; }

double heston_fs_price(double t, double u, double T, double S_t, double sigma_t, const HestonParams& p,
                       HestonMode mode, const QuadratureConfig& cfg, double alpha) {
    validate(p);
    check_variance_arg(sigma_t, "heston_fs_price: sigma_t");
    if (!(t <= u && u <= T)) throw DomainError("heston_fs_price: need t <= u <= T");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("heston_fs_price: alpha must be in (0, 1]");
    if (T - u <= 0.0) return S_t * (1.0 - alpha);
    if (u == t) return S_t * heston_call(t, 1.0, alpha, sigma_t, T, p, cfg);
    if (mode == HestonMode::MeanApprox) {
        return S_t * heston_call(u, 1.0, alpha, expected_variance(sigma_t, u - t, p), T, p, cfg);
    }
    const DensityRule rule = heston_density_rule(sigma_t, u - t, p);
    const auto tracker = std::make_shared<const HestonCharFn>(p, T - u, cfg.nu, cfg.z_max);
    const CharFn mixed{[&](cplx z, double) {
                           const HestonExponents e = tracker->exponents(z);
                           cplx sum = 0.0;
                           for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
                               sum += rule.weights[j] * std::exp(e.D * rule.nodes[j]);
                           }
                           return std::exp(e.A) * sum;
                       },
                       BranchMode::RotationCount};
    return S_t * vanilla_call_fourier(u, 1.0, alpha, T, mixed, p.r, cfg);
}

PriceEstimate heston_rtfs_price(const RTFSContract& c, const HestonParams& p, double lambda, HestonMode mode,
                                const QuadratureConfig& cfg) {
    c.validate();
    validate(p);
    cfg.validate();
    if (c.realized()) {
        const double K = c.alpha * c.realization().spot_at_tau;
        return {heston_call(c.t, c.spot, K, p.sigma0, c.T, p, cfg), std::nullopt, Method::Fourier};
    }
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be > 0");
    return rtfs_price_by_quadrature(c, ConstantHazard{lambda}, [&](double u) {
        return heston_fs_price(c.t, u, c.T, 1.0, p.sigma0, p, mode, cfg, c.alpha);
    });
}

}  // namespace rtfs
