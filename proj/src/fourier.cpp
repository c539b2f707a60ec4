#include "rtfs/fourier.hpp"

#include <cmath>
#include <numbers>

namespace rtfs {

namespace {

constexpr cplx kI{0.0, 1.0};
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// int over the whole contour of a real integrand h(x), evaluated in pieces so the
// tails can be mapped to a finite interval.
template <class H>
double contour_integral(H&& h, const QuadratureConfig& cfg, double tol, bool symmetric) {
    QuadratureConfig c = cfg;
    c.tol = tol;
    if (symmetric) {
        double v = gauss_lobatto(h, 0.0, cfg.z_max, c);
        if (cfg.tails) v += gauss_lobatto_upper_tail(h, cfg.z_max, c);
        return 2.0 * v;
    }
    c.tol = 0.5 * tol;
    double v = gauss_lobatto(h, -cfg.z_max, cfg.z_max, c);
    if (cfg.tails) {
        c.tol = 0.25 * tol;
        v += gauss_lobatto_upper_tail(h, cfg.z_max, c);
        v += gauss_lobatto_upper_tail([&](double x) { return h(-x); }, cfg.z_max, c);
    }
    return v;
}

// (1 - e^{-w dt}) / w with the removable singularity at w = 0.
cplx time_kernel(cplx w, double dt) {
    const cplx x = w * dt;
    if (std::abs(x) < 1e-4) {
        return dt * (1.0 + x * (-1.0 / 2 + x * (1.0 / 6 + x * (-1.0 / 24 + x * (1.0 / 120 - x / 720.0)))));
    }
    return (1.0 - std::exp(-x)) / w;
}

}  // namespace

void QuadratureConfig::validate() const {
    if (!(nu > 1.0)) throw ConfigError("quadrature: contour height nu must be > 1");
    if (!(z_max > 0.0) || !std::isfinite(z_max)) throw ConfigError("quadrature: z_max must be finite and > 0");
    if (!(tol > 0.0)) throw ConfigError("quadrature: tol must be > 0");
    if (max_depth < 1) throw ConfigError("quadrature: max_depth must be >= 1");
    if (initial_panels < 1) throw ConfigError("quadrature: initial_panels must be >= 1");
    if (max_evals < 100) throw ConfigError("quadrature: max_evals must be >= 100");
}

CharFn gaussian_char_fn(double sigma, double r) {
    if (!(sigma > 0.0)) throw DomainError("sigma must be > 0");
    return {[sigma, r](cplx z, double dt) {
                const double s2 = sigma * sigma;
                return std::exp(kI * z * (r - 0.5 * s2) * dt - 0.5 * s2 * z * z * dt);
            },
            BranchMode::PrincipalLog};
}

cplx vg_char(cplx z, double dt, const VarianceGammaParams& p) {
    const cplx arg = 1.0 - kI * p.b * p.mu * z + 0.5 * p.c * p.c * p.mu * z * z;
    if (arg == 0.0) throw NumericalError("vg_char: pole of the characteristic function");
    return std::exp(kI * z * (p.r + p.omega()) * dt - (dt / p.mu) * std::log(arg));
}

CharFn vg_char_fn(const VarianceGammaParams& p) {
    validate(p);
    return {[p](cplx z, double dt) { return vg_char(z, dt, p); }, BranchMode::PrincipalLog};
}

std::vector<cplx> rotation_count_log(const std::vector<cplx>& phi_seq) {
    std::vector<cplx> out;
    out.reserve(phi_seq.size());
    double turns = 0.0;
    double prev_arg = 0.0;
    for (std::size_t k = 0; k < phi_seq.size(); ++k) {
        const cplx v = phi_seq[k];
        if (v == 0.0) throw NumericalError("rotation_count_log: zero value has no logarithm");
        const double a = std::arg(v);
        if (k > 0) {
            double step = a - prev_arg;
            if (step > std::numbers::pi) {
                step -= kTwoPi;
                turns -= 1.0;
            } else if (step < -std::numbers::pi) {
                step += kTwoPi;
                turns += 1.0;
            }
            if (std::abs(step) >= 0.999 * std::numbers::pi) {
                throw SamplingError("rotation_count_log: argument jump of " + std::to_string(step) +
                                    " at index " + std::to_string(k) + "; sample more densely");
            }
        }
        prev_arg = a;
        out.emplace_back(std::log(std::abs(v)), a + kTwoPi * turns);
    }
    return out;
}

double vanilla_call_fourier(double u, double S, double K, double T, const CharFn& cf, double r,
                            const QuadratureConfig& cfg) {
    cfg.validate();
    if (!(T > u)) throw DomainError("vanilla_call_fourier: T must be > u");
    if (!(S > 0.0) || !(K > 0.0)) throw DomainError("vanilla_call_fourier: S and K must be > 0");
    const double dt = T - u;
    const double k = std::log(S / K);
    // e^{-i z k} = e^{nu k} e^{-i x k}; the real factor is pulled out
    const double pref = std::exp(-r * dt + cfg.nu * k) * K / kTwoPi;
    auto h = [&](double x) {
        const cplx z(x, cfg.nu);
        return (std::exp(cplx(0.0, -x * k)) * cf(-z, dt) / (kI * z - z * z)).real();
    };
    // tolerance is per unit of spot
    const double tol = cfg.tol * S / pref;
    return pref * contour_integral(h, cfg, tol, true);
}

PriceEstimate vg_rtfs_price(const RTFSContract& c, const VarianceGammaParams& p, double lambda,
                            const QuadratureConfig& cfg) {
    c.validate();
    validate(p);
    cfg.validate();
    if (c.realized()) {
        const double K = c.alpha * c.realization().spot_at_tau;
        return {vanilla_call_fourier(c.t, c.spot, K, c.T, vg_char_fn(p), p.r, cfg), std::nullopt,
                Method::Fourier};
    }
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be > 0");
    const double dt = c.T - c.t;
    const double omega = p.omega();
    const double log_alpha = std::log(c.alpha);
    const double survive = std::exp(-lambda * dt);
    // int_0^dt e^{-r s} phi(-z, s) lambda e^{-lambda (dt - s)} ds = lambda e^{-lambda dt} (1 - e^{-w dt}) / w
    auto h = [&](double x) {
        const cplx z(x, cfg.nu);
        const cplx arg = 1.0 + kI * p.b * p.mu * z + 0.5 * p.c * p.c * p.mu * z * z;
        if (arg == 0.0) throw NumericalError("vg_rtfs_price: pole of the characteristic function");
        const cplx w = p.r * (1.0 + kI * z) + kI * z * omega + std::log(arg) / p.mu - lambda;
        return (std::exp(cplx(0.0, x * log_alpha)) * time_kernel(w, dt) / (kI * z - z * z)).real();
    };
    const double pref = c.alpha * std::exp(-cfg.nu * log_alpha) * lambda * survive / kTwoPi;
    const double tol = cfg.tol / pref;
    const double body = pref * contour_integral(h, cfg, tol, false);
    return {c.spot * (body + (1.0 - c.alpha) * survive), std::nullopt, Method::Fourier};
}

}  // namespace rtfs
