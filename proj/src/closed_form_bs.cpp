#include "rtfs/closed_form_bs.hpp"

#include <gsl/gsl_sf_dawson.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rtfs/math.hpp"

namespace rtfs {

using math::norm_cdf;

namespace {

void check_a1a2_inputs(double t, double T, double lambda, double sigma, double r) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be > 0");
    if (!(sigma > 0.0)) throw DomainError("sigma must be > 0");
    if (!(T > t)) throw DomainError("T must be > t");
    if (!std::isfinite(r)) throw DomainError("r must be finite");
}

// e^{-lambda dt} * (1/sqrt(2 pi)) int_0^{sqrt(dt)} e^{-eps y^2 / 2} dy, eps = c1^2 - 2 lambda.
// Carrying the e^{-lambda dt} factor keeps the eps < 0 branch finite for large lambda.
double scaled_kernel(double eps, double c1, double lambda, double dt, BSCase branch) {
    switch (branch) {
        case BSCase::C1SqEq2Lam:
            return std::exp(-lambda * dt) * std::sqrt(dt) * math::kInvSqrt2Pi;
        case BSCase::C1SqGt2Lam:
        case BSCase::LamEqR:
            if (eps > 0.0) {
                const double se = std::sqrt(eps);
                return std::exp(-lambda * dt) * math::norm_cdf_minus_half(se * std::sqrt(dt)) / se;
            }
            [[fallthrough]];
        case BSCase::C1SqLt2Lam: {
            if (eps == 0.0) return std::exp(-lambda * dt) * std::sqrt(dt) * math::kInvSqrt2Pi;
            // int_0^b e^{z^2/2} dz = sqrt(2) e^{b^2/2} D(b / sqrt(2)), b^2 = |eps| dt
            const double ae = std::abs(eps);
            const double b = std::sqrt(ae * dt);
            return math::kInvSqrt2Pi * std::numbers::sqrt2 * std::exp(-0.5 * c1 * c1 * dt) *
                   gsl_sf_dawson(b / std::numbers::sqrt2) / std::sqrt(ae);
        }
    }
    return 0.0;
}

// phi(x)/x - (N(x) - 1/2)/x^2, odd in x.
double lam_eq_r_g(double x) {
    if (std::abs(x) < 1e-2) {
        const double x2 = x * x;
        return math::kInvSqrt2Pi * x * (-1.0 / 3.0 + x2 * (1.0 / 10.0 - x2 / 42.0));
    }
    return math::norm_pdf(x) / x - math::norm_cdf_minus_half(x) / (x * x);
}

// lambda e^{-lambda dt} int_0^dt e^{(lambda - r) s} N(c2 sqrt s) ds by Gauss-Legendre in y = sqrt(s);
// used where lambda - r is too small for the 1/(lambda - r) form to be accurate.
double a2_near_lambda_eq_r(double lambda, double r, double c2, double dt) {
    static const math::GaussLegendreRule rule = math::gauss_legendre(32);
    const double delta = lambda - r;
    const double v = math::composite_gauss_legendre(
        [&](double y) { return norm_cdf(c2 * y) * std::exp(delta * y * y - lambda * dt) * 2.0 * y; }, 0.0,
        std::sqrt(dt), 2, rule);
    return lambda * v;
}

}  // namespace

double bs_call(double t, double S, double K, double sigma, double r, double T) {
    if (!(T > t)) throw DomainError("bs_call: T must be > t");
    if (!(S > 0.0) || !(K > 0.0)) throw DomainError("bs_call: S and K must be > 0");
    if (!(sigma > 0.0)) throw DomainError("bs_call: sigma must be > 0");
    const double dt = T - t;
    const double sd = sigma * std::sqrt(dt);
    const double d1 = (std::log(S / K) + (r + 0.5 * sigma * sigma) * dt) / sd;
    return S * norm_cdf(d1) - std::exp(-r * dt) * K * norm_cdf(d1 - sd);
}

double bs_unit_fs_price(double dt, double alpha, double sigma, double r) {
    if (dt <= 0.0) return std::max(1.0 - alpha, 0.0);
    return bs_call(0.0, 1.0, alpha, sigma, r, dt);
}

std::string to_string(BSCase c) {
    switch (c) {
        case BSCase::C1SqGt2Lam: return "c1^2>2lambda";
        case BSCase::C1SqEq2Lam: return "c1^2=2lambda";
        case BSCase::C1SqLt2Lam: return "c1^2<2lambda";
        case BSCase::LamEqR: return "lambda=r";
    }
    return "unknown";
}

BSCase classify_bs_case(double lambda, double sigma, double r) {
    const double c1 = r / sigma + 0.5 * sigma;
    const double eps = c1 * c1 - 2.0 * lambda;
    if (std::abs(lambda - r) <= 1e-12) return BSCase::LamEqR;
    if (std::abs(eps) <= 1e-9 * std::max(1.0, c1 * c1)) return BSCase::C1SqEq2Lam;
    return eps > 0.0 ? BSCase::C1SqGt2Lam : BSCase::C1SqLt2Lam;
}

A1A2 bs_a1_a2_branch(double t, double T, double lambda, double sigma, double r, BSCase branch) {
    check_a1a2_inputs(t, T, lambda, sigma, r);
    const double dt = T - t;
    const double sq = std::sqrt(dt);
    const double c1 = r / sigma + 0.5 * sigma;
    const double c2 = c1 - sigma;
    const double eps = c1 * c1 - 2.0 * lambda;
    const double e_lam = std::exp(-lambda * dt);
    const double E = scaled_kernel(eps, c1, lambda, dt, branch);

    A1A2 out;
    out.branch = branch;
    out.a1 = norm_cdf(c1 * sq) - e_lam * 0.5 - c1 * E;
    if (branch == BSCase::LamEqR) {
        // int_0^dt N(c2 sqrt s) ds = dt (N(x) + g(x)), x = c2 sqrt(dt)
        const double x = c2 * sq;
        out.a2 = lambda * e_lam * dt * (norm_cdf(x) + lam_eq_r_g(x));
    } else if (std::abs(lambda - r) < 1e-5) {
        out.a2 = a2_near_lambda_eq_r(lambda, r, c2, dt);
    } else {
        out.a2 = lambda / (lambda - r) * (std::exp(-r * dt) * norm_cdf(c2 * sq) - e_lam * 0.5 - c2 * E);
    }
    return out;
}

A1A2 bs_a1_a2(double t, double T, double lambda, double sigma, double r) {
    check_a1a2_inputs(t, T, lambda, sigma, r);
    return bs_a1_a2_branch(t, T, lambda, sigma, r, classify_bs_case(lambda, sigma, r));
}

PriceEstimate bs_rtfs_price(const RTFSContract& c, double lambda, double sigma, double r) {
    c.validate();
    validate(BlackScholesParams{sigma, r});
    if (c.realized()) {
        const double K = c.alpha * c.realization().spot_at_tau;
        return {bs_call(c.t, c.spot, K, sigma, r, c.T), std::nullopt, Method::ClosedForm};
    }
    if (!(lambda > 0.0)) throw DomainError("lambda must be > 0");
    if (c.alpha == 1.0) {
        const A1A2 a = bs_a1_a2(c.t, c.T, lambda, sigma, r);
        return {c.spot * (a.a1 - a.a2), std::nullopt, Method::ClosedForm};
    }
    // the closed form fixes the strike at S_tau; other alphas go through the time quadrature
    const double T = c.T, alpha = c.alpha;
    return rtfs_price_by_quadrature(c, ConstantHazard{lambda},
                                    [&](double u) { return bs_unit_fs_price(T - u, alpha, sigma, r); });
}

double merton_call(double t, double S, double K, const MertonParams& p, double T, double tol, int max_terms) {
    validate(p);
    if (!(T > t)) throw DomainError("merton_call: T must be > t");
    if (!(S > 0.0) || !(K > 0.0)) throw DomainError("merton_call: S and K must be > 0");
    const double dt = T - t;
    const double kappa = p.jump_mean();
    const double nu_bar = p.nu * (1.0 + kappa);
    const double mean = nu_bar * dt;
    if (mean == 0.0) return bs_call(t, S, K, p.sigma, p.r, T);

    double log_weight = -mean;  // log of e^{-mean} mean^n / n!
    double sum = 0.0;
    for (int n = 0; n < max_terms; ++n) {
        if (n > 0) log_weight += std::log(mean) - std::log(static_cast<double>(n));
        const double sig_n = std::sqrt(p.sigma * p.sigma + n * p.delta * p.delta / dt);
        const double r_n = p.r - p.nu * kappa + n * std::log1p(kappa) / dt;
        const double term = std::exp(log_weight) * bs_call(0.0, S, K, sig_n, r_n, dt);
        sum += term;
        if (n > mean && term <= tol * sum) return sum;
    }
    throw NumericalError("merton_call: series did not converge within " + std::to_string(max_terms) + " terms");
}

PriceEstimate merton_rtfs_price(const RTFSContract& c, const MertonParams& p, double lambda, double tol) {
    c.validate();
    validate(p);
    if (c.realized()) {
        const double K = c.alpha * c.realization().spot_at_tau;
        return {merton_call(c.t, c.spot, K, p, c.T, tol), std::nullopt, Method::ClosedForm};
    }
    if (!(lambda > 0.0)) throw DomainError("lambda must be > 0");
    const double T = c.T, alpha = c.alpha;
    return rtfs_price_by_quadrature(c, ConstantHazard{lambda}, [&](double u) {
        if (T - u <= 0.0) return std::max(1.0 - alpha, 0.0);
        return merton_call(u, 1.0, alpha, p, T, tol);
    });
}

double up_and_in_call(double S, double K, double H, double sigma, double r, double dt) {
    if (!(S > 0.0) || !(K > 0.0) || !(H > 0.0)) throw DomainError("up_and_in_call: S, K, H must be > 0");
    if (!(sigma > 0.0)) throw DomainError("up_and_in_call: sigma must be > 0");
    if (!(dt > 0.0)) throw DomainError("up_and_in_call: dt must be > 0");
    if (S >= H) return bs_call(0.0, S, K, sigma, r, dt);
    if (K >= H) return bs_call(0.0, S, K, sigma, r, dt);  // finishing above K requires a hit

    const double sd = sigma * std::sqrt(dt);
    const double mu = (r - 0.5 * sigma * sigma) / (sigma * sigma);
    const double df = std::exp(-r * dt);
    const double hs = H / S;
    const double x2 = std::log(S / H) / sd + (1.0 + mu) * sd;
    const double y1 = std::log(H * H / (S * K)) / sd + (1.0 + mu) * sd;
    const double y2 = std::log(H / S) / sd + (1.0 + mu) * sd;
    const double p1 = std::pow(hs, 2.0 * (mu + 1.0));
    const double p2 = std::pow(hs, 2.0 * mu);
    // eta = -1 (up barrier)
    const double B = S * norm_cdf(x2) - K * df * norm_cdf(x2 - sd);
    const double C = S * p1 * norm_cdf(-y1) - K * df * p2 * norm_cdf(-y1 + sd);
    const double D = S * p1 * norm_cdf(-y2) - K * df * p2 * norm_cdf(-y2 + sd);
    return B - C + D;
}

double bs_hitting_rtfs_price(double S_t, double H, double sigma, double r, double t, double T, HitState state) {
    if (!(H > 0.0)) throw DomainError("barrier H must be > 0");
    if (!(T > t)) throw DomainError("T must be > t");
    if (state == HitState::AlreadyHit) return bs_call(t, S_t, H, sigma, r, T);
    if (S_t >= H) throw StateError("barrier: S_t >= H means the barrier has already been hit");
    // on the hit event S_tau = H, so the claim is an up-and-in call struck at the barrier
    return up_and_in_call(S_t, H, H, sigma, r, T - t);
}

}  // namespace rtfs
