#include "rtfs/cva.hpp"

#include <algorithm>
#include <cmath>

namespace rtfs {

namespace {
constexpr std::uint32_t kStreamCva = 7;

void check_recovery(double R) {
    if (!(R >= 0.0 && R <= 1.0)) throw DomainError("cva: recovery must be in [0, 1]");
}
}  // namespace

void CvaInputs::validate() const {
    check_recovery(recovery);
    if (!(default_prob >= 0.0 && default_prob <= 1.0)) throw DomainError("cva: default_prob must be in [0, 1]");
    if (!(clean_price >= 0.0) || !std::isfinite(clean_price)) throw DomainError("cva: clean_price must be >= 0");
}

double default_probability(const HazardModel& h_C, double t, double T) {
    if (!(T >= t)) throw DomainError("cva: T must be >= t");
    return -std::expm1(-integrated_hazard(h_C, t, T));
}

CvaInputs cva_inputs(double recovery, const HazardModel& h_C, double t, double T, double clean_price) {
    CvaInputs in{recovery, default_probability(h_C, t, T), clean_price};
    in.validate();
    return in;
}

double unilateral_cva_fs(const CvaInputs& in) {
    in.validate();
    return (1.0 - in.recovery) * in.default_prob * in.clean_price;
}

double unilateral_cva_rtfs(const CvaInputs& in) {
    in.validate();
    return (1.0 - in.recovery) * in.default_prob * in.clean_price;
}

CoincidentCva unilateral_cva_coincident(double recovery, double clean_price) {
    const CvaInputs in{recovery, 1.0, clean_price};
    in.validate();
    return {(1.0 - recovery) * clean_price, recovery * clean_price};
}

PriceEstimate mc_unilateral_cva_rtfs(const RTFSContract& c, const ModelParams& p, double lambda, double lambda_C,
                                     double recovery, const McConfig& cfg) {
    c.validate();
    validate(p);
    check_recovery(recovery);
    if (c.realized()) throw StateError("cva: contract is realized");
    if (!(lambda > 0.0)) throw DomainError("lambda must be > 0");
    if (!(lambda_C >= 0.0)) throw DomainError("lambda_C must be >= 0");
    const double df = discount(risk_free_rate(p), c.t, c.T);
    const double step = cfg.time_step();
    return run_monte_carlo(cfg, kStreamCva, 1, [&](Philox& rng, double sign, double* out) {
        thread_local std::vector<double> s;
        const double tau = c.t + sample_tau_exponential(lambda, rng);
        const double u_c = uniform_open_closed(rng);
        const double tau_c = lambda_C > 0.0 ? c.t + tau_from_uniform(lambda_C, u_c) : HUGE_VAL;
        simulate_observations(p, rng, sign, c.spot, c.t, {std::min(tau, c.T), c.T}, step, s);
        const bool defaulted = tau_c > c.t && tau_c <= c.T;
        out[0] = defaulted ? (1.0 - recovery) * df * std::max(s[1] - c.alpha * s[0], 0.0) : 0.0;
    })[0];
}

}  // namespace rtfs
