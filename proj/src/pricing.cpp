#include "rtfs/pricing.hpp"

#include <algorithm>

#include "rtfs/closed_form_bs.hpp"

namespace rtfs {

namespace {
template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;
}  // namespace

PriceEstimate rtfs_price(const RTFSContract& c, const ModelParams& p, double lambda, const PricingOptions& o) {
    return std::visit(Overloaded{
                          [&](const BlackScholesParams& m) { return bs_rtfs_price(c, lambda, m.sigma, m.r); },
                          [&](const MertonParams& m) { return merton_rtfs_price(c, m, lambda); },
                          [&](const VarianceGammaParams& m) { return vg_rtfs_price(c, m, lambda, o.quadrature); },
                          [&](const HestonParams& m) {
                              return heston_rtfs_price(c, m, lambda, o.heston_mode, o.quadrature);
                          },
                      },
                      p);
}

double fs_price(const RTFSContract& c, double u, const ModelParams& p, const PricingOptions& o) {
    c.validate();
    validate(p);
    if (!(u >= c.t && u <= c.T)) throw DomainError("fs_price: u must lie in [t, T]");
    const double dt = c.T - u;
    if (dt <= 0.0) return c.spot * (1.0 - c.alpha);
    return std::visit(Overloaded{
                          [&](const BlackScholesParams& m) {
                              return c.spot * bs_unit_fs_price(dt, c.alpha, m.sigma, m.r);
                          },
                          [&](const MertonParams& m) { return c.spot * merton_call(u, 1.0, c.alpha, m, c.T); },
                          [&](const VarianceGammaParams& m) {
                              return c.spot * vanilla_call_fourier(u, 1.0, c.alpha, c.T, vg_char_fn(m), m.r,
                                                                   o.quadrature);
                          },
                          [&](const HestonParams& m) {
                              return heston_fs_price(c.t, u, c.T, c.spot, m.sigma0, m, o.heston_mode, o.quadrature,
                                                     c.alpha);
                          },
                      },
                      p);
}

double vanilla_price(double t, double S, double K, double T, const ModelParams& p, const PricingOptions& o) {
    return std::visit(Overloaded{
                          [&](const BlackScholesParams& m) { return bs_call(t, S, K, m.sigma, m.r, T); },
                          [&](const MertonParams& m) { return merton_call(t, S, K, m, T); },
                          [&](const VarianceGammaParams& m) {
                              return vanilla_call_fourier(t, S, K, T, vg_char_fn(m), m.r, o.quadrature);
                          },
                          [&](const HestonParams& m) { return heston_call(t, S, K, m.sigma0, T, m, o.quadrature); },
                      },
                      p);
}

}  // namespace rtfs
