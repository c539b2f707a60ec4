#pragma once

// Model-generic entry points over the per-model pricers.

#include "rtfs/core.hpp"
#include "rtfs/fourier.hpp"
#include "rtfs/heston.hpp"

namespace rtfs {

struct PricingOptions {
    HestonMode heston_mode = HestonMode::FullDensity;
    QuadratureConfig quadrature{};
};

/// Semi-analytic RTFS price with tau ~ Exp(lambda): closed form (BS), series plus
/// time quadrature (Merton), contour integral (VG), density/Fourier quadrature (Heston).
PriceEstimate rtfs_price(const RTFSContract& c, const ModelParams& p, double lambda, const PricingOptions& o = {});

/// Forward-start call struck at alpha S_u, valued at c.t with spot c.spot.
double fs_price(const RTFSContract& c, double u, const ModelParams& p, const PricingOptions& o = {});

/// Vanilla call; for Heston the start variance is p.sigma0.
double vanilla_price(double t, double S, double K, double T, const ModelParams& p, const PricingOptions& o = {});

}  // namespace rtfs
