#pragma once

// Unilateral credit value adjustment for forward-start and RTFS calls, with the
// counterparty default time independent of the asset and of tau.

#include "rtfs/core.hpp"
#include "rtfs/montecarlo.hpp"

namespace rtfs {

struct CvaInputs {
    double recovery = 0.4;      ///< R in [0, 1]
    double default_prob = 0.0;  ///< Q(t < tau_C <= T) in [0, 1]
    double clean_price = 0.0;   ///< >= 0

    void validate() const;
};

/// Q(t < tau_C <= T) = 1 - e^{-int_t^T lambda_C}.
double default_probability(const HazardModel& h_C, double t, double T);

CvaInputs cva_inputs(double recovery, const HazardModel& h_C, double t, double T, double clean_price);

/// (1 - R) Q(t < tau_C <= T) c for a forward-start call. A continuous default law
/// makes the strict and non-strict upper inequality equivalent.
double unilateral_cva_fs(const CvaInputs& in);

/// Same factorization for an RTFS call.
double unilateral_cva_rtfs(const CvaInputs& in);

struct CoincidentCva {
    double cva = 0.0;
    double defaultable_price = 0.0;
};

/// tau_C = tau almost surely: CVA = (1 - R) c and the defaultable price is R c.
CoincidentCva unilateral_cva_coincident(double recovery, double clean_price);

/// Direct simulation of (1 - R) E[1{t < tau_C <= T} e^{-r(T-t)} (S_T - alpha S_{tau ^ T})^+]
/// with tau ~ Exp(lambda) and tau_C ~ Exp(lambda_C) independent.
PriceEstimate mc_unilateral_cva_rtfs(const RTFSContract& c, const ModelParams& p, double lambda, double lambda_C,
                                     double recovery, const McConfig& cfg);

}  // namespace rtfs
