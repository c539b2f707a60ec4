#pragma once

// Black–Scholes and Merton RTFS pricing, plus the barrier-hitting special case.

#include "rtfs/core.hpp"

namespace rtfs {

/// Black–Scholes call at time t. Throws DomainError unless T > t, S, K, sigma > 0.
double bs_call(double t, double S, double K, double sigma, double r, double T);

/// Forward-start call per unit of spot struck at alpha * S_u, with dt = T - u.
/// Returns the payoff (1 - alpha)^+ when dt <= 0.
double bs_unit_fs_price(double dt, double alpha, double sigma, double r);

enum class BSCase { C1SqGt2Lam, C1SqEq2Lam, C1SqLt2Lam, LamEqR };

std::string to_string(BSCase c);

/// Branch for (sigma, r, lambda); lambda == r takes precedence, then c1^2 == 2 lambda.
BSCase classify_bs_case(double lambda, double sigma, double r);

struct A1A2 {
    double a1 = 0.0;
    double a2 = 0.0;
    BSCase branch = BSCase::C1SqGt2Lam;
};

/// A1 = int_t^T N(c1 sqrt(T-u)) lambda e^{-lambda(u-t)} du,
/// A2 = int_t^T e^{-r(T-u)} N(c2 sqrt(T-u)) lambda e^{-lambda(u-t)} du,
/// with c1 = r/sigma + sigma/2, c2 = c1 - sigma, in closed form.
A1A2 bs_a1_a2(double t, double T, double lambda, double sigma, double r);

/// Same pair, with the branch forced. Used to check branch continuity.
A1A2 bs_a1_a2_branch(double t, double T, double lambda, double sigma, double r, BSCase branch);

/// RTFS call in Black–Scholes with tau ~ Exp(lambda) independent of S.
PriceEstimate bs_rtfs_price(const RTFSContract& c, double lambda, double sigma, double r);

/// Merton call by the Poisson mixing series. Terms are summed until past the
/// Poisson mode a term is below tol relative to the running sum; NumericalError
/// if that does not happen within max_terms.
double merton_call(double t, double S, double K, const MertonParams& p, double T, double tol = 1e-14,
                   int max_terms = 120);

PriceEstimate merton_rtfs_price(const RTFSContract& c, const MertonParams& p, double lambda,
                                double tol = 1e-14);

/// Continuously monitored up-and-in call with barrier H (no rebate).
double up_and_in_call(double S, double K, double H, double sigma, double r, double dt);

enum class HitState { AlreadyHit, NotYetHit };

/// RTFS call when tau is the first time S reaches H (alpha = 1).
double bs_hitting_rtfs_price(double S_t, double H, double sigma, double r, double t, double T, HitState state);

}  // namespace rtfs
