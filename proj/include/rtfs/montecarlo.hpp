#pragma once

// Monte Carlo pricing of RTFS calls for all models, the dependent (affine)
// intensity estimator and the barrier-hitting case.

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "rtfs/core.hpp"

namespace rtfs {

/// Philox4x32-10 counter-based generator with 64-bit output. The key is the seed;
/// the counter holds (block, batch, stream), so every (seed, stream, batch)
/// triple names an independent substream.
class Philox {
public:
    using result_type = std::uint64_t;

    Philox(std::uint64_t seed, std::uint32_t stream, std::uint32_t batch);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()();

    /// Raw block for counter (c0, c1, c2, c3) under key (k0, k1).
    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key);

private:
    void refill();

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> ctr_;
    std::array<std::uint32_t, 4> out_{};
    int used_ = 4;
};

/// Uniform on (0, 1].
double uniform_open_closed(Philox& rng);

struct McConfig {
    std::int64_t n_paths = 1'000'000;
    std::optional<double> step;  ///< path time step; defaults to 1 / sqrt(n_paths)
    std::uint64_t seed = 20240601;
    bool antithetic = false;
    std::int64_t batch_size = 8192;
    unsigned threads = 0;  ///< 0 = hardware concurrency

    double time_step() const;
    void validate() const;
};

/// -log(U) / lambda with U uniform on (0, 1].
double sample_tau_exponential(double lambda, Philox& rng);
double tau_from_uniform(double lambda, double u);

enum class OptionSide { Call, Put };

/// One path fills `out` with its samples; `sign` multiplies every Brownian normal
/// (antithetic pairs are the same draws with sign = +1 and -1).
using PathSampler = std::function<void(Philox& rng, double sign, double* out)>;

/// Means and standard errors of n_outputs path functionals. Batches run in
/// parallel and are merged in batch order, so the result depends only on the
/// config and the stream id.
std::vector<PriceEstimate> run_monte_carlo(const McConfig& cfg, std::uint32_t stream, int n_outputs,
                                           const PathSampler& sampler);

/// S at each of the ascending `times` (all >= t), starting from S_t at t.
/// Exact transitions for BS, Merton and VG; full-truncation log-Euler for Heston
/// with every observation time on the grid.
void simulate_observations(const ModelParams& p, Philox& rng, double sign, double S_t, double t,
                           const std::vector<double>& times, double step, std::vector<double>& S_out);

/// E[e^{-r(T-t)} (S_T - alpha S_{tau ^ T})^+] with tau ~ Exp(lambda) independent of S.
PriceEstimate mc_rtfs_price(const RTFSContract& c, const ModelParams& p, double lambda, const McConfig& cfg,
                            OptionSide side = OptionSide::Call);

/// Several intensities from one set of paths: tau_k = t - log(U) / lambda_k with a shared U.
std::vector<PriceEstimate> mc_rtfs_prices(const RTFSContract& c, const ModelParams& p,
                                          const std::vector<double>& lambdas, const McConfig& cfg,
                                          OptionSide side = OptionSide::Call);

struct CallPutEstimate {
    PriceEstimate call;
    PriceEstimate put;
    PriceEstimate difference;  ///< per-path call minus put
};

CallPutEstimate mc_rtfs_call_put(const RTFSContract& c, const ModelParams& p, double lambda, const McConfig& cfg);

/// Forward-start call struck at alpha S_u for a fixed u in [t, T].
PriceEstimate mc_fs_price(const RTFSContract& c, double u, const ModelParams& p, const McConfig& cfg);

/// lambda_u = a(u) S_u + b(u) Z_u, with Z independent of S.
struct AffineHazardSpec {
    std::function<double(double)> a_fn;
    std::function<double(double)> b_fn;
    ZProcess z_model = ConstantZ{};
    int n_grid = 201;  ///< grid points t = u_0 < ... < u_{N} = T

    void validate() const;
};

/// Integral formula for the affine intensity with the four inner expectations
/// estimated by simulation on the grid and trapezoidal time integration. Needs a
/// deterministic unit call, so BS, Merton and VG only. Standard error from 20
/// batch means.
PriceEstimate mc_affine_hazard_rtfs_price(const RTFSContract& c, const ModelParams& p, const AffineHazardSpec& h,
                                          const McConfig& cfg);

/// BS RTFS call with tau the first time S reaches H > S_t; Brownian-bridge crossing
/// test on each of n_steps steps.
PriceEstimate mc_hitting_rtfs_price(const RTFSContract& c, double H, const BlackScholesParams& p,
                                    const McConfig& cfg, int n_steps = 2000);

}  // namespace rtfs
