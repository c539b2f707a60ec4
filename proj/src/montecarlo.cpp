#include "rtfs/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>
#include <variant>

#include "rtfs/closed_form_bs.hpp"
#include "rtfs/fourier.hpp"

namespace rtfs {

namespace {

constexpr std::uint32_t kStreamRtfs = 1;
constexpr std::uint32_t kStreamFs = 2;
constexpr std::uint32_t kStreamCallPut = 3;
constexpr std::uint32_t kStreamAffineS = 4;
constexpr std::uint32_t kStreamAffineZ = 5;
constexpr std::uint32_t kStreamHitting = 6;

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Welford accumulators, merged with Chan's formula.
struct Moments {
    double n = 0.0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        n += 1.0;
        const double d = x - mean;
        mean += d / n;
        m2 += d * (x - mean);
    }
    void merge(const Moments& o) {
        if (o.n == 0.0) return;
        const double total = n + o.n;
        const double d = o.mean - mean;
        mean += d * o.n / total;
        m2 += o.m2 + d * d * n * o.n / total;
        n = total;
    }
};

unsigned worker_count(const McConfig& cfg, std::int64_t n_batches) {
    unsigned w = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::min<std::int64_t>(w, n_batches));
}

double check_lambda(double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be > 0");
    return lambda;
}

// Exact log-increment over dt for the Levy models; Heston is handled separately.
struct LevyStep {
    const ModelParams& p;

    double operator()(Philox& rng, double sign, double dt) const {
        std::normal_distribution<double> normal;
        return std::visit(
            Overloaded{
                [&](const BlackScholesParams& m) {
                    return (m.r - 0.5 * m.sigma * m.sigma) * dt + m.sigma * std::sqrt(dt) * sign * normal(rng);
                },
                [&](const MertonParams& m) {
                    const double kappa = m.jump_mean();
                    double x = (m.r - m.nu * kappa - 0.5 * m.sigma * m.sigma) * dt +
                               m.sigma * std::sqrt(dt) * sign * normal(rng);
                    if (m.nu > 0.0) {
                        const int n = std::poisson_distribution<int>(m.nu * dt)(rng);
                        if (n > 0) x += n * m.mu + std::sqrt(static_cast<double>(n)) * m.delta * normal(rng);
                    }
                    return x;
                },
                [&](const VarianceGammaParams& m) {
                    const double g = std::gamma_distribution<double>(dt / m.mu, m.mu)(rng);
                    return (m.r + m.omega()) * dt + m.b * g + m.c * std::sqrt(g) * sign * normal(rng);
                },
                [&](const HestonParams&) -> double { throw StateError("LevyStep: Heston has no exact step"); },
            },
            p);
    }
};

void check_model_for_mc(const ModelParams& p) { validate(p); }

// Deterministic unit forward-start call (T - u = dt, strike alpha) for the affine estimator.
double unit_call(const ModelParams& p, double dt, double alpha) {
    if (dt <= 0.0) return std::max(1.0 - alpha, 0.0);
    return std::visit(Overloaded{
                          [&](const BlackScholesParams& m) { return bs_unit_fs_price(dt, alpha, m.sigma, m.r); },
                          [&](const MertonParams& m) { return merton_call(0.0, 1.0, alpha, m, dt); },
                          [&](const VarianceGammaParams& m) {
                              return vanilla_call_fourier(0.0, 1.0, alpha, dt, vg_char_fn(m), m.r);
                          },
                          [&](const HestonParams&) -> double {
                              throw DomainError(
                                  "affine hazard: Heston forward-start calls depend on the variance path; "
                                  "not supported");
                          },
                      },
                      p);
}

}  // namespace

// ---------------------------------------------------------------------------
// Philox4x32-10
// ---------------------------------------------------------------------------

Philox::Philox(std::uint64_t seed, std::uint32_t stream, std::uint32_t batch)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}, ctr_{0, 0, batch, stream} {}

std::array<std::uint32_t, 4> Philox::block(std::array<std::uint32_t, 4> c, std::array<std::uint32_t, 2> k) {
    constexpr std::uint64_t kM0 = 0xD2511F53u;
    constexpr std::uint64_t kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u;
    constexpr std::uint32_t kW1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = kM0 * c[0];
        const std::uint64_t p1 = kM1 * c[2];
        c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
        k[0] += kW0;
        k[1] += kW1;
    }
    return c;
}

void Philox::refill() {
    out_ = block(ctr_, key_);
    if (++ctr_[0] == 0) ++ctr_[1];
    used_ = 0;
}

Philox::result_type Philox::operator()() {
    if (used_ >= 4) refill();
    const std::uint64_t lo = out_[used_];
    const std::uint64_t hi = out_[used_ + 1];
    used_ += 2;
    return lo | (hi << 32);
}

double uniform_open_closed(Philox& rng) { return 1.0 - std::generate_canonical<double, 53>(rng); }

double McConfig::time_step() const { return step ? *step : 1.0 / std::sqrt(static_cast<double>(n_paths)); }

void McConfig::validate() const {
    if (n_paths < 100) throw ConfigError("mc: n_paths must be >= 100");
    if (step && !(*step > 0.0)) throw ConfigError("mc: step must be > 0");
    if (batch_size < 1) throw ConfigError("mc: batch_size must be >= 1");
    if (antithetic && n_paths % 2 != 0) throw ConfigError("mc: antithetic sampling needs an even n_paths");
}

double tau_from_uniform(double lambda, double u) { return -std::log(u) / lambda; }

double sample_tau_exponential(double lambda, Philox& rng) {
    return tau_from_uniform(check_lambda(lambda), uniform_open_closed(rng));
}

// ---------------------------------------------------------------------------
// Engine
// ---------------------------------------------------------------------------

std::vector<PriceEstimate> run_monte_carlo(const McConfig& cfg, std::uint32_t stream, int n_outputs,
                                           const PathSampler& sampler) {
    cfg.validate();
    if (n_outputs < 1) throw ConfigError("mc: need at least one output");
    // antithetic: a sample is the average over a +/- pair
    const std::int64_t n_samples = cfg.antithetic ? cfg.n_paths / 2 : cfg.n_paths;
    const std::int64_t per_batch = cfg.antithetic ? std::max<std::int64_t>(1, cfg.batch_size / 2) : cfg.batch_size;
    const std::int64_t n_batches = (n_samples + per_batch - 1) / per_batch;
    std::vector<std::vector<Moments>> partial(n_batches, std::vector<Moments>(n_outputs));

    auto run_batch = [&](std::int64_t b) {
        Philox rng(cfg.seed, stream, static_cast<std::uint32_t>(b));
        std::vector<double> a(n_outputs), m(n_outputs);
        const std::int64_t begin = b * per_batch;
        const std::int64_t end = std::min(n_samples, begin + per_batch);
        for (std::int64_t i = begin; i < end; ++i) {
            if (cfg.antithetic) {
                Philox copy = rng;
                sampler(rng, 1.0, a.data());
                sampler(copy, -1.0, m.data());
                for (int k = 0; k < n_outputs; ++k) partial[b][k].add(0.5 * (a[k] + m[k]));
            } else {
                sampler(rng, 1.0, a.data());
                for (int k = 0; k < n_outputs; ++k) partial[b][k].add(a[k]);
            }
        }
    };

    const unsigned workers = worker_count(cfg, n_batches);
    if (workers <= 1) {
        for (std::int64_t b = 0; b < n_batches; ++b) run_batch(b);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::int64_t b = w; b < n_batches; b += workers) run_batch(b);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    std::vector<PriceEstimate> out(n_outputs);
    for (int k = 0; k < n_outputs; ++k) {
        Moments total;
        for (std::int64_t b = 0; b < n_batches; ++b) total.merge(partial[b][k]);
        const double var = total.n > 1.0 ? total.m2 / (total.n - 1.0) : 0.0;
        out[k] = {total.mean, std::sqrt(var / total.n), Method::MonteCarlo};
    }
    return out;
}

// ---------------------------------------------------------------------------
// Path simulation
// ---------------------------------------------------------------------------

void simulate_observations(const ModelParams& p, Philox& rng, double sign, double S_t, double t,
                           const std::vector<double>& times, double step, std::vector<double>& S_out) {
    S_out.resize(times.size());
    double x = std::log(S_t);
    double now = t;
    if (const auto* h = std::get_if<HestonParams>(&p)) {
        std::normal_distribution<double> normal;
        const double rho_bar = std::sqrt(1.0 - h->rho * h->rho);
        double v = h->sigma0;
        for (std::size_t k = 0; k < times.size(); ++k) {
            const double len = times[k] - now;
            if (len > 0.0) {
                const int m = static_cast<int>(std::ceil(len / step - 1e-9));
                const double dt = len / m;
                const double sq = std::sqrt(dt);
                for (int j = 0; j < m; ++j) {
                    const double z1 = sign * normal(rng);
                    const double z2 = sign * normal(rng);
                    const double vp = std::max(v, 0.0);
                    const double sv = std::sqrt(vp);
                    x += (h->r - 0.5 * vp) * dt + sv * sq * (h->rho * z1 + rho_bar * z2);
                    v += h->kappa * (h->theta - vp) * dt + h->vol_of_vol * sv * sq * z1;
                }
                now = times[k];
            }
            S_out[k] = std::exp(x);
        }
        return;
    }
    const LevyStep levy{p};
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double len = times[k] - now;
        if (len > 0.0) {
            x += levy(rng, sign, len);
            now = times[k];
        }
        S_out[k] = std::exp(x);
    }
}

// ---------------------------------------------------------------------------
// RTFS / FS estimators
// ---------------------------------------------------------------------------

std::vector<PriceEstimate> mc_rtfs_prices(const RTFSContract& c, const ModelParams& p,
                                          const std::vector<double>& lambdas, const McConfig& cfg, OptionSide side) {
    c.validate();
    check_model_for_mc(p);
    cfg.validate();
    if (lambdas.empty()) throw ConfigError("mc: no intensities given");
    const double df = discount(risk_free_rate(p), c.t, c.T);
    const double step = cfg.time_step();
    const int n = static_cast<int>(lambdas.size());
    auto payoff = [&](double s_T, double s_fix) {
        const double v = side == OptionSide::Call ? s_T - c.alpha * s_fix : c.alpha * s_fix - s_T;
        return df * std::max(v, 0.0);
    };

    if (c.realized()) {
        const double s_tau = c.realization().spot_at_tau;
        const auto est = run_monte_carlo(cfg, kStreamRtfs, 1, [&](Philox& rng, double sign, double* out) {
            thread_local std::vector<double> s;
            simulate_observations(p, rng, sign, c.spot, c.t, {c.T}, step, s);
            out[0] = payoff(s[0], s_tau);
        });
        return std::vector<PriceEstimate>(n, est[0]);
    }

    for (double l : lambdas) check_lambda(l);
    // larger intensity -> earlier time: visit lambdas in decreasing order
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return lambdas[a] > lambdas[b]; });

    return run_monte_carlo(cfg, kStreamRtfs, n, [&](Philox& rng, double sign, double* out) {
        thread_local std::vector<double> times, s;
        const double e = -std::log(uniform_open_closed(rng));
        times.resize(n + 1);
        for (int k = 0; k < n; ++k) times[k] = std::min(c.T, c.t + e / lambdas[order[k]]);
        times[n] = c.T;
        simulate_observations(p, rng, sign, c.spot, c.t, times, step, s);
        for (int k = 0; k < n; ++k) out[order[k]] = payoff(s[n], s[k]);
    });
}

PriceEstimate mc_rtfs_price(const RTFSContract& c, const ModelParams& p, double lambda, const McConfig& cfg,
                            OptionSide side) {
    return mc_rtfs_prices(c, p, {lambda}, cfg, side)[0];
}

CallPutEstimate mc_rtfs_call_put(const RTFSContract& c, const ModelParams& p, double lambda, const McConfig& cfg) {
    c.validate();
    check_model_for_mc(p);
    if (c.realized()) throw StateError("mc_rtfs_call_put: contract is realized");
    check_lambda(lambda);
    const double df = discount(risk_free_rate(p), c.t, c.T);
    const double step = cfg.time_step();
    const auto est = run_monte_carlo(cfg, kStreamCallPut, 3, [&](Philox& rng, double sign, double* out) {
        thread_local std::vector<double> s;
        const double tau = c.t + sample_tau_exponential(lambda, rng);
        simulate_observations(p, rng, sign, c.spot, c.t, {std::min(tau, c.T), c.T}, step, s);
        const double v = s[1] - c.alpha * s[0];
        out[0] = df * std::max(v, 0.0);
        out[1] = df * std::max(-v, 0.0);
        out[2] = df * v;
    });
    return {est[0], est[1], est[2]};
}

PriceEstimate mc_fs_price(const RTFSContract& c, double u, const ModelParams& p, const McConfig& cfg) {
    c.validate();
    check_model_for_mc(p);
    if (!(u >= c.t && u <= c.T)) throw DomainError("mc_fs_price: u must lie in [t, T]");
    const double df = discount(risk_free_rate(p), c.t, c.T);
    const double step = cfg.time_step();
    return run_monte_carlo(cfg, kStreamFs, 1, [&](Philox& rng, double sign, double* out) {
        thread_local std::vector<double> s;
        simulate_observations(p, rng, sign, c.spot, c.t, {u, c.T}, step, s);
        out[0] = df * std::max(s[1] - c.alpha * s[0], 0.0);
    })[0];
}

// ---------------------------------------------------------------------------
// Affine intensity
// ---------------------------------------------------------------------------

void AffineHazardSpec::validate() const {
    if (!a_fn || !b_fn) throw ConfigError("affine hazard: coefficient functions are required");
    if (n_grid < 2) throw ConfigError("affine hazard: grid needs at least 2 points");
    if (const auto* z = std::get_if<CirZ>(&z_model)) {
        if (!(z->z0 > 0.0 && z->kappa > 0.0 && z->theta > 0.0 && z->sigma > 0.0)) {
            throw DomainError("affine hazard: CIR parameters must be > 0");
        }
    } else if (!(std::get<ConstantZ>(z_model).value >= 0.0)) {
        throw DomainError("affine hazard: Z must be nonnegative");
    }
}

PriceEstimate mc_affine_hazard_rtfs_price(const RTFSContract& c, const ModelParams& p, const AffineHazardSpec& h,
                                          const McConfig& cfg) {
    c.validate();
    check_model_for_mc(p);
    h.validate();
    cfg.validate();
    if (c.realized()) throw StateError("affine hazard: contract is realized; price the vanilla directly");
    if (std::holds_alternative<HestonParams>(p)) {
        throw DomainError("affine hazard: Heston forward-start calls depend on the variance path; not supported");
    }
    const int N = h.n_grid - 1;
    const double r = risk_free_rate(p);
    std::vector<double> grid(N + 1), a(N + 1), b(N + 1), call(N + 1), disc(N + 1);
    for (int k = 0; k <= N; ++k) {
        grid[k] = c.t + (c.T - c.t) * k / N;
        a[k] = h.a_fn(grid[k]);
        b[k] = h.b_fn(grid[k]);
        if (!(a[k] >= 0.0) || !(b[k] >= 0.0)) throw DomainError("affine hazard: coefficients must be nonnegative");
        call[k] = unit_call(p, c.T - grid[k], c.alpha);
        disc[k] = std::exp(-r * (grid[k] - c.t));
    }
    const std::vector<double> obs(grid.begin() + 1, grid.end());

    // S family: B S_u^2 e^{-int a S}, B S_u e^{-int a S}
    const auto s_est = [&](const McConfig& sub, std::uint32_t stream_offset) {
        return run_monte_carlo(sub, kStreamAffineS + 16 * stream_offset, 2 * (N + 1),
                               [&](Philox& rng, double sign, double* out) {
                                   thread_local std::vector<double> s;
                                   simulate_observations(p, rng, sign, c.spot, c.t, obs, cfg.time_step(), s);
                                   double integral = 0.0, prev = a[0] * c.spot;
                                   for (int k = 0; k <= N; ++k) {
                                       const double sk = k == 0 ? c.spot : s[k - 1];
                                       if (k > 0) {
                                           const double cur = a[k] * sk;
                                           integral += 0.5 * (prev + cur) * (grid[k] - grid[k - 1]);
                                           prev = cur;
                                       }
                                       const double w = disc[k] * std::exp(-integral);
                                       out[2 * k] = w * sk * sk;
                                       out[2 * k + 1] = w * sk;
                                   }
                               });
    };

    // Z family: e^{-int b Z}, Z_u e^{-int b Z}
    const auto z_est = [&](const McConfig& sub, std::uint32_t stream_offset) {
        return run_monte_carlo(sub, kStreamAffineZ + 16 * stream_offset, 2 * (N + 1),
                               [&](Philox& rng, double, double* out) {
                                   const CirZ* cir = std::get_if<CirZ>(&h.z_model);
                                   double z = cir ? cir->z0 : std::get<ConstantZ>(h.z_model).value;
                                   double integral = 0.0, prev = b[0] * z;
                                   for (int k = 0; k <= N; ++k) {
                                       if (k > 0) {
                                           if (cir) {
                                               // exact CIR transition: scaled noncentral chi-square as a Poisson mixture
                                               const double dt = grid[k] - grid[k - 1];
                                               const double e = std::exp(-cir->kappa * dt);
                                               const double scale = cir->sigma * cir->sigma * (1.0 - e) / (4.0 * cir->kappa);
                                               const double df = 4.0 * cir->kappa * cir->theta / (cir->sigma * cir->sigma);
                                               const double nc = z * e / scale;
                                               const int j = std::poisson_distribution<int>(0.5 * nc)(rng);
                                               z = scale * 2.0 * std::gamma_distribution<double>(0.5 * df + j, 1.0)(rng);
                                           }
                                           const double cur = b[k] * z;
                                           integral += 0.5 * (prev + cur) * (grid[k] - grid[k - 1]);
                                           prev = cur;
                                       }
                                       const double w = std::exp(-integral);
                                       out[2 * k] = w;
                                       out[2 * k + 1] = w * z;
                                   }
                               });
    };

    auto combine = [&](const std::vector<PriceEstimate>& s, const std::vector<PriceEstimate>& z) {
        std::vector<double> f(N + 1);
        for (int k = 0; k <= N; ++k) {
            f[k] = call[k] * (a[k] * s[2 * k].value * z[2 * k].value + b[k] * s[2 * k + 1].value * z[2 * k + 1].value);
        }
        double integral = 0.0;
        for (int k = 1; k <= N; ++k) integral += 0.5 * (f[k - 1] + f[k]) * (grid[k] - grid[k - 1]);
        return integral + (1.0 - c.alpha) * s[2 * N + 1].value * z[2 * N].value;
    };

    // batch means for the error of this nonlinear combination
    constexpr int kBatches = 20;
    McConfig sub = cfg;
    sub.n_paths = std::max<std::int64_t>(100, cfg.n_paths / kBatches);
    if (sub.antithetic && sub.n_paths % 2) ++sub.n_paths;
    std::vector<double> values(kBatches);
    for (int j = 0; j < kBatches; ++j) {
        values[j] = combine(s_est(sub, j), z_est(sub, j));
    }
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / kBatches;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= (kBatches - 1);
    return {mean, std::sqrt(var / kBatches), Method::MonteCarlo};
}

// ---------------------------------------------------------------------------
// Hitting time
// ---------------------------------------------------------------------------

PriceEstimate mc_hitting_rtfs_price(const RTFSContract& c, double H, const BlackScholesParams& p,
                                    const McConfig& cfg, int n_steps) {
    c.validate();
    validate(p);
    if (!(H > 0.0)) throw DomainError("barrier H must be > 0");
    if (c.spot >= H) throw StateError("barrier: S_t >= H means the barrier has already been hit");
    if (n_steps < 1) throw ConfigError("hitting: n_steps must be >= 1");
    const double dt = (c.T - c.t) / n_steps;
    const double drift = (p.r - 0.5 * p.sigma * p.sigma) * dt;
    const double vol = p.sigma * std::sqrt(dt);
    const double h = std::log(H);
    const double df = std::exp(-p.r * (c.T - c.t));
    return run_monte_carlo(cfg, kStreamHitting, 1, [&](Philox& rng, double sign, double* out) {
        std::normal_distribution<double> normal;
        double x = std::log(c.spot);
        for (int k = 0; k < n_steps; ++k) {
            const double next = x + drift + vol * sign * normal(rng);
            // bridge crossing probability between two points below the barrier
            const double u = uniform_open_closed(rng);
            const bool hit = next >= h || u <= std::exp(-2.0 * (h - x) * (h - next) / (vol * vol));
            x = next;
            if (hit) {
                const double rest = (n_steps - k - 1) * dt;
                if (rest > 0.0) {
                    x += (p.r - 0.5 * p.sigma * p.sigma) * rest + p.sigma * std::sqrt(rest) * sign * normal(rng);
                }
                out[0] = df * std::max(std::exp(x) - H, 0.0);
                return;
            }
        }
        out[0] = 0.0;
    })[0];
}

}  // namespace rtfs
