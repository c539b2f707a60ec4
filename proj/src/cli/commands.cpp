#include "rtfs/cli/commands.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "rtfs/closed_form_bs.hpp"
#include "rtfs/cli/csv.hpp"
#include "rtfs/cva.hpp"
#include "rtfs/math.hpp"
#include "rtfs/pricing.hpp"

namespace rtfs::cli {

namespace {

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

std::string fmt4(double x) { return fmt("%.4f", x); }

PricingOptions pricing_options(const RunConfig& cfg) { return {cfg.heston_mode, cfg.quadrature}; }

// Output stream: the --output file if given, else stdout.
class Sink {
public:
    Sink(const RunConfig& cfg, std::ostream& out) : os_(&out) {
        if (cfg.output.empty()) return;
        file_.open(cfg.output, std::ios::binary);
        if (!file_) throw ConfigError("output: cannot open '" + cfg.output + "' for writing");
        os_ = &file_;
    }
    std::ostream& operator*() { return *os_; }

private:
    std::ofstream file_;
    std::ostream* os_;
};

void write_text_table(std::ostream& os, const CsvTable& t) {
    for (const auto& h : t.header) os << std::string(h.size() < 12 ? 12 - h.size() : 0, ' ') << h;
    os << '\n';
    for (const auto& row : t.rows) {
        for (const auto& cell : row) {
            std::string s = cell ? fmt4(*cell) : "-";
            os << std::string(s.size() < 12 ? 12 - s.size() : 0, ' ') << s;
        }
        os << '\n';
    }
}

void emit(const RunConfig& cfg, std::ostream& os, const CsvTable& t) {
    if (cfg.format == Format::Csv) write_csv(os, t);
    else write_text_table(os, t);
}

std::string describe(const RunConfig& cfg) {
    std::ostringstream s;
    const auto& c = cfg.contract;
    s << "model " << cfg.model;
    if (cfg.model == "heston") s << " (" << to_string(cfg.heston_mode) << ")";
    s << ", S " << c.spot << ", t " << c.t << ", T " << c.T << ", alpha " << c.alpha;
    return s.str();
}

// ---------------------------------------------------------------------------
// validate suites
// ---------------------------------------------------------------------------

struct SuiteResult {
    bool pass = false;
    std::string detail;
};

// A1, A2 by adaptive Gauss-Kronrod on the defining integrals, with u = T - s^2
// to remove the square-root behaviour at u = T.
std::pair<double, double> a1a2_by_quadrature(double t, double T, double lambda, double sigma, double r) {
    using boost::math::quadrature::gauss_kronrod;
    const double c1 = r / sigma + 0.5 * sigma;
    const double c2 = c1 - sigma;
    const double h = std::sqrt(T - t);
    auto weight = [&](double s) { return 2.0 * s * lambda * std::exp(-lambda * (T - s * s - t)); };
    auto f1 = [&](double s) { return weight(s) * math::norm_cdf(c1 * s); };
    auto f2 = [&](double s) { return weight(s) * std::exp(-r * s * s) * math::norm_cdf(c2 * s); };
    const double a1 = gauss_kronrod<double, 61>::integrate(f1, 0.0, h, 15, 1e-14);
    const double a2 = gauss_kronrod<double, 61>::integrate(f2, 0.0, h, 15, 1e-14);
    return {a1, a2};
}

SuiteResult suite_a1a2(const RunConfig& cfg) {
    std::mt19937_64 gen(cfg.mc.seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double max_err = 0.0;
    bool ordered = true;
    int counts[4] = {0, 0, 0, 0};
    for (int k = 0; k < 100; ++k) {
        const double sigma = 0.05 + 0.55 * U(gen);
        const double dt = 0.1 + 4.9 * U(gen);
        const double t = U(gen);
        double r = -0.02 + 0.12 * U(gen);
        const double c1 = r / sigma + 0.5 * sigma;
        double lambda = 0.0;
        switch (k % 4) {
            case 0: lambda = 0.5 * c1 * c1 * (0.05 + 0.9 * U(gen)); break;    // c1^2 > 2 lambda
            case 1: lambda = 0.5 * c1 * c1 * (1.0 + (k % 8 == 1 ? 0.0 : 1e-6 * (2.0 * U(gen) - 1.0))); break;
            case 2: lambda = 0.5 * c1 * c1 + 0.01 + 3.0 * U(gen); break;      // c1^2 < 2 lambda
            case 3:
                r = 0.01 + 0.09 * U(gen);
                lambda = r * (1.0 + (k % 8 == 3 ? 0.0 : 1e-6 * (2.0 * U(gen) - 1.0)));
                break;
        }
        if (!(lambda > 0.0)) lambda = 1e-3;
        const A1A2 cf = bs_a1_a2(t, t + dt, lambda, sigma, r);
        ++counts[static_cast<int>(cf.branch)];
        const auto [q1, q2] = a1a2_by_quadrature(t, t + dt, lambda, sigma, r);
        max_err = std::max({max_err, std::abs(cf.a1 - q1), std::abs(cf.a2 - q2)});
        if (!(cf.a1 > cf.a2 && cf.a2 > 0.0 && cf.a1 < 1.0)) ordered = false;
    }
    std::ostringstream s;
    s << "max |branch - quadrature| " << fmt("%.3e", max_err) << " (tol " << fmt("%.1e", cfg.tol) << ")"
      << ", A1 > A2 " << (ordered ? "yes" : "NO") << ", branch counts " << counts[0] << "/" << counts[1] << "/"
      << counts[2] << "/" << counts[3];
    return {max_err <= cfg.tol && ordered, s.str()};
}

SuiteResult suite_fourier(const RunConfig& cfg) {
    std::mt19937_64 gen(cfg.mc.seed + 1);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double max_err = 0.0;
    for (int k = 0; k < 50; ++k) {
        const double S = 100.0;
        const double K = 60.0 + 80.0 * U(gen);
        const double T = 0.1 + 2.9 * U(gen);
        const double sigma = 0.1 + 0.4 * U(gen);
        const double r = (k % 2) ? 0.05 * U(gen) : 0.0;
        const double f = vanilla_call_fourier(0.0, S, K, T, gaussian_char_fn(sigma, r), r, cfg.quadrature);
        max_err = std::max(max_err, std::abs(f - bs_call(0.0, S, K, sigma, r, T)));
    }
    return {max_err <= cfg.tol,
            "max |fourier - bs_call| " + fmt("%.3e", max_err) + " over 50 points (tol " + fmt("%.1e", cfg.tol) + ")"};
}

SuiteResult suite_density(const RunConfig& cfg) {
    double worst_norm = 0.0, worst_mean = 0.0;
    for (double dt : {0.1, 1.0, 2.0}) {
        const auto q = heston_density_params(cfg.heston.sigma0, dt, cfg.heston);
        const auto rule = heston_density_rule(cfg.heston.sigma0, dt, cfg.heston);
        double mass = 0.0, mean = 0.0;
        for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
            mass += rule.weights[j];
            mean += rule.weights[j] * rule.nodes[j];
        }
        worst_norm = std::max(worst_norm, std::abs(mass - 1.0));
        worst_mean = std::max(worst_mean, std::abs(mean - (q.R + q.Lam) / q.B));
    }
    return {worst_norm <= cfg.tol && worst_mean <= cfg.tol,
            "max |mass - 1| " + fmt("%.3e", worst_norm) + ", max |mean - (R+Lam)/B| " + fmt("%.3e", worst_mean) +
                " for dt in {0.1, 1, 2} (tol " + fmt("%.1e", cfg.tol) + ")"};
}

// E[e^{-r(T - tau ^ T)}] for tau - t ~ Exp(lambda).
double discounted_strike_time(double lambda, double r, double dt) {
    const double survive = std::exp(-lambda * dt);
    const double d = r - lambda;
    const double hit = std::abs(d * dt) < 1e-12 ? lambda * std::exp(-r * dt) * dt
                                                : lambda * std::exp(-r * dt) * std::expm1(d * dt) / d;
    return hit + survive;
}

SuiteResult suite_parity(const RunConfig& cfg) {
    const ModelParams p = cfg.model_params();
    const double lambda = cfg.lambda.value_or(0.75);
    const double r = risk_free_rate(p);
    bool pass = true;
    std::ostringstream s;
    for (double alpha : {1.0, 0.8}) {
        RTFSContract c = cfg.contract;
        c.tau_state = Unrealized{};
        c.alpha = alpha;
        const auto est = mc_rtfs_call_put(c, p, lambda, cfg.mc);
        const double target = c.spot * (1.0 - alpha * discounted_strike_time(lambda, r, c.T - c.t));
        const double hw = *est.difference.ci95_halfwidth();
        const double dev = std::abs(est.difference.value - target);
        pass = pass && dev <= 3.0 * hw;
        s << (alpha == 1.0 ? "" : "; ") << "alpha " << alpha << ": call-put " << fmt4(est.difference.value)
          << " vs " << fmt4(target) << ", |dev|/hw " << fmt("%.2f", dev / hw);
    }
    return {pass, s.str() + " (limit 3)"};
}

SuiteResult suite_cva(const RunConfig& cfg) {
    const ModelParams p = cfg.model_params();
    RTFSContract c = cfg.contract;
    c.tau_state = Unrealized{};
    const auto opts = pricing_options(cfg);
    const double R = cfg.recovery;
    bool pass = true;
    double worst = 0.0;
    for (double lambda : {0.25, 0.75, 1.75}) {
        const double clean = rtfs_price(c, p, lambda, opts).value;
        for (double lc : {0.02, 0.1, 0.5}) {
            const double factor = unilateral_cva_rtfs(cva_inputs(R, ConstantHazard{lc}, c.t, c.T, clean));
            const auto mc = mc_unilateral_cva_rtfs(c, p, lambda, lc, R, cfg.mc);
            const double ratio = std::abs(mc.value - factor) / *mc.ci95_halfwidth();
            worst = std::max(worst, ratio);
            pass = pass && ratio <= 3.0;
        }
        const auto co = unilateral_cva_coincident(R, clean);
        pass = pass && co.cva == (1.0 - R) * clean && co.defaultable_price == R * clean;
    }
    return {pass, "3x3 (lambda, lambda_C) grid, max |mc - factorized| / hw " + fmt("%.2f", worst) +
                      " (limit 3); coincident-time CVA = (1-R) c"};
}

}  // namespace

int cmd_price(const RunConfig& cfg, std::ostream& out, std::ostream&) {
    const ModelParams p = cfg.model_params();
    const auto opts = pricing_options(cfg);
    const MethodChoice m = cfg.method_or(MethodChoice::Cf);
    const double lambda = cfg.lambda.value_or(0.0);
    if (m != MethodChoice::Cf && cfg.contract.realized()) {
        throw ConfigError("method: Monte Carlo needs a contract whose strike is not yet fixed (drop --s-tau)");
    }
    std::optional<PriceEstimate> cf, mc;
    if (m != MethodChoice::Mc) cf = rtfs_price(cfg.contract, p, lambda, opts);
    if (m != MethodChoice::Cf) mc = mc_rtfs_price(cfg.contract, p, lambda, cfg.mc);
    std::optional<double> cva;
    if (cfg.lambda_c) {
        const double clean = cf ? cf->value : mc->value;
        cva = unilateral_cva_rtfs(
            cva_inputs(cfg.recovery, ConstantHazard{*cfg.lambda_c}, cfg.contract.t, cfg.contract.T, clean));
    }

    Sink sink(cfg, out);
    std::ostream& os = *sink;
    if (cfg.format == Format::Csv) {
        CsvTable t{{"lambda", "cf", "mc", "std_error", "ci_len", "seed", "cva"}, {}};
        t.rows.push_back({cfg.lambda, cf ? CsvCell(cf->value) : std::nullopt, mc ? CsvCell(mc->value) : std::nullopt,
                          mc ? mc->std_error : std::nullopt, mc ? mc->ci95_length() : std::nullopt,
                          mc ? CsvCell(static_cast<double>(cfg.mc.seed)) : std::nullopt, cva});
        write_csv(os, t);
        return kExitOk;
    }
    os << "RTFS call, " << describe(cfg);
    if (cfg.contract.realized()) os << ", strike fixed at " << cfg.contract.alpha * cfg.contract.realization().spot_at_tau;
    else os << ", lambda " << lambda;
    os << '\n';
    if (cf) os << "CF   " << fmt4(cf->value) << "  (" << to_string(cf->method) << ")\n";
    if (mc) {
        os << "MC   " << fmt4(mc->value) << "  stderr " << fmt4(*mc->std_error) << "  ci_len "
           << fmt4(*mc->ci95_length()) << "  seed " << cfg.mc.seed << "  paths " << cfg.mc.n_paths << '\n';
    }
    if (cva) os << "CVA  " << fmt4(*cva) << "  (lambda_C " << *cfg.lambda_c << ", R " << cfg.recovery << ")\n";
    return kExitOk;
}

int cmd_table(const RunConfig& cfg, std::ostream& out, std::ostream&) {
    const ModelParams p = cfg.model_params();
    const auto opts = pricing_options(cfg);
    const MethodChoice m = cfg.method_or(MethodChoice::Both);
    const auto& lambdas = cfg.lambdas.empty() ? default_lambdas() : cfg.lambdas;
    RTFSContract c = cfg.contract;
    if (c.realized()) throw ConfigError("s-tau: a table needs a contract whose strike is not yet fixed");

    std::vector<PriceEstimate> mc;
    if (m != MethodChoice::Cf) mc = mc_rtfs_prices(c, p, lambdas, cfg.mc);
    CsvTable t{{"lambda", "cf", "mc", "abs_err", "ci_len"}, {}};
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
        CsvCell cf, mcv, err, ci;
        if (m != MethodChoice::Mc) cf = rtfs_price(c, p, lambdas[k], opts).value;
        if (!mc.empty()) {
            mcv = mc[k].value;
            ci = mc[k].ci95_length();
        }
        if (cf && mcv) err = std::abs(*cf - *mcv);
        t.rows.push_back({lambdas[k], cf, mcv, err, ci});
    }
    Sink sink(cfg, out);
    if (cfg.format == Format::Text) {
        *sink << "RTFS call, " << describe(cfg);
        if (!mc.empty()) *sink << ", " << cfg.mc.n_paths << " paths, seed " << cfg.mc.seed;
        *sink << '\n';
    }
    emit(cfg, *sink, t);
    return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const ModelParams p = cfg.model_params();
    const auto opts = pricing_options(cfg);
    RTFSContract c = cfg.contract;
    if (c.realized()) throw ConfigError("s-tau: a sweep needs a contract whose strike is not yet fixed");
    std::vector<double> us = cfg.us;
    if (us.empty() && !cfg.lambdas.empty())
        for (double l : cfg.lambdas) us.push_back(1.0 / l);
    if (us.empty()) us = default_us();

    const double horizon = c.T - c.t;
    CsvTable t{{"u", "fs", "rtfs"}, {}};
    for (double u : us) {
        if (u > horizon * (1.0 + 1e-12)) {
            err << "warning: u = " << u << " exceeds T - t = " << horizon << " (lambda = " << 1.0 / u
                << " < 1/(T - t)); row skipped\n";
            continue;
        }
        const double fs = fs_price(c, std::min(c.t + u, c.T), p, opts);
        const double rt = rtfs_price(c, p, 1.0 / u, opts).value;
        t.rows.push_back({u, fs, rt});
    }
    Sink sink(cfg, out);
    if (cfg.format == Format::Text) *sink << "FS and RTFS calls against u = E(tau), " << describe(cfg) << '\n';
    emit(cfg, *sink, t);
    return kExitOk;
}

int cmd_validate(const RunConfig& cfg, std::ostream& out, std::ostream&) {
    using Suite = SuiteResult (*)(const RunConfig&);
    const std::pair<const char*, Suite> suites[] = {
        {"a1a2", suite_a1a2}, {"fourier", suite_fourier}, {"density", suite_density},
        {"parity", suite_parity}, {"cva", suite_cva},
    };
    Sink sink(cfg, out);
    bool all = true;
    for (const auto& [name, run] : suites) {
        if (cfg.suite != "all" && cfg.suite != name) continue;
        SuiteResult r;
        try {
            r = run(cfg);
        } catch (const std::exception& e) {
            r = {false, std::string("error: ") + e.what()};
        }
        all = all && r.pass;
        *sink << (r.pass ? "PASS " : "FAIL ") << name << "  " << r.detail << '\n';
    }
    return all ? kExitOk : kExitSuiteFailure;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    try {
        cfg = parse_args(args);
        cfg.validate();
    } catch (const HelpRequested& h) {
        out << h.text;
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfigError;
    }
    try {
        switch (cfg.command) {
            case Command::Price: return cmd_price(cfg, out, err);
            case Command::Table: return cmd_table(cfg, out, err);
            case Command::Sweep: return cmd_sweep(cfg, out, err);
            case Command::Validate: return cmd_validate(cfg, out, err);
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const StateError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitSuiteFailure;
    }
    return kExitSuiteFailure;
}

}  // namespace rtfs::cli
