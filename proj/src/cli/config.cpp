#include "rtfs/cli/config.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace rtfs::cli {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool has_flag(const std::vector<std::string>& args, const std::string& flag) {
    return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
        return a == flag || a.rfind(flag + "=", 0) == 0;
    });
}

// keys that are switches rather than valued options
const std::set<std::string> kSwitches = {"antithetic"};

bool truthy(const std::string& v) {
    std::string s = v;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError("config file: '" + v + "' is not a boolean");
}

template <class E>
E lookup(const std::string& field, const std::string& v, std::initializer_list<std::pair<const char*, E>> table) {
    std::string names;
    for (const auto& [name, e] : table) {
        if (v == name) return e;
        names += (names.empty() ? "" : ", ") + std::string(name);
    }
    throw ConfigError(field + " must be one of " + names + ", got '" + v + "'");
}

void rethrow_as_config(const std::exception& e, const std::string& prefix = "") {
    throw ConfigError(prefix + e.what());
}

}  // namespace

const std::vector<double>& default_lambdas() {
    static const std::vector<double> v{0.25, 0.75, 1.25, 1.75};
    return v;
}

const std::vector<double>& default_us() {
    static const std::vector<double> v{0.02, 0.1, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0};
    return v;
}

ModelParams RunConfig::model_params() const {
    if (model == "bs") return bs;
    if (model == "merton") return merton;
    if (model == "vg") return vg;
    if (model == "heston") return heston;
    throw ConfigError("model must be one of bs, merton, vg, heston, got '" + model + "'");
}

void RunConfig::validate() const {
    const ModelParams p = model_params();
    try {
        rtfs::validate(p);
    } catch (const DomainError& e) {
        rethrow_as_config(e, model_name(p) + ": ");
    }
    try {
        contract.validate();
    } catch (const DomainError& e) {
        rethrow_as_config(e);
    }
    auto positive = [](double x) { return x > 0.0 && std::isfinite(x); };
    if (lambda && !positive(*lambda)) throw ConfigError("lambda must be > 0");
    for (double l : lambdas)
        if (!positive(l)) throw ConfigError("lambdas: lambda must be > 0");
    for (double u : us)
        if (!positive(u)) throw ConfigError("us: u must be > 0");
    if (command == Command::Price && !contract.realized() && !lambda) {
        throw ConfigError("lambda must be given for a contract whose strike is not yet fixed");
    }
    if (lambda_c && !(*lambda_c >= 0.0 && std::isfinite(*lambda_c))) throw ConfigError("lambda-c must be >= 0");
    if (!(recovery >= 0.0 && recovery <= 1.0)) throw ConfigError("recovery must be in [0, 1]");
    mc.validate();
    quadrature.validate();
    if (!(tol > 0.0)) throw ConfigError("tol must be > 0");
    static const std::set<std::string> suites = {"all", "a1a2", "fourier", "density", "parity", "cva"};
    if (!suites.count(suite)) throw ConfigError("suite must be one of all, a1a2, fourier, density, parity, cva");
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::map<std::string, std::string> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config: line " + std::to_string(lineno) + " of '" + path + "' is not key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config: empty key on line " + std::to_string(lineno));
        out[key] = value;
    }
    return out;
}

std::vector<std::string> merge_config_file(const std::vector<std::string>& args) {
    std::optional<std::string> path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    std::vector<std::string> out = args;
    if (!path) return out;
    for (const auto& [key, value] : read_config_file(*path)) {
        if (key == "config") throw ConfigError("config: nested config files are not supported");
        const std::string flag = "--" + key;
        if (has_flag(args, flag)) continue;
        if (kSwitches.count(key)) {
            if (truthy(value)) out.push_back(flag);
            continue;
        }
        std::string v = value;
        v.erase(std::remove_if(v.begin(), v.end(), [](unsigned char ch) { return std::isspace(ch); }), v.end());
        out.push_back(flag + "=" + v);
    }
    return out;
}

RunConfig parse_args(const std::vector<std::string>& raw_args) {
    RunConfig cfg;
    CLI::App app{"Random-time forward-start option pricer", "rtfs"};
    app.require_subcommand(1);

    std::string model = "bs", method, heston_mode = "full", format, config_path;
    double sigma = 0.2, r = 0.0, lambda = 0.0, s_tau = 0.0, step = 0.0, lambda_c = 0.0;
    std::int64_t paths = cfg.mc.n_paths;

    app.add_option("--config", config_path, "key = value file; explicit flags override it");
    app.add_option("--model", model, "bs | merton | vg | heston");
    app.add_option("--sigma", sigma, "BS / Merton volatility");
    app.add_option("--r", r, "risk-free rate");
    app.add_option("--jump-nu", cfg.merton.nu, "Merton jump intensity");
    app.add_option("--jump-mu", cfg.merton.mu, "Merton mean log jump");
    app.add_option("--jump-delta", cfg.merton.delta, "Merton log jump volatility");
    app.add_option("--b", cfg.vg.b, "VG drift of the subordinated Brownian motion");
    app.add_option("--c", cfg.vg.c, "VG volatility");
    app.add_option("--mu", cfg.vg.mu, "VG variance rate of the gamma clock");
    app.add_option("--sigma0", cfg.heston.sigma0, "Heston initial variance");
    app.add_option("--kappa", cfg.heston.kappa, "Heston mean reversion");
    app.add_option("--theta", cfg.heston.theta, "Heston long-run variance");
    app.add_option("--vol-of-vol", cfg.heston.vol_of_vol, "Heston volatility of variance");
    app.add_option("--rho", cfg.heston.rho, "Heston correlation");
    app.add_option("--s0", cfg.contract.spot, "spot at the valuation time");
    app.add_option("--t", cfg.contract.t, "valuation time");
    app.add_option("--T", cfg.contract.T, "maturity");
    app.add_option("--alpha", cfg.contract.alpha, "strike percentage in (0, 1]");
    app.add_option("--s-tau", s_tau, "recorded S_tau: the strike is already fixed");
    app.add_option("--lambda", lambda, "intensity of tau");
    app.add_option("--lambdas", cfg.lambdas, "intensity grid for table / sweep")->delimiter(',');
    app.add_option("--us", cfg.us, "E(tau) grid for sweep")->delimiter(',');
    app.add_option("--lambda-c", lambda_c, "counterparty default intensity (adds a CVA line to price)");
    app.add_option("--recovery", cfg.recovery, "counterparty recovery rate");
    app.add_option("--method", method, "cf | mc | both");
    app.add_option("--paths", paths, "Monte Carlo paths");
    app.add_option("--seed", cfg.mc.seed, "Monte Carlo seed");
    app.add_option("--step", step, "path time step (default 1/sqrt(paths))");
    app.add_flag("--antithetic", cfg.mc.antithetic, "antithetic normals");
    app.add_option("--threads", cfg.mc.threads, "worker threads (0 = all cores)");
    app.add_option("--heston-mode", heston_mode, "mean | full");
    app.add_option("--nu-contour", cfg.quadrature.nu, "Fourier contour height");
    app.add_option("--z-max", cfg.quadrature.z_max, "Fourier truncation point");
    app.add_option("--quad-tol", cfg.quadrature.tol, "Fourier tolerance per unit of spot");
    app.add_option("--format", format, "text | csv");
    app.add_option("--output", cfg.output, "output file (default stdout)");
    app.add_option("--suite", cfg.suite, "validate: all | a1a2 | fourier | density | parity | cva");
    app.add_option("--tol", cfg.tol, "validate: tolerance for the deterministic suites");

    auto* price = app.add_subcommand("price", "price one contract")->fallthrough();
    auto* table = app.add_subcommand("table", "CF / MC table over an intensity grid")->fallthrough();
    auto* sweep = app.add_subcommand("sweep", "FS and RTFS prices against u = E(tau)")->fallthrough();
    auto* valid = app.add_subcommand("validate", "run the invariant suites")->fallthrough();

    const std::vector<std::string> args = merge_config_file(raw_args);
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        throw HelpRequested{app.help()};
    } catch (const CLI::CallForAllHelp&) {
        throw HelpRequested{app.help("", CLI::AppFormatMode::All)};
    } catch (const CLI::ParseError& e) {
        throw ConfigError(e.what());
    }

    if (price->parsed()) cfg.command = Command::Price;
    else if (table->parsed()) cfg.command = Command::Table;
    else if (sweep->parsed()) cfg.command = Command::Sweep;
    else if (valid->parsed()) cfg.command = Command::Validate;

    cfg.model = model;
    cfg.bs.sigma = cfg.merton.sigma = sigma;
    cfg.bs.r = cfg.merton.r = cfg.vg.r = cfg.heston.r = r;
    if (app.count("--lambda")) cfg.lambda = lambda;
    if (app.count("--lambda-c")) cfg.lambda_c = lambda_c;
    if (app.count("--s-tau")) cfg.contract.tau_state = Realized{cfg.contract.t, s_tau};
    if (app.count("--step")) cfg.mc.step = step;
    cfg.mc.n_paths = paths;
    if (!method.empty()) {
        cfg.method = lookup<MethodChoice>("method", method,
                                          {{"cf", MethodChoice::Cf}, {"mc", MethodChoice::Mc}, {"both", MethodChoice::Both}});
    }
    cfg.heston_mode =
        lookup<HestonMode>("heston-mode", heston_mode, {{"mean", HestonMode::MeanApprox}, {"full", HestonMode::FullDensity}});
    const std::string fmt = !format.empty() ? format : (cfg.command == Command::Sweep ? "csv" : "text");
    cfg.format = lookup<Format>("format", fmt, {{"text", Format::Text}, {"csv", Format::Csv}});
    cfg.model_params();  // rejects unknown model names
    return cfg;
}

}  // namespace rtfs::cli
