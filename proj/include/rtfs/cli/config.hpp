#pragma once

// Run configuration for the command-line front end: flags, optional key = value
// config file (flags win), and validation before anything is priced.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rtfs/core.hpp"
#include "rtfs/fourier.hpp"
#include "rtfs/heston.hpp"
#include "rtfs/montecarlo.hpp"

namespace rtfs::cli {

enum class Command { Price, Table, Sweep, Validate };
enum class MethodChoice { Cf, Mc, Both };
enum class Format { Text, Csv };

struct RunConfig {
    Command command = Command::Price;

    std::string model = "bs";
    BlackScholesParams bs{};
    MertonParams merton{0.2, 0.0, 0.5, -0.1, 0.15};
    VarianceGammaParams vg{};
    HestonParams heston{};

    RTFSContract contract{0.0, 2.0, 1.0, 100.0, Unrealized{}};

    std::optional<double> lambda;
    std::vector<double> lambdas;  ///< table grid; empty = default grid
    std::vector<double> us;       ///< sweep grid of u = E(tau); empty = default grid
    std::optional<double> lambda_c;
    double recovery = 0.4;

    std::optional<MethodChoice> method;  ///< unset = per-command default
    McConfig mc{};
    HestonMode heston_mode = HestonMode::FullDensity;
    QuadratureConfig quadrature{};

    Format format = Format::Text;
    std::string output;  ///< empty = stdout
    std::string suite = "all";
    double tol = 1e-8;

    ModelParams model_params() const;
    MethodChoice method_or(MethodChoice fallback) const { return method.value_or(fallback); }

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Table grid when --lambdas is not given.
const std::vector<double>& default_lambdas();
/// Sweep grid of u = 1 / lambda when --us is not given.
const std::vector<double>& default_us();

/// key = value lines, '#' starts a comment. Throws ConfigError on malformed lines.
std::map<std::string, std::string> read_config_file(const std::string& path);

/// Appends --key value for every file entry whose flag is not already on the
/// command line, so explicit flags override the file.
std::vector<std::string> merge_config_file(const std::vector<std::string>& args);

/// Thrown when --help was requested; carries the rendered help text.
struct HelpRequested {
    std::string text;
};

/// Parses arguments (without the program name). Throws ConfigError or HelpRequested.
RunConfig parse_args(const std::vector<std::string>& args);

}  // namespace rtfs::cli
