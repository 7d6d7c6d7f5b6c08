#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rtail/dist.hpp"

namespace rtail {

enum class Command { Simulate, Gamma, Tail, Asymptote, Classify, Compare, Makespan };
enum class Estimator { Crude, SemiAnalytic, Importance };

std::string_view to_string(Command c) noexcept;
std::string_view to_string(Estimator e) noexcept;
Command parse_command(std::string_view text);
Estimator parse_estimator(std::string_view text);

/// Thresholds, either listed or generated as `log(start, stop, points)` / `linear(...)`.
struct XGrid
{
    enum class Spacing { List, Linear, Log };
    Spacing spacing = Spacing::List;
    std::vector<double> values;
    double start = 0.0;
    double stop = 0.0;
    std::uint64_t points = 0;

    std::vector<double> resolve() const;
    bool operator==(const XGrid&) const = default;
};

XGrid parse_x_grid(std::string_view text);
std::string to_string(const XGrid& grid);

/// A complete, deterministic experiment description.
struct RunConfig
{
    DistributionSpec F = DistributionSpec::exponential(1.0);
    DistributionSpec G = DistributionSpec::exponential(1.0);
    Command command = Command::Tail;
    XGrid x_grid;
    std::uint64_t n = 100000;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    Estimator estimator = Estimator::SemiAnalytic;
    double eps = 0.1;
    double t0 = 0.0;
    double quad_tol = 1e-10;
    double trunc_eps = 1e-12;
    std::vector<std::uint64_t> subjobs{1};

    bool operator==(const RunConfig&) const = default;
};

/// One `key = value` line of a config file.
struct Setting
{
    std::string key;
    std::string value;
    int line = 0;
};

/// Splits config text into settings. Blank lines, `#` comments and `[section]` headers are skipped.
std::vector<Setting> parse_settings(std::string_view text);

/// Builds a validated config. Later settings override earlier ones with the same key.
RunConfig build_config(const std::vector<Setting>& settings);

/// parse_settings + build_config, rejecting duplicate keys.
RunConfig parse_config(std::string_view text);

/// Canonical text form; parse_config(render_config(c)) == c.
std::string render_config(const RunConfig& cfg);

/// Recovers the config text embedded in `# config:` header lines of a CSV output.
std::string extract_embedded_config(std::string_view csv_text);

}  // namespace rtail
