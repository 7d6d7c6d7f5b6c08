#include "rtail/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "rtail/error.hpp"

namespace rtail {

namespace {

constexpr std::array<std::string_view, 7> kCommands{"simulate", "gamma",   "tail",    "asymptote",
                                                    "classify", "compare", "makespan"};
constexpr std::array<std::string_view, 3> kEstimators{"crude", "semi_analytic", "importance"};

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_commas(std::string_view s)
{
    std::vector<std::string_view> out;
    s = trim(s);
    if (s.empty())
        return out;
    while (true) {
        auto comma = s.find(',');
        out.push_back(trim(s.substr(0, comma)));
        if (comma == std::string_view::npos)
            break;
        s = s.substr(comma + 1);
    }
    return out;
}

std::uint64_t parse_uint(std::string_view text)
{
    text = trim(text);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size())
        throw InvalidArgument("not a non-negative integer: '" + std::string(text) + "'");
    return v;
}

}  // namespace

std::string_view to_string(Command c) noexcept { return kCommands[static_cast<std::size_t>(c)]; }

std::string_view to_string(Estimator e) noexcept
{
    return kEstimators[static_cast<std::size_t>(e)];
}

Command parse_command(std::string_view text)
{
    text = trim(text);
    for (std::size_t i = 0; i < kCommands.size(); ++i)
        if (kCommands[i] == text)
            return static_cast<Command>(i);
    throw InvalidArgument("unknown command '" + std::string(text) + "'");
}

Estimator parse_estimator(std::string_view text)
{
    text = trim(text);
    for (std::size_t i = 0; i < kEstimators.size(); ++i)
        if (kEstimators[i] == text)
            return static_cast<Estimator>(i);
    throw InvalidArgument("unknown estimator '" + std::string(text) +
                          "' (expected crude, semi_analytic or importance)");
}

std::vector<double> XGrid::resolve() const
{
    if (spacing == Spacing::List)
        return values;
    std::vector<double> out(points);
    if (points == 0)
        return out;
    out.front() = start;
    for (std::uint64_t i = 1; i + 1 < points; ++i) {
        double f = static_cast<double>(i) / static_cast<double>(points - 1);
        out[i] = spacing == Spacing::Log
                     ? std::exp(std::log(start) + f * (std::log(stop) - std::log(start)))
                     : start + f * (stop - start);
    }
    if (points > 1)
        out.back() = stop;
    return out;
}

XGrid parse_x_grid(std::string_view text)
{
    text = trim(text);
    XGrid grid;
    auto open = text.find('(');
    if (open != std::string_view::npos) {
        std::string_view kind = trim(text.substr(0, open));
        if (text.back() != ')')
            throw InvalidArgument("x_grid: missing ')'");
        if (kind == "log")
            grid.spacing = XGrid::Spacing::Log;
        else if (kind == "linear")
            grid.spacing = XGrid::Spacing::Linear;
        else
            throw InvalidArgument("x_grid: unknown spacing '" + std::string(kind) +
                                  "' (expected log or linear)");
        auto args = split_commas(text.substr(open + 1, text.size() - open - 2));
        if (args.size() != 3)
            throw InvalidArgument("x_grid: expected (start, stop, points)");
        grid.start = parse_double(args[0]);
        grid.stop = parse_double(args[1]);
        grid.points = parse_uint(args[2]);
        if (grid.points < 1)
            throw InvalidArgument("x_grid: points must be >= 1");
        if (!(grid.stop > grid.start) && grid.points > 1)
            throw InvalidArgument("x_grid: stop must exceed start");
        if (grid.spacing == XGrid::Spacing::Log && !(grid.start > 0.0))
            throw InvalidArgument("x_grid: log spacing needs start > 0");
    } else {
        for (auto item : split_commas(text))
            grid.values.push_back(parse_double(item));
    }
    auto xs = grid.resolve();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!std::isfinite(xs[i]) || xs[i] < 0.0)
            throw InvalidArgument("x_grid: thresholds must be finite and >= 0");
        if (i > 0 && !(xs[i] > xs[i - 1]))
            throw InvalidArgument("x_grid: thresholds must be strictly increasing");
    }
    return grid;
}

std::string to_string(const XGrid& grid)
{
    if (grid.spacing == XGrid::Spacing::List) {
        std::string out;
        for (std::size_t i = 0; i < grid.values.size(); ++i)
            out += (i ? ", " : "") + format_double(grid.values[i]);
        return out;
    }
    return std::string(grid.spacing == XGrid::Spacing::Log ? "log(" : "linear(") +
           format_double(grid.start) + ", " + format_double(grid.stop) + ", " +
           std::to_string(grid.points) + ")";
}

std::vector<Setting> parse_settings(std::string_view text)
{
    std::vector<Setting> out;
    int line_no = 0;
    while (!text.empty()) {
        auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        line = trim(line);
        if (line.empty() || line.front() == '#')
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("malformed section header", line_no);
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("expected 'key = value'", line_no);
        std::string key(trim(line.substr(0, eq)));
        if (key.empty())
            throw ConfigError("empty key", line_no);
        out.push_back({key, std::string(trim(line.substr(eq + 1))), line_no});
    }
    return out;
}

RunConfig build_config(const std::vector<Setting>& settings)
{
    RunConfig cfg;
    std::set<std::string, std::less<>> seen;
    for (const auto& s : settings) {
        try {
            const std::string_view v = s.value;
            if (s.key == "F") {
                cfg.F = parse_distribution(v);
                check_role(cfg.F, Role::F);
            } else if (s.key == "G") {
                cfg.G = parse_distribution(v);
                check_role(cfg.G, Role::G);
            } else if (s.key == "command") {
                cfg.command = parse_command(v);
            } else if (s.key == "x_grid") {
                cfg.x_grid = parse_x_grid(v);
            } else if (s.key == "n") {
                cfg.n = parse_uint(v);
                if (cfg.n < 1)
                    throw InvalidArgument("n must be >= 1");
            } else if (s.key == "seed") {
                cfg.seed = parse_uint(v);
            } else if (s.key == "workers") {
                auto w = parse_uint(v);
                if (w < 1 || w > 4096)
                    throw InvalidArgument("workers must lie in [1, 4096]");
                cfg.workers = static_cast<unsigned>(w);
            } else if (s.key == "estimator") {
                cfg.estimator = parse_estimator(v);
            } else if (s.key == "eps") {
                cfg.eps = parse_double(v);
                if (!(cfg.eps > 0.0 && cfg.eps < 1.0))
                    throw InvalidArgument("eps must lie in (0, 1)");
            } else if (s.key == "t0") {
                cfg.t0 = parse_double(v);
                if (!(cfg.t0 >= 0.0) || !std::isfinite(cfg.t0))
                    throw InvalidArgument("t0 must be finite and >= 0");
            } else if (s.key == "quad_tol") {
                cfg.quad_tol = parse_double(v);
                if (!(cfg.quad_tol > 0.0 && cfg.quad_tol < 1.0))
                    throw InvalidArgument("quad_tol must lie in (0, 1)");
            } else if (s.key == "trunc_eps") {
                cfg.trunc_eps = parse_double(v);
                if (!(cfg.trunc_eps > 0.0 && cfg.trunc_eps <= 1e-2))
                    throw InvalidArgument("trunc_eps must lie in (0, 0.01]");
            } else if (s.key == "subjobs") {
                cfg.subjobs.clear();
                for (auto item : split_commas(v)) {
                    auto k = parse_uint(item);
                    if (k < 1 || (!cfg.subjobs.empty() && k <= cfg.subjobs.back()))
                        throw InvalidArgument("subjobs must be strictly increasing and >= 1");
                    cfg.subjobs.push_back(k);
                }
                if (cfg.subjobs.empty())
                    throw InvalidArgument("subjobs must not be empty");
            } else {
                throw InvalidArgument("unknown key '" + s.key + "'");
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            throw ConfigError(e.what(), s.line);
        }
        seen.insert(s.key);
    }
    for (const char* required : {"F", "G", "command", "seed"})
        if (!seen.count(required))
            throw ConfigError(std::string("missing required key '") + required + "'" +
                                  (std::string_view(required) == "seed"
                                       ? " (a master seed is mandatory for reproducibility)"
                                       : ""),
                              0);
    return cfg;
}

RunConfig parse_config(std::string_view text)
{
    auto settings = parse_settings(text);
    std::set<std::string, std::less<>> keys;
    for (const auto& s : settings)
        if (!keys.insert(s.key).second)
            throw ConfigError("duplicate key '" + s.key + "'", s.line);
    return build_config(settings);
}

std::string render_config(const RunConfig& cfg)
{
    std::ostringstream out;
    out << "command = " << to_string(cfg.command) << '\n';
    out << "F = " << to_string(cfg.F) << '\n';
    out << "G = " << to_string(cfg.G) << '\n';
    out << "x_grid = " << to_string(cfg.x_grid) << '\n';
    out << "n = " << cfg.n << '\n';
    out << "seed = " << cfg.seed << '\n';
    out << "workers = " << cfg.workers << '\n';
    out << "estimator = " << to_string(cfg.estimator) << '\n';
    out << "eps = " << format_double(cfg.eps) << '\n';
    out << "t0 = " << format_double(cfg.t0) << '\n';
    out << "quad_tol = " << format_double(cfg.quad_tol) << '\n';
    out << "trunc_eps = " << format_double(cfg.trunc_eps) << '\n';
    out << "subjobs = ";
    for (std::size_t i = 0; i < cfg.subjobs.size(); ++i)
        out << (i ? ", " : "") << cfg.subjobs[i];
    out << '\n';
    return out.str();
}

std::string extract_embedded_config(std::string_view csv_text)
{
    constexpr std::string_view prefix = "# config: ";
    std::string out;
    while (!csv_text.empty()) {
        auto nl = csv_text.find('\n');
        std::string_view line = csv_text.substr(0, nl);
        csv_text = nl == std::string_view::npos ? std::string_view{} : csv_text.substr(nl + 1);
        if (line.substr(0, prefix.size()) == prefix) {
            out.append(line.substr(prefix.size()));
            out.push_back('\n');
        }
    }
    return out;
}

}  // namespace rtail
