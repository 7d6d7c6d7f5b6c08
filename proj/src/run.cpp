#include "rtail/run.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "rtail/asymptotics.hpp"
#include "rtail/cramer.hpp"
#include "rtail/error.hpp"
#include "rtail/numerics.hpp"
#include "rtail/restart.hpp"

#ifndef RTAIL_VERSION
#define RTAIL_VERSION "0.0.0"
#endif

namespace rtail {

namespace {

using Row = std::vector<std::optional<Cell>>;

const std::vector<std::string> kTailColumns{"x",     "point",     "stderr", "lower",
                                            "upper", "asymptote", "ratio",  "n"};

std::optional<Cell> finite_or_empty(double v)
{
    if (!std::isfinite(v))
        return std::nullopt;
    return Cell{v};
}

std::vector<double> thresholds(const RunConfig& cfg)
{
    auto xs = cfg.x_grid.resolve();
    if (xs.empty())
        throw InvalidArgument(std::string(to_string(cfg.command)) + " needs a non-empty x_grid");
    return xs;
}

QuadratureParams quad_params(const RunConfig& cfg)
{
    QuadratureParams q;
    q.rel_tol = cfg.quad_tol;
    q.trunc_eps = cfg.trunc_eps;
    return q;
}

// One TailEstimate per threshold from the configured estimator.
std::vector<TailEstimate> estimate_tail(const RunConfig& cfg, const std::vector<double>& xs)
{
    switch (cfg.estimator) {
    case Estimator::Crude:
        return crude_tail_grid(cfg, xs);
    case Estimator::SemiAnalytic: {
        SemiAnalyticTail sa(cfg.F, cfg.G, quad_params(cfg));
        std::vector<TailEstimate> out;
        for (double x : xs)
            out.push_back(sa(x));
        return out;
    }
    case Estimator::Importance: {
        std::vector<TailEstimate> out;
        for (std::size_t i = 0; i < xs.size(); ++i)
            out.push_back(importance_tail(cfg.F, cfg.G, xs[i], cfg.n, RngStream(cfg.seed, i),
                                          cfg.workers, cfg.trunc_eps));
        return out;
    }
    }
    return {};
}

Row tail_row(const TailEstimate& e, bool monte_carlo)
{
    Row row(kTailColumns.size());
    row[0] = Cell{e.x};
    row[1] = Cell{e.point};
    if (monte_carlo)
        row[2] = Cell{e.std_error};
    row[3] = Cell{e.lower};
    row[4] = Cell{e.upper};
    if (monte_carlo)
        row[7] = Cell{e.n_used};
    return row;
}

Table tail_table(const RunConfig& cfg, bool with_asymptote)
{
    auto xs = thresholds(cfg);
    std::optional<RegimeCase> rc;
    if (with_asymptote)
        rc = classify(cfg.F, cfg.G);
    Table t{kTailColumns, {}};
    const bool mc = cfg.estimator != Estimator::SemiAnalytic;
    for (const auto& e : estimate_tail(cfg, xs)) {
        Row row = tail_row(e, mc);
        if (rc) {
            // Thresholds below a regime's domain get empty asymptote columns.
            try {
                row[5] = finite_or_empty(evaluate_asymptote(*rc, e.x));
                row[6] = finite_or_empty(asymptote_ratio(*rc, e.x, e.point));
            } catch (const InvalidArgument&) {
            }
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

Table simulate_table(const RunConfig& cfg)
{
    auto xs = thresholds(cfg);
    RunConfig c = cfg;
    c.x_grid = XGrid{XGrid::Spacing::List, xs, 0.0, 0.0, 0};
    auto summary = simulate(c);
    Table t{kTailColumns, {}};
    for (std::size_t i = 0; i < xs.size(); ++i) {
        Row row(kTailColumns.size());
        row[0] = Cell{xs[i]};
        row[1] = Cell{summary.tail_at[i]};
        row[2] = Cell{summary.tail_std_error[i]};
        row[7] = Cell{summary.n};
        t.rows.push_back(std::move(row));
    }
    return t;
}

Table asymptote_table(const RunConfig& cfg)
{
    auto rc = classify(cfg.F, cfg.G);
    Table t{kTailColumns, {}};
    for (double x : thresholds(cfg)) {
        Row row(kTailColumns.size());
        row[0] = Cell{x};
        row[5] = finite_or_empty(evaluate_asymptote(rc, x));
        t.rows.push_back(std::move(row));
    }
    return t;
}

Table gamma_table(const RunConfig& cfg)
{
    Table t{{"t", "gamma", "B", "C", "residual", "mu_gbar"}, {}};
    for (double s : thresholds(cfg)) {
        auto sol = lundberg_root(cfg.G, s);
        Row row{Cell{s}, Cell{sol.gamma}, Cell{sol.B}, Cell{sol.C}, Cell{sol.residual}, {}};
        if (std::isfinite(mean(cfg.G)))
            row[5] = Cell{gamma_small_tail_asymptote(cfg.G, s)};
        t.rows.push_back(std::move(row));
    }
    return t;
}

Table classify_table(const RunConfig& cfg)
{
    auto rc = classify(cfg.F, cfg.G);
    std::string constants;
    for (const auto& [name, value] : rc.constants)
        constants += (constants.empty() ? "" : ";") + name + "=" + format_double(value);
    Table t{{"case", "mode", "theta", "constants"}, {}};
    t.rows.push_back({Cell{std::string(to_string(rc.kind))}, Cell{std::string(to_string(rc.mode))},
                      Cell{rc.theta}, Cell{constants}});
    return t;
}

// Empirical P(M_k > x) for M_k the maximum of k independent RESTART times.
Table makespan_table(const RunConfig& cfg)
{
    auto xs = thresholds(cfg);
    Table t{{"subjobs", "x", "point", "stderr", "lower", "upper", "n"}, {}};
    for (std::size_t j = 0; j < cfg.subjobs.size(); ++j) {
        auto k = cfg.subjobs[j];
        auto draws = parallel_makespan(cfg.F, cfg.G, k, cfg.n, RngStream(cfg.seed, j), cfg.workers);
        for (double x : xs) {
            std::uint64_t hits = 0;
            for (double m : draws)
                hits += m > x;
            double p = static_cast<double>(hits) / static_cast<double>(cfg.n);
            auto [lo, hi] = numerics::clopper_pearson(hits, cfg.n, 0.99);
            t.rows.push_back({Cell{k}, Cell{x}, Cell{p},
                              Cell{std::sqrt(p * (1.0 - p) / static_cast<double>(cfg.n))},
                              Cell{lo}, Cell{hi}, Cell{cfg.n}});
        }
    }
    return t;
}

std::string csv_cell(const std::optional<Cell>& cell)
{
    if (!cell)
        return "";
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>)
                return format_double(v);
            else if constexpr (std::is_same_v<T, std::uint64_t>)
                return std::to_string(v);
            else
                return v.find_first_of(",\"\n") == std::string::npos ? v : '"' + v + '"';
        },
        *cell);
}

}  // namespace

std::string_view version() noexcept { return RTAIL_VERSION; }

Table execute(const RunConfig& cfg)
{
    switch (cfg.command) {
    case Command::Simulate:
        return simulate_table(cfg);
    case Command::Gamma:
        return gamma_table(cfg);
    case Command::Tail:
        return tail_table(cfg, false);
    case Command::Asymptote:
        return asymptote_table(cfg);
    case Command::Classify:
        return classify_table(cfg);
    case Command::Compare:
        return tail_table(cfg, true);
    case Command::Makespan:
        return makespan_table(cfg);
    }
    throw InvalidArgument("unknown command");
}

void write_csv(const RunConfig& cfg, const Table& table, std::ostream& out)
{
    out << "# restart_tail " << version() << '\n';
    std::istringstream rendered(render_config(cfg));
    for (std::string line; std::getline(rendered, line);)
        out << "# config: " << line << '\n';
    for (std::size_t i = 0; i < table.columns.size(); ++i)
        out << (i ? "," : "") << table.columns[i];
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << csv_cell(row[i]);
        out << '\n';
    }
}

void write_json(const Table& table, std::ostream& out)
{
    auto records = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) {
        nlohmann::ordered_json rec = nlohmann::ordered_json::object();
        for (std::size_t i = 0; i < row.size(); ++i) {
            const auto& name = table.columns[i];
            if (!row[i])
                rec[name] = nullptr;
            else
                std::visit([&](const auto& v) { rec[name] = v; }, *row[i]);
        }
        records.push_back(std::move(rec));
    }
    out << records.dump(2) << '\n';
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err, OutputFormat format)
{
    Table table;
    try {
        table = execute(cfg);
    } catch (const Error& e) {
        nlohmann::ordered_json rec{{"error", e.kind()}, {"message", e.what()}};
        if (const auto* q = dynamic_cast<const QuadratureError*>(&e))
            rec["achieved_tolerance"] = q->achieved_tolerance();
        err << rec.dump() << '\n';
        return 1;
    }
    if (format == OutputFormat::Json)
        write_json(table, out);
    else
        write_csv(cfg, table, out);
    return 0;
}

}  // namespace rtail
