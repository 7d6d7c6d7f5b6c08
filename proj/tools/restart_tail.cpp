// restart_tail: batch front-end for the RESTART tail library.
//
//   restart_tail <command> [--config FILE] [--KEY VALUE ...] [--format csv|json] [-o PATH]
//
// Every config key has a matching flag; flags override the file. Exit status
// is 0 on success, 1 on a library error and 2 on a config or usage error.

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rtail/config.hpp"
#include "rtail/error.hpp"
#include "rtail/run.hpp"

namespace {

int usage_error(const std::string& message)
{
    std::cerr << nlohmann::ordered_json{{"error", "config"}, {"message", message}}.dump() << '\n';
    return 2;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Tail of the total completion time under RESTART failures"};
    app.set_version_flag("--version", std::string(rtail::version()));

    std::string command, config_path, output_path, format = "csv";
    app.add_option("command", command,
                   "simulate | gamma | tail | asymptote | classify | compare | makespan");
    app.add_option("-c,--config", config_path, "config file with key = value lines");
    app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("-o,--output", output_path, "output path (default: standard output)");

    const std::vector<std::pair<std::string, std::string>> keys{
        {"-F,--F", "F"},
        {"-G,--G", "G"},
        {"--x_grid", "x_grid"},
        {"-n,--n", "n"},
        {"--seed", "seed"},
        {"-j,--workers", "workers"},
        {"--estimator", "estimator"},
        {"--eps", "eps"},
        {"--t0", "t0"},
        {"--quad_tol", "quad_tol"},
        {"--trunc_eps", "trunc_eps"},
        {"--subjobs", "subjobs"},
    };
    std::map<std::string, std::string> flag_values;
    for (const auto& [names, key] : keys)
        app.add_option(names, flag_values[key], "overrides config key '" + key + "'");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    std::vector<rtail::Setting> settings;
    try {
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in)
                return usage_error("cannot read config file '" + config_path + "'");
            std::stringstream text;
            text << in.rdbuf();
            settings = rtail::parse_settings(text.str());
            std::map<std::string, int> seen;
            for (const auto& s : settings)
                if (!seen.emplace(s.key, s.line).second)
                    throw rtail::ConfigError("duplicate key '" + s.key + "'", s.line);
        }
        for (const auto& [names, key] : keys)
            if (app.count("--" + key) > 0)
                settings.push_back({key, flag_values[key], 0});
        if (!command.empty())
            settings.push_back({"command", command, 0});
        auto cfg = rtail::build_config(settings);

        std::ofstream file;
        if (!output_path.empty()) {
            file.open(output_path);
            if (!file)
                return usage_error("cannot write '" + output_path + "'");
        }
        std::ostream& out = output_path.empty() ? std::cout : file;
        return rtail::run(cfg, out, std::cerr,
                          format == "json" ? rtail::OutputFormat::Json : rtail::OutputFormat::Csv);
    } catch (const rtail::Error& e) {
        return usage_error(e.what());
    }
}
