#include <doctest.h>

#include <sstream>
#include <string>

#include <json.hpp>

#include "rtail/config.hpp"
#include "rtail/run.hpp"

using namespace rtail;

namespace {

std::string csv_of(const RunConfig& cfg)
{
    std::ostringstream out, err;
    REQUIRE(run(cfg, out, err) == 0);
    CHECK(err.str().empty());
    return out.str();
}

std::vector<std::string> lines_of(const std::string& text)
{
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);)
        out.push_back(line);
    return out;
}

const char* kBase = "F = exponential(rate=1)\nG = exponential(rate=1)\nseed = 11\n";

}  // namespace

TEST_CASE("tail output is byte-identical across runs and reproducible from its header")
{
    for (const char* extra : {"command = tail\nestimator = crude\nn = 20000\nx_grid = 1, 3, 9\nworkers = 3\n",
                              "command = tail\nestimator = importance\nn = 5000\nx_grid = 5, 10\n",
                              "command = compare\nx_grid = log(100, 10000, 3)\n",
                              "command = makespan\nsubjobs = 1, 3\nn = 3000\nx_grid = 2, 4\n"}) {
        CAPTURE(extra);
        auto cfg = parse_config(std::string(kBase) + extra);
        auto first = csv_of(cfg);
        CHECK(first == csv_of(cfg));
        auto replay = parse_config(extract_embedded_config(first));
        CHECK(replay == cfg);
        CHECK(csv_of(replay) == first);
        CHECK(first.rfind("# restart_tail " + std::string(version()) + "\n", 0) == 0);
    }
}

TEST_CASE("fixed tail columns with empty absent fields")
{
    auto cfg = parse_config(std::string(kBase) + "command = tail\nx_grid = 10, 100\n");
    auto lines = lines_of(csv_of(cfg));
    std::vector<std::string> body;
    for (const auto& l : lines)
        if (l.empty() || l[0] != '#')
            body.push_back(l);
    REQUIRE(body.size() == 3);
    CHECK(body[0] == "x,point,stderr,lower,upper,asymptote,ratio,n");
    // Semi-analytic rows have no standard error, no asymptote and no sample count.
    CHECK(body[1].rfind("10,", 0) == 0);
    CHECK(body[1].find(",,") != std::string::npos);
    CHECK(body[1].back() == ',');
    std::size_t commas = 0;
    for (char c : body[2])
        commas += c == ',';
    CHECK(commas == 7);
}

TEST_CASE("compare on the diagonal pair trends to one")
{
    auto cfg = parse_config(std::string(kBase) + "command = compare\nx_grid = log(100, 10000, 3)\n");
    auto table = execute(cfg);
    REQUIRE(table.rows.size() == 3);
    double prev = 1e9;
    for (const auto& row : table.rows) {
        double ratio = std::get<double>(*row[6]);
        CHECK(std::abs(ratio - 1.0) < prev);
        prev = std::abs(ratio - 1.0);
    }
    CHECK(prev < 0.01);
}

TEST_CASE("classify record")
{
    auto cfg = parse_config("F = pareto(index=2, scale=1)\nG = pareto(index=1, scale=2)\ncommand = classify\nseed = 0\n");
    auto table = execute(cfg);
    REQUIRE(table.rows.size() == 1);
    CHECK(std::get<std::string>(*table.rows[0][0]) == "Case22");
    CHECK(std::get<double>(*table.rows[0][2]) == 2.0);
    std::ostringstream out;
    write_json(table, out);
    auto j = nlohmann::json::parse(out.str());
    CHECK(j[0]["case"] == "Case22");
    CHECK(j[0]["theta"] == 2.0);
}

TEST_CASE("json keeps absent fields as null")
{
    auto cfg = parse_config(std::string(kBase) + "command = asymptote\nx_grid = 10\n");
    std::ostringstream out, err;
    REQUIRE(run(cfg, out, err, OutputFormat::Json) == 0);
    auto j = nlohmann::json::parse(out.str());
    REQUIRE(j.size() == 1);
    CHECK(j[0]["x"] == 10.0);
    CHECK(j[0]["asymptote"] == doctest::Approx(0.1));
    CHECK(j[0]["point"].is_null());
    CHECK(j[0]["n"].is_null());
}

TEST_CASE("gamma table")
{
    auto cfg = parse_config(std::string(kBase) + "command = gamma\nx_grid = 0.5, 2\n");
    auto table = execute(cfg);
    REQUIRE(table.rows.size() == 2);
    CHECK(table.columns.front() == "t");
    CHECK(std::get<double>(*table.rows[0][1]) == doctest::Approx(3.51286241725).epsilon(1e-10));
}

TEST_CASE("library errors give exit code 1 and a JSON record")
{
    auto cfg = parse_config("F = lognormal(log_location=0, log_scale=1)\nG = exponential(rate=1)\n"
                            "command = asymptote\nseed = 1\nx_grid = 10\n");
    std::ostringstream out, err;
    CHECK(run(cfg, out, err) == 1);
    CHECK(out.str().empty());
    auto j = nlohmann::json::parse(err.str());
    CHECK(j["error"] == "invalid_argument");
    CHECK(j["message"].get<std::string>().size() > 0);

    auto empty = parse_config(std::string(kBase) + "command = tail\n");
    std::ostringstream o2, e2;
    CHECK(run(empty, o2, e2) == 1);
}
