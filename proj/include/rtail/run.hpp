#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rtail/config.hpp"

namespace rtail {

/// Version string written into every output header.
std::string_view version() noexcept;

using Cell = std::variant<double, std::uint64_t, std::string>;

/// Result rows of one command; an empty optional is an absent field.
struct Table
{
    std::vector<std::string> columns;
    std::vector<std::vector<std::optional<Cell>>> rows;
};

enum class OutputFormat { Csv, Json };

/// Runs the configured command and returns its records. Throws rtail::Error.
Table execute(const RunConfig& cfg);

/// `# restart_tail <version>`, the resolved config as `# config:` lines, then the table.
void write_csv(const RunConfig& cfg, const Table& table, std::ostream& out);
/// The table as a JSON array of objects; absent fields are null.
void write_json(const Table& table, std::ostream& out);

/**
 * execute + write. On a library error writes a one-line JSON error record
 * to `err` and returns 1; returns 0 on success.
 */
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err,
        OutputFormat format = OutputFormat::Csv);

}  // namespace rtail
