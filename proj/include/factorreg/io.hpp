#pragma once

#include <filesystem>
#include <string>

#include "factorreg/simulate.hpp"
#include "factorreg/types.hpp"

namespace factorreg::io {

/// Rows are time points, columns are series; no index column. With
/// `header` set the first line is skipped on read and column names
/// (prefix + 1-based index) are written.
Matrix read_csv(const std::filesystem::path& path, bool header = false);
Matrix parse_csv(const std::string& text, bool header = false);

/// Shortest round-trip decimal representation of every entry.
std::string format_csv(const Matrix& m, bool header = false, const std::string& prefix = "V");
void write_csv(const std::filesystem::path& path, const Matrix& m, bool header = false,
               const std::string& prefix = "V");

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

std::string report_to_json(const simulate::ReplicationReport& rep, bool with_records = false);

}  // namespace factorreg::io
