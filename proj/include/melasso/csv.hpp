#pragma once

#include "melasso/types.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace melasso {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string to_string() const;
};

/// Parse a comma-separated file. `expect_header` controls whether the first
/// line is treated as column names; malformed cells surface row/column
/// coordinates in the error message.
CsvTable read_csv(const std::filesystem::path& path, bool expect_header);

/// Numeric matrix from string cells; errors carry 1-based row/column.
Matrix to_matrix(const CsvTable& table);

/// Overwrite `path` atomically (write temp file in the same directory, then
/// rename over the target).
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m,
                      const std::vector<std::string>& header = {});
void write_vector_csv(const std::filesystem::path& path, const Vector& v,
                      const std::string& name);

}  // namespace melasso
