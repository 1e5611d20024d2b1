#include "melasso/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

namespace melasso {

std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string CsvTable::to_string() const {
  std::ostringstream out;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c) out << ',';
    out << header[c];
  }
  if (!header.empty()) out << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      out << row[c];
    }
    out << '\n';
  }
  return out.str();
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  // Trim trailing carriage return from CRLF files.
  if (!cells.empty() && !cells.back().empty() && cells.back().back() == '\r')
    cells.back().pop_back();
  return cells;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path, bool expect_header) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open " + path.string());
  CsvTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cells = split_line(line);
    if (expect_header && lineno == 1) {
      table.header = std::move(cells);
      continue;
    }
    if (!table.rows.empty() && cells.size() != table.rows.front().size())
      throw validation_error(path.string() + ": row " + std::to_string(lineno) +
                             " has " + std::to_string(cells.size()) +
                             " cells, expected " +
                             std::to_string(table.rows.front().size()));
    table.rows.push_back(std::move(cells));
  }
  if (expect_header && !table.header.empty() && !table.rows.empty() &&
      table.rows.front().size() != table.header.size())
    throw validation_error(path.string() + ": header/body column count mismatch");
  return table;
}

Matrix to_matrix(const CsvTable& table) {
  const Index rows = static_cast<Index>(table.rows.size());
  if (rows == 0) throw validation_error("csv: no data rows");
  const Index cols = static_cast<Index>(table.rows.front().size());
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const auto& row = table.rows[static_cast<std::size_t>(r)];
    for (Index c = 0; c < cols; ++c) {
      const std::string& cell = row[static_cast<std::size_t>(c)];
      double value = 0.0;
      const char* begin = cell.data();
      const char* end = begin + cell.size();
      const auto res = std::from_chars(begin, end, value);
      if (res.ec != std::errc{} || res.ptr != end)
        throw validation_error("csv: non-numeric cell '" + cell + "' at row " +
                               std::to_string(r + 1) + ", column " +
                               std::to_string(c + 1));
      m(r, c) = value;
    }
  }
  return m;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw validation_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw validation_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m,
                      const std::vector<std::string>& header) {
  std::ostringstream out;
  if (!header.empty()) {
    if (static_cast<Index>(header.size()) != m.cols())
      throw validation_error("write_matrix_csv: header length mismatch");
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c) out << ',';
      out << header[c];
    }
    out << '\n';
  }
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << format_double(m(r, c));
    }
    out << '\n';
  }
  write_file_atomic(path, out.str());
}

void write_vector_csv(const std::filesystem::path& path, const Vector& v,
                      const std::string& name) {
  std::ostringstream out;
  out << name << '\n';
  for (Index i = 0; i < v.size(); ++i) out << format_double(v[i]) << '\n';
  write_file_atomic(path, out.str());
}

}  // namespace melasso
