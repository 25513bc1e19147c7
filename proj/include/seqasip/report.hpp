#pragma once

// Output files: RFC-4180 CSV tables, JSON sidecars and gnuplot scripts.
// Every writer goes through a temporary file and a rename.

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "seqasip/maps.hpp"

namespace seqasip {

using CsvCell = std::variant<std::string, double, std::int64_t>;

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<CsvCell>> rows;

  void add(std::vector<CsvCell> row);
};

/// Doubles are printed with %.17g so they round-trip exactly; records end in CRLF.
std::string to_csv(const CsvTable& table);
/// Quotes a field when it contains a comma, quote, CR or LF.
std::string csv_escape(const std::string& field);
std::string format_double(double v);

void write_text_atomic(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// Sidecar with the full config echo, seed, tool version and git hash.
Json sidecar(const Json& config, std::uint64_t seed, const Json& results);

struct PlotSpec {
  std::string title;
  std::string csv;  // file name relative to the script
  int x_column = 1;
  std::vector<int> y_columns;
  std::vector<std::string> y_labels;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
};

std::string gnuplot_script(const PlotSpec& spec);

/// FNV-1a of a file's bytes, as 16 hex digits.
std::string file_hash(const std::filesystem::path& path);

}  // namespace seqasip
