#include "seqasip/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "seqasip/container.hpp"
#include "seqasip/errors.hpp"
#include "seqasip/ulam.hpp"
#include "seqasip/version.hpp"

namespace seqasip {

void CsvTable::add(std::vector<CsvCell> row) {
  if (row.size() != header.size()) {
    throw DimensionMismatch("CSV row has " + std::to_string(row.size()) + " fields, header " + std::to_string(header.size()));
  }
  rows.push_back(std::move(row));
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string to_csv(const CsvTable& table) {
  std::string out;
  auto line = [&](const auto& fields, auto render) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ',';
      out += render(fields[i]);
    }
    out += "\r\n";
  };
  line(table.header, [](const std::string& s) { return csv_escape(s); });
  for (const auto& row : table.rows) {
    line(row, [](const CsvCell& c) {
      if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
      if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
      return csv_escape(std::get<std::string>(c));
    });
  }
  return out;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write " + tmp.string());
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!f) throw Error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot read " + path.string());
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

Json sidecar(const Json& config, std::uint64_t seed, const Json& results) {
  return {{"config", config}, {"seed", seed}, {"version", kVersion}, {"git_hash", kGitHash}, {"results", results}};
}

std::string gnuplot_script(const PlotSpec& spec) {
  std::ostringstream g;
  g << "set datafile separator ','\n";
  g << "set key autotitle columnhead\n";
  g << "set title " << Json(spec.title).dump() << "\n";
  if (!spec.x_label.empty()) g << "set xlabel " << Json(spec.x_label).dump() << "\n";
  if (!spec.y_label.empty()) g << "set ylabel " << Json(spec.y_label).dump() << "\n";
  if (spec.log_x) g << "set logscale x\n";
  if (spec.log_y) g << "set logscale y\n";
  g << "plot ";
  for (std::size_t i = 0; i < spec.y_columns.size(); ++i) {
    if (i) g << ", \\\n     ";
    g << Json(spec.csv).dump() << " using " << spec.x_column << ":" << spec.y_columns[i] << " with linespoints";
    if (i < spec.y_labels.size()) g << " title " << Json(spec.y_labels[i]).dump();
  }
  g << "\n";
  return g.str();
}

std::string file_hash(const std::filesystem::path& path) {
  const std::string s = read_text(path);
  return hex64(fnv1a({reinterpret_cast<const unsigned char*>(s.data()), s.size()}));
}

}  // namespace seqasip
