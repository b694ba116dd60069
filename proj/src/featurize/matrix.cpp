#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "promptroute/core/errors.hpp"
#include "promptroute/core/jsonl.hpp"
#include "promptroute/core/text.hpp"
#include "promptroute/featurize/features.hpp"

namespace promptroute::featurize {

using nlohmann::json;

namespace {

// Shortest representation that round-trips.
std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s, const std::string& where) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw core::DataError(where + ": bad number '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

void check_row(const FeatureMatrix& m, std::size_t i) {
  if (m.rows[i].size() != m.names.size()) {
    throw core::DataError("row " + m.keys[i] + " has " + std::to_string(m.rows[i].size()) + " values for " +
                          std::to_string(m.names.size()) + " features");
  }
}

}  // namespace

// CSV: "# encoder <version>" comment line, then "key,label,<names...>".
// Feature names and keys never contain commas; keys are checked on write.
void write_matrix(std::ostream& out, const FeatureMatrix& m, MatrixFormat format) {
  if (format == MatrixFormat::jsonl) {
    std::vector<json> rows;
    rows.reserve(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
      check_row(m, i);
      rows.push_back({{"key", m.keys[i]},
                      {"label", m.labels[i] ? json(static_cast<int>(*m.labels[i])) : json(nullptr)},
                      {"values", m.rows[i]}});
    }
    core::write_jsonl(out,
                      {{"schema", core::kSchemaVersion},
                       {"kind", "features"},
                       {"encoder_version", m.encoder_version},
                       {"names", m.names}},
                      rows);
    return;
  }
  out << "# encoder " << m.encoder_version << '\n' << "key,label";
  for (const auto& n : m.names) {
    if (n.find(',') != std::string::npos) throw core::DataError("feature name contains a comma: " + n);
    out << ',' << n;
  }
  out << '\n';
  for (std::size_t i = 0; i < m.size(); ++i) {
    check_row(m, i);
    if (m.keys[i].find_first_of(",\n") != std::string::npos) {
      throw core::DataError("pair key contains a comma or newline: " + m.keys[i]);
    }
    out << m.keys[i] << ',';
    if (m.labels[i]) out << static_cast<int>(*m.labels[i]);
    for (double v : m.rows[i]) out << ',' << format_double(v);
    out << '\n';
  }
}

FeatureMatrix read_matrix(std::istream& in, MatrixFormat format, const std::string& source) {
  if (!in) throw core::InputError("cannot read " + source);
  FeatureMatrix m;
  if (format == MatrixFormat::jsonl) {
    const core::JsonlDocument doc = core::read_jsonl(in, source);
    if (!doc.issues.empty()) throw core::DataError(source + ": " + doc.issues.front().describe());
    try {
      m.names = doc.header.at("names").get<std::vector<std::string>>();
      m.encoder_version = doc.header.at("encoder_version").get<std::string>();
      for (const auto& row : doc.rows) {
        m.keys.push_back(row.value.at("key").get<std::string>());
        const json& label = row.value.at("label");
        if (label.is_null()) {
          m.labels.emplace_back();
        } else {
          const int l = label.get<int>();
          if (l != 0 && l != 1) throw core::DataError(source + ": line " + std::to_string(row.line) + ": bad label");
          m.labels.emplace_back(static_cast<core::Route>(l));
        }
        m.rows.push_back(row.value.at("values").get<std::vector<double>>());
        check_row(m, m.size() - 1);
      }
    } catch (const json::exception& e) {
      throw core::DataError(source + ": malformed feature file: " + e.what());
    }
    return m;
  }

  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = source + ": line " + std::to_string(lineno);
    if (line.starts_with("# encoder ")) {
      m.encoder_version = line.substr(10);
      continue;
    }
    const auto cells = split_commas(line);
    if (!header) {
      if (cells.size() < 2 || cells[0] != "key" || cells[1] != "label") {
        throw core::DataError(where + ": expected header starting with key,label");
      }
      for (std::size_t i = 2; i < cells.size(); ++i) m.names.emplace_back(cells[i]);
      header = true;
      continue;
    }
    if (cells.size() != m.names.size() + 2) {
      throw core::DataError(where + ": expected " + std::to_string(m.names.size() + 2) + " cells, found " +
                            std::to_string(cells.size()));
    }
    m.keys.emplace_back(cells[0]);
    if (cells[1].empty()) {
      m.labels.emplace_back();
    } else if (auto r = core::parse_route(cells[1])) {
      m.labels.emplace_back(*r);
    } else {
      throw core::DataError(where + ": bad label '" + std::string(cells[1]) + "'");
    }
    std::vector<double> row;
    row.reserve(m.names.size());
    for (std::size_t i = 2; i < cells.size(); ++i) row.push_back(parse_double(cells[i], where));
    m.rows.push_back(std::move(row));
  }
  if (!header) throw core::DataError(source + ": missing header row");
  return m;
}

void write_matrix(const std::filesystem::path& path, const FeatureMatrix& m, MatrixFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw core::InputError("cannot write " + path.string());
  write_matrix(out, m, format);
  if (!out) throw core::InputError("write failed: " + path.string());
}

FeatureMatrix read_matrix(const std::filesystem::path& path, MatrixFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw core::InputError("cannot open " + path.string());
  return read_matrix(in, format, path.string());
}

MatrixFormat format_for(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? MatrixFormat::csv : MatrixFormat::jsonl;
}

}  // namespace promptroute::featurize
