#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <tuple>

#include "promptroute/core/format.hpp"
#include "promptroute/core/resource.hpp"
#include "promptroute/core/text.hpp"
#include "promptroute/eval/report.hpp"

namespace promptroute::eval {

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::size_t dataset_rank(core::Dataset d) { return static_cast<std::size_t>(d); }

// Column position: evaluated languages first, others after in name order.
std::size_t language_rank(const std::string& lang) {
  const auto& eval = core::evaluated_languages();
  const auto it = std::find(eval.begin(), eval.end(), lang);
  return it == eval.end() ? eval.size() : static_cast<std::size_t>(it - eval.begin());
}

bool language_less(const std::string& a, const std::string& b) {
  const auto ra = language_rank(a), rb = language_rank(b);
  if (ra != rb) return ra < rb;
  return a < b;
}

Averages average_of(const std::vector<const Cell*>& cells) {
  Averages a;
  a.cells = cells.size();
  if (cells.empty()) return a;
  for (const Cell* c : cells) {
    a.native += c->tally.acc_native();
    a.translate += c->tally.acc_translate();
    a.classifier += c->tally.acc_classifier();
    a.oracle += c->tally.acc_oracle();
    a.translate_rate += c->tally.translate_rate();
  }
  const auto n = static_cast<double>(cells.size());
  a.native /= n;
  a.translate /= n;
  a.classifier /= n;
  a.oracle /= n;
  a.translate_rate /= n;
  return a;
}

void merge(Tally& into, const Tally& t) {
  into.n += t.n;
  into.native += t.native;
  into.translate += t.translate;
  into.classifier += t.classifier;
  into.oracle += t.oracle;
  into.routed_translate += t.routed_translate;
  into.native_unparsed += t.native_unparsed;
  into.translate_unparsed += t.translate_unparsed;
}

}  // namespace

void Tally::add(const RoutedPair& r) {
  ++n;
  native += r.native_correct;
  translate += r.translate_correct;
  classifier += r.classifier_correct();
  oracle += r.oracle_correct();
  routed_translate += r.decision == core::Route::translate;
  native_unparsed += r.native_unparsed;
  translate_unparsed += r.translate_unparsed;
}

double Tally::acc_native() const { return ratio(native, n); }
double Tally::acc_translate() const { return ratio(translate, n); }
double Tally::acc_classifier() const { return ratio(classifier, n); }
double Tally::acc_oracle() const { return ratio(oracle, n); }
double Tally::translate_rate() const { return ratio(routed_translate, n); }

std::vector<std::string> language_columns(const std::vector<std::string>& present) {
  std::vector<std::string> cols = core::evaluated_languages();
  std::set<std::string> extra;
  for (const auto& l : present) {
    if (language_rank(l) == cols.size()) extra.insert(l);
  }
  cols.insert(cols.end(), extra.begin(), extra.end());
  return cols;
}

EvalReport build_report(std::span<const RoutedPair> routed, WilcoxonMode mode) {
  if (routed.empty()) throw core::DataError("evaluation set is empty");

  using CellKey = std::tuple<std::string, std::size_t, std::string>;
  struct KeyLess {
    bool operator()(const CellKey& a, const CellKey& b) const {
      if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) < std::get<0>(b);
      if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) < std::get<1>(b);
      return language_less(std::get<2>(a), std::get<2>(b));
    }
  };
  std::map<CellKey, Cell, KeyLess> cells;
  for (const auto& r : routed) {
    auto& c = cells[{r.backbone, dataset_rank(r.dataset), r.language}];
    c.backbone = r.backbone;
    c.dataset = r.dataset;
    c.language = r.language;
    c.tally.add(r);
  }

  EvalReport report;
  for (auto& [key, cell] : cells) report.cells.push_back(std::move(cell));

  for (std::size_t i = 0; i < report.cells.size();) {
    const std::string& backbone = report.cells[i].backbone;
    BackboneSummary bs;
    bs.backbone = backbone;
    std::vector<const Cell*> all;
    std::size_t j = i;
    while (j < report.cells.size() && report.cells[j].backbone == backbone) {
      DatasetSummary ds;
      ds.backbone = backbone;
      ds.dataset = report.cells[j].dataset;
      std::vector<const Cell*> group;
      while (j < report.cells.size() && report.cells[j].backbone == backbone &&
             report.cells[j].dataset == ds.dataset) {
        group.push_back(&report.cells[j]);
        all.push_back(&report.cells[j]);
        merge(ds.pooled, report.cells[j].tally);
        ++j;
      }
      ds.average = average_of(group);
      merge(bs.pooled, ds.pooled);
      report.datasets.push_back(ds);
    }
    bs.average = average_of(all);
    report.backbones.push_back(bs);
    i = j;
  }

  const auto rows = accuracy_rows(report);
  for (const auto& bs : report.backbones) {
    for (const char* other : {"translate", "native"}) {
      Comparison c;
      c.backbone = bs.backbone;
      c.name = std::string("classifier vs ") + other;
      c.result = compare_methods(rows, bs.backbone, "classifier", other, mode);
      report.significance.push_back(c);
    }
  }
  return report;
}

std::vector<AccuracyRow> accuracy_rows(const EvalReport& report) {
  std::vector<AccuracyRow> rows;
  for (const auto& c : report.cells) {
    const std::string ds(core::to_string(c.dataset));
    rows.push_back({c.backbone, ds, c.language, "native", 100.0 * c.tally.acc_native()});
    rows.push_back({c.backbone, ds, c.language, "translate", 100.0 * c.tally.acc_translate()});
    rows.push_back({c.backbone, ds, c.language, "classifier", 100.0 * c.tally.acc_classifier()});
    rows.push_back({c.backbone, ds, c.language, "oracle", 100.0 * c.tally.acc_oracle()});
  }
  return rows;
}

std::vector<AccuracyRow> read_accuracy_table(std::istream& in, const std::string& source) {
  if (!in) throw core::InputError("cannot read " + source);
  std::string line;
  if (!std::getline(in, line)) throw core::DataError(source + ": empty accuracy table");
  const auto header = core::split_csv_line(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[std::string(core::trim_ascii(header[i]))] = i;
  for (const char* need : {"backbone", "dataset", "language", "method", "accuracy"}) {
    if (!col.count(need)) throw core::DataError(source + ": missing column '" + need + "'");
  }
  std::vector<AccuracyRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (core::trim_ascii(line).empty() || line.front() == '#') continue;
    const auto f = core::split_csv_line(line);
    if (f.size() != header.size()) {
      throw core::DataError(source + ": line " + std::to_string(lineno) + ": expected " +
                            std::to_string(header.size()) + " fields");
    }
    AccuracyRow r;
    r.backbone = f[col["backbone"]];
    r.dataset = f[col["dataset"]];
    r.language = f[col["language"]];
    r.method = f[col["method"]];
    if (r.language == "avg") continue;
    const auto v = core::parse_number(core::trim_ascii(f[col["accuracy"]]));
    if (!v) throw core::DataError(source + ": line " + std::to_string(lineno) + ": bad accuracy");
    r.accuracy = *v;
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<AccuracyRow> read_accuracy_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw core::InputError("cannot open " + path.string());
  return read_accuracy_table(in, path.string());
}

WilcoxonResult compare_methods(std::span<const AccuracyRow> rows, const std::string& backbone,
                               const std::string& method_a, const std::string& method_b,
                               WilcoxonMode mode) {
  std::map<std::pair<std::string, std::string>, std::pair<std::optional<double>, std::optional<double>>> cells;
  std::vector<std::pair<std::string, std::string>> order;
  for (const auto& r : rows) {
    if (r.backbone != backbone) continue;
    const auto key = std::make_pair(r.dataset, r.language);
    if (!cells.count(key)) order.push_back(key);
    auto& slot = cells[key];
    if (r.method == method_a) slot.first = r.accuracy;
    if (r.method == method_b) slot.second = r.accuracy;
  }
  std::vector<double> a, b;
  for (const auto& key : order) {
    const auto& [x, y] = cells[key];
    if (x && y) {
      a.push_back(*x);
      b.push_back(*y);
    }
  }
  if (a.empty()) {
    throw core::DataError("no cells carry both '" + method_a + "' and '" + method_b + "' for backbone '" +
                          backbone + "'");
  }
  return wilcoxon_signed_rank(a, b, mode);
}

std::string format_percent(double fraction) {
  const double tenths = std::round(fraction * 1000.0 + 1e-7);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", tenths / 10.0);
  return buf;
}

std::string format_p(double p) {
  char buf[32];
  if (p >= 5e-7) {
    std::snprintf(buf, sizeof buf, "%.6f", p);
  } else {
    std::snprintf(buf, sizeof buf, "%.2e", p);
  }
  return buf;
}

}  // namespace promptroute::eval
