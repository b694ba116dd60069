#pragma once

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "promptroute/eval/report.hpp"

namespace promptroute::testing {

struct CellMarginals {
  core::Dataset dataset = core::Dataset::custom;
  std::string language;
  double native = 0, translate = 0, classifier = 0, oracle = 0;  // percent
};

// Routed pairs whose per-cell accuracies are exactly the given percentages
// (n pairs per cell; percentages must be multiples of 100/n).
inline std::vector<eval::RoutedPair> marginals_log(const std::vector<CellMarginals>& cells,
                                                   const std::string& backbone, int n = 1000) {
  std::vector<eval::RoutedPair> out;
  const auto count = [n](double pct) { return static_cast<int>(std::lround(pct * n / 100.0)); };
  for (const auto& c : cells) {
    const int a = count(c.native), t = count(c.translate), k = count(c.classifier), o = count(c.oracle);
    const int both = a + t - o;
    const int n_only = a - both, t_only = t - both;
    int extra = k - both;  // exclusives the router must get right
    if (both < 0 || n_only < 0 || t_only < 0 || o > n || extra < 0 || extra > n_only + t_only) {
      throw std::invalid_argument("inconsistent marginals for " + c.language);
    }
    int idx = 0;
    const auto push = [&](bool nc, bool tc, core::Route d) {
      eval::RoutedPair r;
      r.id = c.language + "-" + std::to_string(idx++);
      r.backbone = backbone;
      r.dataset = c.dataset;
      r.language = c.language;
      r.native_correct = nc;
      r.translate_correct = tc;
      r.decision = d;
      r.p_translate = d == core::Route::translate ? 0.75 : 0.25;
      out.push_back(r);
    };
    for (int i = 0; i < both; ++i) push(true, true, core::Route::native);
    for (int i = 0; i < t_only; ++i) {
      const bool right = extra > 0;
      if (right) --extra;
      push(false, true, right ? core::Route::translate : core::Route::native);
    }
    for (int i = 0; i < n_only; ++i) {
      const bool right = extra > 0;
      if (right) --extra;
      push(true, false, right ? core::Route::native : core::Route::translate);
    }
    for (int i = 0; i < n - o; ++i) push(false, false, core::Route::native);
  }
  return out;
}

// Cells of one backbone from a long-form published table; `router` names the
// method used as the classifier row.
inline std::vector<CellMarginals> published_cells(const std::vector<eval::AccuracyRow>& rows,
                                                  const std::string& backbone, const std::string& router) {
  std::map<std::pair<std::string, std::string>, CellMarginals> cells;
  std::vector<std::pair<std::string, std::string>> order;
  for (const auto& r : rows) {
    if (r.backbone != backbone) continue;
    const auto key = std::make_pair(r.dataset, r.language);
    if (!cells.count(key)) {
      order.push_back(key);
      cells[key].dataset = *core::parse_dataset(r.dataset);
      cells[key].language = r.language;
    }
    auto& c = cells[key];
    if (r.method == "native") c.native = r.accuracy;
    if (r.method == "translate") c.translate = r.accuracy;
    if (r.method == router) c.classifier = r.accuracy;
    if (r.method == "oracle") c.oracle = r.accuracy;
  }
  std::vector<CellMarginals> out;
  for (const auto& k : order) out.push_back(cells[k]);
  return out;
}

}  // namespace promptroute::testing
