#include <algorithm>
#include <map>
#include <ostream>

#include "promptroute/core/format.hpp"
#include "promptroute/quality/quality.hpp"

namespace promptroute::quality {

namespace {

struct Scored {
  const eval::RoutedPair* pair;
  double score;
};

std::vector<Scored> scored_sorted(std::span<const eval::RoutedPair> routed, const ScoreTable& scores,
                                  Metric metric) {
  std::vector<Scored> out;
  std::vector<std::string> missing;
  out.reserve(routed.size());
  for (const auto& r : routed) {
    const auto s = scores.get(r.key(), metric);
    if (!s) {
      missing.push_back(r.key());
      continue;
    }
    out.push_back({&r, *s});
  }
  if (!missing.empty()) {
    std::string msg = std::to_string(missing.size()) + " pair(s) without a " + std::string(to_string(metric)) +
                      " score:";
    for (std::size_t i = 0; i < std::min<std::size_t>(missing.size(), 10); ++i) msg += " " + missing[i];
    if (missing.size() > 10) msg += " ...";
    throw MissingScores(msg, missing);
  }
  std::sort(out.begin(), out.end(), [](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score < b.score;
    return a.pair->key() < b.pair->key();
  });
  return out;
}

// ceil(p * n / 100)
std::size_t bottom_count(int percentile, std::size_t n) {
  return (static_cast<std::size_t>(percentile) * n + 99) / 100;
}

std::string_view level_name(core::ResourceLevel l) { return core::to_string(l); }

}  // namespace

PercentileTable percentile_table(std::span<const eval::RoutedPair> routed, const ScoreTable& scores,
                                 Metric metric, bool per_language) {
  const auto sorted = scored_sorted(routed, scores, metric);
  PercentileTable table;
  table.metric = metric;
  if (!routed.empty()) {
    table.backbone = routed.front().backbone;
    table.dataset = routed.front().dataset;
  }
  std::map<std::string, std::vector<const eval::RoutedPair*>> by_language;
  if (per_language) {
    for (const auto& s : sorted) by_language[s.pair->language].push_back(s.pair);
  }
  for (int p = 10; p <= 100; p += 10) {
    PercentileRow row;
    row.percentile = p;
    if (per_language) {
      for (const auto& [lang, list] : by_language) {
        const std::size_t k = bottom_count(p, list.size());
        for (std::size_t i = 0; i < k; ++i) row.tally.add(*list[i]);
      }
    } else {
      const std::size_t k = bottom_count(p, sorted.size());
      for (std::size_t i = 0; i < k; ++i) row.tally.add(*sorted[i].pair);
    }
    table.rows.push_back(row);
  }
  return table;
}

std::vector<PercentileTable> percentile_tables(std::span<const eval::RoutedPair> routed,
                                               const ScoreTable& scores, Metric metric, bool per_language) {
  std::map<std::pair<std::string, core::Dataset>, std::vector<eval::RoutedPair>> groups;
  for (const auto& r : routed) groups[{r.backbone, r.dataset}].push_back(r);
  std::vector<PercentileTable> out;
  for (const auto& [key, list] : groups) {
    auto t = percentile_table(list, scores, metric, per_language);
    t.backbone = key.first;
    t.dataset = key.second;
    out.push_back(std::move(t));
  }
  return out;
}

std::array<double, 10> ResourceBins::percent(std::size_t level_index) const {
  std::array<double, 10> out{};
  std::size_t total = 0;
  for (auto c : counts[level_index]) total += c;
  if (total == 0) return out;
  for (std::size_t b = 0; b < 10; ++b) {
    out[b] = 100.0 * static_cast<double>(counts[level_index][b]) / static_cast<double>(total);
  }
  return out;
}

ResourceBins resource_bin_distribution(std::span<const eval::RoutedPair> routed, const ScoreTable& scores,
                                       Metric metric, const core::ResourceMap& resources) {
  ResourceBins bins;
  bins.metric = metric;
  if (!routed.empty()) {
    bins.backbone = routed.front().backbone;
    bins.dataset = routed.front().dataset;
  }
  std::vector<eval::RoutedPair> mapped;
  std::vector<core::ResourceLevel> level_of;
  for (const auto& r : routed) {
    const auto level = resources.lookup(r.language).level;
    if (!level) {
      ++bins.unmapped;
      continue;
    }
    mapped.push_back(r);
  }
  const auto sorted = scored_sorted(mapped, scores, metric);
  std::map<core::ResourceLevel, std::array<std::size_t, 10>> counts;
  const std::size_t n = sorted.size();
  for (std::size_t rank = 0; rank < n; ++rank) {
    const auto level = *resources.lookup(sorted[rank].pair->language).level;
    auto& row = counts.try_emplace(level).first->second;
    ++row[rank * 10 / n];
  }
  for (const auto level : core::kAllResourceLevels) {
    const auto it = counts.find(level);
    if (it == counts.end()) continue;
    bins.levels.push_back(level);
    bins.counts.push_back(it->second);
  }
  return bins;
}

void write_percentile_csv(std::ostream& out, std::span<const PercentileTable> tables) {
  out << "backbone,dataset,metric,percentile,n,acc_native,acc_translate,acc_classifier,gap,translate_rate\n";
  for (const auto& t : tables) {
    for (const auto& r : t.rows) {
      out << core::csv_field(t.backbone) << ',' << core::to_string(t.dataset) << ',' << to_string(t.metric) << ','
          << r.percentile << ',' << r.tally.n << ',' << core::shortest(100.0 * r.tally.acc_native()) << ','
          << core::shortest(100.0 * r.tally.acc_translate()) << ','
          << core::shortest(100.0 * r.tally.acc_classifier()) << ',' << core::shortest(100.0 * r.gap()) << ','
          << core::shortest(100.0 * r.tally.translate_rate()) << '\n';
    }
  }
}

void write_percentile_markdown(std::ostream& out, std::span<const PercentileTable> tables) {
  std::map<std::pair<core::Dataset, Metric>, std::vector<const PercentileTable*>> groups;
  for (const auto& t : tables) groups[{t.dataset, t.metric}].push_back(&t);
  bool first_group = true;
  for (const auto& [key, list] : groups) {
    if (!first_group) out << '\n';
    first_group = false;
    out << "### " << core::to_string(key.first) << " by " << to_string(key.second) << " percentile\n\n";
    static const char* measures[] = {"Native", "Translate", "Classifier", "Gap (T-N)", "Trans Rate (%)"};
    out << "| |";
    for (const char* m : measures) {
      out << ' ' << m << " |";
      for (std::size_t i = 1; i < list.size(); ++i) out << " |";
    }
    out << "\n|---|";
    for (std::size_t i = 0; i < 5 * list.size(); ++i) out << "---|";
    out << "\n| **Quality Percentile** |";
    for (int m = 0; m < 5; ++m) {
      for (const auto* t : list) out << " **" << t->backbone << "** |";
    }
    out << '\n';
    for (std::size_t row = 0; row < 10; ++row) {
      out << "| " << list.front()->rows[row].percentile << "% |";
      for (int m = 0; m < 5; ++m) {
        for (const auto* t : list) {
          const auto& r = t->rows[row];
          double v = 0.0;
          switch (m) {
            case 0: v = r.tally.acc_native(); break;
            case 1: v = r.tally.acc_translate(); break;
            case 2: v = r.tally.acc_classifier(); break;
            case 3: v = r.gap(); break;
            default: v = r.tally.translate_rate(); break;
          }
          out << ' ' << eval::format_percent(v) << " |";
        }
      }
      out << '\n';
    }
  }
}

void write_resource_bins_csv(std::ostream& out, std::span<const ResourceBins> bins) {
  out << "backbone,dataset,metric,level,n";
  for (int b = 0; b < 10; ++b) out << ",bin" << b;
  out << '\n';
  for (const auto& rb : bins) {
    for (std::size_t i = 0; i < rb.levels.size(); ++i) {
      std::size_t total = 0;
      for (auto c : rb.counts[i]) total += c;
      out << core::csv_field(rb.backbone) << ',' << core::to_string(rb.dataset) << ',' << to_string(rb.metric)
          << ',' << level_name(rb.levels[i]) << ',' << total;
      for (double p : rb.percent(i)) out << ',' << core::shortest(p);
      out << '\n';
    }
  }
}

}  // namespace promptroute::quality
