#include <map>
#include <ostream>
#include <set>

#include "promptroute/core/format.hpp"
#include "promptroute/core/resource.hpp"
#include "promptroute/eval/report.hpp"

namespace promptroute::eval {

namespace {

std::string pct(double fraction) { return core::shortest(100.0 * fraction); }

std::string_view display_name(core::Dataset d) {
  switch (d) {
    case core::Dataset::global_mmlu:
      return "Global-MMLU";
    case core::Dataset::mmlu_prox:
      return "MMLU-ProX";
    case core::Dataset::xquad:
      return "XQuAD";
    case core::Dataset::mcsqa:
      return "mCSQA";
    case core::Dataset::xcopa:
      return "XCOPA";
    case core::Dataset::custom:
      return "custom";
  }
  return "?";
}

std::string resource_of(const std::string& lang) {
  const auto level = core::ResourceMap().lookup(lang).level;
  return level ? std::string(core::to_string(*level)) : std::string();
}

std::string group_title(const std::string& lang) {
  const auto level = core::ResourceMap().lookup(lang).level;
  if (!level) return "Other";
  switch (*level) {
    case core::ResourceLevel::high:
      return "High-Resource";
    case core::ResourceLevel::mid:
      return "Mid-Resource";
    case core::ResourceLevel::low:
      return "Low-Resource";
  }
  return "Other";
}

void tally_columns(std::ostream& out, const Tally& t) {
  out << t.n << ',' << pct(t.acc_native()) << ',' << pct(t.acc_translate()) << ','
      << pct(t.acc_classifier()) << ',' << pct(t.acc_oracle()) << ',' << pct(t.translate_rate()) << ','
      << t.native_unparsed << ',' << t.translate_unparsed << '\n';
}

void average_columns(std::ostream& out, const Averages& a, const Tally& pooled) {
  out << pooled.n << ',' << pct(a.native) << ',' << pct(a.translate) << ',' << pct(a.classifier) << ','
      << pct(a.oracle) << ',' << pct(a.translate_rate) << ',' << pooled.native_unparsed << ','
      << pooled.translate_unparsed << '\n';
}

// Header rows shared by the accuracy and selection-rate tables.
void table_header(std::ostream& out, const std::vector<std::string>& langs, const char* first,
                  const char* second) {
  out << "| |" << (second ? " |" : "");
  std::string prev;
  for (const auto& l : langs) {
    const auto g = group_title(l);
    out << (g != prev ? " " + g + " |" : std::string(" |"));
    prev = g;
  }
  out << " |\n|---|" << (second ? "---|" : "");
  for (std::size_t i = 0; i < langs.size(); ++i) out << "---|";
  out << "---|\n| **" << first << "** |";
  if (second) out << " **" << second << "** |";
  for (const auto& l : langs) out << " **" << l << "** |";
  out << " **Avg** |\n";
}

}  // namespace

void write_report_csv(std::ostream& out, const EvalReport& report) {
  out << "backbone,dataset,language,resource,n,acc_native,acc_translate,acc_classifier,acc_oracle,"
         "translate_rate,native_unparsed,translate_unparsed\n";
  for (const auto& c : report.cells) {
    out << core::csv_field(c.backbone) << ',' << core::to_string(c.dataset) << ','
        << core::csv_field(c.language) << ',' << resource_of(c.language) << ',';
    tally_columns(out, c.tally);
  }
  for (const auto& d : report.datasets) {
    out << core::csv_field(d.backbone) << ',' << core::to_string(d.dataset) << ",avg,,";
    average_columns(out, d.average, d.pooled);
  }
  for (const auto& b : report.backbones) {
    out << core::csv_field(b.backbone) << ",all,avg,,";
    average_columns(out, b.average, b.pooled);
    out << core::csv_field(b.backbone) << ",all,pooled,,";
    tally_columns(out, b.pooled);
  }
}

void write_accuracy_csv(std::ostream& out, const EvalReport& report) {
  out << "backbone,dataset,language,method,accuracy\n";
  for (const auto& r : accuracy_rows(report)) {
    out << core::csv_field(r.backbone) << ',' << r.dataset << ',' << core::csv_field(r.language) << ','
        << r.method << ',' << core::shortest(r.accuracy) << '\n';
  }
}

void write_significance_csv(std::ostream& out, std::span<const Comparison> comparisons) {
  out << "backbone,comparison,W,p,n_pairs,n_nonzero,ties,method\n";
  for (const auto& c : comparisons) {
    out << core::csv_field(c.backbone) << ',' << core::csv_field(c.name) << ',' << core::shortest(c.result.W)
        << ',' << core::shortest(c.result.p) << ',' << c.result.n << ',' << c.result.n_eff << ','
        << (c.result.ties ? "true" : "false") << ',' << to_string(c.result.method) << '\n';
  }
}

void write_report_markdown(std::ostream& out, const EvalReport& report) {
  bool first_section = true;
  for (const auto& bs : report.backbones) {
    std::vector<std::string> present;
    std::map<std::pair<core::Dataset, std::string>, const Cell*> by_cell;
    std::vector<core::Dataset> datasets;
    for (const auto& c : report.cells) {
      if (c.backbone != bs.backbone) continue;
      present.push_back(c.language);
      by_cell[{c.dataset, c.language}] = &c;
      if (datasets.empty() || datasets.back() != c.dataset) datasets.push_back(c.dataset);
    }
    const auto langs = language_columns(present);
    std::map<core::Dataset, const DatasetSummary*> summary;
    for (const auto& d : report.datasets) {
      if (d.backbone == bs.backbone) summary[d.dataset] = &d;
    }

    if (!first_section) out << '\n';
    first_section = false;
    out << "## " << bs.backbone << "\n\n### Accuracy (%)\n\n";
    table_header(out, langs, "Dataset", "Method");
    struct MethodCol {
      const char* name;
      double (Tally::*acc)() const;
      double Averages::*avg;
    };
    const MethodCol methods[] = {{"Native", &Tally::acc_native, &Averages::native},
                                 {"Translate", &Tally::acc_translate, &Averages::translate},
                                 {"Classifier", &Tally::acc_classifier, &Averages::classifier},
                                 {"Oracle", &Tally::acc_oracle, &Averages::oracle}};
    for (const auto ds : datasets) {
      bool first = true;
      for (const auto& m : methods) {
        out << (first ? "| " + std::string(display_name(ds)) + " |" : std::string("| |")) << ' ' << m.name << " |";
        first = false;
        for (const auto& l : langs) {
          const auto it = by_cell.find({ds, l});
          out << ' ' << (it == by_cell.end() ? std::string("--") : format_percent((it->second->tally.*m.acc)()))
              << " |";
        }
        out << ' ' << format_percent(summary.at(ds)->average.*m.avg) << " |\n";
      }
    }
    out << "\nAll datasets (unweighted over " << bs.average.cells << " cells): Native "
        << format_percent(bs.average.native) << ", Translate " << format_percent(bs.average.translate)
        << ", Classifier " << format_percent(bs.average.classifier) << ", Oracle "
        << format_percent(bs.average.oracle) << ". Pooled over " << bs.pooled.n << " pairs: Native "
        << format_percent(bs.pooled.acc_native()) << ", Translate " << format_percent(bs.pooled.acc_translate())
        << ", Classifier " << format_percent(bs.pooled.acc_classifier()) << ", Oracle "
        << format_percent(bs.pooled.acc_oracle()) << ".\n";
    if (bs.pooled.native_unparsed + bs.pooled.translate_unparsed > 0) {
      out << "Unparsed responses (scored wrong): native " << bs.pooled.native_unparsed << ", translate "
          << bs.pooled.translate_unparsed << ".\n";
    }

    out << "\n### Translate selection rate (%)\n\n";
    table_header(out, langs, "Dataset", nullptr);
    for (const auto ds : datasets) {
      out << "| " << display_name(ds) << " |";
      for (const auto& l : langs) {
        const auto it = by_cell.find({ds, l});
        out << ' ' << (it == by_cell.end() ? std::string("--") : format_percent(it->second->tally.translate_rate()))
            << " |";
      }
      out << ' ' << format_percent(summary.at(ds)->average.translate_rate) << " |\n";
    }

    std::vector<Comparison> sig;
    for (const auto& c : report.significance) {
      if (c.backbone == bs.backbone) sig.push_back(c);
    }
    if (!sig.empty()) {
      out << "\n### Wilcoxon signed-rank (all datasets combined)\n\n"
          << "| Comparison | W | Cells | Nonzero | Method | p-value |\n|---|---|---|---|---|---|\n";
      for (const auto& c : sig) {
        out << "| " << c.name << " | " << core::shortest(c.result.W) << " | " << c.result.n << " | "
            << c.result.n_eff << " | " << to_string(c.result.method) << " | " << format_p(c.result.p) << " |\n";
      }
    }
  }
}

}  // namespace promptroute::eval
