// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any FAIL.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>

#include "promptroute/cli/app.hpp"
#include "promptroute/core/rng.hpp"
#include "promptroute/eval/report.hpp"
#include "promptroute/eval/wilcoxon.hpp"
#include "promptroute/featurize/features.hpp"
#include "promptroute/ingest/ingest.hpp"
#include "promptroute/learners/model.hpp"
#include "promptroute/quality/quality.hpp"
#include "support/marginals.hpp"
#include "support/paths.hpp"
#include "support/records.hpp"
#include "support/stump_oracle.hpp"
#include "synth/synth.hpp"

using namespace promptroute;
using core::Route;
using core::Strategy;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

std::string fmt(double v, int digits = 6) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

// ---- 1. published accuracies through the signed-rank test
Check wilcoxon_reproduction() {
  Check c;
  const auto rows = eval::read_accuracy_table(testing::fixture("published_accuracy.csv"));
  const struct {
    const char* other;
    double published;
  } cases[] = {{"translate", 0.000873}, {"native", 0.000006}};
  std::string got;
  for (const auto& e : cases) {
    const auto r = eval::compare_methods(rows, "ds", "xgboost", e.other);
    got += std::string(got.empty() ? "" : ", ") + "vs " + e.other + " p=" + fmt(r.p, 3) + " n=" + std::to_string(r.n);
    c.require(r.n == 28, std::string("expected 28 paired cells vs ") + e.other);
    c.require(r.p / e.published < 2.0 && e.published / r.p < 2.0,
              std::string("p outside a factor of 2 vs ") + e.other + ": " + fmt(r.p));
    c.require(r.p < 0.001, std::string("p not below 0.001 vs ") + e.other);
  }
  if (c.ok) c.detail = got;
  return c;
}

// ---- 2. oracle dominance on random routed logs
Check oracle_dominance() {
  Check c;
  core::Rng rng(2);
  const char* langs[] = {"zh", "es", "hi", "sw", "yo", "xx"};
  const core::Dataset datasets[] = {core::Dataset::global_mmlu, core::Dataset::xquad, core::Dataset::xcopa,
                                    core::Dataset::mcsqa};
  std::size_t cells = 0;
  for (int log_i = 0; log_i < 1000; ++log_i) {
    std::vector<eval::RoutedPair> log;
    const auto n = 1 + rng.below(150);
    const double pn = rng.uniform(), pt = rng.uniform(), pr = rng.uniform();
    for (std::size_t i = 0; i < n; ++i) {
      eval::RoutedPair r;
      r.id = "r" + std::to_string(i);
      r.backbone = rng.bernoulli(0.5) ? "ds" : "llama";
      r.dataset = datasets[rng.below(4)];
      r.language = langs[rng.below(6)];
      r.native_correct = rng.bernoulli(pn);
      r.translate_correct = rng.bernoulli(pt);
      r.decision = rng.bernoulli(pr) ? Route::translate : Route::native;
      log.push_back(r);
    }
    const auto report = eval::build_report(log);
    for (const auto& cell : report.cells) {
      ++cells;
      const auto& t = cell.tally;
      c.require(t.acc_oracle() >= std::max(t.acc_native(), t.acc_translate()),
                "oracle below a fixed strategy in log " + std::to_string(log_i));
      c.require(t.acc_classifier() <= t.acc_oracle(), "classifier above oracle in log " + std::to_string(log_i));
    }
  }
  if (c.ok) c.detail = "1000 logs, " + std::to_string(cells) + " cells";
  return c;
}

// ---- 3. learned routing end to end through the CLI on a planted corpus
Check learned_routing() {
  Check c;
  const auto dir = testing::scratch_dir("acceptance_routing");
  synth::CorpusSpec spec;
  spec.per_language = 250;  // 2,500 pairs
  spec.seed = 11;
  synth::write_demo(dir, spec);
  const std::string cfg = (dir / "demo.toml").string();
  const char* argv[] = {"promptroute", "--config", cfg.c_str(), "all"};
  std::ostringstream out, err;
  const int code = cli::run(4, argv, out, err);
  if (code != 0) {
    c.require(false, "pipeline exit " + std::to_string(code) + ": " + err.str());
    return c;
  }
  const auto routed = eval::read_routed(dir / "out" / "routed.jsonl");
  auto planted = routed;
  for (auto& r : planted) r.decision = synth::planted_route(spec, r.language);
  const auto learned = eval::build_report(routed).backbones.at(0).average;
  const auto rule = eval::build_report(planted).backbones.at(0).average;
  const double best_fixed = std::max(learned.native, learned.translate);
  const double closed = (learned.classifier - best_fixed) / (rule.classifier - best_fixed);
  c.require(learned.classifier - learned.native >= 0.05, "classifier not 5 points above native");
  c.require(learned.classifier - learned.translate >= 0.05, "classifier not 5 points above translate");
  c.require(closed >= 0.90, "gap closed " + fmt(closed, 3));
  c.detail = "pairs=" + std::to_string(spec.per_language * 10) + " eval=" + std::to_string(routed.size()) +
             " native=" + eval::format_percent(learned.native) + " translate=" +
             eval::format_percent(learned.translate) + " classifier=" + eval::format_percent(learned.classifier) +
             " planted-rule=" + eval::format_percent(rule.classifier) + " oracle=" +
             eval::format_percent(learned.oracle) + " gap closed=" + fmt(100 * closed, 3) + "%";
  return c;
}

// ---- 4. stump equivalence
Check stump_equivalence() {
  Check c;
  core::Rng rng(4);
  int splits = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto inst = testing::random_stump_instance(rng);
    const auto m = learners::train_gbdt(inst.X, inst.y, testing::stump_config(inst));
    const auto oracle = testing::brute_force_stump(inst);
    c.require(testing::stump_matches(m, oracle), "mismatch on instance " + std::to_string(trial));
    splits += oracle.feature.has_value();
  }
  if (c.ok) c.detail = "200 instances, " + std::to_string(splits) + " with a split";
  return c;
}

// ---- 5. MLP gradient check
Check gradient_check() {
  Check c;
  core::Rng rng(5);
  double worst_all = 0.0;
  for (int config = 0; config < 20; ++config) {
    learners::MlpModel net;
    const std::size_t inputs = 2 + rng.below(8);
    std::size_t in = inputs;
    std::vector<std::size_t> widths;
    for (std::size_t k = 0, depth = 1 + rng.below(3); k < depth; ++k) widths.push_back(2 + rng.below(6));
    widths.push_back(1);
    for (const std::size_t w : widths) {
      learners::DenseLayer L;
      L.in = in;
      L.out = w;
      for (std::size_t k = 0; k < in * w; ++k) L.weights.push_back(rng.uniform(-1, 1));
      for (std::size_t k = 0; k < w; ++k) L.bias.push_back(rng.uniform(-0.5, 0.5));
      net.layers.push_back(L);
      in = w;
    }
    std::vector<std::vector<double>> X;
    std::vector<int> y;
    for (std::size_t r = 0, rows = 3 + rng.below(8); r < rows; ++r) {
      std::vector<double> row(inputs);
      for (double& v : row) v = rng.uniform(-2, 2);
      X.push_back(row);
      y.push_back(static_cast<int>(rng.below(2)));
    }
    const double alpha = rng.bernoulli(0.5) ? 1e-4 : 1e-2;
    const auto lg = learners::mlp_loss_gradient(net, X, y, alpha);
    const auto params = learners::flatten_parameters(net);
    const double h = 1e-6;
    for (std::size_t k = 0; k < params.size(); ++k) {
      auto p = params;
      p[k] = params[k] + h;
      learners::assign_parameters(net, p);
      const double up = learners::mlp_loss_gradient(net, X, y, alpha).loss;
      p[k] = params[k] - h;
      learners::assign_parameters(net, p);
      const double down = learners::mlp_loss_gradient(net, X, y, alpha).loss;
      const double numeric = (up - down) / (2 * h);
      const double err =
          std::abs(numeric - lg.gradient[k]) / std::max({std::abs(numeric), std::abs(lg.gradient[k]), 1e-4});
      worst_all = std::max(worst_all, err);
    }
    learners::assign_parameters(net, params);
  }
  c.require(worst_all <= 1e-5, "max relative error " + fmt(worst_all));
  if (c.ok) c.detail = "20 configurations, max relative error " + fmt(worst_all, 3);
  return c;
}

// Naive chrF for cross-checking: per-order clipped n-gram matches over the
// whitespace-stripped byte string (ASCII inputs only), orders 1..6, beta 2.
double naive_chrf(const std::string& hyp, const std::string& ref) {
  auto strip = [](const std::string& s) {
    std::string o;
    for (char ch : s) {
      if (ch != ' ') o += ch;
    }
    return o;
  };
  const auto h = strip(hyp), r = strip(ref);
  double p_sum = 0, r_sum = 0;
  int orders = 0;
  for (std::size_t n = 1; n <= 6; ++n) {
    if (h.size() < n || r.size() < n) continue;
    std::map<std::string, int> hc, rc;
    for (std::size_t i = 0; i + n <= h.size(); ++i) ++hc[h.substr(i, n)];
    for (std::size_t i = 0; i + n <= r.size(); ++i) ++rc[r.substr(i, n)];
    int match = 0;
    for (const auto& [g, k] : hc) {
      const auto it = rc.find(g);
      if (it != rc.end()) match += std::min(k, it->second);
    }
    p_sum += static_cast<double>(match) / static_cast<double>(h.size() - n + 1);
    r_sum += static_cast<double>(match) / static_cast<double>(r.size() - n + 1);
    ++orders;
  }
  if (orders == 0) return 0.0;
  const double P = p_sum / orders, R = r_sum / orders;
  if (P + R == 0) return 0.0;
  return 100.0 * 5.0 * P * R / (4.0 * P + R);
}

// ---- 6. chrF and rank-only percentile invariance
Check chrf_checks() {
  Check c;
  c.require(quality::chrf("The cat sat on the mat.", "The cat sat on the mat.") == 100.0, "identity is not 100");
  c.require(quality::chrf("abcd", "wxyz") == 0.0, "disjoint is not 0");
  const double catcap = quality::chrf("cat", "cap");
  c.require(std::fabs(catcap - naive_chrf("cat", "cap")) <= 1e-6, "cat/cap differs from the naive count");
  c.require(std::fabs(catcap - 100.0 * 7.0 / 18.0) <= 1e-6, "cat/cap differs from 700/18");
  core::Rng rng(6);
  const char alphabet[] = "abcd e";
  for (int i = 0; i < 300; ++i) {
    std::string a, b;
    for (auto k = 1 + rng.below(14); k > 0; --k) a.push_back(alphabet[rng.below(6)]);
    for (auto k = 1 + rng.below(14); k > 0; --k) b.push_back(alphabet[rng.below(6)]);
    c.require(std::fabs(quality::chrf(a, b) - naive_chrf(a, b)) <= 1e-6, "naive mismatch on '" + a + "'/'" + b + "'");
  }

  for (int trial = 0; trial < 30; ++trial) {
    std::vector<eval::RoutedPair> pairs;
    const auto n = 20 + rng.below(300);
    for (std::size_t i = 0; i < n; ++i) {
      eval::RoutedPair r;
      r.id = "q" + std::to_string(i);
      r.backbone = "ds";
      r.dataset = core::Dataset::global_mmlu;
      r.language = i % 2 ? "sw" : "de";
      r.native_correct = rng.bernoulli(0.6);
      r.translate_correct = rng.bernoulli(0.7);
      r.decision = rng.bernoulli(0.4) ? Route::translate : Route::native;
      pairs.push_back(r);
    }
    quality::ScoreTable base, shifted;
    const double scale = rng.uniform(0.5, 3.0), shift = rng.uniform(-50, 50);
    for (const auto& p : pairs) {
      const double s = static_cast<double>(rng.below(100000)) / 1000.0;
      base.set(p.key(), quality::Metric::chrf, s, quality::ScoreSource::computed);
      shifted.set(p.key(), quality::Metric::chrf, s * scale + shift, quality::ScoreSource::computed);
    }
    for (bool per_language : {false, true}) {
      const auto a = quality::percentile_table(pairs, base, quality::Metric::chrf, per_language);
      const auto b = quality::percentile_table(pairs, shifted, quality::Metric::chrf, per_language);
      for (std::size_t i = 0; i < a.rows.size(); ++i) {
        const auto &x = a.rows[i].tally, &y = b.rows[i].tally;
        c.require(x.n == y.n && x.native == y.native && x.translate == y.translate && x.classifier == y.classifier &&
                      x.routed_translate == y.routed_translate,
                  "percentile row " + std::to_string(i) + " moved under an affine shift");
      }
    }
  }
  if (c.ok) c.detail = "cat/cap=" + fmt(catcap, 12) + ", 300 naive cross-checks, 30 affine shifts";
  return c;
}

// ---- 7. cumulative percentile consistency
Check percentile_consistency() {
  Check c;
  core::Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<eval::RoutedPair> pairs;
    for (std::size_t i = 0, n = 1 + rng.below(400); i < n; ++i) {
      eval::RoutedPair r;
      r.id = "q" + std::to_string(i);
      r.backbone = "ds";
      r.dataset = core::Dataset::global_mmlu;
      r.language = core::evaluated_languages()[rng.below(10)];
      r.native_correct = rng.bernoulli(0.5);
      r.translate_correct = rng.bernoulli(0.6);
      r.decision = rng.bernoulli(0.3) ? Route::translate : Route::native;
      pairs.push_back(r);
    }
    quality::ScoreTable scores;
    for (const auto& p : pairs) {
      scores.set(p.key(), quality::Metric::chrf, rng.uniform(0, 100), quality::ScoreSource::computed);
    }
    const auto pooled = eval::build_report(pairs).datasets.front().pooled;
    for (bool per_language : {false, true}) {
      const auto table = quality::percentile_table(pairs, scores, quality::Metric::chrf, per_language);
      const auto& top = table.rows.back();
      c.require(top.tally.acc_native() == pooled.acc_native() && top.tally.acc_translate() == pooled.acc_translate() &&
                    top.tally.acc_classifier() == pooled.acc_classifier() &&
                    top.tally.translate_rate() == pooled.translate_rate(),
                "100% row differs from the overall statistics in trial " + std::to_string(trial));
    }
  }

  const auto rows = eval::read_accuracy_table(testing::fixture("published_accuracy.csv"));
  std::vector<testing::CellMarginals> gm;
  for (const auto& cell : testing::published_cells(rows, "ds", "xgboost")) {
    if (cell.dataset == core::Dataset::global_mmlu) gm.push_back(cell);
  }
  const auto log = testing::marginals_log(gm, "ds");
  quality::ScoreTable scores;
  core::Rng srng(70);
  for (const auto& p : log) scores.set(p.key(), quality::Metric::chrf, srng.uniform(0, 100), quality::ScoreSource::computed);
  const auto table = quality::percentile_table(log, scores, quality::Metric::chrf);
  const auto& top = table.rows.back().tally;
  const auto avg = eval::build_report(log).datasets.front().average;
  const auto n = eval::format_percent(top.acc_native()), t = eval::format_percent(top.acc_translate()),
             k = eval::format_percent(top.acc_classifier());
  c.require(n == "72.5" && t == "81.7" && k == "82.3", "published 100% row gave " + n + "/" + t + "/" + k);
  c.require(n == eval::format_percent(avg.native) && t == eval::format_percent(avg.translate) &&
                k == eval::format_percent(avg.classifier),
            "100% row differs from the Avg column");
  if (c.ok) c.detail = "100 random logs exact; published DS row " + n + " / " + t + " / " + k;
  return c;
}

// ---- 8. label construction from response text
Check label_construction() {
  Check c;
  std::vector<core::ResponseRecord> log;
  const struct {
    const char* tag;
    bool native, translate;
  } combos[] = {{"tt", true, true}, {"tf", true, false}, {"ft", false, true}, {"ff", false, false}};
  for (int copy = 0; copy < 2; ++copy) {
    for (const auto& combo : combos) {
      const std::string id = std::string(combo.tag) + "-" + std::to_string(copy);
      for (const auto& [strategy, ok] : {std::pair{Strategy::native, combo.native}, {Strategy::translate, combo.translate}}) {
        auto r = testing::mc_record(id, strategy, "C");
        r.response_text = std::string("Reasoning here.\nAnswer ") + (ok ? "C" : "A");
        log.push_back(r);
      }
    }
  }
  ingest::parse_and_score(log);
  const auto pairs = ingest::build_pairs_and_labels(log);
  std::size_t labeled = 0, discarded = 0;
  for (const auto& p : pairs) {
    const auto tag = p.id.substr(0, 2);
    if (p.label) {
      ++labeled;
      c.require((tag == "tf" && *p.label == Route::native) || (tag == "ft" && *p.label == Route::translate),
                "wrong label on " + p.id);
    } else {
      ++discarded;
      c.require(tag == "tt" || tag == "ff", "missing label on " + p.id);
    }
  }
  c.require(pairs.size() == 8, "expected 8 pairs, got " + std::to_string(pairs.size()));
  c.require(labeled == 4 && discarded == 4, "labeled " + std::to_string(labeled) + ", discarded " + std::to_string(discarded));
  if (c.ok) c.detail = "8 instances: 4 labeled, 4 discarded";
  return c;
}

// ---- 9. determinism and serialization
Check determinism() {
  Check c;
  synth::CorpusSpec spec;
  spec.per_language = 30;
  auto corpus = synth::make_corpus(spec);
  ingest::parse_and_score(corpus.records);
  const auto pairs = ingest::build_pairs_and_labels(corpus.records);
  auto matrix_bytes = [&](unsigned threads) {
    const auto enc = featurize::FeatureEncoder::fit(pairs);
    std::ostringstream out;
    featurize::write_matrix(out, featurize::featurize_all(pairs, enc, {}, threads), featurize::MatrixFormat::csv);
    return out.str();
  };
  c.require(matrix_bytes(1) == matrix_bytes(4), "feature matrices differ");

  const auto enc = featurize::FeatureEncoder::fit(pairs);
  const auto m = featurize::featurize_all(pairs, enc, {});
  std::vector<std::vector<double>> X;
  std::vector<int> y;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!m.labels[i]) continue;
    X.push_back(m.rows[i]);
    y.push_back(static_cast<int>(*m.labels[i]));
  }
  auto gcfg = learners::gbdt_preset("ds");
  gcfg.seed = 3;
  learners::MlpConfig mcfg = learners::mlp_preset("llama");
  mcfg.seed = 3;
  mcfg.max_epochs = 20;
  core::Rng rng(9);
  std::vector<std::vector<double>> probes;
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> v(m.names.size());
    for (double& x : v) x = rng.bernoulli(0.3) ? 0.0 : rng.uniform(-2, 2);
    probes.push_back(v);
  }
  for (int kind = 0; kind < 2; ++kind) {
    auto train = [&] {
      return kind == 0 ? learners::train_gbdt(X, y, gcfg, m.names) : learners::train_mlp(X, y, mcfg, m.names);
    };
    const auto a = train(), b = train();
    std::ostringstream sa, sb;
    learners::save_model(sa, a);
    learners::save_model(sb, b);
    c.require(sa.str() == sb.str(), std::string(kind ? "mlp" : "gbdt") + " model files differ");
    std::istringstream in(sa.str());
    const auto back = learners::load_model(in);
    for (const auto& v : probes) {
      const double p0 = learners::predict(a, v), p1 = learners::predict(back, v);
      c.require(std::memcmp(&p0, &p1, sizeof p0) == 0, std::string(kind ? "mlp" : "gbdt") + " prediction moved after reload");
    }
  }
  if (c.ok) c.detail = std::to_string(pairs.size()) + " pairs, gbdt and mlp, 1000 probe vectors";
  return c;
}

// ---- 10. importance sanity
Check importance_sanity() {
  Check c;
  core::Rng rng(10);
  std::vector<std::vector<double>> X;
  std::vector<int> y;
  for (int i = 0; i < 800; ++i) {
    std::vector<double> row(12);
    for (double& v : row) v = rng.uniform(-1, 1);
    y.push_back(row[4] > -0.2 ? 1 : 0);
    X.push_back(row);
  }
  auto cfg = learners::gbdt_preset("llama");
  cfg.seed = 1;
  const auto m = learners::train_gbdt(X, y, cfg);
  const double total = std::accumulate(m.importance.begin(), m.importance.end(), 0.0);
  c.require(m.importance[4] >= 0.99, "informative feature share " + fmt(m.importance[4]));
  c.require(std::fabs(total - 1.0) <= 1e-9, "gain shares sum to " + fmt(total, 17));
  learners::MlpConfig mc;
  mc.hidden_layers = {8};
  mc.max_epochs = 40;
  const auto mlp = learners::train_mlp(X, y, mc);
  const auto perm = learners::feature_importance(mlp, X, y, 3, 1);
  const double perm_total = std::accumulate(perm.begin(), perm.end(), 0.0);
  c.require(std::fabs(perm_total - 1.0) <= 1e-9, "permutation shares sum to " + fmt(perm_total, 17));
  c.require(std::max_element(perm.begin(), perm.end()) - perm.begin() == 4, "mlp credits another feature");
  if (c.ok) c.detail = "gain share " + fmt(m.importance[4], 6) + ", sums " + fmt(total, 17) + " / " + fmt(perm_total, 17);
  return c;
}

// ---- 11. published feature examples
Check feature_goldens() {
  Check c;
  auto round2 = [](double v) { return std::round(v * 100) / 100; };
  auto stat = [](const featurize::NamedValues& v, std::string_view name) -> double {
    for (const auto& [n, x] : v) {
      if (n == name) return x;
    }
    return std::nan("");
  };
  std::vector<core::ResponseRecord> log{testing::with_correct(testing::mc_record("a", Strategy::native), true),
                                        testing::with_correct(testing::mc_record("a", Strategy::translate), false)};
  const auto enc = featurize::FeatureEncoder::fit(ingest::build_pairs_and_labels(log));
  const annotations::ResolvedAnnotation none;
  const auto store = annotations::load_annotations(testing::fixture("annotations_examples.jsonl"));
  const double punct = featurize::punct_density("What is 2+2?");
  const double numeric = featurize::numeric_density("What is 2+2?");
  const double ttr = stat(featurize::text_stats("The cat sat. The cat ran.", enc, none, "en"), "lexical_diversity");
  const double fluency =
      stat(featurize::text_stats("The answer is correct..", enc, none, "en"), "grammar_fluency_score");
  const double pos = stat(featurize::text_stats("cat cat cat", enc, store, "en"), "pos_diversity_score");
  c.require(round2(punct) == 0.08, "punct density " + fmt(punct));
  c.require(round2(numeric) == 0.15, "numeric density " + fmt(numeric));
  c.require(round2(ttr) == 0.67, "TTR " + fmt(ttr));
  c.require(round2(fluency) == 0.82, "fluency " + fmt(fluency));
  c.require(round2(pos) == 0.33, "POS diversity " + fmt(pos));
  if (c.ok) {
    c.detail = "punct " + fmt(round2(punct), 2) + ", numeric " + fmt(round2(numeric), 2) + ", TTR " +
               fmt(round2(ttr), 2) + ", fluency " + fmt(round2(fluency), 2) + ", POS " + fmt(round2(pos), 2);
  }
  return c;
}

}  // namespace

int main() {
  struct Criterion {
    int number;
    const char* name;
    double budget_seconds;  // 0 = none
    std::function<Check()> run;
  };
  const Criterion criteria[] = {
      {1, "wilcoxon reproduction", 1.0, wilcoxon_reproduction},
      {2, "oracle dominance", 10.0, oracle_dominance},
      {3, "learned routing end to end", 60.0, learned_routing},
      {4, "stump oracle equivalence", 0, stump_equivalence},
      {5, "mlp gradient check", 0, gradient_check},
      {6, "chrF", 0, chrf_checks},
      {7, "cumulative percentile consistency", 0, percentile_consistency},
      {8, "label construction", 0, label_construction},
      {9, "determinism and serialization", 0, determinism},
      {10, "feature importance sanity", 0, importance_sanity},
      {11, "feature goldens", 0, feature_goldens},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Check result;
    try {
      result = cr.run();
    } catch (const std::exception& e) {
      result.ok = false;
      result.detail = std::string("threw: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (cr.budget_seconds > 0 && secs >= cr.budget_seconds && result.ok) {
      result.ok = false;
      result.detail = "over the " + fmt(cr.budget_seconds) + " s budget; " + result.detail;
    }
    failed += !result.ok;
    std::printf("criterion %2d %s: %s (%.2f s) %s\n", cr.number, cr.name, result.ok ? "PASS" : "FAIL", secs,
                result.detail.c_str());
  }
  return failed == 0 ? 0 : 1;
}
