#include "promptroute/eval/wilcoxon.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace promptroute::eval {

namespace {

constexpr std::size_t kExactLimit = 25;

// P(T+ <= w2 / 2) under random signs, with ranks given doubled (integers).
double exact_lower_tail(const std::vector<std::int64_t>& doubled_ranks, std::int64_t w2) {
  std::int64_t total = 0;
  for (auto r : doubled_ranks) total += r;
  // counts[s] = number of sign vectors whose positive doubled-rank sum is s
  std::vector<double> counts(static_cast<std::size_t>(total) + 1, 0.0);
  counts[0] = 1.0;
  std::int64_t reach = 0;
  for (auto r : doubled_ranks) {
    for (std::int64_t s = reach; s >= 0; --s) {
      if (counts[s] != 0.0) counts[s + r] += counts[s];
    }
    reach += r;
  }
  double below = 0.0;
  for (std::int64_t s = 0; s <= std::min(w2, total); ++s) below += counts[s];
  return below / std::ldexp(1.0, static_cast<int>(doubled_ranks.size()));
}

}  // namespace

std::string_view to_string(WilcoxonMethod m) {
  switch (m) {
    case WilcoxonMethod::exact:
      return "exact";
    case WilcoxonMethod::normal:
      return "normal";
    case WilcoxonMethod::degenerate:
      return "degenerate";
  }
  return "?";
}

std::optional<WilcoxonMode> parse_wilcoxon_mode(std::string_view s) {
  if (s == "auto") return WilcoxonMode::automatic;
  if (s == "exact") return WilcoxonMode::exact;
  if (s == "normal") return WilcoxonMode::normal;
  return std::nullopt;
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                    WilcoxonMode mode) {
  if (a.size() != b.size()) throw std::invalid_argument("wilcoxon: samples differ in length");
  if (a.empty()) throw std::invalid_argument("wilcoxon: empty samples");

  WilcoxonResult res;
  res.n = a.size();

  // differences in units of 1e-9
  std::vector<std::int64_t> d;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    if (!std::isfinite(diff)) throw std::invalid_argument("wilcoxon: non-finite value");
    const auto q = static_cast<std::int64_t>(std::llround(diff * 1e9));
    if (q != 0) d.push_back(q);
  }
  res.n_eff = d.size();
  if (d.empty()) return res;  // degenerate: W=0, p=1

  std::vector<std::size_t> order(d.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return std::llabs(d[x]) < std::llabs(d[y]);
  });

  // doubled midranks: positions i..j-1 (1-based i+1..j) share (i+1+j)
  std::vector<std::int64_t> rank2(d.size());
  double tie_term = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i + 1;
    while (j < order.size() && std::llabs(d[order[j]]) == std::llabs(d[order[i]])) ++j;
    const auto t = static_cast<double>(j - i);
    if (j - i > 1) {
      res.ties = true;
      tie_term += t * t * t - t;
    }
    for (std::size_t k = i; k < j; ++k) rank2[order[k]] = static_cast<std::int64_t>(i + 1 + j);
    i = j;
  }

  std::int64_t plus2 = 0, minus2 = 0;
  for (std::size_t i = 0; i < d.size(); ++i) (d[i] > 0 ? plus2 : minus2) += rank2[i];
  const std::int64_t w2 = std::min(plus2, minus2);
  res.W = static_cast<double>(w2) / 2.0;

  bool use_exact = false;
  switch (mode) {
    case WilcoxonMode::exact:
      use_exact = true;
      break;
    case WilcoxonMode::normal:
      use_exact = false;
      break;
    case WilcoxonMode::automatic:
      use_exact = res.n_eff <= kExactLimit && !res.ties;
      break;
  }

  const auto n = static_cast<double>(res.n_eff);
  if (use_exact) {
    // 2^n sign vectors stop fitting a double well before this
    if (res.n_eff > 1000) throw std::invalid_argument("wilcoxon: exact test limited to 1000 differences");
    // the null distribution is symmetric, so two-sided = 2 * lower tail of min
    res.p = std::min(1.0, 2.0 * exact_lower_tail(rank2, w2));
    res.method = WilcoxonMethod::exact;
  } else {
    const double mean = n * (n + 1.0) / 4.0;
    const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    double dev = res.W - mean;
    if (dev > 0.0) {
      dev = std::max(0.0, dev - 0.5);
    } else if (dev < 0.0) {
      dev = std::min(0.0, dev + 0.5);
    }
    res.p = var > 0.0 ? std::min(1.0, std::erfc(std::fabs(dev) / std::sqrt(var) / std::sqrt(2.0))) : 1.0;
    res.method = WilcoxonMethod::normal;
  }
  return res;
}

}  // namespace promptroute::eval
