#pragma once

#include <optional>
#include <span>
#include <string_view>

namespace promptroute::eval {

enum class WilcoxonMethod { exact, normal, degenerate };
std::string_view to_string(WilcoxonMethod m);

// auto: exact enumeration when the effective n is <= 25 and no |d| ties,
// otherwise the normal approximation.
enum class WilcoxonMode { automatic, exact, normal };
std::optional<WilcoxonMode> parse_wilcoxon_mode(std::string_view s);

struct WilcoxonResult {
  double W = 0.0;  // min(R+, R-)
  double p = 1.0;  // two-sided
  std::size_t n = 0;      // pairs supplied
  std::size_t n_eff = 0;  // after dropping zero differences
  bool ties = false;
  WilcoxonMethod method = WilcoxonMethod::degenerate;
};

// Paired two-sided signed-rank test on a - b. Differences are compared at
// 1e-9 resolution, so values printed to a few decimals don't produce phantom
// nonzero differences or broken ties. Zero differences are dropped; tied |d|
// share midranks. Throws std::invalid_argument on size mismatch or empty input.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                    WilcoxonMode mode = WilcoxonMode::automatic);

}  // namespace promptroute::eval
