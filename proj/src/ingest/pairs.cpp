#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "promptroute/core/errors.hpp"
#include "promptroute/core/rng.hpp"
#include "promptroute/ingest/ingest.hpp"

namespace promptroute::ingest {

using core::InstancePair;
using core::ResponseRecord;
using core::Route;
using core::Strategy;

std::vector<InstancePair> build_pairs_and_labels(std::span<const ResponseRecord> records) {
  struct Slots {
    const ResponseRecord* native = nullptr;
    const ResponseRecord* translate = nullptr;
  };
  std::map<std::pair<std::string, std::string>, Slots> joined;  // (backbone, id)
  for (const auto& r : records) {
    if (r.strategy != Strategy::native && r.strategy != Strategy::translate) continue;
    Slots& slots = joined[{r.backbone, r.id}];
    const ResponseRecord*& slot = r.strategy == Strategy::native ? slots.native : slots.translate;
    if (slot != nullptr) {
      throw JoinError("duplicate " + std::string(core::to_string(r.strategy)) + " record for id '" +
                      r.id + "' (backbone " + r.backbone + ")");
    }
    slot = &r;
  }

  std::vector<InstancePair> pairs;
  pairs.reserve(joined.size());
  for (const auto& [key, slots] : joined) {
    if (slots.native == nullptr || slots.translate == nullptr) {
      throw JoinError("missing " + std::string(slots.native ? "translate" : "native") +
                      " counterpart for id '" + key.second + "' (backbone " + key.first + ")");
    }
    const ResponseRecord& n = *slots.native;
    InstancePair p;
    p.id = n.id;
    p.dataset = n.dataset;
    p.language = n.language;
    p.subject = n.subject;
    p.backbone = n.backbone;
    p.question = n.question;
    p.options = n.options;
    p.context = n.context;
    p.gold = n.gold;
    p.native = n;
    p.translate = *slots.translate;
    const bool nc = n.is_correct.value_or(false);
    const bool tc = slots.translate->is_correct.value_or(false);
    if (nc != tc) p.label = nc ? Route::native : Route::translate;
    pairs.push_back(std::move(p));
  }
  return pairs;
}

void SplitSpec::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw core::ConfigError("train_fraction must be strictly between 0 and 1");
  }
  for (const auto& key : stratify_keys) {
    if (key != "language" && key != "dataset" && key != "subject" && key != "backbone") {
      throw core::ConfigError("unknown stratify key '" + key +
                              "' (expected language, dataset, subject or backbone)");
    }
  }
}

namespace {

std::string stratum_of(const InstancePair& p, const std::vector<std::string>& keys) {
  std::string s;
  for (const auto& key : keys) {
    if (key == "language") s += p.language;
    if (key == "dataset") s += core::to_string(p.dataset);
    if (key == "subject") s += p.subject;
    if (key == "backbone") s += p.backbone;
    s += '\x1f';
  }
  return s;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

bool by_key(const InstancePair& a, const InstancePair& b) {
  return std::tie(a.backbone, a.id) < std::tie(b.backbone, b.id);
}

}  // namespace

SplitResult split(std::span<const InstancePair> pairs, const SplitSpec& spec) {
  spec.validate();
  if (pairs.empty()) throw core::DataError("cannot split an empty pair set");

  std::map<std::string, std::vector<const InstancePair*>> strata;
  for (const auto& p : pairs) strata[stratum_of(p, spec.stratify_keys)].push_back(&p);

  SplitResult out;
  for (auto& [name, members] : strata) {
    std::sort(members.begin(), members.end(),
              [](const InstancePair* a, const InstancePair* b) { return by_key(*a, *b); });
    core::Rng rng(core::mix_seed(spec.seed, fnv1a(name)));
    rng.shuffle(std::span<const InstancePair*>(members));
    // The epsilon absorbs representation error (0.29 * 100 = 28.999...).
    const auto n_train = static_cast<std::size_t>(
        std::floor(spec.train_fraction * static_cast<double>(members.size()) + 1e-9));
    for (std::size_t i = 0; i < members.size(); ++i) {
      (i < n_train ? out.train : out.eval).push_back(*members[i]);
    }
  }
  std::sort(out.train.begin(), out.train.end(), by_key);
  std::sort(out.eval.begin(), out.eval.end(), by_key);
  return out;
}

}  // namespace promptroute::ingest
