#pragma once

#include <span>
#include <vector>

#include "promptroute/core/jsonl.hpp"
#include "promptroute/core/types.hpp"

namespace promptroute::core {

// Every invariant violation in the log, with record id and field. Empty iff
// the log is well-formed.
std::vector<Issue> validate_log(std::span<const ResponseRecord> records);

}  // namespace promptroute::core
