#include "canvas/outcome.hpp"

#include <cmath>

#include "canvas/error.hpp"

namespace canvas {

void check_outcome(const OutcomeRecord& o) {
  if (!std::isfinite(o.scorePercent) || o.scorePercent < 0.0 || o.scorePercent > 100.0)
    throw Error(ErrorCode::InvalidOutcome, "scorePercent must lie in [0, 100]");
  if (o.attempts < 1) throw Error(ErrorCode::InvalidOutcome, "attempts must be at least 1");
  if (!std::isfinite(o.durationSeconds) || o.durationSeconds < 0.0)
    throw Error(ErrorCode::InvalidOutcome, "durationSeconds must be non-negative");
}

}  // namespace canvas
