#pragma once

#include <chrono>
#include <string>

namespace canvas {

using Timestamp = std::chrono::sys_seconds;

enum class AssessmentKind { reading, multipleChoice, generation };

/// Result of one learner pass through a single node.
struct OutcomeRecord {
  std::string nodeId;
  double scorePercent = 0.0;   // [0, 100]
  bool completed = false;
  int attempts = 1;            // >= 1
  double durationSeconds = 0;  // >= 0
  AssessmentKind assessmentKind = AssessmentKind::reading;
  Timestamp recordedAt{};

  friend bool operator==(const OutcomeRecord&, const OutcomeRecord&) = default;
};

/// Throws Error{InvalidOutcome} when a field is out of range.
void check_outcome(const OutcomeRecord& outcome);

}  // namespace canvas
