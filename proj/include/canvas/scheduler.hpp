#pragma once

#include <chrono>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace canvas::sched {

using Date = std::chrono::sys_days;

inline constexpr double kInitialEasiness = 2.5;
inline constexpr double kMinEasiness = 1.3;
inline constexpr double kFirstIntervalDays = 1.0;
inline constexpr double kSecondIntervalDays = 5.0;

struct ReviewItem {
  std::string itemId;
  std::string moduleRef;
  double easiness = kInitialEasiness;
  int repetitions = 0;
  double intervalDays = 0.0;
  Date dueDate{};

  friend bool operator==(const ReviewItem&, const ReviewItem&) = default;
};

/// SM-2 style update for one graded review (grade 0..5, GradeOutOfRange
/// otherwise). A pass (>= 3) extends the interval: 1 day, then 5 days,
/// then the previous interval times the item's easiness rounded up to
/// whole days. A fail restarts at 1 day. Easiness moves by the usual SM-2
/// delta in every case and never falls below 1.3.
ReviewItem review(const ReviewItem& item, int grade, Date today);

/// Items due on or before `today`, ordered by due date then item id.
std::vector<ReviewItem> due_items(const std::vector<ReviewItem>& items, Date today);

ReviewItem new_item(std::string itemId, std::string moduleRef, Date firstDue);

std::string format_date(Date d);
/// Parses YYYY-MM-DD; throws Error{BadRequest} on anything else.
Date parse_date(std::string_view text);
Date today_utc();

void to_json(nlohmann::json& j, const ReviewItem& item);
void from_json(const nlohmann::json& j, ReviewItem& item);

}  // namespace canvas::sched
