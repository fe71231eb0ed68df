#include "canvas/scheduler.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "canvas/error.hpp"

namespace canvas::sched {

ReviewItem review(const ReviewItem& item, int grade, Date today) {
  if (grade < 0 || grade > 5) {
    throw Error(ErrorCode::GradeOutOfRange, "grade must be between 0 and 5, got " + std::to_string(grade));
  }
  ReviewItem next = item;
  if (grade >= 3) {
    next.repetitions = item.repetitions + 1;
    if (next.repetitions == 1) {
      next.intervalDays = kFirstIntervalDays;
    } else if (next.repetitions == 2) {
      next.intervalDays = kSecondIntervalDays;
    } else {
      next.intervalDays = std::ceil(item.intervalDays * item.easiness);
    }
  } else {
    next.repetitions = 0;
    next.intervalDays = kFirstIntervalDays;
  }
  const double miss = 5.0 - grade;
  next.easiness = std::max(kMinEasiness, item.easiness + (0.1 - miss * (0.08 + miss * 0.02)));
  next.dueDate = today + std::chrono::days{static_cast<long>(next.intervalDays)};
  return next;
}

std::vector<ReviewItem> due_items(const std::vector<ReviewItem>& items, Date today) {
  std::vector<ReviewItem> due;
  std::copy_if(items.begin(), items.end(), std::back_inserter(due),
               [&](const ReviewItem& i) { return i.dueDate <= today; });
  std::sort(due.begin(), due.end(), [](const ReviewItem& a, const ReviewItem& b) {
    return std::tie(a.dueDate, a.itemId) < std::tie(b.dueDate, b.itemId);
  });
  return due;
}

ReviewItem new_item(std::string itemId, std::string moduleRef, Date firstDue) {
  ReviewItem item;
  item.itemId = std::move(itemId);
  item.moduleRef = std::move(moduleRef);
  item.dueDate = firstDue;
  return item;
}

std::string format_date(Date d) {
  const std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

Date parse_date(std::string_view text) {
  auto bad = [&] { return Error(ErrorCode::BadRequest, "expected a YYYY-MM-DD date, got '" + std::string(text) + "'"); };
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') throw bad();
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  auto field = [&](std::size_t pos, std::size_t len, auto& out) {
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, out);
    if (ec != std::errc{} || ptr != text.data() + pos + len) throw bad();
  };
  field(0, 4, y);
  field(5, 2, m);
  field(8, 2, d);
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) throw bad();
  return Date{ymd};
}

Date today_utc() {
  return std::chrono::floor<std::chrono::days>(std::chrono::system_clock::now());
}

void to_json(nlohmann::json& j, const ReviewItem& item) {
  j = nlohmann::json{{"itemId", item.itemId},
                     {"moduleRef", item.moduleRef},
                     {"easiness", item.easiness},
                     {"repetitions", item.repetitions},
                     {"intervalDays", item.intervalDays},
                     {"dueDate", format_date(item.dueDate)}};
}

void from_json(const nlohmann::json& j, ReviewItem& item) {
  item.itemId = j.at("itemId").get<std::string>();
  item.moduleRef = j.at("moduleRef").get<std::string>();
  item.easiness = j.at("easiness").get<double>();
  item.repetitions = j.at("repetitions").get<int>();
  item.intervalDays = j.at("intervalDays").get<double>();
  item.dueDate = parse_date(j.at("dueDate").get<std::string>());
}

}  // namespace canvas::sched
