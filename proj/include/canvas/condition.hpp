#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "canvas/outcome.hpp"

namespace canvas::cond {

enum class Metric { score, attempts, duration };
enum class Comparator { ge, gt, le, lt, eq, ne };

inline constexpr std::size_t kMaxSourceLength = 4096;
inline constexpr int kMaxDepth = 32;

/// Expression tree of the flow-condition language. A plain value type:
/// copies are deep and equality is structural.
struct Condition {
  enum class Kind { comparison, completed, negation, conjunction, disjunction };

  Kind kind = Kind::completed;
  // Only meaningful for Kind::comparison.
  Metric metric = Metric::score;
  Comparator op = Comparator::ge;
  double literal = 0.0;
  // One child for negation, two or more for conjunction/disjunction.
  std::vector<Condition> children;

  static Condition comparison(Metric metric, Comparator op, double literal);
  static Condition completed();
  static Condition negation(Condition child);
  static Condition conjunction(std::vector<Condition> children);
  static Condition disjunction(std::vector<Condition> children);

  friend bool operator==(const Condition& a, const Condition& b);
};

struct ParseDiagnostic {
  int line = 1;
  int column = 1;
  std::string message;
  std::string expected;  // empty when there is no single expected token
};

using ParseResult = std::variant<Condition, ParseDiagnostic>;

ParseResult parse(std::string_view source);

/// Convenience wrapper: throws Error{InvalidCondition} carrying the
/// diagnostic text.
Condition parse_or_throw(std::string_view source);

std::string print(const Condition& c);

bool evaluate(const Condition& c, const OutcomeRecord& outcome);

/// Checks the tree invariants (metric ranges, arity, depth). Returns an
/// empty string when the tree is well formed, otherwise a reason.
std::string check(const Condition& c);

int depth(const Condition& c);
std::size_t atom_count(const Condition& c);

std::string_view to_string(Metric m);
std::string_view to_string(Comparator op);

}  // namespace canvas::cond
