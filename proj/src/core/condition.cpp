#include "canvas/condition.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>

#include "canvas/error.hpp"

namespace canvas::cond {

Condition Condition::comparison(Metric metric, Comparator op, double literal) {
  Condition c;
  c.kind = Kind::comparison;
  c.metric = metric;
  c.op = op;
  c.literal = literal;
  return c;
}

Condition Condition::completed() {
  Condition c;
  c.kind = Kind::completed;
  return c;
}

Condition Condition::negation(Condition child) {
  Condition c;
  c.kind = Kind::negation;
  c.children.push_back(std::move(child));
  return c;
}

Condition Condition::conjunction(std::vector<Condition> children) {
  Condition c;
  c.kind = Kind::conjunction;
  c.children = std::move(children);
  return c;
}

Condition Condition::disjunction(std::vector<Condition> children) {
  Condition c;
  c.kind = Kind::disjunction;
  c.children = std::move(children);
  return c;
}

bool operator==(const Condition& a, const Condition& b) {
  if (a.kind != b.kind) return false;
  if (a.kind == Condition::Kind::comparison) {
    return a.metric == b.metric && a.op == b.op && a.literal == b.literal;
  }
  return a.children == b.children;
}

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::score: return "score";
    case Metric::attempts: return "attempts";
    case Metric::duration: return "duration";
  }
  return "?";
}

std::string_view to_string(Comparator op) {
  switch (op) {
    case Comparator::ge: return ">=";
    case Comparator::gt: return ">";
    case Comparator::le: return "<=";
    case Comparator::lt: return "<";
    case Comparator::eq: return "==";
    case Comparator::ne: return "!=";
  }
  return "?";
}

int depth(const Condition& c) {
  int deepest = 0;
  for (const auto& child : c.children) deepest = std::max(deepest, depth(child));
  return deepest + 1;
}

std::size_t atom_count(const Condition& c) {
  if (c.children.empty()) return 1;
  std::size_t n = 0;
  for (const auto& child : c.children) n += atom_count(child);
  return n;
}

namespace {

std::string check_node(const Condition& c) {
  using Kind = Condition::Kind;
  switch (c.kind) {
    case Kind::comparison:
      if (!c.children.empty()) return "comparison has children";
      if (!std::isfinite(c.literal)) return "literal is not finite";
      if (c.metric == Metric::score && (c.literal < 0.0 || c.literal > 100.0))
        return "score literal outside [0, 100]";
      return {};
    case Kind::completed:
      return c.children.empty() ? std::string{} : "completed has children";
    case Kind::negation:
      if (c.children.size() != 1) return "not takes exactly one operand";
      return check_node(c.children.front());
    case Kind::conjunction:
    case Kind::disjunction:
      if (c.children.size() < 2) return "and/or need at least two operands";
      for (const auto& child : c.children) {
        if (auto why = check_node(child); !why.empty()) return why;
      }
      return {};
  }
  return "unknown node kind";
}

}  // namespace

std::string check(const Condition& c) {
  if (depth(c) > kMaxDepth) return "condition nests deeper than 32 levels";
  return check_node(c);
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class Tok { lparen, rparen, word, number, comparator, end, bad };

struct Token {
  Tok type = Tok::end;
  std::string text;
  int line = 1;
  int column = 1;
  double number = 0.0;
  Comparator op = Comparator::ge;
};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return out;
}

bool is_digit(char ch) { return ch >= '0' && ch <= '9'; }
bool is_word_start(char ch) {
  return (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || ch == '_';
}
bool is_word_char(char ch) { return is_word_start(ch) || is_digit(ch); }

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_space();
    Token t;
    t.line = line_;
    t.column = column_;
    if (pos_ >= src_.size()) {
      t.type = Tok::end;
      return t;
    }
    const char ch = src_[pos_];
    if (ch == '(' || ch == ')') {
      t.type = ch == '(' ? Tok::lparen : Tok::rparen;
      t.text = std::string(1, ch);
      advance(1);
      return t;
    }
    if (ch == '>' || ch == '<' || ch == '=' || ch == '!') {
      const bool eq_follows = pos_ + 1 < src_.size() && src_[pos_ + 1] == '=';
      t.type = Tok::comparator;
      if (ch == '>') t.op = eq_follows ? Comparator::ge : Comparator::gt;
      if (ch == '<') t.op = eq_follows ? Comparator::le : Comparator::lt;
      if (ch == '=' || ch == '!') {
        if (!eq_follows) {
          t.type = Tok::bad;
          t.text = std::string(1, ch);
          return t;
        }
        t.op = ch == '=' ? Comparator::eq : Comparator::ne;
      }
      const std::size_t len = eq_follows ? 2 : 1;
      t.text = std::string(src_.substr(pos_, len));
      advance(len);
      return t;
    }
    if (is_digit(ch) || ch == '-' || ch == '.') return lex_number(t);
    if (is_word_start(ch)) {
      std::size_t end = pos_;
      while (end < src_.size() && is_word_char(src_[end])) ++end;
      t.type = Tok::word;
      t.text = lower(src_.substr(pos_, end - pos_));
      advance(end - pos_);
      return t;
    }
    t.type = Tok::bad;
    t.text = std::string(1, ch);
    return t;
  }

 private:
  Token lex_number(Token t) {
    std::size_t end = pos_;
    if (src_[end] == '-') ++end;
    const std::size_t int_start = end;
    while (end < src_.size() && is_digit(src_[end])) ++end;
    bool ok = end > int_start;
    if (ok && end < src_.size() && src_[end] == '.') {
      const std::size_t frac_start = ++end;
      while (end < src_.size() && is_digit(src_[end])) ++end;
      ok = end > frac_start;
    }
    if (ok && end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
      ++end;
      if (end < src_.size() && (src_[end] == '+' || src_[end] == '-')) ++end;
      const std::size_t exp_start = end;
      while (end < src_.size() && is_digit(src_[end])) ++end;
      ok = end > exp_start;
    }
    if (ok && end < src_.size() && is_word_char(src_[end])) ok = false;
    t.text = std::string(src_.substr(pos_, std::max<std::size_t>(end - pos_, 1)));
    if (!ok) {
      t.type = Tok::bad;
      return t;
    }
    const auto [ptr, ec] = std::from_chars(src_.data() + pos_, src_.data() + end, t.number);
    if (ec != std::errc{} || ptr != src_.data() + end || !std::isfinite(t.number)) {
      t.type = Tok::bad;
      return t;
    }
    t.type = Tok::number;
    advance(end - pos_);
    return t;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      const char ch = src_[pos_];
      if (ch == '\n') {
        ++pos_;
        ++line_;
        column_ = 1;
      } else if (ch == ' ' || ch == '\t' || ch == '\r') {
        advance(1);
      } else {
        break;
      }
    }
  }

  void advance(std::size_t n) {
    pos_ += n;
    column_ += static_cast<int>(n);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

// ---------------------------------------------------------------------------
// Parser

struct Failure {
  ParseDiagnostic diagnostic;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : lexer_(src) { current_ = lexer_.next(); }

  Condition parse_all() {
    Condition c = parse_or();
    if (current_.type != Tok::end) {
      fail("unexpected '" + current_.text + "'", "and, or, ) or end of input");
    }
    return c;
  }

 private:
  Condition parse_or() {
    std::vector<Condition> terms;
    terms.push_back(parse_and());
    while (is_word("or")) {
      bump();
      terms.push_back(parse_and());
    }
    if (terms.size() == 1) return std::move(terms.front());
    return Condition::disjunction(std::move(terms));
  }

  Condition parse_and() {
    std::vector<Condition> terms;
    terms.push_back(parse_unary());
    while (is_word("and")) {
      bump();
      terms.push_back(parse_unary());
    }
    if (terms.size() == 1) return std::move(terms.front());
    return Condition::conjunction(std::move(terms));
  }

  Condition parse_unary() {
    if (is_word("not")) {
      bump();
      return Condition::negation(parse_unary());
    }
    return parse_atom();
  }

  Condition parse_atom() {
    if (current_.type == Tok::lparen) {
      bump();
      Condition inner = parse_or();
      if (current_.type != Tok::rparen) fail(describe_unexpected(), ")");
      bump();
      return inner;
    }
    if (is_word("completed")) {
      bump();
      return Condition::completed();
    }
    std::optional<Metric> metric;
    if (is_word("score")) metric = Metric::score;
    if (is_word("attempts")) metric = Metric::attempts;
    if (is_word("duration")) metric = Metric::duration;
    if (!metric) {
      fail(describe_unexpected(), "score, attempts, duration, completed, not or (");
    }
    bump();
    if (current_.type != Tok::comparator) fail(describe_unexpected(), "comparison operator");
    const Comparator op = current_.op;
    bump();
    if (current_.type != Tok::number) fail(describe_unexpected(), "number");
    const double literal = current_.number;
    if (*metric == Metric::score && (literal < 0.0 || literal > 100.0)) {
      fail("score literal " + current_.text + " is outside [0, 100]", "number between 0 and 100");
    }
    bump();
    return Condition::comparison(*metric, op, literal);
  }

  std::string describe_unexpected() const {
    switch (current_.type) {
      case Tok::end: return "unexpected end of input";
      case Tok::bad: return "invalid input '" + current_.text + "'";
      default: return "unexpected '" + current_.text + "'";
    }
  }

  bool is_word(std::string_view w) const {
    return current_.type == Tok::word && current_.text == w;
  }

  void bump() { current_ = lexer_.next(); }

  [[noreturn]] void fail(std::string message, std::string expected) const {
    ParseDiagnostic d;
    d.line = current_.line;
    d.column = current_.column;
    d.message = std::move(message);
    d.expected = std::move(expected);
    if (!d.expected.empty()) d.message += ", expected " + d.expected;
    throw Failure{std::move(d)};
  }

  Lexer lexer_;
  Token current_;
};

}  // namespace

ParseResult parse(std::string_view source) {
  if (source.size() > kMaxSourceLength) {
    return ParseDiagnostic{1, 1, "condition is longer than 4096 characters", ""};
  }
  try {
    Parser parser(source);
    Condition c = parser.parse_all();
    if (depth(c) > kMaxDepth) {
      return ParseDiagnostic{1, 1, "condition nests deeper than 32 levels", ""};
    }
    return c;
  } catch (Failure& f) {
    return std::move(f.diagnostic);
  }
}

Condition parse_or_throw(std::string_view source) {
  auto result = parse(source);
  if (auto* d = std::get_if<ParseDiagnostic>(&result)) {
    throw Error(ErrorCode::InvalidCondition,
                "line " + std::to_string(d->line) + ", column " + std::to_string(d->column) +
                    ": " + d->message);
  }
  return std::get<Condition>(std::move(result));
}

// ---------------------------------------------------------------------------
// Printer

namespace {

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

bool is_compound(const Condition& c) {
  return c.kind == Condition::Kind::conjunction || c.kind == Condition::Kind::disjunction;
}

void print_into(const Condition& c, std::string& out);

void print_operand(const Condition& c, bool parenthesize, std::string& out) {
  if (parenthesize) out += '(';
  print_into(c, out);
  if (parenthesize) out += ')';
}

void print_into(const Condition& c, std::string& out) {
  using Kind = Condition::Kind;
  switch (c.kind) {
    case Kind::comparison:
      out += to_string(c.metric);
      out += ' ';
      out += to_string(c.op);
      out += ' ';
      out += format_number(c.literal);
      return;
    case Kind::completed:
      out += "completed";
      return;
    case Kind::negation: {
      out += "not ";
      const Condition& child = c.children.front();
      print_operand(child, is_compound(child) || child.kind == Kind::comparison, out);
      return;
    }
    case Kind::conjunction:
    case Kind::disjunction: {
      const std::string_view sep = c.kind == Kind::conjunction ? " and " : " or ";
      for (std::size_t i = 0; i < c.children.size(); ++i) {
        if (i) out += sep;
        print_operand(c.children[i], is_compound(c.children[i]), out);
      }
      return;
    }
  }
}

double metric_value(Metric m, const OutcomeRecord& o) {
  switch (m) {
    case Metric::score: return o.scorePercent;
    case Metric::attempts: return static_cast<double>(o.attempts);
    case Metric::duration: return o.durationSeconds;
  }
  return 0.0;
}

}  // namespace

std::string print(const Condition& c) {
  std::string out;
  print_into(c, out);
  return out;
}

bool evaluate(const Condition& c, const OutcomeRecord& o) {
  using Kind = Condition::Kind;
  switch (c.kind) {
    case Kind::comparison: {
      const double v = metric_value(c.metric, o);
      switch (c.op) {
        case Comparator::ge: return v >= c.literal;
        case Comparator::gt: return v > c.literal;
        case Comparator::le: return v <= c.literal;
        case Comparator::lt: return v < c.literal;
        case Comparator::eq: return v == c.literal;
        case Comparator::ne: return v != c.literal;
      }
      return false;
    }
    case Kind::completed:
      return o.completed;
    case Kind::negation:
      return !evaluate(c.children.front(), o);
    case Kind::conjunction:
      return std::all_of(c.children.begin(), c.children.end(),
                         [&](const Condition& child) { return evaluate(child, o); });
    case Kind::disjunction:
      return std::any_of(c.children.begin(), c.children.end(),
                         [&](const Condition& child) { return evaluate(child, o); });
  }
  return false;
}

}  // namespace canvas::cond
