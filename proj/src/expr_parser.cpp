#include "reachguard/error.hpp"
#include "reachguard/intervals.hpp"

#include <cctype>
#include <charconv>
#include <string>

namespace reachguard {

namespace {

// Recursive descent:
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' integer)?
//   primary := number | var | func '(' expr ')' | '(' expr ')'
class Parser {
 public:
  Parser(std::string_view text, int num_states, int num_inputs)
      : text_(text), num_states_(num_states), num_inputs_(num_inputs) {}

  Expr parse() {
    Expr e = expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected character '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::kParse, "expression \"" + std::string(text_) + "\" at offset " + std::to_string(pos_) +
                                       ": " + msg);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr expr() {
    Expr lhs = term();
    for (;;) {
      if (accept('+')) lhs = Expr::binary(Expr::Op::kAdd, lhs, term());
      else if (accept('-')) lhs = Expr::binary(Expr::Op::kSub, lhs, term());
      else return lhs;
    }
  }

  Expr term() {
    Expr lhs = unary();
    for (;;) {
      if (accept('*')) lhs = Expr::binary(Expr::Op::kMul, lhs, unary());
      else if (accept('/')) lhs = Expr::binary(Expr::Op::kDiv, lhs, unary());
      else return lhs;
    }
  }

  Expr unary() {
    if (accept('-')) return Expr::unary(Expr::Op::kNeg, unary());
    if (accept('+')) return unary();
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (accept('^')) {
      skip_ws();
      const std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (start == pos_) fail("exponent must be a non-negative integer literal");
      int exponent = 0;
      const auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, exponent);
      if (ec != std::errc() || exponent > 64) fail("exponent out of range");
      (void)ptr;
      return Expr::power(base, exponent);
    }
    return base;
  }

  Expr primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expr();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  Expr number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
      ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) ++look;
      if (look < text_.size() && std::isdigit(static_cast<unsigned char>(text_[look]))) {
        pos_ = look;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
    }
    const std::string literal(text_.substr(start, pos_ - start));
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(literal, &used);
    } catch (const std::exception&) {
      fail("malformed number '" + literal + "'");
    }
    if (used != literal.size()) fail("malformed number '" + literal + "'");
    return Expr::constant(value);
  }

  Expr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);

    if (name == "sin" || name == "cos" || name == "exp") {
      if (!accept('(')) fail("expected '(' after " + std::string(name));
      Expr arg = expr();
      if (!accept(')')) fail("expected ')'");
      const auto op = name == "sin" ? Expr::Op::kSin : name == "cos" ? Expr::Op::kCos : Expr::Op::kExp;
      return Expr::unary(op, arg);
    }
    if ((name[0] == 'x' || name[0] == 'u') && name.size() > 1) {
      int index = 0;
      const auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), index);
      if (ec == std::errc() && ptr == name.data() + name.size() && index >= 1) {
        if (name[0] == 'x') {
          if (index > num_states_) fail("state variable " + std::string(name) + " out of range");
          return Expr::variable(index - 1);
        }
        if (index > num_inputs_) fail("input variable " + std::string(name) + " out of range");
        return Expr::variable(num_states_ + index - 1);
      }
    }
    fail("unknown identifier '" + std::string(name) + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int num_states_;
  int num_inputs_;
};

}  // namespace

Expr parse_expr(std::string_view text, int num_states, int num_inputs) {
  return Parser(text, num_states, num_inputs).parse();
}

}  // namespace reachguard
