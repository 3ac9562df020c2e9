#include "expr/parser.hpp"

#include <cctype>
#include <charconv>
#include <string>

#include "common/error.hpp"

namespace stochsym::expr {

namespace {

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Token {
  Tok kind = Tok::End;
  std::string_view text;
  double number = 0.0;
  int offset = 0;
};

class Parser {
 public:
  Parser(std::string_view text, const VariableSpace& space, int line, int column0)
      : text_(text), space_(space), line_(line), column0_(column0) {
    advance();
  }

  Expression parse_all() {
    if (current_.kind == Tok::End) fail("empty expression", current_);
    Expression e = expr();
    if (current_.kind != Tok::End) fail("unexpected '" + std::string(current_.text) + "'", current_);
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& message, const Token& at) const {
    throw ParseError(message, line_, column0_ + at.offset);
  }

  void advance() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    Token tok;
    tok.offset = static_cast<int>(pos_);
    if (pos_ >= text_.size()) {
      tok.kind = Tok::End;
      current_ = tok;
      return;
    }
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t end = pos_;
      while (end < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[end])) || text_[end] == '.')) ++end;
      if (end < text_.size() && (text_[end] == 'e' || text_[end] == 'E')) {
        std::size_t exp_end = end + 1;
        if (exp_end < text_.size() && (text_[exp_end] == '+' || text_[exp_end] == '-')) ++exp_end;
        if (exp_end < text_.size() && std::isdigit(static_cast<unsigned char>(text_[exp_end]))) {
          while (exp_end < text_.size() && std::isdigit(static_cast<unsigned char>(text_[exp_end]))) ++exp_end;
          end = exp_end;
        }
      }
      tok.kind = Tok::Number;
      tok.text = text_.substr(pos_, end - pos_);
      auto [ptr, ec] = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), tok.number);
      if (ec != std::errc() || ptr != tok.text.data() + tok.text.size()) {
        fail("malformed number '" + std::string(tok.text) + "'", tok);
      }
      pos_ = end;
      current_ = tok;
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t end = pos_;
      while (end < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_')) ++end;
      tok.kind = Tok::Ident;
      tok.text = text_.substr(pos_, end - pos_);
      pos_ = end;
      current_ = tok;
      return;
    }
    tok.text = text_.substr(pos_, 1);
    switch (c) {
      case '+': tok.kind = Tok::Plus; break;
      case '-': tok.kind = Tok::Minus; break;
      case '*': tok.kind = Tok::Star; break;
      case '/': tok.kind = Tok::Slash; break;
      case '^': tok.kind = Tok::Caret; break;
      case '(': tok.kind = Tok::LParen; break;
      case ')': tok.kind = Tok::RParen; break;
      default: fail("unexpected character '" + std::string(1, c) + "'", tok);
    }
    ++pos_;
    current_ = tok;
  }

  // Peek at the token after the current one without consuming.
  Token lookahead() {
    const std::size_t saved_pos = pos_;
    const Token saved = current_;
    advance();
    Token next = current_;
    pos_ = saved_pos;
    current_ = saved;
    return next;
  }

  void expect(Tok kind, const char* what) {
    if (current_.kind != kind) {
      fail(std::string("expected ") + what, current_);
    }
    advance();
  }

  Expression expr() {
    Expression lhs = term();
    while (current_.kind == Tok::Plus || current_.kind == Tok::Minus) {
      const Op op = current_.kind == Tok::Plus ? Op::Add : Op::Sub;
      advance();
      lhs = Expression::binary(op, lhs, term());
    }
    return lhs;
  }

  Expression term() {
    Expression lhs = unary();
    while (current_.kind == Tok::Star || current_.kind == Tok::Slash) {
      const Op op = current_.kind == Tok::Star ? Op::Mul : Op::Div;
      advance();
      lhs = Expression::binary(op, lhs, unary());
    }
    return lhs;
  }

  // Shared by `unary` and `signed`: returns nullopt if no leading minus.
  std::optional<Expression> negative_literal() {
    if (current_.kind != Tok::Minus) return std::nullopt;
    Token next = lookahead();
    if (next.kind != Tok::Number) return std::nullopt;
    advance();
    const double v = current_.number;
    advance();
    if (current_.kind == Tok::Caret) {
      // -2^x is -(2^x)
      advance();
      return Expression::unary(Op::Neg, Expression::binary(Op::Pow, constant(v), signed_factor()));
    }
    return constant(-v);
  }

  Expression unary() {
    if (auto lit = negative_literal()) return *lit;
    if (current_.kind == Tok::Minus) {
      advance();
      return Expression::unary(Op::Neg, unary());
    }
    return power();
  }

  Expression power() {
    Expression base = atom();
    if (current_.kind == Tok::Caret) {
      advance();
      return Expression::binary(Op::Pow, base, signed_factor());
    }
    return base;
  }

  Expression signed_factor() {
    if (auto lit = negative_literal()) return *lit;
    if (current_.kind == Tok::Minus) {
      advance();
      return Expression::unary(Op::Neg, signed_factor());
    }
    return power();
  }

  Expression atom() {
    const Token tok = current_;
    switch (tok.kind) {
      case Tok::Number:
        advance();
        return constant(tok.number);
      case Tok::LParen: {
        advance();
        Expression inner = expr();
        expect(Tok::RParen, "')'");
        return inner;
      }
      case Tok::Ident: {
        advance();
        Op fn = Op::Const;
        if (tok.text == "exp") fn = Op::Exp;
        else if (tok.text == "log") fn = Op::Log;
        else if (tok.text == "sin") fn = Op::Sin;
        else if (tok.text == "cos") fn = Op::Cos;
        else if (tok.text == "sqrt") fn = Op::Sqrt;
        if (fn != Op::Const) {
          expect(Tok::LParen, "'(' after function name");
          Expression arg = expr();
          expect(Tok::RParen, "')'");
          return Expression::unary(fn, arg);
        }
        auto v = space_.lookup(tok.text);
        if (!v) {
          throw Error(ErrorCode::UnknownVariable,
                      "unknown variable '" + std::string(tok.text) + "' at line " +
                          std::to_string(line_) + ", column " +
                          std::to_string(column0_ + tok.offset) + " (space has n=" +
                          std::to_string(space_.n()) + ", m=" + std::to_string(space_.m()) + ")");
        }
        return var(*v);
      }
      case Tok::End: fail("unexpected end of expression", tok);
      default: fail("unexpected '" + std::string(tok.text) + "'", tok);
    }
  }

  std::string_view text_;
  const VariableSpace& space_;
  int line_;
  int column0_;
  std::size_t pos_ = 0;
  Token current_;
};

}  // namespace

Expression parse(std::string_view text, const VariableSpace& space, int line, int column0) {
  Parser p(text, space, line, column0);
  return p.parse_all();
}

}  // namespace stochsym::expr
