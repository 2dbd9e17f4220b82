#pragma once

// Tokenizer and formula parser shared by parse_formula() and the system
// description parser. Internal header.

#include <string>
#include <vector>

#include "trapinv/logic.hpp"

namespace trapinv::detail {

enum class Tok {
  Ident,
  Number,
  LParen,
  RParen,
  LBrace,
  RBrace,
  Comma,
  Semi,
  Colon,
  Dot,
  Arrow,   // ->
  Iff,     // <->
  Le,      // <=
  Lt,      // <
  Ge,      // >=
  Gt,      // >
  Eq,      // =
  Ne,      // !=
  Amp,     // &
  Bar,     // |
  Bang,    // !
  End,
};

struct Token {
  Tok kind;
  std::string text;
  SourcePos pos;
};

// Identifiers: [A-Za-z_][A-Za-z0-9_]* optionally followed by primes.
// '#' starts a comment running to the end of the line.
std::vector<Token> tokenize(const std::string& text);

class TokenStream {
 public:
  explicit TokenStream(std::vector<Token> toks) : toks_(std::move(toks)) {}

  const Token& peek(int ahead = 0) const {
    std::size_t i = pos_ + ahead;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  const Token& next() {
    const Token& t = peek();
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool at(Tok k) const { return peek().kind == k; }
  bool at_keyword(const char* kw) const { return at(Tok::Ident) && peek().text == kw; }
  bool accept(Tok k) {
    if (!at(k)) return false;
    next();
    return true;
  }
  const Token& expect(Tok k, const char* what);
  std::string expect_ident(const char* what);
  void expect_keyword(const char* kw);
  [[noreturn]] void fail(const std::string& msg) const;

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

FormulaRef parse_formula(TokenStream& ts);
TermRef parse_term(TokenStream& ts);

}  // namespace trapinv::detail
