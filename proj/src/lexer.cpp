#include "lexer.hpp"

#include <cctype>
#include <set>

namespace trapinv::detail {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

const std::set<std::string>& reserved() {
  static const std::set<std::string> words = {"exists", "forall", "exists2", "forall2", "true",
                                              "false",  "eps",    "succ",    "last",    "max",
                                              "zero"};
  return words;
}

}  // namespace

std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t k) {
    for (std::size_t j = 0; j < k; ++j) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    SourcePos pos{line, col};
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < text.size() && ident_char(text[j])) ++j;
      while (j < text.size() && text[j] == '\'') ++j;
      out.push_back({Tok::Ident, text.substr(i, j - i), pos});
      advance(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      out.push_back({Tok::Number, text.substr(i, j - i), pos});
      advance(j - i);
      continue;
    }
    auto two = text.compare(i, 2, "->") == 0   ? Tok::Arrow
               : text.compare(i, 2, "<=") == 0 ? Tok::Le
               : text.compare(i, 2, ">=") == 0 ? Tok::Ge
               : text.compare(i, 2, "!=") == 0 ? Tok::Ne
                                               : Tok::End;
    if (text.compare(i, 3, "<->") == 0) {
      out.push_back({Tok::Iff, "<->", pos});
      advance(3);
      continue;
    }
    if (two != Tok::End) {
      out.push_back({two, text.substr(i, 2), pos});
      advance(2);
      continue;
    }
    Tok one;
    switch (c) {
      case '(': one = Tok::LParen; break;
      case ')': one = Tok::RParen; break;
      case '{': one = Tok::LBrace; break;
      case '}': one = Tok::RBrace; break;
      case ',': one = Tok::Comma; break;
      case ';': one = Tok::Semi; break;
      case ':': one = Tok::Colon; break;
      case '.': one = Tok::Dot; break;
      case '<': one = Tok::Lt; break;
      case '>': one = Tok::Gt; break;
      case '=': one = Tok::Eq; break;
      case '&': one = Tok::Amp; break;
      case '|': one = Tok::Bar; break;
      case '!': one = Tok::Bang; break;
      default:
        throw SyntaxError(pos, std::string("unexpected character '") + c + "'");
    }
    out.push_back({one, std::string(1, c), pos});
    advance(1);
  }
  out.push_back({Tok::End, "", SourcePos{line, col}});
  return out;
}

void TokenStream::fail(const std::string& msg) const {
  const Token& t = peek();
  std::string found = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
  throw SyntaxError(t.pos, msg + " (found " + found + ")");
}

const Token& TokenStream::expect(Tok k, const char* what) {
  if (!at(k)) fail(std::string("expected ") + what);
  return next();
}

std::string TokenStream::expect_ident(const char* what) {
  if (!at(Tok::Ident) || reserved().count(peek().text)) fail(std::string("expected ") + what);
  return next().text;
}

void TokenStream::expect_keyword(const char* kw) {
  if (!at_keyword(kw)) fail(std::string("expected '") + kw + "'");
  next();
}

namespace {

bool is_succ_name(TokenStream& ts) {
  if (!ts.at(Tok::Ident)) return false;
  const std::string& s = ts.peek().text;
  if (s == "succ" || s == "succ_0") return true;
  if (s.rfind("succ_", 0) == 0 && s.size() > 5 &&
      s.find_first_not_of("0123456789", 5) == std::string::npos)
    ts.fail("only the successor succ_0 is supported");
  return false;
}

FormulaRef parse_iff(TokenStream& ts);

std::vector<std::string> parse_binders(TokenStream& ts) {
  std::vector<std::string> vs;
  vs.push_back(ts.expect_ident("variable name"));
  while (ts.accept(Tok::Comma)) vs.push_back(ts.expect_ident("variable name"));
  ts.expect(Tok::Dot, "'.'");
  return vs;
}

// A bound name for the zero/max sugar that does not occur in t.
std::string sugar_var(const TermRef& t) {
  std::set<std::string> used;
  for (TermRef u = t; u; u = u->arg)
    if (u->kind == Term::Kind::Var) used.insert(u->name);
  std::string y = "y";
  for (int k = 1; used.count(y); ++k) y = "y" + std::to_string(k);
  return y;
}

FormulaRef parse_atom(TokenStream& ts) {
  if (ts.accept(Tok::Bang)) return fm::neg(parse_atom(ts));
  if (ts.accept(Tok::LParen)) {
    auto f = parse_iff(ts);
    ts.expect(Tok::RParen, "')'");
    return f;
  }
  if (ts.at(Tok::Ident)) {
    const std::string word = ts.peek().text;
    if (word == "exists" || word == "forall" || word == "exists2" || word == "forall2") {
      ts.next();
      auto vs = parse_binders(ts);
      auto body = parse_iff(ts);
      if (word == "exists") return fm::exists1(vs, body);
      if (word == "forall") return fm::forall1(vs, body);
      if (word == "exists2") return fm::exists2(vs, body);
      return fm::forall2(vs, body);
    }
    if (word == "true") {
      ts.next();
      return fm::truth();
    }
    if (word == "false") {
      ts.next();
      return fm::falsity();
    }
    if (word == "last" || word == "max" || word == "zero") {
      ts.next();
      ts.expect(Tok::LParen, "'('");
      auto t = parse_term(ts);
      ts.expect(Tok::RParen, "')'");
      if (word == "last") return fm::max(t);
      auto y = sugar_var(t);
      if (word == "zero") return fm::forall1(y, fm::leq(t, fm::var(y)));
      return fm::forall1(y, fm::leq(fm::var(y), t));
    }
    if (!is_succ_name(ts) && word != "eps" && ts.peek(1).kind == Tok::LParen) {
      std::string pred = ts.expect_ident("predicate name");
      ts.expect(Tok::LParen, "'('");
      auto t = parse_term(ts);
      ts.expect(Tok::RParen, "')'");
      return fm::member(pred, t);
    }
  }
  auto lhs = parse_term(ts);
  Tok op = ts.peek().kind;
  if (op != Tok::Le && op != Tok::Lt && op != Tok::Ge && op != Tok::Gt && op != Tok::Eq &&
      op != Tok::Ne)
    ts.fail("expected comparison operator");
  ts.next();
  auto rhs = parse_term(ts);
  switch (op) {
    case Tok::Le: return fm::leq(lhs, rhs);
    case Tok::Lt: return fm::lt(lhs, rhs);
    case Tok::Ge: return fm::leq(rhs, lhs);
    case Tok::Gt: return fm::lt(rhs, lhs);
    case Tok::Eq: return fm::eq(lhs, rhs);
    default: return fm::neq(lhs, rhs);
  }
}

FormulaRef parse_and(TokenStream& ts) {
  auto f = parse_atom(ts);
  while (ts.accept(Tok::Amp)) f = fm::conj(f, parse_atom(ts));
  return f;
}

FormulaRef parse_or(TokenStream& ts) {
  auto f = parse_and(ts);
  while (ts.accept(Tok::Bar)) f = fm::disj(f, parse_and(ts));
  return f;
}

FormulaRef parse_implies(TokenStream& ts) {
  auto f = parse_or(ts);
  if (ts.accept(Tok::Arrow)) return fm::implies(f, parse_implies(ts));
  return f;
}

FormulaRef parse_iff(TokenStream& ts) {
  auto f = parse_implies(ts);
  while (ts.accept(Tok::Iff)) f = fm::iff(f, parse_implies(ts));
  return f;
}

}  // namespace

TermRef parse_term(TokenStream& ts) {
  if (is_succ_name(ts)) {
    ts.next();
    ts.expect(Tok::LParen, "'('");
    auto t = parse_term(ts);
    ts.expect(Tok::RParen, "')'");
    return fm::succ(t);
  }
  if (ts.at_keyword("eps")) {
    ts.next();
    return fm::root();
  }
  return fm::var(ts.expect_ident("term"));
}

FormulaRef parse_formula(TokenStream& ts) { return parse_iff(ts); }

}  // namespace trapinv::detail

namespace trapinv {

FormulaRef parse_formula(const std::string& text) {
  detail::TokenStream ts(detail::tokenize(text));
  auto f = detail::parse_formula(ts);
  if (!ts.at(detail::Tok::End)) ts.fail("unexpected trailing input");
  return f;
}

}  // namespace trapinv
