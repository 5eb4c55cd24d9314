#include "syntax.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace flpc {

void Signature::add(const std::string& name, uint32_t arity) {
  if (name.empty()) throw std::invalid_argument("predicate name is empty");
  for (char c : name) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_')
      throw std::invalid_argument("bad character in predicate name: " + name);
  }
  if (std::all_of(name.begin(), name.end(),
                  [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
    throw std::invalid_argument("predicate name is all digits: " + name);
  if (has(name)) throw std::invalid_argument("duplicate predicate: " + name);
  preds_.emplace_back(name, arity);
}

bool Signature::has(const std::string& name) const {
  return arity_of(name).has_value();
}

std::optional<uint32_t> Signature::arity_of(const std::string& name) const {
  for (const auto& [n, a] : preds_)
    if (n == name) return a;
  return std::nullopt;
}

Signature signature_from_text(const std::string& text) {
  Signature sig;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    size_t b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    size_t e = line.find_last_not_of(" \t\r");
    std::string entry = line.substr(b, e - b + 1);
    size_t slash = entry.find('/');
    if (slash == std::string::npos)
      throw ParseError("expected name/arity", lineno, 1);
    std::string name = entry.substr(0, slash);
    std::string arity = entry.substr(slash + 1);
    if (arity.empty() || !std::all_of(arity.begin(), arity.end(), [](char c) {
          return std::isdigit(static_cast<unsigned char>(c));
        }))
      throw ParseError("bad arity for " + name, lineno, slash + 2);
    try {
      sig.add(name, static_cast<uint32_t>(std::stoul(arity)));
    } catch (const std::invalid_argument& ex) {
      throw ParseError(ex.what(), lineno, 1);
    }
  }
  return sig;
}

std::string signature_to_text(const Signature& sig) {
  std::string out;
  for (const auto& [name, arity] : sig.predicates()) {
    out += name;
    out += '/';
    out += std::to_string(arity);
    out += '\n';
  }
  return out;
}

namespace {

FormulaPtr node(FKind kind, std::vector<FormulaPtr> children = {}) {
  Formula f;
  f.kind = kind;
  f.children = std::move(children);
  return std::make_shared<const Formula>(std::move(f));
}

}  // namespace

FormulaPtr f_true() {
  static const FormulaPtr t = node(FKind::True);
  return t;
}

FormulaPtr f_false() {
  static const FormulaPtr f = node(FKind::False);
  return f;
}

FormulaPtr f_atom(std::string pred, std::vector<std::string> args) {
  Formula f;
  f.kind = FKind::Atom;
  f.pred = std::move(pred);
  f.args = std::move(args);
  return std::make_shared<const Formula>(std::move(f));
}

FormulaPtr f_eq(std::string a, std::string b) {
  Formula f;
  f.kind = FKind::Eq;
  f.args = {std::move(a), std::move(b)};
  return std::make_shared<const Formula>(std::move(f));
}

FormulaPtr f_not(FormulaPtr f) { return node(FKind::Not, {std::move(f)}); }

FormulaPtr f_and(FormulaPtr a, FormulaPtr b) {
  return node(FKind::And, {std::move(a), std::move(b)});
}

FormulaPtr f_or(FormulaPtr a, FormulaPtr b) {
  return node(FKind::Or, {std::move(a), std::move(b)});
}

FormulaPtr f_implies(FormulaPtr a, FormulaPtr b) {
  return node(FKind::Implies, {std::move(a), std::move(b)});
}

FormulaPtr f_iff(FormulaPtr a, FormulaPtr b) {
  return node(FKind::Iff, {std::move(a), std::move(b)});
}

FormulaPtr f_exists(CountSpec count, std::string var, FormulaPtr body) {
  Formula f;
  f.kind = FKind::Exists;
  f.children = {std::move(body)};
  f.count = count;
  f.var = std::move(var);
  return std::make_shared<const Formula>(std::move(f));
}

FormulaPtr f_forall(std::string var, FormulaPtr body) {
  Formula f;
  f.kind = FKind::Forall;
  f.children = {std::move(body)};
  f.var = std::move(var);
  return std::make_shared<const Formula>(std::move(f));
}

FormulaPtr f_and_all(std::vector<FormulaPtr> fs) {
  if (fs.empty()) return f_true();
  FormulaPtr acc = fs[0];
  for (size_t i = 1; i < fs.size(); ++i) acc = f_and(acc, fs[i]);
  return acc;
}

FormulaPtr f_or_all(std::vector<FormulaPtr> fs) {
  if (fs.empty()) return f_false();
  FormulaPtr acc = fs[0];
  for (size_t i = 1; i < fs.size(); ++i) acc = f_or(acc, fs[i]);
  return acc;
}

bool formulas_equal(const FormulaPtr& a, const FormulaPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind || a->pred != b->pred || a->args != b->args ||
      a->var != b->var || !(a->count == b->count))
    return false;
  if (a->children.size() != b->children.size()) return false;
  for (size_t i = 0; i < a->children.size(); ++i)
    if (!formulas_equal(a->children[i], b->children[i])) return false;
  return true;
}

namespace {

enum class Tok {
  End,
  LParen,
  RParen,
  LBracket,
  RBracket,
  Comma,
  Plus,
  Bang,
  Amp,
  Pipe,
  Arrow,
  DArrow,
  Equal,
  LessEq,
  GreaterEq,
  Ident,
  Number,
  KwForall,
  KwExists,
  KwTrue,
  KwFalse,
};

struct Token {
  Tok kind;
  std::string text;
  uint64_t number = 0;
  size_t line;
  size_t column;
};

class Lexer {
public:
  explicit Lexer(const std::string& text) : text_(text) { advance(); }

  const Token& peek() const { return tok_; }

  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, line_, column_);
  }

  void advance() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else if (c == '\n') {
        ++pos_;
        ++line_;
        col_base_ = pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
    column_ = pos_ - col_base_ + 1;
    if (pos_ >= text_.size()) {
      tok_ = {Tok::End, "", 0, line_, column_};
      return;
    }
    char c = text_[pos_];
    auto single = [&](Tok k) {
      tok_ = {k, std::string(1, c), 0, line_, column_};
      ++pos_;
    };
    switch (c) {
      case '(': single(Tok::LParen); return;
      case ')': single(Tok::RParen); return;
      case '[': single(Tok::LBracket); return;
      case ']': single(Tok::RBracket); return;
      case ',': single(Tok::Comma); return;
      case '+': single(Tok::Plus); return;
      case '!': single(Tok::Bang); return;
      case '&': single(Tok::Amp); return;
      case '|': single(Tok::Pipe); return;
      case '=': single(Tok::Equal); return;
      case '-':
        if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '>') {
          tok_ = {Tok::Arrow, "->", 0, line_, column_};
          pos_ += 2;
          return;
        }
        fail("expected '->'");
      case '<':
        if (text_.compare(pos_, 3, "<->") == 0) {
          tok_ = {Tok::DArrow, "<->", 0, line_, column_};
          pos_ += 3;
          return;
        }
        if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '=') {
          tok_ = {Tok::LessEq, "<=", 0, line_, column_};
          pos_ += 2;
          return;
        }
        fail("expected '<->' or '<='");
      case '>':
        if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '=') {
          tok_ = {Tok::GreaterEq, ">=", 0, line_, column_};
          pos_ += 2;
          return;
        }
        fail("expected '>='");
      default:
        break;
    }
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      std::string word = text_.substr(start, pos_ - start);
      if (std::all_of(word.begin(), word.end(), [](char d) {
            return std::isdigit(static_cast<unsigned char>(d));
          })) {
        uint64_t value = 0;
        for (char d : word) {
          if (value > (UINT64_MAX - (d - '0')) / 10) fail("number too large");
          value = value * 10 + (d - '0');
        }
        tok_ = {Tok::Number, word, value, line_, column_};
        return;
      }
      if (word == "forall") tok_ = {Tok::KwForall, word, 0, line_, column_};
      else if (word == "exists") tok_ = {Tok::KwExists, word, 0, line_, column_};
      else if (word == "true") tok_ = {Tok::KwTrue, word, 0, line_, column_};
      else if (word == "false") tok_ = {Tok::KwFalse, word, 0, line_, column_};
      else tok_ = {Tok::Ident, word, 0, line_, column_};
      return;
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  const std::string& text_;
  size_t pos_ = 0;
  size_t line_ = 1;
  size_t col_base_ = 0;
  size_t column_ = 1;
  Token tok_;
};

constexpr uint64_t kAtMostExpansionCap = 65536;

class Parser {
public:
  Parser(const std::string& text, const Signature* sig)
      : lex_(text), sig_(sig) {
    if (sig_) inferred_ = *sig_;
  }

  FormulaPtr parse() {
    FormulaPtr f = parse_iff();
    expect(Tok::End, "unexpected trailing input");
    return f;
  }

  Signature take_signature() { return std::move(inferred_); }

private:
  [[noreturn]] void fail(const Token& at, const std::string& msg) {
    throw ParseError(msg, at.line, at.column);
  }

  Token expect(Tok kind, const std::string& msg) {
    if (lex_.peek().kind != kind) fail(lex_.peek(), msg);
    return lex_.take();
  }

  FormulaPtr parse_iff() {
    FormulaPtr f = parse_implies();
    while (lex_.peek().kind == Tok::DArrow) {
      lex_.take();
      f = f_iff(f, parse_implies());
    }
    return f;
  }

  FormulaPtr parse_implies() {
    FormulaPtr f = parse_or();
    if (lex_.peek().kind == Tok::Arrow) {
      lex_.take();
      return f_implies(f, parse_implies());
    }
    return f;
  }

  FormulaPtr parse_or() {
    FormulaPtr f = parse_and();
    while (lex_.peek().kind == Tok::Pipe) {
      lex_.take();
      f = f_or(f, parse_and());
    }
    return f;
  }

  FormulaPtr parse_and() {
    FormulaPtr f = parse_unary();
    while (lex_.peek().kind == Tok::Amp) {
      lex_.take();
      f = f_and(f, parse_unary());
    }
    return f;
  }

  FormulaPtr parse_unary() {
    if (lex_.peek().kind == Tok::Bang) {
      lex_.take();
      return f_not(parse_unary());
    }
    return parse_primary();
  }

  FormulaPtr parse_primary() {
    const Token& t = lex_.peek();
    switch (t.kind) {
      case Tok::LParen: {
        lex_.take();
        FormulaPtr f = parse_iff();
        expect(Tok::RParen, "expected ')'");
        return f;
      }
      case Tok::KwTrue:
        lex_.take();
        return f_true();
      case Tok::KwFalse:
        lex_.take();
        return f_false();
      case Tok::KwForall: {
        lex_.take();
        Token var = expect(Tok::Ident, "expected variable after 'forall'");
        FormulaPtr body = parse_quantified_body(var);
        return f_forall(var.text, body);
      }
      case Tok::KwExists:
        return parse_exists();
      case Tok::Ident:
        return parse_atom_or_eq();
      default:
        fail(t, "expected a formula");
    }
  }

  FormulaPtr parse_exists() {
    lex_.take();
    // Optional [n+p], [=n], [>=n], [<=n]. The last form expands into a
    // disjunction of exact counts.
    bool at_most = false;
    uint64_t at_most_bound = 0;
    CountSpec spec = CountSpec::plain();
    if (lex_.peek().kind == Tok::LBracket) {
      Token open = lex_.take();
      switch (lex_.peek().kind) {
        case Tok::Equal: {
          lex_.take();
          Token n = expect(Tok::Number, "expected a number after '='");
          spec = CountSpec::exactly(n.number);
          break;
        }
        case Tok::GreaterEq: {
          lex_.take();
          Token n = expect(Tok::Number, "expected a number after '>='");
          spec = CountSpec::at_least(n.number);
          break;
        }
        case Tok::LessEq: {
          lex_.take();
          Token n = expect(Tok::Number, "expected a number after '<='");
          if (n.number > kAtMostExpansionCap)
            fail(n, "exists[<=n] expansion limited to n <= " +
                        std::to_string(kAtMostExpansionCap));
          at_most = true;
          at_most_bound = n.number;
          break;
        }
        case Tok::Number: {
          Token n = lex_.take();
          expect(Tok::Plus, "expected '+' in count specification");
          Token p = expect(Tok::Number, "expected period after '+'");
          spec = CountSpec::periodic(n.number, p.number);
          break;
        }
        default:
          fail(open, "bad count specification");
      }
      expect(Tok::RBracket, "expected ']'");
    }
    Token var = expect(Tok::Ident, "expected variable after 'exists'");
    FormulaPtr body = parse_quantified_body(var);
    if (!at_most) return f_exists(spec, var.text, body);
    std::vector<FormulaPtr> cases;
    for (uint64_t k = 0; k <= at_most_bound; ++k)
      cases.push_back(f_exists(CountSpec::exactly(k), var.text, body));
    return f_or_all(std::move(cases));
  }

  FormulaPtr parse_quantified_body(const Token& var) {
    for (const std::string& v : scope_)
      if (v == var.text) fail(var, "variable '" + var.text + "' is already in scope");
    scope_.push_back(var.text);
    expect(Tok::LParen, "expected '(' after quantified variable");
    FormulaPtr body = parse_iff();
    expect(Tok::RParen, "expected ')'");
    scope_.pop_back();
    return body;
  }

  bool in_scope(const std::string& name) const {
    return std::find(scope_.begin(), scope_.end(), name) != scope_.end();
  }

  FormulaPtr parse_atom_or_eq() {
    Token name = lex_.take();
    if (lex_.peek().kind == Tok::Equal) {
      lex_.take();
      Token rhs = expect(Tok::Ident, "expected variable on right of '='");
      if (!in_scope(name.text))
        fail(name, "unbound variable '" + name.text + "'");
      if (!in_scope(rhs.text))
        fail(rhs, "unbound variable '" + rhs.text + "'");
      return f_eq(name.text, rhs.text);
    }
    std::vector<std::string> args;
    bool explicit_args = false;
    if (lex_.peek().kind == Tok::LParen) {
      explicit_args = true;
      lex_.take();
      if (lex_.peek().kind == Tok::RParen)
        fail(lex_.peek(), "empty argument list; write a bare name for a nullary atom");
      while (true) {
        Token arg = expect(Tok::Ident, "expected variable argument");
        if (!in_scope(arg.text))
          fail(arg, "unbound variable '" + arg.text + "'");
        args.push_back(arg.text);
        if (lex_.peek().kind == Tok::Comma) {
          lex_.take();
          continue;
        }
        break;
      }
      expect(Tok::RParen, "expected ')'");
    }
    if (sig_) {
      auto arity = sig_->arity_of(name.text);
      if (!arity)
        fail(name, "undeclared predicate '" + name.text + "'");
      if (explicit_args) {
        if (args.size() != *arity)
          fail(name, "predicate '" + name.text + "' has arity " +
                         std::to_string(*arity) + ", got " +
                         std::to_string(args.size()) + " arguments");
      } else if (*arity > 0) {
        // Variable-free notation: the atom covers the innermost <arity>
        // quantified variables.
        if (scope_.size() < *arity)
          fail(name, "bare atom '" + name.text + "' of arity " +
                         std::to_string(*arity) + " used under only " +
                         std::to_string(scope_.size()) + " quantifiers");
        args.assign(scope_.end() - static_cast<ptrdiff_t>(*arity), scope_.end());
      }
    } else {
      auto known = inferred_.arity_of(name.text);
      uint32_t arity = static_cast<uint32_t>(args.size());
      if (known && *known != arity)
        fail(name, "predicate '" + name.text + "' used with arity " +
                       std::to_string(arity) + " and " + std::to_string(*known));
      if (!known) inferred_.add(name.text, arity);
    }
    return f_atom(name.text, std::move(args));
  }

  Lexer lex_;
  const Signature* sig_;
  Signature inferred_;
  std::vector<std::string> scope_;
};

}  // namespace

FormulaPtr parse_formula(const std::string& text, const Signature& sig) {
  Parser p(text, &sig);
  return p.parse();
}

std::pair<FormulaPtr, Signature> parse_formula_infer(const std::string& text) {
  Parser p(text, nullptr);
  FormulaPtr f = p.parse();
  return {f, p.take_signature()};
}

namespace {

// Precedence levels; parenthesise a child whenever its level is below the
// context the parent demands.
constexpr int kPrecIff = 1;
constexpr int kPrecImplies = 2;
constexpr int kPrecOr = 3;
constexpr int kPrecAnd = 4;
constexpr int kPrecNot = 5;
constexpr int kPrecAtom = 6;

int precedence(FKind k) {
  switch (k) {
    case FKind::Iff: return kPrecIff;
    case FKind::Implies: return kPrecImplies;
    case FKind::Or: return kPrecOr;
    case FKind::And: return kPrecAnd;
    case FKind::Not: return kPrecNot;
    default: return kPrecAtom;
  }
}

void print_count(const CountSpec& c, std::string& out) {
  if (c.is_plain()) return;
  out += '[';
  if (c.period == 0) {
    out += '=';
    out += std::to_string(c.base);
  } else {
    out += std::to_string(c.base);
    out += '+';
    out += std::to_string(c.period);
  }
  out += ']';
}

void print_rec(const FormulaPtr& f, int context, std::string& out) {
  int prec = precedence(f->kind);
  bool parens = prec < context;
  if (parens) out += '(';
  switch (f->kind) {
    case FKind::True:
      out += "true";
      break;
    case FKind::False:
      out += "false";
      break;
    case FKind::Atom:
      out += f->pred;
      if (!f->args.empty()) {
        out += '(';
        for (size_t i = 0; i < f->args.size(); ++i) {
          if (i) out += ',';
          out += f->args[i];
        }
        out += ')';
      }
      break;
    case FKind::Eq:
      out += f->args[0];
      out += " = ";
      out += f->args[1];
      break;
    case FKind::Not:
      out += '!';
      print_rec(f->children[0], kPrecNot, out);
      break;
    case FKind::And:
      print_rec(f->children[0], kPrecAnd, out);
      out += " & ";
      print_rec(f->children[1], kPrecAnd + 1, out);
      break;
    case FKind::Or:
      print_rec(f->children[0], kPrecOr, out);
      out += " | ";
      print_rec(f->children[1], kPrecOr + 1, out);
      break;
    case FKind::Implies:
      print_rec(f->children[0], kPrecImplies + 1, out);
      out += " -> ";
      print_rec(f->children[1], kPrecImplies, out);
      break;
    case FKind::Iff:
      print_rec(f->children[0], kPrecIff, out);
      out += " <-> ";
      print_rec(f->children[1], kPrecIff + 1, out);
      break;
    case FKind::Exists:
      out += "exists";
      print_count(f->count, out);
      out += ' ';
      out += f->var;
      out += " (";
      print_rec(f->children[0], 0, out);
      out += ')';
      break;
    case FKind::Forall:
      out += "forall ";
      out += f->var;
      out += " (";
      print_rec(f->children[0], 0, out);
      out += ')';
      break;
  }
  if (parens) out += ')';
}

}  // namespace

std::string print_formula(const FormulaPtr& f) {
  std::string out;
  print_rec(f, 0, out);
  return out;
}

namespace {

std::string atom_text(const FormulaPtr& f) {
  if (f->kind == FKind::Eq) return f->args[0] + " = " + f->args[1];
  return print_formula(f);
}

struct Classifier {
  FragmentReport report;
  std::vector<std::string> scope;
  bool all_fluted = true;
  bool all_fluted_rev = true;

  void check_atom(const FormulaPtr& f) {
    const size_t d = scope.size();
    const size_t k = f->args.size();
    std::vector<size_t> depths;
    depths.reserve(k);
    for (const std::string& arg : f->args) {
      auto it = std::find(scope.rbegin(), scope.rend(), arg);
      if (it == scope.rend())
        throw std::invalid_argument("classify_fragment: unbound variable '" + arg +
                                    "' (input must be a sentence)");
      depths.push_back(scope.size() - (it - scope.rbegin()));
    }
    bool forward = true;
    bool reversed = true;
    if (k > d) {
      forward = reversed = false;
    } else {
      for (size_t i = 0; i < k; ++i) {
        if (depths[i] != d - k + 1 + i) forward = false;
        if (depths[i] != d - i) reversed = false;
      }
    }
    if (!forward) {
      all_fluted = false;
      std::string reason = reversed
          ? "arguments form the reversed variable suffix, not the forward one"
          : "arguments do not form a contiguous suffix of the quantified variables";
      report.offending_atoms.push_back({atom_text(f), reason});
    }
    if (!forward && !reversed) all_fluted_rev = false;
  }

  void walk(const FormulaPtr& f) {
    switch (f->kind) {
      case FKind::True:
      case FKind::False:
        return;
      case FKind::Atom:
      case FKind::Eq:
        check_atom(f);
        return;
      case FKind::Not:
        walk(f->children[0]);
        return;
      case FKind::And:
      case FKind::Or:
      case FKind::Implies:
      case FKind::Iff:
        walk(f->children[0]);
        walk(f->children[1]);
        return;
      case FKind::Exists:
        if (!f->count.is_plain()) {
          report.uses_counting = true;
          if (f->count.period >= 1) report.uses_periodic = true;
        }
        [[fallthrough]];
      case FKind::Forall:
        scope.push_back(f->var);
        report.variable_width =
            std::max<uint32_t>(report.variable_width, static_cast<uint32_t>(scope.size()));
        walk(f->children[0]);
        scope.pop_back();
        return;
    }
  }
};

}  // namespace

FragmentReport classify_fragment(const FormulaPtr& f) {
  Classifier c;
  c.walk(f);
  c.report.is_fluted = c.all_fluted;
  c.report.is_fluted_rev = c.all_fluted_rev;
  return c.report;
}

}  // namespace flpc
