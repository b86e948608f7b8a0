#include "webqa/logical_form.hpp"

#include <array>
#include <atomic>
#include <cctype>
#include <functional>
#include <sstream>

#include "webqa/errors.hpp"
#include "webqa/text.hpp"

namespace webqa::lf {

namespace {

struct PrimInfo {
  Primitive prim;
  std::string_view name;
  int arity;
};

constexpr std::array<PrimInfo, 16> kPrims{{
    {Primitive::Organism, "organism", 1},
    {Primitive::Eats, "eats", 2},
    {Primitive::Count, "count", 1},
    {Primitive::Decrease, "decrease", 1},
    {Primitive::Increase, "increase", 1},
    {Primitive::Unchanged, "unchanged", 1},
    {Primitive::Cause, "cause", 2},
    {Primitive::Herbivore, "herbivore", 1},
    {Primitive::Carnivore, "carnivore", 1},
    {Primitive::Omnivore, "omnivore", 1},
    {Primitive::Producer, "producer", 1},
    {Primitive::Predator, "predator", 1},
    {Primitive::Prey, "prey", 1},
    {Primitive::Consumer, "consumer", 1},
    {Primitive::Decomposer, "decomposer", 1},
    {Primitive::And, "and", 2},
}};

}  // namespace

std::string_view primitive_name(Primitive p) { return kPrims[static_cast<std::size_t>(p)].name; }

int primitive_arity(Primitive p) { return kPrims[static_cast<std::size_t>(p)].arity; }

std::optional<Primitive> primitive_from_name(std::string_view name) {
  for (const auto& info : kPrims)
    if (info.name == name) return info.prim;
  return std::nullopt;
}

bool is_role(Primitive p) {
  switch (p) {
    case Primitive::Herbivore:
    case Primitive::Carnivore:
    case Primitive::Omnivore:
    case Primitive::Producer:
    case Primitive::Predator:
    case Primitive::Prey:
    case Primitive::Consumer:
    case Primitive::Decomposer:
      return true;
    default:
      return false;
  }
}

bool is_direction(Primitive p) {
  return p == Primitive::Decrease || p == Primitive::Increase || p == Primitive::Unchanged;
}

const std::vector<Primitive>& all_primitives() {
  static const std::vector<Primitive> all = [] {
    std::vector<Primitive> v;
    for (const auto& info : kPrims) v.push_back(info.prim);
    return v;
  }();
  return all;
}

// ------------------------------------------------------------- factories

ExprPtr var(std::string name) {
  return std::make_shared<const Expr>(Expr{Expr::Kind::Var, std::move(name)});
}

ExprPtr lambda(std::string param, ExprPtr body) {
  return std::make_shared<const Expr>(Expr{Expr::Kind::Lambda, std::move(param), 0, Primitive::Organism, std::move(body)});
}

ExprPtr app(ExprPtr fn, ExprPtr arg) {
  return std::make_shared<const Expr>(Expr{Expr::Kind::Apply, {}, 0, Primitive::Organism, std::move(fn), std::move(arg)});
}

ExprPtr app(ExprPtr fn, const std::vector<ExprPtr>& args) {
  for (const auto& a : args) fn = app(std::move(fn), a);
  return fn;
}

ExprPtr entity(std::string label) {
  return std::make_shared<const Expr>(Expr{Expr::Kind::Entity, text::normalize_label(label)});
}

ExprPtr integer(std::int64_t v) { return std::make_shared<const Expr>(Expr{Expr::Kind::Int, {}, v}); }

ExprPtr prim(Primitive p) { return std::make_shared<const Expr>(Expr{Expr::Kind::Prim, {}, 0, p}); }

// --------------------------------------------------------------- parsing

namespace {

struct Token {
  enum class Kind { LParen, RParen, Comma, Dot, Lambda, Ident, String, Number, End } kind;
  std::string text;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '\'';
}

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '(') {
      out.push_back({Token::Kind::LParen, "("});
      ++i;
    } else if (c == ')') {
      out.push_back({Token::Kind::RParen, ")"});
      ++i;
    } else if (c == ',') {
      out.push_back({Token::Kind::Comma, ","});
      ++i;
    } else if (c == '.') {
      out.push_back({Token::Kind::Dot, "."});
      ++i;
    } else if (c == '\\') {
      out.push_back({Token::Kind::Lambda, "\\"});
      ++i;
    } else if (s.substr(i).starts_with("λ")) {
      out.push_back({Token::Kind::Lambda, "λ"});
      i += std::string_view("λ").size();
    } else if (c == '"') {
      std::string lit;
      ++i;
      while (i < s.size() && s[i] != '"') {
        if (s[i] == '\\' && i + 1 < s.size()) ++i;
        lit.push_back(s[i++]);
      }
      if (i >= s.size()) throw ParseError("logical form: unterminated string in '" + std::string(s) + "'");
      ++i;
      out.push_back({Token::Kind::String, lit});
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '-' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
      std::size_t j = i + 1;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      out.push_back({Token::Kind::Number, std::string(s.substr(i, j - i))});
      i = j;
    } else if (ident_start(c)) {
      std::size_t j = i + 1;
      while (j < s.size() && ident_char(s[j])) ++j;
      out.push_back({Token::Kind::Ident, std::string(s.substr(i, j - i))});
      i = j;
    } else {
      throw ParseError("logical form: unexpected character '" + std::string(1, c) + "' in '" + std::string(s) + "'");
    }
  }
  out.push_back({Token::Kind::End, ""});
  return out;
}

class Parser {
 public:
  Parser(std::string_view src) : src_(src), toks_(lex(src)) {}

  ExprPtr parse_all(bool sexpr) {
    ExprPtr e = sexpr ? sexp() : lam();
    if (peek().kind != Token::Kind::End) fail("trailing input '" + peek().text + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("logical form '" + std::string(src_) + "': " + msg);
  }
  const Token& peek() const { return toks_[pos_]; }
  Token next() { return toks_[pos_++]; }
  void expect(Token::Kind k, const char* what) {
    if (peek().kind != k) fail(std::string("expected ") + what + ", found '" + peek().text + "'");
    ++pos_;
  }

  ExprPtr atom(const Token& t) {
    switch (t.kind) {
      case Token::Kind::String:
        return entity(t.text);
      case Token::Kind::Number:
        return integer(std::stoll(t.text));
      case Token::Kind::Ident: {
        for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
          if (*it == t.text) return var(t.text);
        if (auto p = primitive_from_name(t.text)) return prim(*p);
        return entity(t.text);
      }
      default:
        fail("unexpected '" + t.text + "'");
    }
  }

  ExprPtr sexp() {
    Token t = next();
    if (t.kind != Token::Kind::LParen) {
      if (t.kind == Token::Kind::Ident && t.text == "lambda") fail("'lambda' outside parentheses");
      return atom(t);
    }
    if (peek().kind == Token::Kind::Ident && peek().text == "lambda") {
      next();
      Token param = next();
      if (param.kind != Token::Kind::Ident) fail("lambda parameter must be an identifier");
      scope_.push_back(param.text);
      ExprPtr body = sexp();
      scope_.pop_back();
      expect(Token::Kind::RParen, "')'");
      return lambda(param.text, body);
    }
    if (peek().kind == Token::Kind::Ident && peek().text == "getOrganism") {
      next();
      Token name = next();
      if (name.kind != Token::Kind::String && name.kind != Token::Kind::Ident) fail("getOrganism needs a label");
      expect(Token::Kind::RParen, "')'");
      return entity(name.text);
    }
    ExprPtr head = sexp();
    std::vector<ExprPtr> args;
    while (peek().kind != Token::Kind::RParen) {
      if (peek().kind == Token::Kind::End) fail("unbalanced parentheses");
      args.push_back(sexp());
    }
    next();
    if (args.empty()) fail("empty application");
    return lf::app(head, args);
  }

  ExprPtr lam() {
    if (peek().kind == Token::Kind::Lambda) {
      next();
      Token param = next();
      if (param.kind != Token::Kind::Ident) fail("lambda parameter must be an identifier");
      expect(Token::Kind::Dot, "'.'");
      scope_.push_back(param.text);
      ExprPtr body = lam();
      scope_.pop_back();
      return lambda(param.text, body);
    }
    return application();
  }

  ExprPtr application() {
    ExprPtr head;
    if (peek().kind == Token::Kind::LParen) {
      next();
      head = lam();
      expect(Token::Kind::RParen, "')'");
    } else if (peek().kind == Token::Kind::Ident && peek().text == "getOrganism") {
      next();
      expect(Token::Kind::LParen, "'('");
      Token name = next();
      if (name.kind != Token::Kind::String && name.kind != Token::Kind::Ident) fail("getOrganism needs a label");
      expect(Token::Kind::RParen, "')'");
      head = entity(name.text);
    } else {
      head = atom(next());
    }
    while (peek().kind == Token::Kind::LParen) {
      next();
      std::vector<ExprPtr> args{lam()};
      while (peek().kind == Token::Kind::Comma) {
        next();
        args.push_back(lam());
      }
      expect(Token::Kind::RParen, "')'");
      head = lf::app(head, args);
    }
    return head;
  }

  std::string_view src_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<std::string> scope_;
};

}  // namespace

ExprPtr parse(std::string_view text) {
  std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) throw ParseError("logical form: empty");
  auto toks = lex(text);
  // A parenthesized start or a lone atom is read as an s-expression.
  bool sexpr = text[first] == '(' || toks.size() == 2;
  return Parser(text).parse_all(sexpr);
}

// -------------------------------------------------------------- printing

namespace {

void spine(const ExprPtr& e, ExprPtr& head, std::vector<ExprPtr>& args) {
  if (e->is(Expr::Kind::Apply)) {
    spine(e->fn, head, args);
    args.push_back(e->arg);
  } else {
    head = e;
  }
}

bool needs_quotes(const std::string& name, const std::vector<std::string>& scope) {
  if (name.empty() || !ident_start(name[0])) return true;
  for (char c : name)
    if (!ident_char(c)) return true;
  if (name == "lambda" || name == "getOrganism" || primitive_from_name(name)) return true;
  for (const auto& s : scope)
    if (s == name) return true;
  return false;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out + "\"";
}

std::string leaf(const Expr& e, const std::vector<std::string>& scope) {
  switch (e.kind) {
    case Expr::Kind::Var:
      return e.name;
    case Expr::Kind::Entity:
      return needs_quotes(e.name, scope) ? quote(e.name) : e.name;
    case Expr::Kind::Int:
      return std::to_string(e.value);
    case Expr::Kind::Prim:
      return std::string(primitive_name(e.prim));
    default:
      return {};
  }
}

void print_sexpr(const ExprPtr& e, std::vector<std::string>& scope, std::string& out) {
  if (e->is(Expr::Kind::Lambda)) {
    out += "(lambda " + e->name + " ";
    scope.push_back(e->name);
    print_sexpr(e->fn, scope, out);
    scope.pop_back();
    out += ")";
  } else if (e->is(Expr::Kind::Apply)) {
    ExprPtr head;
    std::vector<ExprPtr> args;
    spine(e, head, args);
    out += "(";
    print_sexpr(head, scope, out);
    for (const auto& a : args) {
      out += " ";
      print_sexpr(a, scope, out);
    }
    out += ")";
  } else {
    out += leaf(*e, scope);
  }
}

void print_lambda(const ExprPtr& e, std::vector<std::string>& scope, std::string& out) {
  if (e->is(Expr::Kind::Lambda)) {
    out += "λ" + e->name + ".";
    scope.push_back(e->name);
    print_lambda(e->fn, scope, out);
    scope.pop_back();
  } else if (e->is(Expr::Kind::Apply)) {
    ExprPtr head;
    std::vector<ExprPtr> args;
    spine(e, head, args);
    if (head->is(Expr::Kind::Lambda)) {
      out += "(";
      print_lambda(head, scope, out);
      out += ")";
    } else {
      print_lambda(head, scope, out);
    }
    out += "(";
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (i) out += ", ";
      print_lambda(args[i], scope, out);
    }
    out += ")";
  } else {
    out += leaf(*e, scope);
  }
}

}  // namespace

std::string to_sexpr(const ExprPtr& e) {
  std::vector<std::string> scope;
  std::string out;
  print_sexpr(e, scope, out);
  return out;
}

std::string to_lambda_notation(const ExprPtr& e) {
  std::vector<std::string> scope;
  std::string out;
  print_lambda(e, scope, out);
  return out;
}

// --------------------------------------------------------- normalization

namespace {

void collect_free(const ExprPtr& e, std::vector<std::string>& bound, std::set<std::string>& out) {
  switch (e->kind) {
    case Expr::Kind::Var:
      if (std::find(bound.begin(), bound.end(), e->name) == bound.end()) out.insert(e->name);
      break;
    case Expr::Kind::Lambda:
      bound.push_back(e->name);
      collect_free(e->fn, bound, out);
      bound.pop_back();
      break;
    case Expr::Kind::Apply:
      collect_free(e->fn, bound, out);
      collect_free(e->arg, bound, out);
      break;
    default:
      break;
  }
}

std::string fresh_name(const std::string& base) {
  static std::atomic<std::uint64_t> counter{0};
  return base + "_" + std::to_string(counter.fetch_add(1));
}

}  // namespace

std::set<std::string> free_vars(const ExprPtr& e) {
  std::set<std::string> out;
  std::vector<std::string> bound;
  collect_free(e, bound, out);
  return out;
}

ExprPtr substitute(const ExprPtr& e, const std::string& name, const ExprPtr& value) {
  switch (e->kind) {
    case Expr::Kind::Var:
      return e->name == name ? value : e;
    case Expr::Kind::Lambda: {
      if (e->name == name) return e;
      auto fv = free_vars(value);
      if (fv.contains(e->name)) {
        std::string renamed = fresh_name(e->name);
        ExprPtr body = substitute(e->fn, e->name, var(renamed));
        return lambda(renamed, substitute(body, name, value));
      }
      ExprPtr body = substitute(e->fn, name, value);
      return body == e->fn ? e : lambda(e->name, body);
    }
    case Expr::Kind::Apply: {
      ExprPtr f = substitute(e->fn, name, value);
      ExprPtr a = substitute(e->arg, name, value);
      return (f == e->fn && a == e->arg) ? e : app(f, a);
    }
    default:
      return e;
  }
}

namespace {

ExprPtr normalize(const ExprPtr& e, int& budget) {
  if (--budget < 0) throw Error("beta reduction did not terminate");
  switch (e->kind) {
    case Expr::Kind::Lambda: {
      ExprPtr body = normalize(e->fn, budget);
      return body == e->fn ? e : lambda(e->name, body);
    }
    case Expr::Kind::Apply: {
      ExprPtr f = normalize(e->fn, budget);
      if (f->is(Expr::Kind::Lambda)) return normalize(substitute(f->fn, f->name, e->arg), budget);
      ExprPtr a = normalize(e->arg, budget);
      return (f == e->fn && a == e->arg) ? e : app(f, a);
    }
    default:
      return e;
  }
}

ExprPtr rename_bound(const ExprPtr& e, std::vector<std::pair<std::string, std::string>>& scope, int& next) {
  switch (e->kind) {
    case Expr::Kind::Var:
      for (auto it = scope.rbegin(); it != scope.rend(); ++it)
        if (it->first == e->name) return it->second == e->name ? e : var(it->second);
      return e;
    case Expr::Kind::Lambda: {
      std::string fresh = "x" + std::to_string(next++);
      scope.emplace_back(e->name, fresh);
      ExprPtr body = rename_bound(e->fn, scope, next);
      scope.pop_back();
      return lambda(fresh, body);
    }
    case Expr::Kind::Apply:
      return app(rename_bound(e->fn, scope, next), rename_bound(e->arg, scope, next));
    default:
      return e;
  }
}

}  // namespace

ExprPtr beta_normalize(const ExprPtr& e, int budget) { return normalize(e, budget); }

ExprPtr alpha_normalize(const ExprPtr& e) {
  std::vector<std::pair<std::string, std::string>> scope;
  int next = 0;
  return rename_bound(e, scope, next);
}

std::string canonical(const ExprPtr& e) { return to_sexpr(alpha_normalize(beta_normalize(e))); }

bool equivalent(const ExprPtr& a, const ExprPtr& b) { return canonical(a) == canonical(b); }

std::optional<Primitive> head_primitive(const ExprPtr& e) {
  ExprPtr cur = e;
  while (cur->is(Expr::Kind::Lambda)) cur = cur->fn;
  while (cur->is(Expr::Kind::Apply)) cur = cur->fn;
  if (cur->is(Expr::Kind::Prim)) return cur->prim;
  return std::nullopt;
}

// ------------------------------------------------------------------ types

namespace {

TypePtr make_type(Type::Kind k) { return std::make_shared<const Type>(Type{k}); }

}  // namespace

TypePtr entity_type() {
  static const TypePtr t = make_type(Type::Kind::Entity);
  return t;
}
TypePtr truth_type() {
  static const TypePtr t = make_type(Type::Kind::Truth);
  return t;
}
TypePtr int_type() {
  static const TypePtr t = make_type(Type::Kind::Int);
  return t;
}
TypePtr event_type() {
  static const TypePtr t = make_type(Type::Kind::Event);
  return t;
}
TypePtr arrow_type(TypePtr from, TypePtr to) {
  return std::make_shared<const Type>(Type{Type::Kind::Arrow, -1, std::move(from), std::move(to)});
}
TypePtr set_type(TypePtr element) { return arrow_type(std::move(element), truth_type()); }
TypePtr direction_type() { return arrow_type(entity_type(), event_type()); }

bool type_equal(const TypePtr& a, const TypePtr& b) {
  if (a->kind != b->kind) return false;
  if (a->kind == Type::Kind::Var) return a->var == b->var;
  if (a->kind == Type::Kind::Arrow) return type_equal(a->from, b->from) && type_equal(a->to, b->to);
  return true;
}

bool has_type_vars(const TypePtr& t) {
  if (t->kind == Type::Kind::Var) return true;
  if (t->kind == Type::Kind::Arrow) return has_type_vars(t->from) || has_type_vars(t->to);
  return false;
}

std::string type_to_string(const TypePtr& t) {
  switch (t->kind) {
    case Type::Kind::Entity:
      return "e";
    case Type::Kind::Truth:
      return "t";
    case Type::Kind::Int:
      return "i";
    case Type::Kind::Event:
      return "ev";
    case Type::Kind::Var:
      return "?" + std::to_string(t->var);
    case Type::Kind::Arrow:
      return "<" + type_to_string(t->from) + "," + type_to_string(t->to) + ">";
  }
  return {};
}

TypePtr primitive_type(Primitive p) {
  const auto e = entity_type(), t = truth_type();
  switch (p) {
    case Primitive::Organism:
      return arrow_type(e, t);
    case Primitive::Eats:
      return arrow_type(e, arrow_type(e, t));
    case Primitive::Count:
      return arrow_type(set_type(e), int_type());
    case Primitive::Decrease:
    case Primitive::Increase:
    case Primitive::Unchanged:
      return direction_type();
    case Primitive::Cause:
      return arrow_type(event_type(), arrow_type(event_type(), t));
    case Primitive::And:
      return arrow_type(t, arrow_type(t, t));
    default:
      return arrow_type(e, t);  // roles
  }
}

namespace {

class Inference {
 public:
  TypePtr fresh() {
    bindings_.push_back(nullptr);
    return std::make_shared<const Type>(Type{Type::Kind::Var, static_cast<int>(bindings_.size() - 1)});
  }

  TypePtr resolve(TypePtr t) const {
    while (t->kind == Type::Kind::Var && bindings_[t->var]) t = bindings_[t->var];
    return t;
  }

  TypePtr zonk(const TypePtr& t) const {
    TypePtr r = resolve(t);
    if (r->kind == Type::Kind::Arrow) return arrow_type(zonk(r->from), zonk(r->to));
    return r;
  }

  void unify(const TypePtr& a0, const TypePtr& b0, const std::string& path) {
    TypePtr a = resolve(a0), b = resolve(b0);
    if (a->kind == Type::Kind::Var && b->kind == Type::Kind::Var && a->var == b->var) return;
    if (a->kind == Type::Kind::Var) return bind(a->var, b, path);
    if (b->kind == Type::Kind::Var) return bind(b->var, a, path);
    if (a->kind != b->kind) mismatch(a, b, path);
    if (a->kind == Type::Kind::Arrow) {
      unify(a->from, b->from, path);
      unify(a->to, b->to, path);
    }
  }

  TypePtr infer(const ExprPtr& e, std::vector<std::pair<std::string, TypePtr>>& scope, const std::string& path) {
    switch (e->kind) {
      case Expr::Kind::Var:
        for (auto it = scope.rbegin(); it != scope.rend(); ++it)
          if (it->first == e->name) return it->second;
        throw TypeError("unbound variable '" + e->name + "' at " + path);
      case Expr::Kind::Entity:
        return entity_type();
      case Expr::Kind::Int:
        return int_type();
      case Expr::Kind::Prim:
        return primitive_type(e->prim);
      case Expr::Kind::Lambda: {
        TypePtr param = fresh();
        scope.emplace_back(e->name, param);
        TypePtr body = infer(e->fn, scope, path + ".body");
        scope.pop_back();
        return arrow_type(param, body);
      }
      case Expr::Kind::Apply: {
        TypePtr f = infer(e->fn, scope, path + ".fn");
        TypePtr a = infer(e->arg, scope, path + ".arg");
        TypePtr r = fresh();
        unify(f, arrow_type(a, r), path);
        return r;
      }
    }
    return nullptr;
  }

 private:
  bool occurs(int v, const TypePtr& t) const {
    TypePtr r = resolve(t);
    if (r->kind == Type::Kind::Var) return r->var == v;
    if (r->kind == Type::Kind::Arrow) return occurs(v, r->from) || occurs(v, r->to);
    return false;
  }

  void bind(int v, const TypePtr& t, const std::string& path) {
    if (occurs(v, t)) throw TypeError("infinite type at " + path);
    bindings_[v] = t;
  }

  [[noreturn]] void mismatch(const TypePtr& a, const TypePtr& b, const std::string& path) const {
    throw TypeError("type mismatch at " + path + ": " + type_to_string(zonk(a)) + " vs " +
                    type_to_string(zonk(b)));
  }

  std::vector<TypePtr> bindings_;
};

}  // namespace

TypePtr infer_type(const ExprPtr& e) {
  Inference inf;
  std::vector<std::pair<std::string, TypePtr>> scope;
  TypePtr t = inf.infer(e, scope, "root");
  return inf.zonk(t);
}

bool well_typed(const ExprPtr& e) {
  try {
    infer_type(e);
    return true;
  } catch (const TypeError&) {
    return false;
  }
}

}  // namespace webqa::lf
