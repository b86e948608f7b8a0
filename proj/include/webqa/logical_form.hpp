#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace webqa::lf {

/// Domain-theory functions a logical form may call.
enum class Primitive : std::uint8_t {
  Organism,
  Eats,
  Count,
  Decrease,
  Increase,
  Unchanged,
  Cause,
  Herbivore,
  Carnivore,
  Omnivore,
  Producer,
  Predator,
  Prey,
  Consumer,
  Decomposer,
  And,
};

std::string_view primitive_name(Primitive p);
std::optional<Primitive> primitive_from_name(std::string_view name);
int primitive_arity(Primitive p);
bool is_role(Primitive p);
bool is_direction(Primitive p);
const std::vector<Primitive>& all_primitives();

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Immutable expression node. Application is curried: (f a b) is
/// Apply(Apply(f, a), b).
struct Expr {
  enum class Kind : std::uint8_t { Var, Lambda, Apply, Entity, Int, Prim };

  Kind kind;
  std::string name;  // Var / Lambda parameter / Entity label
  std::int64_t value = 0;
  Primitive prim = Primitive::Organism;
  ExprPtr fn;    // Lambda body, or Apply function
  ExprPtr arg;   // Apply argument

  bool is(Kind k) const { return kind == k; }
};

ExprPtr var(std::string name);
ExprPtr lambda(std::string param, ExprPtr body);
ExprPtr app(ExprPtr fn, ExprPtr arg);
ExprPtr app(ExprPtr fn, const std::vector<ExprPtr>& args);
ExprPtr entity(std::string label);
ExprPtr integer(std::int64_t v);
ExprPtr prim(Primitive p);

/// Parses either the s-expression syntax `(count (lambda x (eats x deer)))`
/// or lambda notation `λx.count(eats(x, deer))` (`\x.` also accepted).
/// Entities are bare identifiers or quoted strings; `getOrganism("a b")` and
/// `(getOrganism "a b")` denote the entity constant "a b". Throws ParseError.
ExprPtr parse(std::string_view text);

std::string to_sexpr(const ExprPtr& e);
std::string to_lambda_notation(const ExprPtr& e);

std::set<std::string> free_vars(const ExprPtr& e);
ExprPtr substitute(const ExprPtr& e, const std::string& name, const ExprPtr& value);

/// Normal-order beta reduction to normal form. Throws Error if the step
/// budget is exhausted (only possible for ill-typed terms).
ExprPtr beta_normalize(const ExprPtr& e, int budget = 100000);
/// Renames bound variables to x0, x1, ... in binding order.
ExprPtr alpha_normalize(const ExprPtr& e);
/// s-expression of the beta-normal, alpha-normal form. Two logical forms are
/// equivalent iff their canonical strings are equal.
std::string canonical(const ExprPtr& e);
bool equivalent(const ExprPtr& a, const ExprPtr& b);

/// Head primitive of the body, looking through leading lambdas and
/// application spines (e.g. `eats` for λx.eats(x, deer)). Empty when the head
/// is not a primitive.
std::optional<Primitive> head_primitive(const ExprPtr& e);

// ---------------------------------------------------------------- types

struct Type;
using TypePtr = std::shared_ptr<const Type>;

struct Type {
  enum class Kind : std::uint8_t { Entity, Truth, Int, Event, Arrow, Var };
  Kind kind;
  int var = -1;
  TypePtr from, to;
};

TypePtr entity_type();
TypePtr truth_type();
TypePtr int_type();
TypePtr event_type();
TypePtr arrow_type(TypePtr from, TypePtr to);
/// set<τ> is represented by its characteristic function τ -> t.
TypePtr set_type(TypePtr element);
/// A change direction is a function entity -> event.
TypePtr direction_type();

bool type_equal(const TypePtr& a, const TypePtr& b);
bool has_type_vars(const TypePtr& t);
std::string type_to_string(const TypePtr& t);

/// Type of a primitive in the domain signature.
TypePtr primitive_type(Primitive p);

/// Infers the type of a closed expression. Unconstrained parts remain type
/// variables. Throws TypeError naming the offending subexpression path.
TypePtr infer_type(const ExprPtr& e);
bool well_typed(const ExprPtr& e);

}  // namespace webqa::lf
