#include <doctest.h>

#include "webqa/errors.hpp"
#include "webqa/logical_form.hpp"

using namespace webqa;
using namespace webqa::lf;

TEST_CASE("both syntaxes parse to the same term") {
  auto a = parse("(count (lambda x (eats x deer)))");
  auto b = parse("count(λx.eats(x, deer))");
  auto c = parse("count(\\x.eats(x, deer))");
  CHECK(to_sexpr(a) == "(count (lambda x (eats x deer)))");
  CHECK(to_sexpr(b) == to_sexpr(a));
  CHECK(to_sexpr(c) == to_sexpr(a));
  CHECK(to_sexpr(parse(to_lambda_notation(a))) == to_sexpr(a));
}

TEST_CASE("multi-word entities") {
  auto e = parse("eats(getOrganism(\"insect eating bird\"), deer)");
  REQUIRE(e->is(Expr::Kind::Apply));
  CHECK(e->fn->arg->is(Expr::Kind::Entity));
  CHECK(e->fn->arg->name == "insect eating bird");
  CHECK(to_sexpr(parse(to_sexpr(e))) == to_sexpr(e));
  CHECK(to_sexpr(parse(to_lambda_notation(e))) == to_sexpr(e));
}

TEST_CASE("malformed input") {
  CHECK_THROWS_AS(parse("(count (lambda x"), ParseError);
  CHECK_THROWS_AS(parse("count(λx.eats(x, deer)"), ParseError);
  CHECK_THROWS_AS(parse(""), ParseError);
}

TEST_CASE("beta reduction") {
  auto fig = parse("(lambda f (cause (decrease mice) (f snakes)))");
  CHECK(canonical(app(fig, prim(Primitive::Increase))) == "(cause (decrease mice) (increase snakes))");

  auto curried = parse("((lambda y (lambda x (eats x y))) deer)");
  CHECK(canonical(curried) == "(lambda x0 (eats x0 deer))");

  // The inner binder must be renamed rather than capture the free x.
  auto open = lambda("x", app(prim(Primitive::Eats), {var("x"), var("y")}));
  auto capture = substitute(open, "y", var("x"));
  CHECK(free_vars(capture) == std::set<std::string>{"x"});
  CHECK(canonical(app(capture, entity("deer"))) == "(eats deer x)");
}

TEST_CASE("alpha equivalence") {
  CHECK(equivalent(parse("λa.eats(a, deer)"), parse("λb.eats(b, deer)")));
  CHECK_FALSE(equivalent(parse("λa.eats(a, deer)"), parse("λb.eats(deer, b)")));
  CHECK(equivalent(parse("((lambda f f) (lambda x (organism x)))"), parse("λy.organism(y)")));
  // Unbound identifiers are entity constants.
  CHECK(free_vars(parse("λx.eats(x, y)")).empty());
  CHECK(free_vars(lambda("x", app(prim(Primitive::Eats), {var("x"), var("y")}))) == std::set<std::string>{"y"});
}

TEST_CASE("head primitive") {
  CHECK(head_primitive(parse("λx.eats(x, deer)")) == Primitive::Eats);
  CHECK(head_primitive(parse("count(λx.eats(x, deer))")) == Primitive::Count);
  CHECK_FALSE(head_primitive(parse("λf.f")));
}

TEST_CASE("types") {
  CHECK(type_to_string(infer_type(parse("count(λx.eats(x, deer))"))) == type_to_string(int_type()));
  CHECK(type_equal(infer_type(parse("λx.eats(x, deer)")), set_type(entity_type())));
  CHECK(type_equal(infer_type(parse("λf.cause(decrease(mice), f(snakes))")),
                   arrow_type(direction_type(), truth_type())));
  CHECK(type_equal(primitive_type(Primitive::Eats),
                   arrow_type(entity_type(), arrow_type(entity_type(), truth_type()))));
  CHECK(has_type_vars(infer_type(parse("λf.f"))));

  CHECK(well_typed(parse("λx.and(herbivore(x), prey(x))")));
  CHECK_FALSE(well_typed(parse("count(deer)")));
  CHECK_FALSE(well_typed(parse("eats(3, deer)")));
  CHECK_FALSE(well_typed(parse("cause(deer, mice)")));
  CHECK_THROWS_AS(infer_type(parse("organism(λx.x)")), TypeError);
}

TEST_CASE("primitive table") {
  for (Primitive p : all_primitives()) {
    CHECK(primitive_from_name(primitive_name(p)) == p);
    CHECK(primitive_arity(p) >= 1);
  }
  CHECK(is_role(Primitive::Herbivore));
  CHECK_FALSE(is_role(Primitive::Eats));
  CHECK(is_direction(Primitive::Unchanged));
  CHECK_FALSE(primitive_from_name("lion"));
}
