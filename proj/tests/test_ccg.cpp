#include <doctest.h>

#include <limits>

#include "fixtures.hpp"
#include "parse_oracle.hpp"
#include "webqa/ccg.hpp"
#include "webqa/errors.hpp"
#include "webqa/text.hpp"

using namespace webqa;
using ccg::Category;

namespace {

const char* kFigLexicon = R"(# population change
if := (S/N)/S : λx.λy.λf.cause(x, f(y))
mice := N : mice
die := S\N : λx.decrease(x)
snakes := N : snakes
)";

ccg::ParserConfig unbounded() {
  ccg::ParserConfig c;
  c.beam_width = std::numeric_limits<std::size_t>::max();
  c.lf_count = 0;
  return c;
}

Weights skip_penalty(const std::vector<std::string>& tokens, double w = -1.0) {
  Weights theta;
  for (const auto& t : tokens) theta.set("skip:" + t, w);
  return theta;
}

}  // namespace

TEST_CASE("categories parse, print and intern") {
  auto* c = Category::parse("(S/N)/S");
  CHECK(c->key == "S/N/S");
  CHECK(c->arity == 2);
  CHECK(Category::parse(c->key) == c);
  auto* m = Category::parse("(S\\N)/(S\\N)^");
  CHECK(m->head_from_arg);
  CHECK(m->key == "S\\N/(S\\N)^");
  CHECK(Category::parse(m->key) == m);
  CHECK(m->plain == Category::parse("(S\\N)/(S\\N)"));
  CHECK(Category::parse("N")->is_atomic());
  CHECK_THROWS_AS(Category::parse("S/"), ParseError);
  CHECK_THROWS_AS(Category::parse("(S/N"), ParseError);
  CHECK_THROWS_AS(Category::parse("N^/N"), ParseError);
}

TEST_CASE("lexicon loading") {
  auto lex = ccg::Lexicon::parse(kFigLexicon);
  CHECK(lex.size() == 4);
  const auto* mice = lex.lookup("mice");
  REQUIRE(mice);
  CHECK((*mice)[0]->category->is_atomic());
  CHECK(ccg::predicate_name((*mice)[0]->predicate) == "mice");
  const auto* die = lex.lookup("die");
  REQUIRE(die);
  CHECK((*die)[0]->category->arity == 1);

  auto dup = ccg::Lexicon::parse("a := N : deer\na := N : (getOrganism \"deer\")\nb := N : deer\n");
  CHECK(dup.size() == 2);
  CHECK(dup.warnings().size() == 1);
  CHECK((*dup.lookup("a"))[0]->predicate == (*dup.lookup("b"))[0]->predicate);

  CHECK(ccg::Lexicon::parse("").size() == 0);
  CHECK_THROWS_AS(ccg::Lexicon::parse("x := S/( : deer"), ParseError);
  try {
    ccg::Lexicon::parse("ok := N : deer\n\nbad line\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(ccg::Lexicon::parse("x := N : (count deer)"), ParseError);
}

TEST_CASE("empty lexicon gives no parse") {
  auto lex = ccg::Lexicon::parse("");
  Weights theta;
  CHECK(ccg::parse(text::tokenize("what eats deer ?"), lex, nullptr, theta, {}).empty());
}

TEST_CASE("dynamic entries") {
  auto env = fixtures::make_env({"snowshoe hare", "hare", "deer", "lynx"});
  auto tokens = text::tokenize("what eats snowshoe hare?");
  auto d = ccg::dynamic_entries(tokens, env);
  REQUIRE(d.size() == 1);
  CHECK(d[0].start == 2);
  CHECK(d[0].end == 4);
  CHECK(lf::to_sexpr(d[0].entry->logical_form) == "\"snowshoe hare\"");
  CHECK(d[0].entry->category->key == "N");

  CHECK(ccg::dynamic_entries(text::tokenize("what eats grass ?"), env).empty());
  auto twice = ccg::dynamic_entries(text::tokenize("does deer eat deer"), env);
  REQUIRE(twice.size() == 2);
  CHECK(twice[0].start != twice[1].start);
  // Plural stemming.
  CHECK(ccg::dynamic_entries(text::tokenize("how many lynxes"), env).empty());
  CHECK(ccg::dynamic_entries(text::tokenize("the deers"), env).size() == 1);
}

TEST_CASE("the example question parses to the cause filter") {
  auto lex = ccg::Lexicon::parse(kFigLexicon);
  auto tokens = text::tokenize("if mice die snakes will ?");
  REQUIRE(tokens.size() == 6);
  auto theta = skip_penalty(tokens);
  auto parses = ccg::parse(tokens, lex, nullptr, theta, {});
  REQUIRE(!parses.empty());
  CHECK(parses[0].canonical == lf::canonical(lf::parse("λf.cause(decrease(mice), f(snakes))")));
  CHECK(parses[0].root_category == "S");
  auto f = ccg::parse_features(parses[0].best_tree, tokens);
  CHECK(f.get("skip:will") == 1.0);
  CHECK(f.get("skip:?") == 1.0);
  CHECK(f.get("skip:if") == 0.0);
  CHECK(f.get("dep:S\\N|(lambda x0 (decrease x0))|1|mice") == 1.0);
  CHECK(f.get("depdist:S\\N|(lambda x0 (decrease x0))|1|0") == 1.0);
  CHECK(f.get("root:S|(lambda x0 (lambda x1 (lambda x2 (cause x0 (x2 x1)))))") == 1.0);
  CHECK(parses[0].best_score == doctest::Approx(theta.dot(f)).epsilon(1e-12));
}

TEST_CASE("single-word parse") {
  auto lex = ccg::Lexicon::parse(kFigLexicon);
  Weights theta;
  auto parses = ccg::parse({"mice"}, lex, nullptr, theta, {});
  REQUIRE(parses.size() == 1);
  CHECK(parses[0].canonical == "mice");
  CHECK(parses[0].root_category == "N");
  auto f = ccg::parse_features(parses[0].best_tree, {"mice"});
  CHECK(f.size() == 2);
  CHECK(f.get("lex:mice|N|mice") == 1.0);
  CHECK(f.get("root:N|mice") == 1.0);
}

TEST_CASE("equal logical forms from different trees are summed") {
  auto lex = ccg::Lexicon::parse(R"(
f := S/S : λp.and(p, organism(wolf))
g := S/S : λq.and(organism(deer), q)
h := S : organism(grass)
)");
  std::vector<std::string> tokens = {"f", "g", "h"};
  Weights theta;
  theta.set("comb:S/S|S/S|S/S", 0.4);
  theta.set("comb:S/S|S|S", -0.3);
  auto parses = ccg::parse(tokens, lex, nullptr, theta, unbounded());
  auto expected = oracle::marginal_log_weights(tokens, lex, nullptr, theta);
  const std::string full = lf::canonical(lf::parse("and(and(organism(deer), organism(grass)), organism(wolf))"));
  bool found = false;
  for (const auto& p : parses) {
    if (p.canonical != full) continue;
    found = true;
    CHECK(p.num_trees == 2);
    // FA+FA: 2 × comb S/S|S|S; FC then FA: comb S/S|S/S|S/S and S/S|S|S once.
    double a = 2 * -0.3, b = 0.4 - 0.3;
    CHECK(p.log_weight == doctest::Approx(std::log(std::exp(a) + std::exp(b))).epsilon(1e-12));
  }
  CHECK(found);
  REQUIRE(parses.size() == expected.size());
  for (const auto& p : parses) CHECK(p.log_weight == doctest::Approx(expected.at(p.canonical)).epsilon(1e-9));
}

TEST_CASE("chart with unbounded beam equals derivation enumeration") {
  auto lex = ccg::Lexicon::parse(kFigLexicon);
  auto tokens = text::tokenize("if mice die snakes will ?");
  auto theta = skip_penalty(tokens, -0.5);
  theta.set("lex:mice|N|mice", 0.7);
  auto parses = ccg::parse(tokens, lex, nullptr, theta, unbounded());
  auto expected = oracle::marginal_log_weights(tokens, lex, nullptr, theta);
  REQUIRE(parses.size() == expected.size());
  for (const auto& p : parses) {
    CAPTURE(p.canonical);
    CHECK(p.log_weight == doctest::Approx(expected.at(p.canonical)).epsilon(1e-9));
  }
}

TEST_CASE("truncation and root filter") {
  auto lex = ccg::Lexicon::parse(kFigLexicon);
  auto tokens = text::tokenize("if mice die snakes will ?");
  Weights theta;
  ccg::ParserConfig c;
  c.lf_count = 2;
  CHECK(ccg::parse(tokens, lex, nullptr, theta, c).size() == 2);
  auto only_entities = [](const lf::ExprPtr& e) { return e->is(lf::Expr::Kind::Entity); };
  auto filtered = ccg::parse(tokens, lex, nullptr, theta, unbounded(), only_entities);
  REQUIRE(filtered.size() == 2);
  for (const auto& p : filtered) CHECK((p.canonical == "mice" || p.canonical == "snakes"));
}

TEST_CASE("dependency argument numbers never exceed the head arity") {
  auto lex = ccg::Lexicon::parse(kFigLexicon);
  auto tokens = text::tokenize("if mice die snakes will ?");
  oracle::Enumerator e(tokens, lex, nullptr);
  for (const auto& t : e.roots()) {
    for (const auto& n : t.nodes) {
      CHECK(static_cast<int>(n.slots.size()) == n.category->arity);
      for (const auto& s : n.slots) CHECK(s.argument <= s.lexical_category->arity);
    }
  }
}
