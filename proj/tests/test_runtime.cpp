#include <doctest.h>

#include <algorithm>
#include <map>
#include <sstream>

#include "fixtures.hpp"
#include "webqa/answer.hpp"
#include "webqa/domain.hpp"
#include "webqa/errors.hpp"
#include "webqa/runtime.hpp"

using namespace webqa;
using exec::Denotation;
using exec::Step;
using exec::Value;
using exec::World;

namespace {

/// choose(1, 2) + choose(1, 2)
exec::Program two_sums() {
  exec::Program p;
  p.start = [](World&) {
    return Step::choice("a", {Value(1), Value(2)}, [](const Value& a, World&) {
      return Step::choice("b", {Value(1), Value(2)}, [a](const Value& b, World&) {
        return Step::done(Denotation::of_integer(a.as_int() + b.as_int()));
      });
    });
  };
  return p;
}

/// Independent binary chooses; returns the number of `true`s.
Step flips_from(int n, int i, int acc) {
  if (i == n) return Step::done(Denotation::of_integer(acc));
  return Step::choice("flip" + std::to_string(i), {Value(true), Value(false)}, [n, i, acc](const Value& v, World&) {
    return flips_from(n, i + 1, v.as_bool() ? acc + 1 : acc);
  });
}

exec::Program n_flips(int n) {
  exec::Program p;
  p.start = [n](World&) { return flips_from(n, 0, 0); };
  return p;
}

/// Scores integer-valued alternatives by their value.
class ValueFeaturizer : public exec::TransitionFeaturizer {
 public:
  FeatureVector features(const exec::Transition& t) const override {
    FeatureVector f;
    if (t.chosen) {
      if (const auto* i = std::get_if<std::int64_t>(&t.chosen->v)) f.add("value", static_cast<double>(*i));
      if (const auto* b = std::get_if<bool>(&t.chosen->v)) f.add(*b ? "yes" : "no", 1.0);
    }
    return f;
  }
};

std::multiset<std::string> denotations(const std::vector<exec::ExecutionResult>& rs) {
  std::multiset<std::string> out;
  for (const auto& r : rs) out.insert(r.denotation.to_string());
  return out;
}

}  // namespace

TEST_CASE("choose(1,2)+choose(1,2) has four executions") {
  exec::NullFeaturizer nf;
  Weights theta;
  auto rs = exec::exhaustive_execute(two_sums(), nf, theta);
  CHECK(denotations(rs) == std::multiset<std::string>{"2", "3", "3", "4"});
  auto beam = exec::beam_execute(two_sums(), nf, theta, 10);
  CHECK(denotations(beam) == denotations(rs));
}

TEST_CASE("choose with no alternatives fails the branch") {
  exec::Program p;
  p.start = [](World&) { return Step::choice("empty", {}, [](const Value&, World&) { return Step::fail(); }); };
  exec::NullFeaturizer nf;
  Weights theta;
  CHECK(exec::exhaustive_execute(p, nf, theta).empty());
  CHECK(exec::beam_execute(p, nf, theta, 4).empty());
}

TEST_CASE("equal scores at zero weights") {
  exec::Program p;
  p.start = [](World&) {
    return Step::choice("c", {Value(true), Value(false)}, [](const Value& v, World&) {
      return Step::done(Denotation::of_truth(v.as_bool()));
    });
  };
  ValueFeaturizer vf;
  Weights theta;
  auto rs = exec::beam_execute(p, vf, theta, 4);
  REQUIRE(rs.size() == 2);
  CHECK(rs[0].log_score == rs[1].log_score);
}

TEST_CASE("beam width one follows the greedy path") {
  ValueFeaturizer vf;
  Weights theta;
  theta.set("value", 1.0);
  auto rs = exec::beam_execute(two_sums(), vf, theta, 1);
  REQUIRE(rs.size() == 1);
  CHECK(rs[0].denotation.integer == 4);
  CHECK(rs[0].log_score == doctest::Approx(4.0));
  theta.set("value", -1.0);
  rs = exec::beam_execute(two_sums(), vf, theta, 1);
  REQUIRE(rs.size() == 1);
  CHECK(rs[0].denotation.integer == 2);
}

TEST_CASE("n independent chooses give 2^n results; budget refusal") {
  exec::NullFeaturizer nf;
  Weights theta;
  CHECK(exec::exhaustive_execute(n_flips(5), nf, theta).size() == 32);
  CHECK_THROWS_AS(exec::exhaustive_execute(n_flips(5), nf, theta, 4), BudgetExceeded);
  CHECK(exec::exhaustive_execute(n_flips(0), nf, theta).size() == 1);
}

TEST_CASE("score equals the sum of trace feature dot products") {
  ValueFeaturizer vf;
  Weights theta;
  theta.set("yes", 0.3);
  theta.set("no", -0.7);
  for (const auto& r : exec::exhaustive_execute(n_flips(4), vf, theta)) {
    double s = 0;
    FeatureVector total;
    for (const auto& c : r.trace()) {
      s += theta.dot(c.features);
      total.add(c.features);
    }
    CHECK(r.log_score == doctest::Approx(s).epsilon(1e-12));
    CHECK(total == r.features);
  }
}

TEST_CASE("trace dump has one line per choose") {
  exec::NullFeaturizer nf;
  Weights theta;
  auto rs = exec::exhaustive_execute(two_sums(), nf, theta);
  std::ostringstream os;
  exec::dump_trace(rs.front(), os);
  auto text = os.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
  CHECK(text.find("a\t2\t") == 0);
}

TEST_CASE("world instances are never reassigned") {
  World w(2);
  w.set_eats(0, 1, true);
  CHECK(w.eats(0, 1) == exec::Truth::True);
  CHECK(w.eats(1, 0) == exec::Truth::Undef);
  CHECK_THROWS(w.set_eats(0, 1, false));
  REQUIRE(w.last_decided());
  CHECK(w.last_decided()->x == 0);
}

// ---------------------------------------------------------------- domain

TEST_CASE("execution tree of the population-change program") {
  auto env = fixtures::make_env({"mice", "snakes"});
  auto prog = domain::compile(lf::parse("λf.cause(decrease(mice), f(snakes))"));
  CHECK(prog.root == domain::RootKind::DirectionFilter);
  CHECK(prog.subject == "snakes");
  exec::NullFeaturizer nf;
  Weights theta;
  auto bound = prog.bind(env);
  auto rs = exec::exhaustive_execute(bound, nf, theta);
  REQUIRE(rs.size() == 4);
  std::map<std::pair<bool, bool>, std::string> leaf;
  for (const auto& r : rs) {
    const auto trace = r.trace();
    REQUIRE(trace.size() == 4);
    CHECK(trace[0].site == "organism(mice)");
    CHECK(trace[1].site == "organism(snakes)");
    CHECK(trace[2].site == "eats(mice,snakes)");
    CHECK(trace[3].site == "eats(snakes,mice)");
    leaf[{r.world.eats(0, 1) == exec::Truth::True, r.world.eats(1, 0) == exec::Truth::True}] =
        r.denotation.to_string();
  }
  CHECK(leaf[{false, false}] == "{unchanged} of snakes");
  CHECK(leaf[{false, true}] == "{decrease} of snakes");
  CHECK(leaf[{true, false}] == "{increase} of snakes");
  CHECK(leaf[{true, true}] == "{} of snakes");

  auto beam = exec::beam_execute(bound, nf, theta, 8);
  CHECK(denotations(beam) == denotations(rs));
}

TEST_CASE("memoized organism lookups branch once") {
  auto env = fixtures::make_env({"deer"});
  auto prog = domain::compile(lf::parse("(and (organism deer) (organism deer))"));
  exec::NullFeaturizer nf;
  Weights theta;
  auto rs = exec::exhaustive_execute(prog.bind(env), nf, theta);
  // organism(deer)=false fails the entity constant; =true gives 1 execution.
  CHECK(rs.size() == 1);
  auto prog2 = domain::compile(lf::parse("(lambda x (and (organism x) (organism x)))"));
  auto rs2 = exec::exhaustive_execute(prog2.bind(env), nf, theta);
  CHECK(rs2.size() == 2);
}

TEST_CASE("count compiles to an integer program") {
  auto env = fixtures::make_env({"deer", "wolf", "grass"});
  auto prog = domain::compile(lf::parse("count(λx.eats(x, deer))"));
  CHECK(prog.root == domain::RootKind::Integer);
  GoldFoodWeb g;
  g.organisms = {"deer", "wolf", "grass"};
  g.eats = {{"wolf", "deer"}, {"deer", "grass"}};
  auto d = domain::run_decided(prog, env, domain::world_from_gold(env, g));
  CHECK(d.to_string() == "1");
}

TEST_CASE("bare constants are singleton filters or failures") {
  auto env = fixtures::make_env({"mice"});
  auto prog = domain::compile(lf::parse("mice"));
  exec::NullFeaturizer nf;
  Weights theta;
  auto rs = exec::exhaustive_execute(prog.bind(env), nf, theta);
  REQUIRE(rs.size() == 1);
  CHECK(rs[0].denotation.to_string() == "{mice}");
  auto missing = domain::compile(lf::parse("hawk"));
  CHECK(exec::exhaustive_execute(missing.bind(env), nf, theta).empty());
}

TEST_CASE("ill-typed or non-executable forms are rejected") {
  CHECK_THROWS_AS(domain::compile(lf::parse("(count deer)")), TypeError);
  CHECK_THROWS_AS(domain::compile(lf::parse("(lambda x (lambda y (eats x y)))")), TypeError);
  CHECK_FALSE(domain::is_executable(lf::parse("eats")));
  CHECK(domain::is_executable(lf::parse("herbivore")));
}

TEST_CASE("cause table") {
  using exec::Direction;
  auto D = Direction::Decrease, I = Direction::Increase, U = Direction::Unchanged;
  CHECK(domain::evaluate_cause(D, D, false, true));
  CHECK(domain::evaluate_cause(D, I, true, false));
  CHECK(domain::evaluate_cause(D, U, false, false));
  CHECK_FALSE(domain::evaluate_cause(D, D, false, false));
  CHECK_FALSE(domain::evaluate_cause(D, I, false, false));
  CHECK(domain::evaluate_cause(U, U, true, false));
  CHECK(domain::evaluate_cause(U, U, false, true));
  // Total: exactly one effect direction holds unless both animals eat each other.
  for (auto c : exec::kDirections) {
    for (int e12 = 0; e12 < 2; ++e12) {
      for (int e21 = 0; e21 < 2; ++e21) {
        int n = 0;
        for (auto e : exec::kDirections) n += domain::evaluate_cause(c, e, e12, e21);
        CHECK(n == ((e12 && e21) ? 0 : 1));
      }
    }
  }
}

namespace {

/// Roles straight from the graph, for comparison with the interpreter.
std::set<std::string> brute_roles(const GoldFoodWeb& g, const std::string& role) {
  auto eaten_by = [&](const std::string& x) {
    std::set<std::string> s;
    for (const auto& [a, b] : g.eats) {
      if (a == x && b != x) s.insert(b);
    }
    return s;
  };
  auto consumer = [&](const std::string& x) { return !eaten_by(x).empty(); };
  std::set<std::string> out;
  for (const auto& x : g.organisms) {
    auto food = eaten_by(x);
    bool r = false;
    if (role == "producer") r = food.empty();
    if (role == "consumer" || role == "predator") r = !food.empty();
    if (role == "herbivore") {
      r = !food.empty() && std::all_of(food.begin(), food.end(), [&](const auto& y) { return !consumer(y); });
    }
    if (role == "carnivore") {
      r = !food.empty() && std::all_of(food.begin(), food.end(), [&](const auto& y) { return consumer(y); });
    }
    if (role == "omnivore") {
      r = std::any_of(food.begin(), food.end(), [&](const auto& y) { return consumer(y); }) &&
          std::any_of(food.begin(), food.end(), [&](const auto& y) { return !consumer(y); });
    }
    if (role == "prey") {
      r = std::any_of(g.eats.begin(), g.eats.end(), [&](const auto& e) { return e.second == x && e.first != x; });
    }
    if (r) out.insert(x);
  }
  return out;
}

}  // namespace

TEST_CASE("roles on a food chain") {
  auto env = fixtures::make_env({"grass", "grasshopper", "bird", "hawk"});
  GoldFoodWeb g;
  g.organisms = {"grass", "grasshopper", "bird", "hawk"};
  g.eats = {{"grasshopper", "grass"}, {"bird", "grasshopper"}, {"hawk", "bird"}};
  auto w = domain::world_from_gold(env, g);
  auto run = [&](const std::string& form) {
    auto d = domain::run_decided(domain::compile(lf::parse(form)), env, w);
    return std::set<std::string>(d.entities.begin(), d.entities.end());
  };
  CHECK(run("herbivore") == std::set<std::string>{"grasshopper"});
  CHECK(run("λx.and(predator(x), prey(x))") == std::set<std::string>{"grasshopper", "bird"});
  CHECK(run("producer") == std::set<std::string>{"grass"});
  CHECK(domain::evaluate_role(lf::Primitive::Producer, 0, w));
  for (const char* role : {"producer", "consumer", "herbivore", "carnivore", "omnivore", "predator", "prey"}) {
    CAPTURE(role);
    CHECK(run(role) == brute_roles(g, role));
  }
  CHECK(run("decomposer").empty());
}

TEST_CASE("the predator-and-prey question picks insect-eating birds") {
  auto env = fixtures::make_env({"grass", "grasshopper", "insect-eating birds", "hawk"});
  GoldFoodWeb g;
  g.organisms = {"grass", "grasshopper", "insect-eating birds", "hawk"};
  g.eats = {{"grasshopper", "grass"}, {"insect-eating birds", "grasshopper"}, {"hawk", "insect-eating birds"},
            {"hawk", "grasshopper"}};
  auto d = domain::run_decided(domain::compile(lf::parse("λx.and(prey(x), carnivore(x))")), env,
                               domain::world_from_gold(env, g));
  CHECK(d.to_string() == "{insect-eating birds}");
}

// ------------------------------------------------------- supervision oracle

TEST_CASE("supervision oracle") {
  auto env = fixtures::make_env({"mice", "snakes"}, {}, {"mice", "snakes"}, {{"snakes", "mice"}});
  auto prog = domain::compile(lf::parse("λf.cause(decrease(mice), f(snakes))"));
  exec::NullFeaturizer nf;
  Weights theta;
  std::vector<std::string> options = {"increase", "decrease", "stay the same"};
  answer::SupervisionOracle oracle(env, options, 1);

  World w(2);
  w.set_eats(0, 1, true);  // mice eat snakes: not in gold
  CHECK_FALSE(oracle.accept_partial(w));

  auto rs = exec::exhaustive_execute(prog.bind(env), nf, theta, 16, &oracle);
  REQUIRE(rs.size() == 1);
  CHECK(rs[0].denotation.to_string() == "{decrease} of snakes");

  answer::SupervisionOracle wrong(env, options, 0);
  CHECK(exec::exhaustive_execute(prog.bind(env), nf, theta, 16, &wrong).empty());

  // Prefix closure: undeciding any instance of the accepted world keeps it
  // acceptable.
  CHECK(oracle.accept_partial(World(2)));
  World prefix(2);
  prefix.set_organism(0, true);
  prefix.set_organism(1, true);
  CHECK(oracle.accept_partial(prefix));
}
