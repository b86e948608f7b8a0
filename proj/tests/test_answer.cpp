#include <doctest.h>

#include <numeric>

#include "fixtures.hpp"
#include "webqa/answer.hpp"

using namespace webqa;
using exec::Denotation;
using exec::Direction;

namespace {

const std::vector<std::string> kNumbers = {"3", "2", "4", "1"};

double total(const std::vector<double>& p) { return std::accumulate(p.begin(), p.end(), 0.0); }

}  // namespace

TEST_CASE("entity set options count fuzzy mentions") {
  auto d = Denotation::entity_set({"hawk", "owl"});
  CHECK(answer::score_option(d, "hawks and owls") == 2);
  CHECK(answer::score_option(d, "hawks") == 1);
  CHECK(answer::score_option(d, "Owls.") == 1);
  CHECK(answer::score_option(d, "snakes") == 0);
  // "hawk" is not a fuzzy match for "hank".
  CHECK(answer::score_option(d, "hank") == 0);
  CHECK(answer::mentions("the insect-eating birds", "insect eating bird"));
  CHECK_FALSE(answer::mentions("insect", "insect eating bird"));
  for (const char* opt : {"hawks, owls and hawks", "owl owl owl", "mice"})
    CHECK(answer::score_option(d, opt) <= 2);
}

TEST_CASE("integer options") {
  auto one = Denotation::of_integer(1);
  for (std::size_t i = 0; i < kNumbers.size(); ++i)
    CHECK(answer::score_option(one, kNumbers[i]) == (i == 3 ? 1 : 0));
  CHECK(answer::select(one, kNumbers) == 3u);
  CHECK(answer::score_option(Denotation::of_integer(12), "twelve") == 1);
  CHECK(answer::score_option(Denotation::of_integer(2), "12") == 0);
}

TEST_CASE("change events need both direction and organism") {
  auto d = Denotation::event_set({{Direction::Increase, "grasshopper"}});
  CHECK(answer::score_option(d, "The grasshopper population would increase.") > 0);
  CHECK(answer::score_option(d, "The grasshopper population would decrease.") == 0);
  CHECK(answer::score_option(d, "The deer population would increase.") == 0);
  CHECK(answer::mentions_direction("it would stay the same", Direction::Unchanged));
  CHECK(answer::mentions_direction("numbers go down", Direction::Decrease));
}

TEST_CASE("truth options") {
  CHECK(answer::select(Denotation::of_truth(true), {"yes", "no"}) == 0u);
  CHECK(answer::select(Denotation::of_truth(false), {"yes", "no"}) == 1u);
}

TEST_CASE("select abstains on ties and zeros") {
  auto d = Denotation::entity_set({"hawk"});
  CHECK(answer::select(d, {"owl", "mouse", "snake", "hawk"}) == 3u);
  CHECK_FALSE(answer::select(d, {"hawk", "hawks", "mouse", "snake"}));
  CHECK_FALSE(answer::select(d, {"owl", "mouse", "snake", "deer"}));
  CHECK_FALSE(answer::select(Denotation::failure(), kNumbers));
}

TEST_CASE("select is permutation equivariant") {
  auto d = Denotation::entity_set({"hawk", "owl"});
  std::vector<std::string> opts = {"hawks", "owls and hawks", "mice", "deer"};
  std::vector<std::size_t> perm = {0, 1, 2, 3};
  const auto base = answer::select(d, opts);
  REQUIRE(base == 1u);
  do {
    std::vector<std::string> shuffled;
    for (auto i : perm) shuffled.push_back(opts[i]);
    const auto pick = answer::select(d, shuffled);
    REQUIRE(pick);
    CHECK(perm[*pick] == *base);
  } while (std::next_permutation(perm.begin(), perm.end()));
}

TEST_CASE("answer distribution") {
  const std::vector<std::string> opts = {"owl", "hawk", "snake", "mouse"};
  auto to_b = Denotation::entity_set({"hawk"});
  auto abstain = Denotation::entity_set({"deer"});

  auto p = answer::answer_distribution({{to_b, 0.7}, {abstain, 0.3}}, opts);
  REQUIRE(p.size() == 4);
  CHECK(p[1] == doctest::Approx(0.7 + 0.3 / 4).epsilon(1e-12));
  for (std::size_t i : {0, 2, 3}) CHECK(p[i] == doctest::Approx(0.3 / 4).epsilon(1e-12));
  CHECK(total(p) == doctest::Approx(1.0).epsilon(1e-9));

  auto single = answer::answer_distribution({{Denotation::entity_set({"owl"}), 1.0}}, opts);
  CHECK(single[0] == doctest::Approx(1.0));
  CHECK(total(single) == doctest::Approx(1.0).epsilon(1e-9));

  auto empty = answer::answer_distribution({}, opts);
  for (double x : empty) CHECK(x == doctest::Approx(0.25));

  // Unnormalized weights are normalized.
  auto scaled = answer::answer_distribution({{to_b, 7.0}, {abstain, 3.0}}, opts);
  for (std::size_t i = 0; i < 4; ++i) CHECK(scaled[i] == doctest::Approx(p[i]).epsilon(1e-12));
}

TEST_CASE("supervision oracle") {
  auto env = fixtures::make_env({"grass", "rabbit", "fox"}, {{"grass", "rabbit"}, {"rabbit", "fox"}},
                                {"grass", "rabbit", "fox"}, {{"rabbit", "grass"}, {"fox", "rabbit"}});
  const std::vector<std::string> opts = {"0", "1", "2", "3"};
  answer::SupervisionOracle oracle(env, opts, 1);
  exec::World w(env.num_labels());
  CHECK(oracle.accept_partial(w));
  CHECK_FALSE(oracle.accept_complete(w, Denotation::of_integer(2)));
  CHECK(oracle.accept_complete(w, Denotation::of_integer(1)));
  w.set_eats(env.label_index("fox"), env.label_index("rabbit"), true);
  CHECK(oracle.accept_partial(w));
  w.set_eats(env.label_index("grass"), env.label_index("fox"), true);
  CHECK_FALSE(oracle.accept_partial(w));
  CHECK_FALSE(oracle.accept_complete(w, Denotation::of_integer(1)));
}
