#include <doctest.h>

#include <deque>
#include <random>

#include "fixtures.hpp"
#include "graph_oracle.hpp"
#include "webqa/domain.hpp"
#include "webqa/exec_model.hpp"

using namespace webqa;
using exec::World;

namespace {

Environment scored_env() {
  EnvironmentData d;
  d.texts.push_back({"t0", "mouse", {0, 0, 40, 10}, 0.9});
  d.texts.push_back({"t1", "large grey timber wolf pack", {100, 0, 200, 20}, 0.8});
  d.texts.push_back({"t2", "pack", {110, 2, 30, 10}, 0.7});
  d.texts.push_back({"t3", "one two three four five six", {0, 100, 300, 20}, 1.0});
  d.arrows.push_back({"a0", 0.9, {}});
  d.arrows.push_back({"a1", 0.9, {}});
  d.interobject_linkages.push_back({"t0", "t1", "a0", 0.35});
  d.interobject_linkages.push_back({"t2", "t1", "a0", 0.3});
  d.interobject_linkages.push_back({"t3", "t1", "a0", 1.0});
  d.interobject_linkages.push_back({"t1", "t0", "a1", 0.05});
  return Environment(std::move(d));
}

std::vector<bool> random_graph(std::mt19937_64& rng, std::size_t n) {
  std::bernoulli_distribution edge(0.3);
  std::vector<bool> adj(n * n, false);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) adj[i * n + j] = i != j && edge(rng);
  return adj;
}

FeatureVector predicate_part(const FeatureVector& f) {
  FeatureVector out;
  for (const auto& [id, v] : f) {
    if (FeatureIndex::name(id).rfind("pred:", 0) == 0) out.add(id, v);
  }
  return out;
}

}  // namespace

TEST_CASE("histogram bins") {
  const auto& link = model::link_score_bins();
  CHECK(model::bin_index(link, 0.0) == 0);
  CHECK(model::bin_index(link, 0.05) == 1);
  CHECK(model::bin_index(link, 0.35) == 4);
  CHECK(model::bin_name(link, 4) == "[0.3,0.4)");
  CHECK(model::bin_index(link, 1.0) == 8);
  CHECK(model::bin_name(link, 8) == "[0.7,1]");
  const auto& path = model::path_score_bins();
  CHECK(model::bin_name(path, model::bin_index(path, 0.35)) == "[0.3,0.7)");
  // Every point of [0, 1] lands in exactly one bin whose interval holds it.
  for (int i = 0; i <= 1000; ++i) {
    const double v = i / 1000.0;
    for (const auto* edges : {&link, &path}) {
      const std::size_t b = model::bin_index(*edges, v);
      CHECK((*edges)[b] <= v);
      CHECK((v < (*edges)[b + 1] || (b + 2 == edges->size() && v == 1.0)));
    }
  }
}

TEST_CASE("organism instance features") {
  auto env = scored_env();
  auto f = model::organism_instance_features(env.label_index("mouse"), true, env);
  CHECK(f.named() == std::map<std::string, double>{{"org:true:bias", 1.0}, {"org:true:text_score", 0.9}});
  auto g = model::organism_instance_features(env.label_index("large grey timber wolf pack"), false, env);
  CHECK(g.get("org:false:words>=4") == 1.0);
  CHECK(g.get("org:false:words>=6") == 0.0);
  CHECK(g.get("org:false:sub_bbox") == 0.0);
  CHECK(model::organism_instance_features(env.label_index("pack"), true, env).get("org:true:sub_bbox") == 1.0);
  CHECK(model::organism_instance_features(env.label_index("one two three four five six"), true, env)
            .get("org:true:words>=6") == 1.0);
}

TEST_CASE("eats instance features") {
  auto env = scored_env();
  const int mouse = env.label_index("mouse");
  const int wolf = env.label_index("large grey timber wolf pack");
  auto f = model::eats_instance_features(wolf, mouse, true, env);
  CHECK(f.named() == std::map<std::string, double>{{"eats:true:link_bin=[0.3,0.4)", 1.0},
                                                   {"eats:true:link_exists", 1.0},
                                                   {"eats:true:link_score", 0.35},
                                                   {"eats:true:path_bin=[0.3,0.7)", 1.0},
                                                   {"eats:true:path_score", 0.35}});
  auto self = model::eats_instance_features(mouse, mouse, false, env);
  CHECK(self.get("eats:false:self_link") == 1.0);
  CHECK(self.get("eats:false:no_link") == 1.0);
  auto none = model::eats_instance_features(env.label_index("pack"), mouse, true, env);
  CHECK(none.named() == std::map<std::string, double>{{"eats:true:no_link", 1.0}});
  CHECK(model::eats_instance_features(mouse, wolf, true, env).get("eats:true:link_bin=[0.05,0.1)") == 1.0);
}

TEST_CASE("a single k-cycle scores exactly 1") {
  for (std::size_t k = 2; k <= 4; ++k) {
    std::vector<bool> adj(k * k, false);
    for (std::size_t i = 0; i < k; ++i) adj[i * k + (i + 1) % k] = true;
    auto c = model::cycle_features(k, adj);
    CHECK(c[k - 2] == 1.0);
  }
  std::vector<bool> empty(25, false);
  CHECK(model::cycle_features(5, empty) == std::array<double, 4>{0, 0, 0, 0});
}

TEST_CASE("cycle features match the shortest-path oracle") {
  // Every directed graph on up to 4 nodes; 5-node graphs are covered in the
  // acceptance suite.
  for (std::size_t n = 1; n <= 4; ++n) {
    const std::size_t edges = n * (n - 1);
    for (std::uint64_t mask = 0; mask < (1ull << edges); ++mask) {
      std::vector<bool> adj(n * n, false);
      std::size_t bit = 0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (i != j) adj[i * n + j] = (mask >> bit++) & 1;
      REQUIRE(model::cycle_features(n, adj) == oracle::cycle_features(n, adj));
    }
  }
  std::mt19937_64 rng(7);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 6 + t % 3;
    auto adj = random_graph(rng, n);
    auto got = model::cycle_features(n, adj);
    auto want = oracle::cycle_features(n, adj);
    for (int k = 0; k < 3; ++k) CHECK(got[k] == want[k]);
    CHECK(got[3] == doctest::Approx(want[3]).epsilon(1e-12));
  }
}

TEST_CASE("predicate features and deltas") {
  auto env = scored_env();
  const int mouse = env.label_index("mouse");
  const int wolf = env.label_index("large grey timber wolf pack");
  const int pack = env.label_index("pack");
  World w(env.num_labels());
  CHECK(model::eats_predicate_features(w, env).empty());

  World a = w;
  a.set_eats(wolf, mouse, true);
  World b = a;
  b.set_eats(mouse, wolf, true);
  auto delta = model::predicate_delta(a, b, env);
  CHECK(delta.get("pred:eats:cycle2") == 1.0);

  // Arrow a0 is the best arrow for (mouse -> wolf), (pack -> wolf) and the
  // last label's link into wolf.
  World r(env.num_labels());
  r.set_eats(wolf, mouse, true);
  r.set_eats(wolf, pack, true);
  CHECK(model::eats_predicate_features(r, env).get("pred:eats:reuse2") == 1.0);
  r.set_eats(wolf, env.label_index("one two three four five six"), true);
  auto g = model::eats_predicate_features(r, env);
  CHECK(g.get("pred:eats:reuse2") == 0.0);
  CHECK(g.get("pred:eats:reuse3") == 1.0);

  World o(env.num_labels());
  o.set_organism(wolf, true);
  o.set_organism(pack, true);
  CHECK(model::organism_predicate_features(o, env).get("pred:organism:overlap") == 1.0);
  o.set_organism(mouse, true);
  CHECK(model::organism_predicate_features(o, env).get("pred:organism:overlap") == 1.0);
}

TEST_CASE("step deltas equal the difference of whole-world features") {
  auto env = fixtures::make_env({"a", "b", "c", "d", "e"},
                                {{"a", "b", 0.5}, {"b", "c", 0.2}, {"c", "a", 0.9}, {"d", "e", 0.4}});
  model::InstanceFeatureCache cache(env);
  auto prog = domain::compile(lf::parse("λx.carnivore(x)"));
  model::ExecutionFeaturizer phi(cache, prog, nullptr, {true, false});
  std::mt19937_64 rng(3);
  const int n = static_cast<int>(env.num_labels());
  for (int t = 0; t < 200; ++t) {
    World before(env.num_labels());
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y)
        if (rng() % 3 == 0) before.set_eats(x, y, rng() % 2 == 0);
    for (int x = 0; x < n; ++x)
      if (rng() % 2 == 0) before.set_organism(x, rng() % 2 == 0);
    World after = before;
    after.clear_last();
    const int x = static_cast<int>(rng() % n), y = static_cast<int>(rng() % n);
    if (after.eats(x, y) != exec::Truth::Undef) continue;
    after.set_eats(x, y, true);
    auto f = predicate_part(phi.features({before, after, nullptr, nullptr}));
    auto want = model::eats_predicate_features(after, env) - model::eats_predicate_features(before, env);
    CHECK(f == want);
  }
}

TEST_CASE("incremental predicate steps match whole-world deltas") {
  std::mt19937_64 rng(11);
  for (const auto& env : {scored_env(), fixtures::make_env({"a", "b", "c", "d", "e", "f", "g"},
                                                           {{"a", "b"}, {"b", "c"}, {"c", "d"}, {"d", "e"},
                                                            {"e", "f"}, {"f", "a"}, {"g", "a"}})}) {
    model::InstanceFeatureCache cache(env);
    const int n = static_cast<int>(env.num_labels());
    for (int t = 0; t < 500; ++t) {
      World before(env.num_labels());
      for (int x = 0; x < n; ++x) {
        if (rng() % 2 == 0) before.set_organism(x, rng() % 3 != 0);
        for (int y = 0; y < n; ++y)
          if (rng() % 2 == 0) before.set_eats(x, y, rng() % 3 != 0);
      }
      World after = before;
      after.clear_last();
      const int x = static_cast<int>(rng() % n), y = static_cast<int>(rng() % n);
      if (rng() % 2 == 0) {
        if (after.organism(x) != exec::Truth::Undef) continue;
        after.set_organism(x, true);
      } else {
        if (after.eats(x, y) != exec::Truth::Undef) continue;
        after.set_eats(x, y, true);
      }
      CHECK(cache.predicate_step(before, after) == model::predicate_delta(before, after, env));
    }
  }
}

TEST_CASE("predicate deltas telescope over complete executions") {
  auto env = fixtures::make_env({"grass", "mouse", "snake", "hawk"},
                                {{"grass", "mouse", 0.8}, {"mouse", "snake", 0.6}, {"snake", "hawk", 0.7},
                                 {"mouse", "hawk", 0.3}, {"hawk", "mouse", 0.1}});
  model::InstanceFeatureCache cache(env);
  for (const char* form : {"λx.carnivore(x)", "λx.omnivore(x)", "count(λx.predator(x))"}) {
    auto prog = domain::compile(lf::parse(form));
    model::ExecutionFeaturizer phi(cache, prog, nullptr);
    auto results = exec::beam_execute(prog.bind(env), phi, Weights{}, 300);
    REQUIRE(!results.empty());
    for (const auto& r : results) {
      auto g = model::eats_predicate_features(r.world, env);
      g.add(model::organism_predicate_features(r.world, env));
      CHECK(predicate_part(r.features) == g);
    }
  }
}

TEST_CASE("transition without a new decision is empty") {
  auto env = fixtures::make_env({"mice", "snakes"});
  model::InstanceFeatureCache cache(env);
  auto prog = domain::compile(lf::parse("λf.cause(decrease(mice), f(snakes))"));
  model::ExecutionFeaturizer phi(cache, prog, nullptr);
  World w(2);
  w.set_organism(0, true);
  w.clear_last();
  CHECK(phi.features({w, w, nullptr, nullptr}).empty());
}

TEST_CASE("denotation features") {
  auto count = domain::compile(lf::parse("count(λx.eats(x, deer))"));
  auto f = model::denotation_features(count, exec::Denotation::of_integer(1), nullptr);
  CHECK(f.named() == std::map<std::string, double>{{"den:count=1", 1.0}});
  CHECK(model::denotation_features(count, exec::Denotation::of_integer(7), nullptr).get("den:count=4+") == 1.0);

  auto filter = domain::compile(lf::parse("λx.eats(x, deer)"));
  auto e = model::denotation_features(filter, exec::Denotation::entity_set({}), nullptr);
  CHECK(e.named() == std::map<std::string, double>{{"den:size:" + filter.type_key() + "=0", 1.0}});
  CHECK(filter.type_key() == "entity_set:eats");

  CHECK(model::denotation_features(count, exec::Denotation::failure(), nullptr).empty());
}

TEST_CASE("role vocabulary and role features") {
  std::deque<Environment> envs;
  for (int i = 0; i < 5; ++i) {
    envs.push_back(fixtures::make_env({"grass", "mouse", "wolf"}, {}, {"grass", "mouse", "wolf"},
                                      {{"mouse", "grass"}, {"wolf", "mouse"}}));
  }
  std::vector<const Environment*> ptrs;
  for (const auto& e : envs) ptrs.push_back(&e);
  auto vocab = model::RoleVocabulary::from_environments(ptrs);
  CHECK(vocab.contains(lf::Primitive::Herbivore, "mouse"));
  CHECK(vocab.contains(lf::Primitive::Carnivore, "wolf"));
  CHECK_FALSE(vocab.contains(lf::Primitive::Herbivore, "wolf"));
  CHECK(model::RoleVocabulary::from_json(vocab.to_json()) == vocab);

  // Four webs, or one web counted five times, stay under the threshold.
  CHECK(model::RoleVocabulary::from_environments({ptrs.begin(), ptrs.begin() + 4}).size() == 0);
  CHECK(model::RoleVocabulary::from_environments({ptrs[0], ptrs[0], ptrs[0], ptrs[0], ptrs[0]}).size() == 0);

  auto herb = domain::compile(lf::parse("λx.herbivore(x)"));
  auto f = model::denotation_features(herb, exec::Denotation::entity_set({"mouse", "wolf"}), &vocab);
  CHECK(f.get("den:role:herbivore:mouse") == 1.0);
  CHECK(f.get("den:role:herbivore:wolf") == 0.0);
  CHECK(f.get("den:size:" + herb.type_key() + "=2") == 1.0);
}

TEST_CASE("terminal direction set fires a direction feature") {
  auto env = fixtures::make_env({"mice", "snakes"}, {{"mice", "snakes", 0.9}});
  model::InstanceFeatureCache cache(env);
  auto prog = domain::compile(lf::parse("λf.cause(decrease(mice), f(snakes))"));
  model::ExecutionFeaturizer phi(cache, prog, nullptr);
  auto results = exec::exhaustive_execute(prog.bind(env), phi, Weights{});
  bool seen = false;
  for (const auto& r : results) {
    if (r.denotation.directions == std::vector<exec::Direction>{exec::Direction::Decrease}) {
      seen = true;
      CHECK(r.features.get("den:direction:decrease") == 1.0);
      CHECK(r.features.get("den:direction:increase") == 0.0);
    }
  }
  CHECK(seen);
}
