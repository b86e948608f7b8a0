#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "webqa/environment.hpp"
#include "webqa/errors.hpp"

using namespace webqa;
using nlohmann::json;

namespace {

EnvironmentData two_by_two(double t1b1, double t1b2, double t2b2) {
  EnvironmentData d;
  d.texts = {{"t1", "owl", {}, 1.0}, {"t2", "mouse", {}, 1.0}};
  d.blobs = {{"b1", {}, 1.0}, {"b2", {}, 1.0}};
  if (t1b1 > 0) d.intraobject_labels.push_back({"t1", "b1", t1b1});
  if (t1b2 > 0) d.intraobject_labels.push_back({"t1", "b2", t1b2});
  if (t2b2 > 0) d.intraobject_labels.push_back({"t2", "b2", t2b2});
  return d;
}

// Best total over every partial injective assignment of texts to blobs.
double brute_force_matching(const EnvironmentData& d) {
  const std::size_t nt = d.texts.size(), nb = d.blobs.size();
  std::vector<double> w(nt * nb, -1.0);
  auto index = [](const auto& xs, const std::string& id) {
    for (std::size_t i = 0; i < xs.size(); ++i)
      if (xs[i].id == id) return i;
    return xs.size();
  };
  for (const auto& l : d.intraobject_labels) {
    auto& cell = w[index(d.texts, l.text_id) * nb + index(d.blobs, l.blob_id)];
    cell = std::max(cell, l.score);
  }
  double best = 0;
  std::vector<bool> used(nb, false);
  auto rec = [&](auto&& self, std::size_t t, double total) -> void {
    if (t == nt) {
      best = std::max(best, total);
      return;
    }
    self(self, t + 1, total);
    for (std::size_t b = 0; b < nb; ++b) {
      if (used[b] || w[t * nb + b] < 0) continue;
      used[b] = true;
      self(self, t + 1, total + w[t * nb + b]);
      used[b] = false;
    }
  };
  rec(rec, 0, 0.0);
  return best;
}

double matching_total(const EnvironmentData& d, const TextBlobMatching& m) {
  double total = 0;
  for (const auto& [t, b] : m) {
    double s = -1;
    for (const auto& l : d.intraobject_labels)
      if (l.text_id == t && l.blob_id == b) s = std::max(s, l.score);
    REQUIRE(s >= 0);
    total += s;
  }
  return total;
}

json minimal_file() {
  return {{"texts", json::array()},
          {"blobs", json::array()},
          {"arrows", json::array()},
          {"intraobject_labels", json::array()},
          {"interobject_linkages", json::array()}};
}

}  // namespace

TEST_CASE("empty environment file") {
  Environment env = Environment::from_json(minimal_file());
  CHECK(env.texts().empty());
  CHECK(env.text_to_blob().empty());
  CHECK(env.best_links().empty());
  CHECK(env.num_labels() == 0);
  CHECK_FALSE(env.gold());
}

TEST_CASE("one linkage populates one ordered pair") {
  json j = minimal_file();
  j["texts"] = json::array({{{"id", "t1"}, {"text", "grass"}, {"box", {0, 0, 10, 10}}, {"score", 1.0}},
                            {{"id", "t2"}, {"text", "rabbit"}, {"box", {50, 0, 10, 10}}, {"score", 1.0}}});
  j["arrows"] = json::array({{{"id", "a1"}, {"score", 0.9}, {"heads", json::array()}}});
  j["interobject_linkages"] =
      json::array({{{"source_id", "t1"}, {"target_id", "t2"}, {"arrow_id", "a1"}, {"score", 0.8}}});
  Environment env = Environment::from_json(j);
  REQUIRE(env.best_links().size() == 1);
  CHECK(env.best_links().begin()->first == TextPair{"t1", "t2"});
  CHECK(env.best_links().begin()->second == BestLink{"a1", 0.8, 0.8});
  const int grass = env.label_index("grass"), rabbit = env.label_index("rabbit");
  CHECK(env.label_link(grass, rabbit));
  CHECK_FALSE(env.label_link(rabbit, grass));

  SUBCASE("unknown arrow id") {
    j["interobject_linkages"][0]["arrow_id"] = "a9";
    CHECK_THROWS_AS(Environment::from_json(j), DanglingIdError);
  }
  SUBCASE("unknown text id") {
    j["interobject_linkages"][0]["source_id"] = "t7";
    CHECK_THROWS_AS(Environment::from_json(j), DanglingIdError);
  }
  SUBCASE("missing field") {
    j["texts"][0].erase("text");
    CHECK_THROWS_AS(Environment::from_json(j), ParseError);
  }
  SUBCASE("json round trip") {
    Environment again = Environment::from_json(env.to_json());
    CHECK(again.to_json() == env.to_json());
    CHECK(again.best_links() == env.best_links());
  }
}

TEST_CASE("text to blob matching") {
  CHECK(match_text_to_blobs(two_by_two(0, 0, 0)).empty());

  auto m = match_text_to_blobs(two_by_two(0.9, 0.8, 0.7));
  CHECK(m == TextBlobMatching{{"t1", "b1"}, {"t2", "b2"}});

  EnvironmentData one;
  one.texts = {{"t1", "owl", {}, 1.0}};
  one.blobs = {{"b1", {}, 1.0}, {"b2", {}, 1.0}};
  one.intraobject_labels = {{"t1", "b1", 0.3}, {"t1", "b2", 0.5}};
  CHECK(match_text_to_blobs(one) == TextBlobMatching{{"t1", "b2"}});

  // Equal scores go to the lexicographically lowest pair.
  one.intraobject_labels = {{"t1", "b2", 0.5}, {"t1", "b1", 0.5}};
  CHECK(match_text_to_blobs(one) == TextBlobMatching{{"t1", "b1"}});
}

TEST_CASE("matching is maximal against brute force") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> size(0, 6);
  std::uniform_real_distribution<double> score(0.0, 1.0);
  std::bernoulli_distribution present(0.5);
  for (int trial = 0; trial < 300; ++trial) {
    EnvironmentData d;
    const int nt = size(rng), nb = size(rng);
    for (int i = 0; i < nt; ++i) d.texts.push_back({"t" + std::to_string(i), "x" + std::to_string(i), {}, 1.0});
    for (int i = 0; i < nb; ++i) d.blobs.push_back({"b" + std::to_string(i), {}, 1.0});
    for (int i = 0; i < nt; ++i)
      for (int k = 0; k < nb; ++k)
        if (present(rng)) d.intraobject_labels.push_back({d.texts[i].id, d.blobs[k].id, score(rng)});
    auto m = match_text_to_blobs(d);
    std::set<std::string> blobs;
    for (const auto& [t, b] : m) CHECK(blobs.insert(b).second);
    CHECK(matching_total(d, m) == doctest::Approx(brute_force_matching(d)).epsilon(1e-12));
  }
}

TEST_CASE("best arrow per pair") {
  EnvironmentData d;
  d.texts = {{"t1", "grass", {}, 1.0}, {"t2", "rabbit", {}, 1.0}, {"t3", "fox", {}, 1.0}};
  d.blobs = {{"b2", {}, 1.0}, {"b3", {}, 1.0}};
  d.arrows = {{"a1", 1.0, {}}, {"a2", 1.0, {}}, {"a3", 1.0, {}}, {"a4", 1.0, {}}};
  d.intraobject_labels = {{"t2", "b2", 0.5}, {"t3", "b3", 0.5}};
  d.interobject_linkages = {{"t1", "t2", "a1", 0.8},
                            {"b2", "b3", "a2", 0.8},
                            {"t1", "t3", "a3", 0.3},
                            {"t1", "t3", "a4", 0.6}};
  Environment env(d);
  const auto& links = env.best_links();
  CHECK(links.at({"t1", "t2"}) == BestLink{"a1", 0.8, 0.8});
  CHECK(links.at({"t2", "t3"}).arrow_id == "a2");
  CHECK(links.at({"t2", "t3"}).link_score == doctest::Approx(0.8));
  CHECK(links.at({"t2", "t3"}).path_score == doctest::Approx(0.2));
  CHECK(links.at({"t1", "t3"}).arrow_id == "a4");
  CHECK(links.at({"t1", "t3"}).link_score == doctest::Approx(0.6));
  CHECK_FALSE(links.contains({"t3", "t2"}));
  for (const auto& [pair, l] : links) CHECK(l.path_score <= l.link_score);
}

TEST_CASE("derived fields are pure functions of the raw fields") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> score(0.0, 1.0);
  EnvironmentData d;
  for (int i = 0; i < 5; ++i) {
    d.texts.push_back({"t" + std::to_string(i), "org" + std::to_string(i), {}, score(rng)});
    d.blobs.push_back({"b" + std::to_string(i), {}, score(rng)});
    d.arrows.push_back({"a" + std::to_string(i), score(rng), {}});
    d.intraobject_labels.push_back({"t" + std::to_string(i), "b" + std::to_string(i), score(rng)});
  }
  for (int i = 0; i < 5; ++i)
    d.interobject_linkages.push_back(
        {"b" + std::to_string(i), "b" + std::to_string((i + 1) % 5), "a" + std::to_string(i), score(rng)});
  Environment a(d), b(Environment::from_json(Environment(d).to_json()));
  CHECK(a.text_to_blob() == b.text_to_blob());
  CHECK(a.best_links() == b.best_links());
  for (const auto& [pair, l] : a.best_links()) CHECK(l.path_score <= l.link_score);
}

TEST_CASE("out of range scores are clamped") {
  EnvironmentData d;
  d.texts = {{"t1", "grass", {}, 1.7}};
  Environment env(d);
  CHECK(env.texts()[0].score == 1.0);
  CHECK_FALSE(env.warnings().empty());
}
