#include "webqa/generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "webqa/answer.hpp"
#include "webqa/domain.hpp"
#include "webqa/errors.hpp"
#include "webqa/logical_form.hpp"

namespace webqa::gen {

using exec::Denotation;
using nlohmann::json;

std::string_view template_name(Template t) {
  switch (t) {
    case Template::Count: return "count";
    case Template::PredatorAndPrey: return "predator_and_prey";
    case Template::Change: return "change";
    case Template::Role: return "role";
    case Template::Diet: return "diet";
  }
  return "?";
}

// ------------------------------------------------------------------- spec

json SyntheticSpec::to_json() const {
  json mix = json::object();
  for (std::size_t i = 0; i < kNumTemplates; ++i) mix[std::string(template_name(static_cast<Template>(i)))] = template_mix[i];
  return {{"train_webs", train_webs},
          {"test_webs", test_webs},
          {"min_organisms", min_organisms},
          {"max_organisms", max_organisms},
          {"edge_density", edge_density},
          {"acyclic_probability", acyclic_probability},
          {"score_noise", score_noise},
          {"spurious_rate", spurious_rate},
          {"dropped_rate", dropped_rate},
          {"distractor_text_rate", distractor_text_rate},
          {"questions_per_web", questions_per_web},
          {"template_mix", mix},
          {"seed", seed}};
}

SyntheticSpec SyntheticSpec::from_json(const json& j) {
  SyntheticSpec s;
  try {
    s.train_webs = j.value("train_webs", s.train_webs);
    s.test_webs = j.value("test_webs", s.test_webs);
    s.min_organisms = j.value("min_organisms", s.min_organisms);
    s.max_organisms = j.value("max_organisms", s.max_organisms);
    s.edge_density = j.value("edge_density", s.edge_density);
    s.acyclic_probability = j.value("acyclic_probability", s.acyclic_probability);
    s.score_noise = j.value("score_noise", s.score_noise);
    s.spurious_rate = j.value("spurious_rate", s.spurious_rate);
    s.dropped_rate = j.value("dropped_rate", s.dropped_rate);
    s.distractor_text_rate = j.value("distractor_text_rate", s.distractor_text_rate);
    s.questions_per_web = j.value("questions_per_web", s.questions_per_web);
    s.seed = j.value("seed", s.seed);
    if (auto it = j.find("template_mix"); it != j.end()) {
      for (std::size_t i = 0; i < kNumTemplates; ++i) {
        s.template_mix[i] = it->value(std::string(template_name(static_cast<Template>(i))), 0.0);
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("synthetic spec: ") + e.what());
  }
  s.validate();
  return s;
}

void SyntheticSpec::validate() const {
  for (double r : {edge_density, acyclic_probability, spurious_rate, dropped_rate, distractor_text_rate}) {
    if (!(r >= 0.0 && r <= 1.0)) throw ParseError("synthetic spec: rates must lie in [0, 1]");
  }
  if (!(score_noise >= 0.0)) throw ParseError("synthetic spec: score_noise must be non-negative");
  if (train_webs < 0 || test_webs < 0 || questions_per_web < 0) throw ParseError("synthetic spec: negative count");
  if (min_organisms < 3 || max_organisms < min_organisms || max_organisms > 20) {
    throw ParseError("synthetic spec: organism range must satisfy 3 <= min <= max <= 20");
  }
  double total = 0;
  for (double w : template_mix) {
    if (!(w >= 0.0)) throw ParseError("synthetic spec: negative template weight");
    total += w;
  }
  if (total <= 0) throw ParseError("synthetic spec: template mix is all zero");
}

// ---------------------------------------------------------------- lexicon

std::string template_lexicon() {
  return R"(# Template lexicon for the synthetic food-web questions.
# what is the number of organisms that eat X ?
number := S/N : λf.count(f)
eat := N/N : λy.λx.eats(x, y)
eat := N/N : λy.λx.eats(y, x)
# what does X eat ?
eat := S\N : λy.λx.eats(y, x)
eat := S\N : λy.λx.eats(x, y)
# which organism is both predator and prey ?
both := (N/N)/N : λf.λg.λx.and(f(x), g(x))
predator := N : λx.predator(x)
predator := N : λx.carnivore(x)
prey := N : λx.prey(x)
prey := N : λx.herbivore(x)
# which organism is a R ?
herbivore := N : λx.herbivore(x)
herbivore := N : λx.consumer(x)
carnivore := N : λx.carnivore(x)
carnivore := N : λx.predator(x)
omnivore := N : λx.omnivore(x)
producer := N : λx.producer(x)
consumer := N : λx.consumer(x)
consumer := N : λx.herbivore(x)
# what would happen to Y if X died ?
to := (S/S)/N : λy.λx.λf.cause(x, f(y))
died := S\N : λx.decrease(x)
decreased := S\N : λx.decrease(x)
decreased := S\N : λx.increase(x)
increased := S\N : λx.increase(x)
)";
}

// ---------------------------------------------------------------- options

namespace {

template <class T>
const T& pick(const std::vector<T>& v, std::mt19937_64& rng) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

bool coin(std::mt19937_64& rng, double p) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::string join_names(const std::vector<std::string>& names) {
  std::string s;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i > 0) s += i + 1 == names.size() ? " and " : ", ";
    s += names[i];
  }
  return s;
}

std::vector<std::string> entity_distractors(const std::vector<std::string>& gold,
                                            const std::vector<std::string>& organisms, std::mt19937_64& rng) {
  std::set<std::string> gold_set(gold.begin(), gold.end());
  std::set<std::set<std::string>> seen = {gold_set};
  std::vector<std::string> out;
  for (int attempt = 0; attempt < 200 && out.size() < 3; ++attempt) {
    const std::size_t k = std::uniform_int_distribution<std::size_t>(1, gold.size())(rng);
    std::vector<std::string> pool = organisms;
    std::shuffle(pool.begin(), pool.end(), rng);
    // Prefer distractors that are not gold members.
    std::stable_partition(pool.begin(), pool.end(), [&](const std::string& o) { return !gold_set.contains(o); });
    if (!coin(rng, 0.7)) std::shuffle(pool.begin(), pool.end(), rng);
    std::vector<std::string> d(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(std::min(k, pool.size())));
    std::set<std::string> ds(d.begin(), d.end());
    if (!seen.insert(ds).second) continue;
    out.push_back(join_names(d));
  }
  return out;
}

}  // namespace

std::optional<Options> make_options(const Denotation& gold, const std::vector<std::string>& organisms,
                                    std::mt19937_64& rng) {
  std::string correct;
  std::vector<std::string> distractors;
  switch (gold.kind) {
    case Denotation::Kind::EntitySet: {
      if (gold.entities.empty()) return std::nullopt;
      std::vector<std::string> names = gold.entities;
      std::shuffle(names.begin(), names.end(), rng);
      correct = join_names(names);
      distractors = entity_distractors(names, organisms, rng);
      break;
    }
    case Denotation::Kind::Integer: {
      correct = std::to_string(gold.integer);
      std::vector<std::int64_t> pool;
      for (std::int64_t v = 0; v <= std::max<std::int64_t>(5, gold.integer + 2); ++v) {
        if (v != gold.integer) pool.push_back(v);
      }
      std::shuffle(pool.begin(), pool.end(), rng);
      for (std::size_t i = 0; i < 3 && i < pool.size(); ++i) distractors.push_back(std::to_string(pool[i]));
      break;
    }
    case Denotation::Kind::DirectionSet: {
      if (gold.directions.size() != 1 || gold.subject.empty()) return std::nullopt;
      const std::string& who = gold.subject;
      const std::map<exec::Direction, std::string> phrase = {{exec::Direction::Increase, who + " would increase"},
                                                             {exec::Direction::Decrease, who + " would decrease"},
                                                             {exec::Direction::Unchanged, who + " would stay the same"}};
      correct = phrase.at(gold.directions[0]);
      for (const auto& [d, p] : phrase) {
        if (d != gold.directions[0]) distractors.push_back(p);
      }
      distractors.push_back("none of these");
      break;
    }
    default:
      return std::nullopt;
  }
  if (distractors.size() < 3) return std::nullopt;
  distractors.resize(3);
  Options o;
  o.options = distractors;
  o.options.push_back(correct);
  std::shuffle(o.options.begin(), o.options.end(), rng);
  o.answer = static_cast<std::size_t>(std::find(o.options.begin(), o.options.end(), correct) - o.options.begin());
  auto sel = answer::select(gold, o.options);
  if (!sel || *sel != o.answer) return std::nullopt;
  return o;
}

// ------------------------------------------------------------ environment

namespace {

const std::vector<std::vector<std::string>>& level_pools() {
  static const std::vector<std::vector<std::string>> pools = {
      {"grass", "algae", "oak tree", "seaweed", "shrub", "phytoplankton", "clover", "fern", "wheat", "cactus"},
      {"mouse", "rabbit", "deer", "grasshopper", "caterpillar", "squirrel", "zooplankton", "snail", "cricket",
       "beetle", "vole", "antelope"},
      {"snake", "frog", "fox", "owl", "spider", "lizard", "weasel", "toad", "bluebird", "trout", "raccoon"},
      {"hawk", "eagle", "wolf", "bear", "lion", "shark", "heron", "coyote"}};
  return pools;
}

const std::vector<std::string>& caption_pool() {
  static const std::vector<std::string> captions = {"sun", "food web", "energy flows from the sun to the plants",
                                                    "figure 3", "water"};
  return captions;
}

double clamp01(double v, double lo = 0.01) {
  return std::clamp(v, lo, 1.0);
}

json box(double x, double y, double w, double h) {
  return json::array({x, y, w, h});
}

}  // namespace

json sample_environment(const SyntheticSpec& spec, std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, 1.0);
  auto jitter = [&](double scale) { return scale * noise(rng); };
  auto true_score = [&] { return clamp01(1.0 - std::abs(jitter(spec.score_noise))); };
  auto weak_score = [&] {
    return clamp01(0.15 + std::uniform_real_distribution<double>(0.0, 0.35)(rng) + jitter(spec.score_noise));
  };

  // Trophic levels.
  const int n = std::uniform_int_distribution<int>(spec.min_organisms, spec.max_organisms)(rng);
  std::array<int, 4> size{};
  size[0] = 1 + (coin(rng, 0.5) ? 1 : 0);
  size[3] = std::uniform_int_distribution<int>(0, 2)(rng);
  while (n - size[0] - size[3] < 2) {
    if (size[3] > 0) {
      --size[3];
    } else {
      --size[0];
    }
  }
  const int rest = n - size[0] - size[3];
  size[1] = (rest + 1) / 2;
  size[2] = rest - size[1];
  std::vector<std::vector<std::string>> level(4);
  for (int l = 0; l < 4; ++l) {
    std::vector<std::string> pool = level_pools()[l];
    std::shuffle(pool.begin(), pool.end(), rng);
    const int k = std::min<int>(size[l], static_cast<int>(pool.size()));
    level[l].assign(pool.begin(), pool.begin() + k);
  }

  // Feeding edges (eater, eaten).
  std::set<std::pair<std::string, std::string>> eats;
  auto feed = [&](const std::string& eater, const std::vector<std::string>& prey, double extra) {
    if (prey.empty()) return;
    eats.insert({eater, pick(prey, rng)});
    for (const auto& p : prey) {
      if (coin(rng, extra)) eats.insert({eater, p});
    }
  };
  for (const auto& h : level[1]) feed(h, level[0], spec.edge_density);
  for (const auto& s : level[2]) {
    feed(s, level[1], spec.edge_density);
    for (const auto& p : level[0]) {
      if (coin(rng, spec.edge_density / 3)) eats.insert({s, p});
    }
  }
  for (const auto& t : level[3]) {
    feed(t, level[2].empty() ? level[1] : level[2], spec.edge_density);
    for (const auto& h : level[1]) {
      if (coin(rng, spec.edge_density / 2)) eats.insert({t, h});
    }
  }
  if (!coin(rng, spec.acyclic_probability)) {
    std::vector<std::pair<std::string, std::string>> back;
    for (int lo = 1; lo < 4; ++lo)
      for (int hi = lo + 1; hi < 4; ++hi)
        for (const auto& a : level[lo])
          for (const auto& b : level[hi]) back.push_back({a, b});
    if (!back.empty()) eats.insert(pick(back, rng));
  }

  // Layout: one row per level, producers at the bottom.
  json texts = json::array(), blobs = json::array(), arrows = json::array(), intra = json::array(),
       inter = json::array();
  std::map<std::string, std::string> endpoint;  // organism -> id arrows attach to
  std::map<std::string, std::string> text_of;
  int next_text = 0, next_blob = 0, next_arrow = 0;
  for (int l = 0; l < 4; ++l) {
    for (std::size_t i = 0; i < level[l].size(); ++i) {
      const std::string& name = level[l][i];
      const double x = 40.0 + 160.0 * static_cast<double>(i) + jitter(10.0);
      const double y = 460.0 - 130.0 * l + jitter(5.0);
      const std::string tid = "t" + std::to_string(next_text++);
      texts.push_back({{"id", tid},
                       {"text", name},
                       {"box", box(x, y, 9.0 * static_cast<double>(name.size()) + 10.0, 18.0)},
                       {"score", clamp01(1.0 - std::abs(jitter(spec.score_noise / 2)))}});
      text_of[name] = tid;
      endpoint[name] = tid;
      if (coin(rng, 0.85)) {
        const std::string bid = "b" + std::to_string(next_blob++);
        blobs.push_back({{"id", bid}, {"box", box(x, y - 70.0, 70.0, 60.0)}, {"score", true_score()}});
        intra.push_back({{"text_id", tid}, {"blob_id", bid}, {"score", true_score()}});
        if (coin(rng, 0.8)) endpoint[name] = bid;
      }
    }
  }
  auto new_arrow = [&](double arrow_score) {
    const std::string aid = "a" + std::to_string(next_arrow++);
    arrows.push_back({{"id", aid}, {"score", arrow_score}, {"heads", json::array()}});
    return aid;
  };
  auto link = [&](const std::string& from, const std::string& to, const std::string& aid, double score) {
    inter.push_back({{"source_id", from}, {"target_id", to}, {"arrow_id", aid}, {"score", score}});
  };

  std::vector<std::string> organisms;
  std::map<std::string, int> level_of;
  for (int l = 0; l < 4; ++l) {
    organisms.insert(organisms.end(), level[l].begin(), level[l].end());
    for (const auto& o : level[l]) level_of[o] = l;
  }
  struct Drawn {
    std::string eater, eaten, arrow;
    double score;
  };
  std::vector<Drawn> drawn;
  int spurious = 0;
  for (const auto& [eater, eaten] : eats) {
    if (coin(rng, spec.spurious_rate)) ++spurious;
    if (coin(rng, spec.dropped_rate)) continue;
    const double score = true_score();
    const std::string aid = new_arrow(true_score());
    link(endpoint[eaten], endpoint[eater], aid, score);
    drawn.push_back({eater, eaten, aid, score});
  }
  // Vision errors: a misread arrowhead (the same arrow read backwards), an
  // arrow attached to the wrong neighbour, or a faint stray arrow.
  auto confusable = [&](double score) { return clamp01(score - uniform(rng, 0.0, 0.15) + jitter(spec.score_noise / 2)); };
  for (int s = 0; s < spurious; ++s) {
    const double kind = uniform(rng, 0.0, 1.0);
    if (kind < 0.9 && !drawn.empty()) {
      const Drawn& d = pick(drawn, rng);
      if (kind < 0.35) {
        if (!eats.contains({d.eaten, d.eater})) link(endpoint[d.eater], endpoint[d.eaten], d.arrow, confusable(d.score));
        continue;
      }
      std::vector<std::string> near;
      for (const auto& o : level[level_of[d.eaten]]) {
        if (o != d.eaten && o != d.eater && !eats.contains({d.eater, o})) near.push_back(o);
      }
      if (!near.empty()) link(endpoint[pick(near, rng)], endpoint[d.eater], d.arrow, confusable(d.score));
      continue;
    }
    const std::string eater = pick(organisms, rng), eaten = pick(organisms, rng);
    if (eater == eaten || eats.contains({eater, eaten})) continue;
    link(endpoint[eaten], endpoint[eater], new_arrow(weak_score()), weak_score());
  }

  // Captions and the sun; never organisms.
  for (std::size_t c = 0; c < caption_pool().size(); ++c) {
    if (!coin(rng, spec.distractor_text_rate)) continue;
    const std::string& name = caption_pool()[c];
    const std::string tid = "t" + std::to_string(next_text++);
    const double y = name == "sun" ? 560.0 : 20.0 + 25.0 * static_cast<double>(c);
    texts.push_back({{"id", tid},
                     {"text", name},
                     {"box", box(520.0, y, 9.0 * static_cast<double>(name.size()) + 10.0, 18.0)},
                     {"score", clamp01(std::uniform_real_distribution<double>(0.5, 1.0)(rng))}});
    if (name == "sun") {
      for (const auto& p : level[0]) link(tid, endpoint[p], new_arrow(true_score()), true_score());
    }
  }

  json gold_eats = json::array();
  for (const auto& [a, b] : eats) gold_eats.push_back({a, b});
  return {{"texts", texts},
          {"blobs", blobs},
          {"arrows", arrows},
          {"intraobject_labels", intra},
          {"interobject_linkages", inter},
          {"gold_food_web", {{"organisms", organisms}, {"eats", gold_eats}}}};
}

// -------------------------------------------------------------- questions

namespace {

lf::ExprPtr role_form(lf::Primitive role) {
  return lf::lambda("x", lf::app(lf::prim(role), lf::var("x")));
}

struct Drafted {
  std::string question;
  lf::ExprPtr form;
};

std::optional<Drafted> draft(Template t, const Environment& env, const GoldFoodWeb& gold,
                             std::mt19937_64& rng) {
  using lf::Primitive;
  std::vector<std::string> organisms(gold.organisms.begin(), gold.organisms.end());
  std::vector<std::string> eaten, eaters;
  for (const auto& [a, b] : gold.eats) {
    eaters.push_back(a);
    eaten.push_back(b);
  }
  switch (t) {
    case Template::Count: {
      const std::string x = coin(rng, 0.85) && !eaten.empty() ? pick(eaten, rng) : pick(organisms, rng);
      return Drafted{"what is the number of organisms that eat " + x + " ?",
                     lf::app(lf::prim(Primitive::Count),
                             lf::lambda("x", lf::app(lf::app(lf::prim(Primitive::Eats), lf::var("x")), lf::entity(x))))};
    }
    case Template::PredatorAndPrey:
      return Drafted{"which organism is both predator and prey ?",
                     lf::lambda("x", lf::app(lf::app(lf::prim(Primitive::And),
                                                     lf::app(lf::prim(Primitive::Predator), lf::var("x"))),
                                             lf::app(lf::prim(Primitive::Prey), lf::var("x"))))};
    case Template::Change: {
      const std::string x = pick(organisms, rng);
      std::vector<std::string> near;
      for (const auto& [a, b] : gold.eats) {
        if (a == x) near.push_back(b);
        if (b == x) near.push_back(a);
      }
      std::string y = coin(rng, 0.85) && !near.empty() ? pick(near, rng) : pick(organisms, rng);
      if (y == x) return std::nullopt;
      static const std::vector<std::pair<std::string, Primitive>> verbs = {
          {"died", Primitive::Decrease}, {"decreased", Primitive::Decrease}, {"increased", Primitive::Increase}};
      const auto& [verb, dir] = pick(verbs, rng);
      auto f = lf::var("f");
      return Drafted{"what would happen to " + y + " if " + x + " " + verb + " ?",
                     lf::lambda("f", lf::app(lf::app(lf::prim(Primitive::Cause), lf::app(lf::prim(dir), lf::entity(x))),
                                             lf::app(f, lf::entity(y))))};
    }
    case Template::Role: {
      static const std::vector<std::pair<std::string, Primitive>> roles = {
          {"herbivore", Primitive::Herbivore}, {"carnivore", Primitive::Carnivore}, {"omnivore", Primitive::Omnivore},
          {"producer", Primitive::Producer},   {"predator", Primitive::Predator},   {"prey", Primitive::Prey},
          {"consumer", Primitive::Consumer}};
      const auto& [word, role] = pick(roles, rng);
      const char* article = word == "omnivore" ? "an" : "a";
      return Drafted{std::string("which organism is ") + article + " " + word + " ?", role_form(role)};
    }
    case Template::Diet: {
      if (eaters.empty()) return std::nullopt;
      const std::string x = pick(eaters, rng);
      return Drafted{"what does " + x + " eat ?",
                     lf::lambda("x", lf::app(lf::app(lf::prim(Primitive::Eats), lf::entity(x)), lf::var("x")))};
    }
  }
  (void)env;
  return std::nullopt;
}

}  // namespace

std::vector<corpus::QuestionRecord> sample_questions(const SyntheticSpec& spec, const Environment& env,
                                                     const std::string& env_path, const std::string& id_prefix,
                                                     std::mt19937_64& rng) {
  std::vector<corpus::QuestionRecord> out;
  if (!env.gold()) return out;
  const GoldFoodWeb& gold = *env.gold();
  const exec::World world = domain::world_from_gold(env, gold);
  std::vector<std::string> organisms(gold.organisms.begin(), gold.organisms.end());
  std::discrete_distribution<std::size_t> which(spec.template_mix.begin(), spec.template_mix.end());
  std::set<std::string> asked;
  for (int attempt = 0; attempt < 6 * spec.questions_per_web && static_cast<int>(out.size()) < spec.questions_per_web;
       ++attempt) {
    auto d = draft(static_cast<Template>(which(rng)), env, gold, rng);
    if (!d || asked.contains(d->question)) continue;
    const auto prog = domain::compile(d->form);
    const Denotation den = domain::run_decided(prog, env, world);
    auto opts = make_options(den, organisms, rng);
    if (!opts) continue;
    asked.insert(d->question);
    corpus::QuestionRecord r;
    r.id = id_prefix + "-q" + std::to_string(out.size());
    r.question = d->question;
    r.options = opts->options;
    r.answer = opts->answer;
    r.env = env_path;
    r.logical_form = lf::to_sexpr(d->form);
    out.push_back(std::move(r));
  }
  return out;
}

corpus::Corpus generate(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  corpus::Corpus c;
  c.lexicon_text = template_lexicon();
  const int total = spec.train_webs + spec.test_webs;
  for (int w = 0; w < total; ++w) {
    char name[32];
    std::snprintf(name, sizeof name, "web%03d", w);
    const std::string path = std::string("envs/") + name + ".json";
    json j = sample_environment(spec, rng);
    const Environment env = Environment::from_json(j);
    auto qs = sample_questions(spec, env, path, name, rng);
    auto& split = w < spec.train_webs ? c.train : c.test;
    split.insert(split.end(), qs.begin(), qs.end());
    c.environment_files[path] = std::move(j);
  }
  return c;
}

}  // namespace webqa::gen
