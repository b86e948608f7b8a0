#include "webqa/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include "webqa/errors.hpp"

namespace webqa::train {

double log_sum_exp(const std::vector<double>& xs) {
  if (xs.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(xs.begin(), xs.end());
  double s = 0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

// ------------------------------------------------------------------ model

nlohmann::json to_json(const TrainConfig& c) {
  return {{"parser_beam", c.inference.parser.beam_width == std::numeric_limits<std::size_t>::max()
                              ? nlohmann::json(nullptr)
                              : nlohmann::json(c.inference.parser.beam_width)},
          {"lf_count", c.inference.parser.lf_count},
          {"exec_beam", c.inference.exec_beam},
          {"predicate_features", c.inference.features.predicate_features},
          {"denotation_features", c.inference.features.denotation_features},
          {"gold_logical_forms", c.inference.gold_logical_forms},
          {"epochs", c.epochs},
          {"learning_rate", c.learning_rate},
          {"decay", c.decay},
          {"l2", c.l2},
          {"seed", c.seed},
          {"role_threshold", c.role_threshold}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  const auto& pb = j.at("parser_beam");
  c.inference.parser.beam_width = pb.is_null() ? std::numeric_limits<std::size_t>::max() : pb.get<std::size_t>();
  c.inference.parser.lf_count = j.at("lf_count").get<std::size_t>();
  c.inference.exec_beam = j.at("exec_beam").get<std::size_t>();
  c.inference.features.predicate_features = j.at("predicate_features").get<bool>();
  c.inference.features.denotation_features = j.at("denotation_features").get<bool>();
  c.inference.gold_logical_forms = j.at("gold_logical_forms").get<bool>();
  c.epochs = j.at("epochs").get<int>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.decay = j.at("decay").get<bool>();
  c.l2 = j.at("l2").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.role_threshold = j.at("role_threshold").get<int>();
  return c;
}

namespace {

nlohmann::json weights_json(const Weights& w) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, v] : w.named()) {
    if (v != 0.0) j[name] = v;
  }
  return j;
}

Weights weights_from_json(const nlohmann::json& j) {
  Weights w;
  for (const auto& [name, v] : j.items()) w.set(name, v.get<double>());
  return w;
}

}  // namespace

nlohmann::json Model::to_json() const {
  return {{"format", "webqa-model"},
          {"version", 1},
          {"config", train::to_json(config)},
          {"roles", roles.to_json()},
          {"parser_weights", weights_json(parser)},
          {"exec_weights", weights_json(exec)}};
}

Model Model::from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "webqa-model") throw ParseError("not a model file");
  if (j.at("version").get<int>() != 1) throw ParseError("unsupported model version");
  Model m;
  m.config = train_config_from_json(j.at("config"));
  m.roles = model::RoleVocabulary::from_json(j.at("roles"));
  m.parser = weights_from_json(j.at("parser_weights"));
  m.exec = weights_from_json(j.at("exec_weights"));
  return m;
}

void Model::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << to_json().dump(1) << "\n";
}

Model Model::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  try {
    return from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

// -------------------------------------------------------------- workspace

const model::InstanceFeatureCache& Workspace::features(const Environment& env) {
  auto& slot = features_[&env];
  if (!slot) slot = std::make_unique<model::InstanceFeatureCache>(env);
  return *slot;
}

const domain::CompiledProgram& Workspace::program(const lf::ExprPtr& form) {
  const std::string key = lf::canonical(form);
  auto& slot = programs_[key];
  if (!slot) slot = std::make_unique<domain::CompiledProgram>(domain::compile(form));
  return *slot;
}

// -------------------------------------------------------------- inference

std::vector<ccg::ScoredParse> parse_example(Workspace& ws, const Example& ex, const Model& m,
                                            const InferenceConfig& cfg) {
  if (cfg.gold_logical_forms) {
    if (!ex.gold_form || !domain::is_executable(ex.gold_form)) return {};
    ccg::ScoredParse p;
    p.logical_form = lf::beta_normalize(ex.gold_form);
    p.canonical = lf::canonical(p.logical_form);
    p.num_trees = 1;
    return {std::move(p)};
  }
  return ccg::parse(ex.tokens, ws.lexicon(), ex.env, m.parser, cfg.parser,
                    [](const lf::ExprPtr& e) { return domain::is_executable(e); });
}

Inference execute(Workspace& ws, const Example& ex, const Model& m, const InferenceConfig& cfg,
                  std::vector<ccg::ScoredParse> parses, const exec::ExecutionOracle* oracle) {
  Inference inf;
  inf.parses = std::move(parses);
  const auto& cache = ws.features(*ex.env);
  for (std::size_t i = 0; i < inf.parses.size(); ++i) {
    const auto& prog = ws.program(inf.parses[i].logical_form);
    model::ExecutionFeaturizer phi(cache, prog, &m.roles, cfg.features);
    for (auto& r : exec::beam_execute(prog.bind(*ex.env), phi, m.exec, cfg.exec_beam, oracle)) {
      Candidate c;
      c.parse = i;
      c.program = &prog;
      c.score = inf.parses[i].log_weight + r.log_score;
      c.execution = std::move(r);
      inf.candidates.push_back(std::move(c));
    }
  }
  std::stable_sort(inf.candidates.begin(), inf.candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
  std::vector<double> scores;
  for (const auto& c : inf.candidates) scores.push_back(c.score);
  inf.log_z = log_sum_exp(scores);
  return inf;
}

namespace {

std::string candidate_key(const Candidate& c) {
  std::string k = std::to_string(c.parse) + ":";
  for (auto i : c.execution.path) k += std::to_string(i) + ",";
  return k;
}

void accumulate(const Inference& inf, const std::vector<const Candidate*>& cs, double log_norm, double sign,
                Gradient& g) {
  for (const Candidate* c : cs) {
    const double p = std::exp(c->score - log_norm);
    g.parser.add(inf.parses[c->parse].expected_features, sign * p);
    g.exec.add(c->execution.features, sign * p);
  }
}

}  // namespace

Gradient example_gradient(Workspace& ws, const Example& ex, const Model& m, const InferenceConfig& cfg) {
  Gradient g;
  auto parses = parse_example(ws, ex, m, cfg);
  if (parses.empty()) return g;
  answer::SupervisionOracle oracle(*ex.env, ex.options, ex.answer);
  Inference all = execute(ws, ex, m, cfg, parses);
  Inference good = execute(ws, ex, m, cfg, std::move(parses), &oracle);
  if (good.candidates.empty()) return g;
  g.found = true;

  std::vector<const Candidate*> numerator, denominator;
  std::set<std::string> seen;
  std::vector<double> den_scores;
  for (const auto& c : all.candidates) {
    seen.insert(candidate_key(c));
    denominator.push_back(&c);
    den_scores.push_back(c.score);
  }
  for (const auto& c : good.candidates) {
    numerator.push_back(&c);
    if (seen.insert(candidate_key(c)).second) {
      denominator.push_back(&c);
      den_scores.push_back(c.score);
    }
  }
  const double log_z = log_sum_exp(den_scores);
  g.log_likelihood = good.log_z - log_z;
  accumulate(good, numerator, good.log_z, 1.0, g);
  // Denominator candidates come from either inference; both share parses.
  for (const Candidate* c : denominator) {
    const double p = std::exp(c->score - log_z);
    g.parser.add(all.parses[c->parse].expected_features, -p);
    g.exec.add(c->execution.features, -p);
  }
  return g;
}

Prediction predict(Workspace& ws, const Example& ex, const Model& m, const InferenceConfig& cfg) {
  Prediction p;
  Inference inf = execute(ws, ex, m, cfg, parse_example(ws, ex, m, cfg));
  std::vector<std::pair<exec::Denotation, double>> weighted;
  for (const auto& c : inf.candidates) weighted.emplace_back(c.execution.denotation, std::exp(c.score - inf.log_z));
  p.distribution = answer::answer_distribution(weighted, ex.options);
  p.choice = static_cast<std::size_t>(std::max_element(p.distribution.begin(), p.distribution.end()) -
                                      p.distribution.begin());
  if (!inf.candidates.empty()) {
    const auto& best = inf.candidates.front();
    p.logical_form = inf.parses[best.parse].canonical;
    p.denotation = best.execution.denotation.to_string();
    for (const auto& o : ex.options) p.option_scores.push_back(answer::score_option(best.execution.denotation, o));
  }
  return p;
}

Evaluation evaluate(Workspace& ws, const std::vector<Example>& examples, const Model& m,
                    const InferenceConfig& cfg) {
  Evaluation e;
  std::size_t correct = 0;
  for (const auto& ex : examples) {
    e.predictions.push_back(predict(ws, ex, m, cfg));
    if (e.predictions.back().choice == ex.answer) ++correct;
  }
  e.accuracy = examples.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(examples.size());
  return e;
}

double random_baseline_accuracy(const std::vector<Example>& examples, std::uint64_t seed) {
  if (examples.empty()) return 0.0;
  std::mt19937_64 rng(seed);
  std::size_t correct = 0;
  for (const auto& ex : examples) {
    std::uniform_int_distribution<std::size_t> pick(0, ex.options.size() - 1);
    if (pick(rng) == ex.answer) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(examples.size());
}

// --------------------------------------------------------------- training

nlohmann::json EpochMetrics::to_json() const {
  nlohmann::json j = {{"epoch", epoch},
                      {"reachable", reachable},
                      {"log_likelihood", log_likelihood},
                      {"seconds", seconds}};
  if (heldout_accuracy) j["heldout_accuracy"] = *heldout_accuracy;
  return j;
}

Model train(Workspace& ws, const std::vector<Example>& examples, const TrainConfig& config,
            const std::vector<Example>& heldout, const std::function<void(const EpochMetrics&)>& on_epoch) {
  Model m;
  m.config = config;
  std::vector<const Environment*> envs;
  for (const auto& ex : examples) envs.push_back(ex.env);
  m.roles = model::RoleVocabulary::from_environments(envs, config.role_threshold);

  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(config.seed);
  std::uint64_t step = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t reachable = 0;
    double ll = 0;
    for (std::size_t i : order) {
      Gradient g = example_gradient(ws, examples[i], m, config.inference);
      if (!g.found) continue;
      ++reachable;
      ll += g.log_likelihood;
      ++step;
      const double eta = config.decay ? config.learning_rate / std::sqrt(static_cast<double>(step))
                                      : config.learning_rate;
      if (config.l2 > 0) {
        m.parser.shrink(eta * config.l2);
        m.exec.shrink(eta * config.l2);
      }
      m.parser.add(g.parser, eta);
      m.exec.add(g.exec, eta);
    }
    EpochMetrics em;
    em.epoch = epoch;
    em.reachable = examples.empty() ? 0.0 : static_cast<double>(reachable) / static_cast<double>(examples.size());
    em.log_likelihood = reachable ? ll / static_cast<double>(reachable) : 0.0;
    if (!heldout.empty()) em.heldout_accuracy = evaluate(ws, heldout, m, config.inference).accuracy;
    em.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (on_epoch) on_epoch(em);
  }
  return m;
}

}  // namespace webqa::train
