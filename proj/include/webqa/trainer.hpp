#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "webqa/answer.hpp"
#include "webqa/ccg.hpp"
#include "webqa/domain.hpp"
#include "webqa/exec_model.hpp"

namespace webqa::train {

struct Example {
  std::string id;
  std::vector<std::string> tokens;
  const Environment* env = nullptr;
  std::vector<std::string> options;
  std::size_t answer = 0;
  lf::ExprPtr gold_form;  // optional
};

struct InferenceConfig {
  ccg::ParserConfig parser;
  std::size_t exec_beam = 100;
  model::ExecFeatureConfig features;
  /// Replace the parser by the annotated logical form.
  bool gold_logical_forms = false;
};

struct TrainConfig {
  InferenceConfig inference;
  int epochs = 5;
  double learning_rate = 0.1;
  /// η_t = η / sqrt(t) over update steps t = 1, 2, ...
  bool decay = false;
  double l2 = 1e-4;
  std::uint64_t seed = 1;
  int role_threshold = 5;
};

nlohmann::json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j);

struct Model {
  Weights parser;
  Weights exec;
  model::RoleVocabulary roles;
  TrainConfig config;

  nlohmann::json to_json() const;
  static Model from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static Model load(const std::string& path);
};

/// Per-run caches: compiled logical forms and instance features.
class Workspace {
 public:
  explicit Workspace(const ccg::Lexicon& lexicon) : lexicon_(&lexicon) {}
  const ccg::Lexicon& lexicon() const { return *lexicon_; }
  const model::InstanceFeatureCache& features(const Environment& env);
  /// Compiled once per canonical form.
  const domain::CompiledProgram& program(const lf::ExprPtr& form);

 private:
  const ccg::Lexicon* lexicon_;
  std::map<const Environment*, std::unique_ptr<model::InstanceFeatureCache>> features_;
  std::map<std::string, std::unique_ptr<domain::CompiledProgram>> programs_;
};

/// One (logical form, execution) pair on the beam.
struct Candidate {
  std::size_t parse = 0;  // index into Inference::parses
  const domain::CompiledProgram* program = nullptr;
  exec::ExecutionResult execution;
  double score = 0.0;  // parse log weight + execution log score
};

struct Inference {
  std::vector<ccg::ScoredParse> parses;
  std::vector<Candidate> candidates;  // descending score
  double log_z = -std::numeric_limits<double>::infinity();
};

/// Top logical forms for the example, or its gold form in gold mode.
std::vector<ccg::ScoredParse> parse_example(Workspace& ws, const Example& ex, const Model& m,
                                            const InferenceConfig& cfg);

/// Executes every parse. With an oracle, only accepted executions survive.
Inference execute(Workspace& ws, const Example& ex, const Model& m, const InferenceConfig& cfg,
                  std::vector<ccg::ScoredParse> parses, const exec::ExecutionOracle* oracle = nullptr);

struct Gradient {
  FeatureVector parser;
  FeatureVector exec;
  /// False when no correct execution was found; the gradient is then zero.
  bool found = false;
  /// log P(correct) under the beam approximation (0 when not found).
  double log_likelihood = 0.0;
};

/// E_correct[φ] - E_all[φ]. The normalizer runs over the union of the
/// unconstrained and the oracle-filtered beams.
Gradient example_gradient(Workspace& ws, const Example& ex, const Model& m, const InferenceConfig& cfg);

struct Prediction {
  std::vector<double> distribution;
  std::size_t choice = 0;
  std::string logical_form;  // best candidate, empty if none
  std::string denotation;
  std::vector<double> option_scores;  // of the best candidate's denotation
};

Prediction predict(Workspace& ws, const Example& ex, const Model& m, const InferenceConfig& cfg);

struct EpochMetrics {
  int epoch = 0;
  double reachable = 0.0;       // fraction of examples with a correct execution
  double log_likelihood = 0.0;  // mean over reachable examples
  std::optional<double> heldout_accuracy;
  double seconds = 0.0;
  nlohmann::json to_json() const;
};

/// Shuffled per-example SGD from θ = 0. `on_epoch` sees metrics after every
/// epoch; held-out accuracy is computed when `heldout` is non-empty.
Model train(Workspace& ws, const std::vector<Example>& examples, const TrainConfig& config,
            const std::vector<Example>& heldout = {},
            const std::function<void(const EpochMetrics&)>& on_epoch = {});

struct Evaluation {
  double accuracy = 0.0;
  std::vector<Prediction> predictions;
};

Evaluation evaluate(Workspace& ws, const std::vector<Example>& examples, const Model& m,
                    const InferenceConfig& cfg);

/// Uniformly random answers.
double random_baseline_accuracy(const std::vector<Example>& examples, std::uint64_t seed);

double log_sum_exp(const std::vector<double>& xs);

}  // namespace webqa::train
