#pragma once

// Slow, obviously-correct reference computations, and the checks that
// compare the fast code paths against them.

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "webqa/ccg.hpp"
#include "webqa/corpus.hpp"
#include "webqa/environment.hpp"
#include "webqa/exec_model.hpp"
#include "webqa/trainer.hpp"

namespace webqa::oracle {

/// Every derivation of every span, without pruning or sharing.
class DerivationEnumerator {
 public:
  DerivationEnumerator(const std::vector<std::string>& tokens, const ccg::Lexicon& lexicon, const Environment* env);
  /// Complete trees: a derivation of [0, j) with tokens j.. skipped.
  std::vector<ccg::ParseTree> roots();

 private:
  const std::vector<ccg::ParseTree>& spans(int i, int j);

  int n_;
  std::vector<ccg::SpannedEntry> lexical_;
  std::vector<std::vector<ccg::ParseTree>> memo_;
  std::vector<bool> done_;
};

/// canonical logical form -> log Σ exp(θ·φ(t)) over all trees whose root
/// form passes `root_filter` (all when empty).
std::map<std::string, double> marginal_log_weights(const std::vector<std::string>& tokens,
                                                   const ccg::Lexicon& lexicon, const Environment* env,
                                                   const Weights& theta,
                                                   const std::function<bool(const lf::ExprPtr&)>& root_filter = {});

/// Cycle features from Floyd-Warshall all-pairs shortest paths.
std::array<double, 4> cycle_features(std::size_t n, const std::vector<bool>& adjacency);

/// The exact joint model of one example, with every tree and execution
/// enumerated. Feature vectors do not depend on θ, so the likelihood can be
/// re-evaluated cheaply at any θ.
class ExactLikelihood {
 public:
  /// Throws BudgetExceeded when some execution needs more chooses.
  ExactLikelihood(const train::Example& ex, const ccg::Lexicon& lexicon, const model::RoleVocabulary& roles,
                  const train::InferenceConfig& cfg, std::size_t choose_budget);

  /// log P(correct execution | question); -inf when none is correct.
  double log_likelihood(const Weights& parser, const Weights& exec) const;
  /// Every feature with a non-zero value somewhere.
  const std::vector<FeatureId>& parser_features() const { return parser_features_; }
  const std::vector<FeatureId>& exec_features() const { return exec_features_; }
  std::size_t num_trees() const { return trees_.size(); }
  std::size_t num_executions() const;
  std::size_t num_correct() const;

 private:
  struct Tree {
    FeatureVector features;
    std::size_t form;
  };
  struct Execution {
    FeatureVector features;
    bool correct;
  };
  std::vector<Tree> trees_;
  std::vector<std::vector<Execution>> executions_;  // per distinct form
  std::vector<FeatureId> parser_features_, exec_features_;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

/// Small random fixtures shared by the checks.
struct SmallExample {
  std::unique_ptr<Environment> env;
  corpus::QuestionRecord record;
  train::Example example;
};

/// Lexicon for short (at most six token) questions.
std::string small_lexicon();
/// A random web of `organisms` single-word organisms and a question about it.
SmallExample sample_small_example(std::mt19937_64& rng, int organisms = 3);

/// Random θ on the given features.
Weights random_weights(const std::vector<FeatureId>& features, std::mt19937_64& rng, double scale);

CheckResult check_beam_vs_exhaustive(std::uint64_t seed, int programs = 50);
CheckResult check_gradient(std::uint64_t seed, int examples = 50);
CheckResult check_cycle_features(std::uint64_t seed, std::size_t exhaustive_up_to = 5, int random_graphs = 100);
CheckResult check_parser(std::uint64_t seed);
CheckResult check_oracle_uniqueness(std::uint64_t seed, int fixtures = 200);

/// All of the above.
std::vector<CheckResult> run_checks(std::uint64_t seed);

}  // namespace webqa::oracle
