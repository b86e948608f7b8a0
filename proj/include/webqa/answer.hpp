#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "webqa/environment.hpp"
#include "webqa/runtime.hpp"

namespace webqa::answer {

/// Does `text` mention `phrase`? Contiguous token match after stemming and
/// punctuation stripping; tokens match when their edit similarity is at
/// least `min_similarity`.
bool mentions(std::string_view text, std::string_view phrase, double min_similarity = 0.9);

/// Does `text` mention a change in the given direction?
bool mentions_direction(std::string_view text, exec::Direction d);

/// How well an answer option matches a denotation. 0 means no match.
double score_option(const exec::Denotation& d, std::string_view option);

/// Index of the best-scoring option; nullopt when the best score is zero or
/// tied (the question is abstained on).
std::optional<std::size_t> select(const exec::Denotation& d, const std::vector<std::string>& options);

/// Distribution over options induced by weighted denotations. Weights need
/// not be normalized. The mass of abstaining denotations is spread uniformly.
std::vector<double> answer_distribution(const std::vector<std::pair<exec::Denotation, double>>& weighted,
                                        const std::vector<std::string>& options);

/// Accepts executions consistent with the gold food web (when present) and
/// whose denotation selects the gold option.
class SupervisionOracle : public exec::ExecutionOracle {
 public:
  SupervisionOracle(const Environment& env, std::vector<std::string> options, std::size_t gold_answer,
                    bool use_food_web = true);

  bool accept_partial(const exec::World& w) const override;
  bool accept_complete(const exec::World& w, const exec::Denotation& d) const override;

 private:
  std::vector<std::string> options_;
  std::size_t gold_answer_;
  std::optional<exec::World> gold_world_;
  mutable std::map<std::string, std::optional<std::size_t>> picks_;
};

}  // namespace webqa::answer
