#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "webqa/corpus.hpp"
#include "webqa/runtime.hpp"

namespace webqa::gen {

enum class Template : std::uint8_t { Count, PredatorAndPrey, Change, Role, Diet };
constexpr std::size_t kNumTemplates = 5;
std::string_view template_name(Template t);

struct SyntheticSpec {
  int train_webs = 60;
  int test_webs = 20;
  int min_organisms = 5;
  int max_organisms = 8;
  /// Probability of each optional feeding edge between adjacent levels.
  double edge_density = 0.4;
  /// Probability that a web gets no back edge (and so no cycle).
  double acyclic_probability = 0.8;
  /// Scale of the noise on vision scores.
  double score_noise = 0.2;
  /// Expected spurious linkages per true linkage.
  double spurious_rate = 0.15;
  double dropped_rate = 0.02;
  /// Probability of each non-organism text (sun, captions).
  double distractor_text_rate = 0.4;
  int questions_per_web = 8;
  std::array<double, kNumTemplates> template_mix{1, 1, 1, 1, 1};
  std::uint64_t seed = 7;

  nlohmann::json to_json() const;
  /// Missing fields keep their defaults. Throws ParseError on bad values.
  static SyntheticSpec from_json(const nlohmann::json& j);
  /// Throws ParseError unless every rate is in [0, 1] and ranges are sane.
  void validate() const;
};

/// Lexicon covering the question templates, with some ambiguous entries.
std::string template_lexicon();

/// Answer options for a gold denotation: the gold option and distractors,
/// shuffled. nullopt when no option set lets `answer::select` pick the gold
/// option unambiguously.
struct Options {
  std::vector<std::string> options;
  std::size_t answer = 0;
};
std::optional<Options> make_options(const exec::Denotation& gold, const std::vector<std::string>& organisms,
                                    std::mt19937_64& rng);

/// Samples a gold food web and renders a noisy environment file from it.
nlohmann::json sample_environment(const SyntheticSpec& spec, std::mt19937_64& rng);

/// Questions about one environment, each with its gold logical form.
std::vector<corpus::QuestionRecord> sample_questions(const SyntheticSpec& spec, const Environment& env,
                                                     const std::string& env_path, const std::string& id_prefix,
                                                     std::mt19937_64& rng);

/// The whole corpus. Identical specs give identical corpora.
corpus::Corpus generate(const SyntheticSpec& spec);

}  // namespace webqa::gen
