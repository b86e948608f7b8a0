#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "webqa/ccg.hpp"
#include "webqa/environment.hpp"
#include "webqa/trainer.hpp"

namespace webqa::corpus {

/// One line of a question file.
struct QuestionRecord {
  std::string id;
  std::string question;
  std::vector<std::string> options;
  std::size_t answer = 0;  // serialized as a letter
  std::string env;         // path relative to the corpus directory
  std::optional<std::string> logical_form;

  nlohmann::json to_json() const;
  /// Throws ParseError.
  static QuestionRecord from_json(const nlohmann::json& j);
};

std::string answer_letter(std::size_t i);
/// Throws ParseError for anything but a single letter A-Z.
std::size_t answer_index(const std::string& letter);

std::vector<QuestionRecord> read_questions(const std::string& path);
void write_questions(const std::string& path, const std::vector<QuestionRecord>& records);

/// A corpus directory:
///   manifest.json   {"format": "webqa-corpus", "version": 1, ...}
///   train.jsonl, test.jsonl
///   lexicon.txt
///   envs/*.json
class Corpus {
 public:
  std::vector<QuestionRecord> train;
  std::vector<QuestionRecord> test;
  std::string lexicon_text;
  /// Environment file contents keyed by relative path.
  std::map<std::string, nlohmann::json> environment_files;

  /// Throws ParseError / DanglingIdError on malformed or inconsistent input.
  static Corpus load(const std::string& dir);
  void save(const std::string& dir) const;
};

/// A loaded corpus with parsed environments, lexicon and examples.
class Dataset {
 public:
  explicit Dataset(const Corpus& c);
  static Dataset load(const std::string& dir) { return Dataset(Corpus::load(dir)); }
  // Examples point into envs_; map nodes survive a move but not a copy.
  Dataset(const Dataset&) = delete;
  Dataset& operator=(const Dataset&) = delete;
  Dataset(Dataset&&) = default;
  Dataset& operator=(Dataset&&) = default;

  const ccg::Lexicon& lexicon() const { return lexicon_; }
  const std::vector<train::Example>& train() const { return train_; }
  const std::vector<train::Example>& test() const { return test_; }
  const std::vector<QuestionRecord>& train_records() const { return train_records_; }
  const std::vector<QuestionRecord>& test_records() const { return test_records_; }
  const Environment& environment(const std::string& path) const;

 private:
  ccg::Lexicon lexicon_;
  std::map<std::string, Environment> envs_;
  std::vector<QuestionRecord> train_records_, test_records_;
  std::vector<train::Example> train_, test_;
};

/// Builds an example; `env` must outlive it. Throws ParseError / TypeError
/// for a bad logical form.
train::Example make_example(const QuestionRecord& r, const Environment& env);

/// One line of a prediction dump.
nlohmann::json prediction_record(const train::Example& ex, const train::Prediction& p);

}  // namespace webqa::corpus
