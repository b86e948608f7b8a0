#include "webqa/corpus.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "webqa/domain.hpp"
#include "webqa/errors.hpp"
#include "webqa/text.hpp"

namespace webqa::corpus {

namespace fs = std::filesystem;
using nlohmann::json;

std::string answer_letter(std::size_t i) {
  return std::string(1, static_cast<char>('A' + i));
}

std::size_t answer_index(const std::string& letter) {
  if (letter.size() != 1 || letter[0] < 'A' || letter[0] > 'Z') throw ParseError("bad answer letter '" + letter + "'");
  return static_cast<std::size_t>(letter[0] - 'A');
}

json QuestionRecord::to_json() const {
  json j = {{"id", id}, {"question", question}, {"options", options}, {"answer", answer_letter(answer)}, {"env", env}};
  j["logical_form"] = logical_form ? json(*logical_form) : json(nullptr);
  return j;
}

QuestionRecord QuestionRecord::from_json(const json& j) {
  try {
    QuestionRecord r;
    r.id = j.value("id", "");
    r.question = j.at("question").get<std::string>();
    r.options = j.at("options").get<std::vector<std::string>>();
    r.answer = answer_index(j.at("answer").get<std::string>());
    r.env = j.at("env").get<std::string>();
    if (auto it = j.find("logical_form"); it != j.end() && !it->is_null()) r.logical_form = it->get<std::string>();
    if (r.options.size() < 2) throw ParseError("fewer than two options");
    if (r.answer >= r.options.size()) throw ParseError("answer letter outside the options");
    return r;
  } catch (const json::exception& e) {
    throw ParseError(e.what());
  }
}

std::vector<QuestionRecord> read_questions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  std::vector<QuestionRecord> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(QuestionRecord::from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw ParseError(path + ": " + e.what(), n);
    } catch (const ParseError& e) {
      throw ParseError(path + ": " + e.what(), n);
    }
  }
  return out;
}

void write_questions(const std::string& path, const std::vector<QuestionRecord>& records) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  for (const auto& r : records) out << r.to_json().dump() << "\n";
}

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& s) {
  std::ofstream out(p);
  if (!out) throw Error("cannot write " + p.string());
  out << s;
}

}  // namespace

Corpus Corpus::load(const std::string& dir) {
  const fs::path root(dir);
  json manifest;
  try {
    manifest = json::parse(read_file(root / "manifest.json"));
  } catch (const json::exception& e) {
    throw ParseError("manifest.json: " + std::string(e.what()));
  }
  if (manifest.value("format", "") != "webqa-corpus") throw ParseError("manifest.json: not a corpus manifest");
  if (manifest.value("version", 0) != 1) throw ParseError("manifest.json: unsupported version");
  Corpus c;
  c.train = read_questions((root / manifest.value("train", "train.jsonl")).string());
  c.test = read_questions((root / manifest.value("test", "test.jsonl")).string());
  c.lexicon_text = read_file(root / manifest.value("lexicon", "lexicon.txt"));
  for (const auto* split : {&c.train, &c.test}) {
    for (const auto& r : *split) {
      if (c.environment_files.contains(r.env)) continue;
      const fs::path p = root / r.env;
      if (!fs::exists(p)) throw DanglingIdError("question " + r.id + " refers to missing environment " + r.env);
      try {
        c.environment_files[r.env] = json::parse(read_file(p));
      } catch (const json::exception& e) {
        throw ParseError(r.env + ": " + e.what());
      }
    }
  }
  return c;
}

void Corpus::save(const std::string& dir) const {
  const fs::path root(dir);
  fs::create_directories(root / "envs");
  json manifest = {{"format", "webqa-corpus"},
                   {"version", 1},
                   {"train", "train.jsonl"},
                   {"test", "test.jsonl"},
                   {"lexicon", "lexicon.txt"},
                   {"environments", "envs"}};
  write_file(root / "manifest.json", manifest.dump(1) + "\n");
  write_questions((root / "train.jsonl").string(), train);
  write_questions((root / "test.jsonl").string(), test);
  write_file(root / "lexicon.txt", lexicon_text);
  for (const auto& [path, j] : environment_files) {
    fs::create_directories((root / path).parent_path());
    write_file(root / path, j.dump(1) + "\n");
  }
}

train::Example make_example(const QuestionRecord& r, const Environment& env) {
  train::Example ex;
  ex.id = r.id;
  ex.tokens = text::tokenize(r.question);
  ex.env = &env;
  ex.options = r.options;
  ex.answer = r.answer;
  if (r.logical_form) {
    ex.gold_form = lf::parse(*r.logical_form);
    domain::compile(ex.gold_form);
  }
  return ex;
}

Dataset::Dataset(const Corpus& c)
    : lexicon_(ccg::Lexicon::parse(c.lexicon_text)), train_records_(c.train), test_records_(c.test) {
  for (const auto& [path, j] : c.environment_files) {
    try {
      envs_.emplace(path, Environment::from_json(j));
    } catch (const Error& e) {
      throw ParseError(path + ": " + e.what());
    }
  }
  for (const auto& r : train_records_) train_.push_back(make_example(r, environment(r.env)));
  for (const auto& r : test_records_) test_.push_back(make_example(r, environment(r.env)));
}

const Environment& Dataset::environment(const std::string& path) const {
  auto it = envs_.find(path);
  if (it == envs_.end()) throw DanglingIdError("unknown environment " + path);
  return it->second;
}

nlohmann::json prediction_record(const train::Example& ex, const train::Prediction& p) {
  return {{"id", ex.id},
          {"answer", answer_letter(ex.answer)},
          {"predicted", answer_letter(p.choice)},
          {"correct", p.choice == ex.answer},
          {"distribution", p.distribution},
          {"logical_form", p.logical_form},
          {"denotation", p.denotation},
          {"option_scores", p.option_scores}};
}

}  // namespace webqa::corpus
