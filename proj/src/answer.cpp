#include "webqa/answer.hpp"

#include <algorithm>
#include <map>

#include "webqa/domain.hpp"
#include "webqa/text.hpp"

namespace webqa::answer {

using exec::Denotation;
using exec::Direction;

namespace {

std::vector<std::string> stems(std::string_view s) {
  std::vector<std::string> out;
  for (const auto& w : text::word_tokens(s)) out.push_back(text::stem(w));
  return out;
}

bool token_match(const std::string& a, const std::string& b, double min_similarity) {
  return a == b || text::edit_similarity(a, b) >= min_similarity;
}

bool contains_seq(const std::vector<std::string>& hay, const std::vector<std::string>& needle, double min_sim) {
  if (needle.empty() || needle.size() > hay.size()) return false;
  for (std::size_t i = 0; i + needle.size() <= hay.size(); ++i) {
    bool ok = true;
    for (std::size_t j = 0; j < needle.size() && ok; ++j) ok = token_match(hay[i + j], needle[j], min_sim);
    if (ok) return true;
  }
  return false;
}

const std::vector<std::string>& synonyms(Direction d) {
  static const std::vector<std::string> dec = {"decrease", "decline", "die", "die out", "fall", "drop", "shrink",
                                               "reduce", "go down", "less", "fewer", "lower", "disappear"};
  static const std::vector<std::string> inc = {"increase", "grow", "rise", "go up", "more", "multiply",
                                               "thrive", "expand", "higher"};
  static const std::vector<std::string> same = {"unchanged", "stay the same", "remain the same", "no change",
                                                "not change", "same", "constant", "unaffected"};
  switch (d) {
    case Direction::Decrease: return dec;
    case Direction::Increase: return inc;
    default: return same;
  }
}

std::optional<std::int64_t> number_value(const std::string& token) {
  static const std::map<std::string, std::int64_t> words = {
      {"zero", 0},     {"none", 0},     {"one", 1},        {"two", 2},       {"three", 3},    {"four", 4},
      {"five", 5},     {"six", 6},      {"seven", 7},      {"eight", 8},     {"nine", 9},     {"ten", 10},
      {"eleven", 11},  {"twelve", 12},  {"thirteen", 13},  {"fourteen", 14}, {"fifteen", 15}, {"sixteen", 16},
      {"seventeen", 17}, {"eighteen", 18}, {"nineteen", 19}, {"twenty", 20}};
  if (!token.empty() && std::all_of(token.begin(), token.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    if (token.size() > 15) return std::nullopt;
    return std::stoll(token);
  }
  auto it = words.find(token);
  if (it != words.end()) return it->second;
  return std::nullopt;
}

}  // namespace

bool mentions(std::string_view text_, std::string_view phrase, double min_similarity) {
  return contains_seq(stems(text_), stems(phrase), min_similarity);
}

bool mentions_direction(std::string_view text_, Direction d) {
  auto hay = stems(text_);
  for (const auto& syn : synonyms(d)) {
    if (contains_seq(hay, stems(syn), 1.0)) return true;
  }
  return false;
}

double score_option(const Denotation& d, std::string_view option) {
  switch (d.kind) {
    case Denotation::Kind::EntitySet: {
      double s = 0;
      for (const auto& e : d.entities) s += mentions(option, e) ? 1 : 0;
      return s;
    }
    case Denotation::Kind::EventSet: {
      double s = 0;
      for (const auto& [dir, e] : d.events) s += (mentions(option, e) && mentions_direction(option, dir)) ? 1 : 0;
      return s;
    }
    case Denotation::Kind::DirectionSet: {
      double s = 0;
      for (Direction dir : d.directions) s += mentions_direction(option, dir) ? 1 : 0;
      return s;
    }
    case Denotation::Kind::Integer: {
      for (const auto& t : text::word_tokens(option)) {
        auto v = number_value(t);
        if (v && *v == d.integer) return 1;
      }
      return 0;
    }
    case Denotation::Kind::Truth: {
      auto toks = text::word_tokens(option);
      auto has = [&](std::string_view w) { return std::find(toks.begin(), toks.end(), w) != toks.end(); };
      bool yes = has("yes") || has("true");
      bool no = has("no") || has("false");
      if (yes == no) return 0;
      return (d.truth ? yes : no) ? 1 : 0;
    }
    case Denotation::Kind::Failure: return 0;
  }
  return 0;
}

std::optional<std::size_t> select(const Denotation& d, const std::vector<std::string>& options) {
  std::optional<std::size_t> best;
  double best_score = 0;
  bool tie = false;
  for (std::size_t i = 0; i < options.size(); ++i) {
    double s = score_option(d, options[i]);
    if (s > best_score) {
      best = i;
      best_score = s;
      tie = false;
    } else if (s == best_score && s > 0) {
      tie = true;
    }
  }
  if (tie) return std::nullopt;
  return best;
}

std::vector<double> answer_distribution(const std::vector<std::pair<Denotation, double>>& weighted,
                                        const std::vector<std::string>& options) {
  std::vector<double> dist(options.size(), 0.0);
  if (options.empty()) return dist;
  double total = 0;
  for (const auto& entry : weighted) total += entry.second;
  // Weights summing to more than one are normalized; a deficit is failure
  // mass and is treated like abstention.
  const double norm = total > 1.0 ? total : 1.0;
  double abstain = 1.0 - total / norm;
  std::map<std::string, std::optional<std::size_t>> picks;
  for (const auto& [d, w] : weighted) {
    auto [it, fresh] = picks.try_emplace(d.to_string());
    if (fresh) it->second = select(d, options);
    const auto& pick = it->second;
    if (pick) {
      dist[*pick] += w / norm;
    } else {
      abstain += w / norm;
    }
  }
  for (double& p : dist) p += abstain / static_cast<double>(options.size());
  return dist;
}

SupervisionOracle::SupervisionOracle(const Environment& env, std::vector<std::string> options,
                                     std::size_t gold_answer, bool use_food_web)
    : options_(std::move(options)), gold_answer_(gold_answer) {
  if (use_food_web && env.gold()) gold_world_ = domain::world_from_gold(env, *env.gold());
}

bool SupervisionOracle::accept_partial(const exec::World& w) const {
  if (!gold_world_) return true;
  const int n = static_cast<int>(w.num_labels());
  for (int x = 0; x < n; ++x) {
    auto t = w.organism(x);
    if (t != exec::Truth::Undef && t != gold_world_->organism(x)) return false;
    for (int y = 0; y < n; ++y) {
      auto e = w.eats(x, y);
      if (e != exec::Truth::Undef && e != gold_world_->eats(x, y)) return false;
    }
  }
  return true;
}

bool SupervisionOracle::accept_complete(const exec::World& w, const Denotation& d) const {
  if (!accept_partial(w)) return false;
  auto [it, fresh] = picks_.try_emplace(d.to_string());
  if (fresh) it->second = select(d, options_);
  return it->second && *it->second == gold_answer_;
}

}  // namespace webqa::answer
