#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "webqa/environment.hpp"
#include "webqa/features.hpp"
#include "webqa/logical_form.hpp"

namespace webqa::ccg {

/// Syntactic category. Categories are interned: equal categories share one
/// object, so pointer comparison is category equality.
struct Category {
  std::string atom;                  // atomic categories only
  const Category* result = nullptr;  // functional categories only
  const Category* arg = nullptr;
  char slash = 0;                    // '/' or '\\'
  /// Head-passing markup (`^` after the argument): the head of the result
  /// comes from the argument rather than the functor.
  bool head_from_arg = false;

  /// Printed form, with markup.
  std::string key;
  /// The same category with all markup removed.
  const Category* plain = nullptr;
  /// Number of slashes along the result spine.
  int arity = 0;

  bool is_atomic() const { return slash == 0; }

  /// Parses e.g. `(S\N)/N^`. Slashes associate to the left. Throws ParseError.
  static const Category* parse(std::string_view text);
  static const Category* atomic(const std::string& symbol);
  static const Category* functional(const Category* result, char slash, const Category* arg, bool head_from_arg);
};

/// Interned predicate symbol: one per distinct canonical logical form.
using PredicateId = int;
PredicateId intern_predicate(const std::string& canonical_lf);
const std::string& predicate_name(PredicateId p);

struct LexiconEntry {
  std::vector<std::string> words;
  const Category* category = nullptr;
  lf::ExprPtr logical_form;
  PredicateId predicate = -1;
  bool dynamic = false;

  /// "lex:<words>|<category>|<logical form>"
  std::string feature_name() const;
};

class Lexicon {
 public:
  /// One entry per line: `token sequence := category : logical form`;
  /// `#` starts a comment. Duplicates are dropped with a warning.
  static Lexicon parse(std::string_view text);
  static Lexicon load(const std::string& path);

  /// Throws ParseError on a malformed category or logical form.
  void add(const std::vector<std::string>& words, const Category* category, const lf::ExprPtr& form);

  /// Entries whose word sequence is exactly `words`.
  const std::vector<std::shared_ptr<const LexiconEntry>>* lookup(const std::string& joined_words) const;
  std::size_t size() const { return size_; }
  std::size_t max_words() const { return max_words_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  std::vector<const LexiconEntry*> entries() const;

 private:
  std::map<std::string, std::vector<std::shared_ptr<const LexiconEntry>>> by_words_;
  std::size_t size_ = 0;
  std::size_t max_words_ = 0;
  std::vector<std::string> warnings_;
};

/// A lexicon entry anchored at a token span.
struct SpannedEntry {
  int start = 0;
  int end = 0;
  std::shared_ptr<const LexiconEntry> entry;
};

/// Entity entries for maximal question spans that match an environment
/// label token-for-token after stemming.
std::vector<SpannedEntry> dynamic_entries(const std::vector<std::string>& tokens, const Environment& env);

enum class Rule : std::uint8_t { Lexical, ForwardApply, BackwardApply, ForwardCompose };
std::string_view rule_name(Rule r);

/// Pending argument of a chart entry, owned by the lexical item that
/// introduced it.
struct Slot {
  const Category* lexical_category = nullptr;
  PredicateId predicate = -1;
  int word = -1;
  int argument = 0;  // 1-based, in consumption order
};

struct Dependency {
  const Category* category;
  PredicateId predicate;
  int argument;
  PredicateId argument_predicate;
  int head_word;
  int argument_word;
};

/// One node of a derivation tree.
struct ParseNode {
  Rule rule = Rule::Lexical;
  int start = 0;
  int end = 0;
  const Category* category = nullptr;
  lf::ExprPtr logical_form;
  PredicateId head_predicate = -1;
  int head_word = -1;
  std::vector<Slot> slots;
  int left = -1;   // child node indices for binary rules
  int right = -1;
  // Lexical nodes
  std::shared_ptr<const LexiconEntry> entry;
  int lexical_start = 0;  // words [start, lexical_start) are skipped
};

struct ParseTree {
  std::vector<ParseNode> nodes;
  int root = -1;
  /// Tokens after the root span are skipped.
  int root_end = 0;
};

/// Result of combining two adjacent constituents.
struct Combination {
  const Category* category;
  lf::ExprPtr logical_form;  // beta-normal, not yet type-checked
  PredicateId head_predicate;
  int head_word;
  std::vector<Slot> slots;
  std::vector<Dependency> dependencies;
};

/// Applies one binary combinator; nullopt if it does not apply.
std::optional<Combination> combine(Rule rule, const ParseNode& left, const ParseNode& right);

/// Features of a single derivation step (lexical or binary).
FeatureVector lexical_step_features(const ParseNode& node, const std::vector<std::string>& tokens);
FeatureVector binary_step_features(const ParseNode& left, const ParseNode& right, const Combination& c);
FeatureVector root_features(const ParseNode& root, int root_end, const std::vector<std::string>& tokens);

/// All features of a complete tree, recomputed from its nodes.
FeatureVector parse_features(const ParseTree& tree, const std::vector<std::string>& tokens);

struct ScoredParse {
  lf::ExprPtr logical_form;
  std::string canonical;
  std::string root_category;
  /// log Σ over retained trees of exp(θ_p · φ(t)).
  double log_weight = 0.0;
  /// Expected features under the tree posterior for this logical form.
  FeatureVector expected_features;
  ParseTree best_tree;
  double best_score = 0.0;
  int num_trees = 0;
};

struct ParserConfig {
  /// Entries kept per chart cell; SIZE_MAX keeps everything.
  std::size_t beam_width = 100;
  /// Logical forms returned; 0 returns all.
  std::size_t lf_count = 10;
};

/// CKY chart parse with application, forward composition and word skipping.
/// Logical forms are marginalized over their retained trees and ranked by
/// log weight; forms rejected by `root_filter` are dropped before truncation.
std::vector<ScoredParse> parse(const std::vector<std::string>& tokens, const Lexicon& lexicon,
                               const Environment* env, const Weights& theta, const ParserConfig& config,
                               const std::function<bool(const lf::ExprPtr&)>& root_filter = {});

}  // namespace webqa::ccg
