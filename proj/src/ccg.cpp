#include "webqa/ccg.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <unordered_map>

#include "webqa/errors.hpp"
#include "webqa/text.hpp"

namespace webqa::ccg {

// ------------------------------------------------------------- categories

namespace {

struct CategoryTable {
  std::mutex mu;
  std::unordered_map<std::string, std::unique_ptr<Category>> by_key;
};

CategoryTable& category_table() {
  static CategoryTable t;
  return t;
}

std::string arg_key(const Category* c) { return c->is_atomic() ? c->key : "(" + c->key + ")"; }

class CategoryParser {
 public:
  explicit CategoryParser(std::string_view s) : s_(s) {}

  const Category* run() {
    const Category* c = expr();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return c;
  }

 private:
  const Category* expr() {
    bool marked = false;
    const Category* c = primary(marked);
    if (marked) fail("head markup is only allowed on an argument");
    while (true) {
      skip_ws();
      if (pos_ >= s_.size() || (s_[pos_] != '/' && s_[pos_] != '\\')) return c;
      char slash = s_[pos_++];
      bool head = false;
      const Category* arg = primary(head);
      c = Category::functional(c, slash, arg, head);
    }
  }

  const Category* primary(bool& marked) {
    skip_ws();
    const Category* c = nullptr;
    if (pos_ < s_.size() && s_[pos_] == '(') {
      ++pos_;
      c = expr();
      skip_ws();
      if (pos_ >= s_.size() || s_[pos_] != ')') fail("missing ')'");
      ++pos_;
    } else {
      std::size_t b = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '[' ||
                                  s_[pos_] == ']' || s_[pos_] == '_')) {
        ++pos_;
      }
      if (b == pos_) fail(pos_ < s_.size() ? "unexpected '" + std::string(1, s_[pos_]) + "'" : "unexpected end");
      c = Category::atomic(std::string(s_.substr(b, pos_ - b)));
    }
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == '^') {
      ++pos_;
      marked = true;
    }
    return c;
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("bad category \"" + std::string(s_) + "\": " + msg);
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

const Category* Category::atomic(const std::string& symbol) {
  auto& t = category_table();
  std::lock_guard lock(t.mu);
  auto& slot = t.by_key[symbol];
  if (!slot) {
    slot = std::make_unique<Category>();
    slot->atom = symbol;
    slot->key = symbol;
    slot->plain = slot.get();
  }
  return slot.get();
}

const Category* Category::functional(const Category* result, char slash, const Category* arg, bool head_from_arg) {
  std::string key = result->key + slash + arg_key(arg) + (head_from_arg ? "^" : "");
  const Category* plain = nullptr;
  if (head_from_arg || result->plain != result || arg->plain != arg) {
    plain = functional(result->plain, slash, arg->plain, false);
  }
  auto& t = category_table();
  std::lock_guard lock(t.mu);
  auto& slot = t.by_key[key];
  if (!slot) {
    slot = std::make_unique<Category>();
    slot->result = result;
    slot->arg = arg;
    slot->slash = slash;
    slot->head_from_arg = head_from_arg;
    slot->key = key;
    slot->plain = plain ? plain : slot.get();
    slot->arity = result->arity + 1;
  }
  return slot.get();
}

const Category* Category::parse(std::string_view text) { return CategoryParser(text).run(); }

// ------------------------------------------------------------- predicates

namespace {

struct PredicateTable {
  std::mutex mu;
  std::unordered_map<std::string, PredicateId> ids;
  std::deque<std::string> names;
};

PredicateTable& predicate_table() {
  static PredicateTable t;
  return t;
}

}  // namespace

PredicateId intern_predicate(const std::string& canonical_lf) {
  auto& t = predicate_table();
  std::lock_guard lock(t.mu);
  auto [it, inserted] = t.ids.emplace(canonical_lf, static_cast<PredicateId>(t.names.size()));
  if (inserted) t.names.push_back(canonical_lf);
  return it->second;
}

const std::string& predicate_name(PredicateId p) {
  auto& t = predicate_table();
  std::lock_guard lock(t.mu);
  return t.names.at(static_cast<std::size_t>(p));
}

// ---------------------------------------------------------------- lexicon

std::string LexiconEntry::feature_name() const {
  return "lex:" + text::join(words, " ") + "|" + category->key + "|" + predicate_name(predicate);
}

void Lexicon::add(const std::vector<std::string>& words, const Category* category, const lf::ExprPtr& form) {
  if (words.empty()) throw ParseError("lexicon entry has no words");
  lf::infer_type(form);
  auto e = std::make_shared<LexiconEntry>();
  e->words = words;
  e->category = category;
  e->logical_form = lf::beta_normalize(form);
  e->predicate = intern_predicate(lf::canonical(form));
  auto& bucket = by_words_[text::join(words, " ")];
  for (const auto& other : bucket) {
    if (other->category == e->category && other->predicate == e->predicate) {
      warnings_.push_back("duplicate lexicon entry dropped: " + e->feature_name());
      return;
    }
  }
  bucket.push_back(std::move(e));
  ++size_;
  max_words_ = std::max(max_words_, words.size());
}

Lexicon Lexicon::parse(std::string_view input) {
  Lexicon lex;
  std::istringstream in{std::string(input)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) continue;
    auto def = line.find(":=");
    if (def == std::string::npos) throw ParseError("expected 'words := category : logical form'", lineno);
    auto colon = line.find(" : ", def + 2);
    if (colon == std::string::npos) throw ParseError("missing ' : ' before the logical form", lineno);
    try {
      auto words = text::tokenize(line.substr(0, def));
      const Category* cat = Category::parse(line.substr(def + 2, colon - def - 2));
      lf::ExprPtr form = lf::parse(line.substr(colon + 3));
      lex.add(words, cat, form);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), lineno);
    } catch (const Error& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  return lex;
}

Lexicon Lexicon::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open lexicon " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

const std::vector<std::shared_ptr<const LexiconEntry>>* Lexicon::lookup(const std::string& joined_words) const {
  auto it = by_words_.find(joined_words);
  return it == by_words_.end() ? nullptr : &it->second;
}

std::vector<const LexiconEntry*> Lexicon::entries() const {
  std::vector<const LexiconEntry*> out;
  for (const auto& [w, es] : by_words_) {
    for (const auto& e : es) out.push_back(e.get());
  }
  return out;
}

std::vector<SpannedEntry> dynamic_entries(const std::vector<std::string>& tokens, const Environment& env) {
  std::vector<std::string> q;
  for (const auto& t : tokens) q.push_back(text::stem(text::to_lower(t)));
  struct Match {
    int start, end, label;
  };
  std::vector<Match> matches;
  for (std::size_t l = 0; l < env.labels().size(); ++l) {
    std::vector<std::string> lt;
    for (const auto& w : text::word_tokens(env.labels()[l])) lt.push_back(text::stem(w));
    if (lt.empty() || lt.size() > q.size()) continue;
    for (std::size_t i = 0; i + lt.size() <= q.size(); ++i) {
      if (std::equal(lt.begin(), lt.end(), q.begin() + static_cast<std::ptrdiff_t>(i))) {
        matches.push_back({static_cast<int>(i), static_cast<int>(i + lt.size()), static_cast<int>(l)});
      }
    }
  }
  std::vector<SpannedEntry> out;
  for (const auto& m : matches) {
    bool dominated = std::any_of(matches.begin(), matches.end(), [&](const Match& o) {
      return o.start <= m.start && m.end <= o.end && (o.end - o.start) > (m.end - m.start);
    });
    if (dominated) continue;
    auto e = std::make_shared<LexiconEntry>();
    e->words.assign(tokens.begin() + m.start, tokens.begin() + m.end);
    e->category = Category::atomic("N");
    e->logical_form = lf::entity(env.labels()[m.label]);
    e->predicate = intern_predicate(lf::canonical(e->logical_form));
    e->dynamic = true;
    out.push_back({m.start, m.end, std::move(e)});
  }
  return out;
}

// ------------------------------------------------------------ combinators

std::string_view rule_name(Rule r) {
  switch (r) {
    case Rule::Lexical: return "lex";
    case Rule::ForwardApply: return ">";
    case Rule::BackwardApply: return "<";
    case Rule::ForwardCompose: return ">B";
  }
  return "?";
}

namespace {

/// Category-level check; cheap enough to run before any logical-form work.
bool applies(Rule rule, const Category* l, const Category* r) {
  switch (rule) {
    case Rule::ForwardApply: return l->slash == '/' && l->arg->plain == r->plain;
    case Rule::BackwardApply: return r->slash == '\\' && r->arg->plain == l->plain;
    case Rule::ForwardCompose:
      return l->slash == '/' && r->slash == '/' && l->arg->plain == r->result->plain;
    default: return false;
  }
}

Dependency fill(const Slot& s, const ParseNode& arg) {
  return Dependency{s.lexical_category, s.predicate, s.argument, arg.head_predicate, s.word, arg.head_word};
}

/// Category, head and slots of a combination, without the logical form.
std::optional<Combination> combine_syntax(Rule rule, const ParseNode& left, const ParseNode& right) {
  const Category* l = left.category;
  const Category* r = right.category;
  if (!applies(rule, l, r)) return std::nullopt;
  Combination c;
  const ParseNode& functor = rule == Rule::BackwardApply ? right : left;
  const ParseNode& argument = rule == Rule::BackwardApply ? left : right;
  const Category* f = functor.category;
  const bool from_arg = f->head_from_arg;
  c.head_predicate = from_arg ? argument.head_predicate : functor.head_predicate;
  c.head_word = from_arg ? argument.head_word : functor.head_word;
  c.dependencies.push_back(fill(functor.slots.front(), argument));
  if (rule == Rule::ForwardCompose) {
    c.category = Category::functional(f->result, '/', r->arg, r->head_from_arg && from_arg);
    c.slots.push_back(right.slots.front());
    c.slots.insert(c.slots.end(), left.slots.begin() + 1, left.slots.end());
  } else {
    c.category = f->result;
    if (from_arg && static_cast<int>(argument.slots.size()) == c.category->arity) {
      c.slots = argument.slots;
    } else {
      c.slots.assign(functor.slots.begin() + 1, functor.slots.end());
    }
  }
  return c;
}

lf::ExprPtr combine_lf(Rule rule, const lf::ExprPtr& l, const lf::ExprPtr& r) {
  switch (rule) {
    case Rule::ForwardApply: return lf::beta_normalize(lf::app(l, r));
    case Rule::BackwardApply: return lf::beta_normalize(lf::app(r, l));
    case Rule::ForwardCompose:
      return lf::beta_normalize(lf::lambda("_c", lf::app(l, lf::app(r, lf::var("_c")))));
    default: return nullptr;
  }
}

std::string distance_bin(int head_word, int arg_word) {
  int d = std::abs(head_word - arg_word) - 1;
  if (d < 0) d = 0;
  return d >= 3 ? "3+" : std::to_string(d);
}

}  // namespace

std::optional<Combination> combine(Rule rule, const ParseNode& left, const ParseNode& right) {
  auto c = combine_syntax(rule, left, right);
  if (c) c->logical_form = combine_lf(rule, left.logical_form, right.logical_form);
  return c;
}

FeatureVector lexical_step_features(const ParseNode& node, const std::vector<std::string>& tokens) {
  FeatureVector f;
  f.add(node.entry->feature_name(), 1.0);
  for (int i = node.start; i < node.lexical_start; ++i) f.add("skip:" + tokens[i], 1.0);
  return f;
}

FeatureVector binary_step_features(const ParseNode& left, const ParseNode& right, const Combination& c) {
  FeatureVector f;
  const std::string triple = left.category->key + "|" + right.category->key + "|" + c.category->key;
  f.add("comb:" + triple, 1.0);
  f.add("hcomb:" + triple + "|" + predicate_name(c.head_predicate), 1.0);
  for (const auto& d : c.dependencies) {
    const std::string base = d.category->key + "|" + predicate_name(d.predicate) + "|" + std::to_string(d.argument);
    f.add("dep:" + base + "|" + predicate_name(d.argument_predicate), 1.0);
    f.add("depdist:" + base + "|" + distance_bin(d.head_word, d.argument_word), 1.0);
  }
  return f;
}

FeatureVector root_features(const ParseNode& root, int root_end, const std::vector<std::string>& tokens) {
  FeatureVector f;
  f.add("root:" + root.category->key + "|" + predicate_name(root.head_predicate), 1.0);
  for (std::size_t i = static_cast<std::size_t>(root_end); i < tokens.size(); ++i) f.add("skip:" + tokens[i], 1.0);
  return f;
}

FeatureVector parse_features(const ParseTree& tree, const std::vector<std::string>& tokens) {
  FeatureVector f;
  if (tree.root < 0) return f;
  std::vector<int> stack = {tree.root};
  while (!stack.empty()) {
    const ParseNode& n = tree.nodes[stack.back()];
    stack.pop_back();
    if (n.rule == Rule::Lexical) {
      f.add(lexical_step_features(n, tokens));
      continue;
    }
    const ParseNode& l = tree.nodes[n.left];
    const ParseNode& r = tree.nodes[n.right];
    auto c = combine_syntax(n.rule, l, r);
    if (!c) throw Error("tree node does not follow from its children");
    f.add(binary_step_features(l, r, *c));
    stack.push_back(n.left);
    stack.push_back(n.right);
  }
  f.add(root_features(tree.nodes[tree.root], tree.root_end, tokens));
  return f;
}

// ------------------------------------------------------------------ chart

namespace {

struct ChartItem {
  ParseNode node;
  double score = 0.0;
  FeatureVector step;
};

struct PairHash {
  std::size_t operator()(const std::tuple<const void*, const void*, int>& k) const {
    auto h1 = std::hash<const void*>()(std::get<0>(k));
    auto h2 = std::hash<const void*>()(std::get<1>(k));
    return h1 ^ (h2 * 0x9e3779b97f4a7c15ULL) ^ static_cast<std::size_t>(std::get<2>(k));
  }
};

class Chart {
 public:
  Chart(const std::vector<std::string>& tokens, const Weights& theta, std::size_t beam)
      : tokens_(tokens), n_(static_cast<int>(tokens.size())), theta_(theta), beam_(beam),
        cells_(static_cast<std::size_t>(n_ * (n_ + 1))) {}

  void add_lexical(int start, int end, const std::shared_ptr<const LexiconEntry>& e) {
    for (int s = start; s >= 0; --s) {
      ChartItem it;
      it.node.rule = Rule::Lexical;
      it.node.start = s;
      it.node.end = end;
      it.node.lexical_start = start;
      it.node.category = e->category;
      it.node.logical_form = e->logical_form;
      it.node.head_predicate = e->predicate;
      it.node.head_word = start;
      it.node.entry = e;
      for (int a = 0; a < e->category->arity; ++a) {
        it.node.slots.push_back(Slot{e->category, e->predicate, start, a + 1});
      }
      it.step = lexical_step_features(it.node, tokens_);
      it.score = theta_.dot(it.step);
      pending(s, end).push_back(add(std::move(it)));
    }
  }

  void fill() {
    for (int len = 1; len <= n_; ++len) {
      for (int i = 0; i + len <= n_; ++i) {
        int j = i + len;
        std::vector<int> cands = std::move(pending(i, j));
        for (int k = i + 1; k < j; ++k) combine_cells(i, k, j, cands);
        std::stable_sort(cands.begin(), cands.end(),
                         [this](int a, int b) { return items_[a].score > items_[b].score; });
        if (cands.size() > beam_) cands.resize(beam_);
        cell_mut(i, j) = std::move(cands);
      }
    }
  }

  const std::vector<int>& cell(int i, int j) const { return cells_[static_cast<std::size_t>(i * (n_ + 1) + j)]; }
  const ChartItem& item(int id) const { return items_[id]; }
  int size() const { return n_; }

  ParseTree tree(int id, int root_end) const {
    ParseTree t;
    t.root_end = root_end;
    t.root = copy(id, t);
    return t;
  }

  /// Sum of step features over the subtree.
  FeatureVector features(int id) const {
    FeatureVector f;
    std::vector<int> stack = {id};
    while (!stack.empty()) {
      const ChartItem& it = items_[stack.back()];
      stack.pop_back();
      f.add(it.step);
      if (it.node.rule != Rule::Lexical) {
        stack.push_back(it.node.left);
        stack.push_back(it.node.right);
      }
    }
    return f;
  }

 private:
  std::vector<int>& cell_mut(int i, int j) { return cells_[static_cast<std::size_t>(i * (n_ + 1) + j)]; }
  std::vector<int>& pending(int i, int j) {
    return pending_[static_cast<std::size_t>(i * (n_ + 1) + j)];
  }

  int add(ChartItem it) {
    items_.push_back(std::move(it));
    return static_cast<int>(items_.size()) - 1;
  }

  int copy(int id, ParseTree& t) const {
    const ChartItem& it = items_[id];
    ParseNode n = it.node;
    if (n.rule != Rule::Lexical) {
      n.left = copy(it.node.left, t);
      n.right = copy(it.node.right, t);
    }
    t.nodes.push_back(std::move(n));
    return static_cast<int>(t.nodes.size()) - 1;
  }

  /// Logical form of a combination, or null if ill-typed. Memoized on the
  /// operand objects; chart items often share logical forms.
  lf::ExprPtr combined_lf(Rule rule, const lf::ExprPtr& l, const lf::ExprPtr& r) {
    auto key = std::make_tuple(static_cast<const void*>(l.get()), static_cast<const void*>(r.get()),
                               static_cast<int>(rule));
    auto it = lf_cache_.find(key);
    if (it != lf_cache_.end()) return it->second;
    lf::ExprPtr out;
    try {
      out = combine_lf(rule, l, r);
      lf::infer_type(out);
    } catch (const Error&) {
      out = nullptr;
    }
    // Keep operands alive so their addresses stay unique keys.
    keep_.push_back(l);
    keep_.push_back(r);
    lf_cache_.emplace(key, out);
    return out;
  }

  void combine_cells(int i, int k, int j, std::vector<int>& out) {
    const auto& left = cell(i, k);
    const auto& right = cell(k, j);
    if (left.empty() || right.empty()) return;
    // Group by category so rule checks run once per category pair.
    auto groups = [this](const std::vector<int>& ids) {
      std::vector<std::pair<const Category*, std::vector<int>>> g;
      for (int id : ids) {
        const Category* c = items_[id].node.category;
        auto it = std::find_if(g.begin(), g.end(), [c](const auto& p) { return p.first == c; });
        if (it == g.end()) {
          g.push_back({c, {id}});
        } else {
          it->second.push_back(id);
        }
      }
      return g;
    };
    auto lg = groups(left);
    auto rg = groups(right);
    static constexpr Rule kRules[] = {Rule::ForwardApply, Rule::BackwardApply, Rule::ForwardCompose};
    for (const auto& [lc, lids] : lg) {
      for (const auto& [rc, rids] : rg) {
        for (Rule rule : kRules) {
          if (!applies(rule, lc, rc)) continue;
          for (int a : lids) {
            for (int b : rids) {
              const ChartItem& L = items_[a];
              const ChartItem& R = items_[b];
              auto c = combine_syntax(rule, L.node, R.node);
              if (!c) continue;
              lf::ExprPtr form = combined_lf(rule, L.node.logical_form, R.node.logical_form);
              if (!form) continue;
              ChartItem it;
              it.node.rule = rule;
              it.node.start = i;
              it.node.end = j;
              it.node.category = c->category;
              it.node.logical_form = form;
              it.node.head_predicate = c->head_predicate;
              it.node.head_word = c->head_word;
              it.node.slots = c->slots;
              it.node.left = a;
              it.node.right = b;
              it.step = binary_step_features(L.node, R.node, *c);
              it.score = L.score + R.score + theta_.dot(it.step);
              out.push_back(add(std::move(it)));
            }
          }
        }
      }
    }
  }

  const std::vector<std::string>& tokens_;
  int n_;
  const Weights& theta_;
  std::size_t beam_;
  std::vector<std::vector<int>> cells_;
  std::vector<std::vector<int>> pending_ = std::vector<std::vector<int>>(cells_.size());
  std::deque<ChartItem> items_;
  std::unordered_map<std::tuple<const void*, const void*, int>, lf::ExprPtr, PairHash> lf_cache_;
  std::vector<lf::ExprPtr> keep_;
};

double log_sum_exp(const std::vector<double>& xs) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace

std::vector<ScoredParse> parse(const std::vector<std::string>& tokens, const Lexicon& lexicon,
                               const Environment* env, const Weights& theta, const ParserConfig& config,
                               const std::function<bool(const lf::ExprPtr&)>& root_filter) {
  const int n = static_cast<int>(tokens.size());
  if (n == 0) return {};
  Chart chart(tokens, theta, std::max<std::size_t>(config.beam_width, 1));
  for (int i = 0; i < n; ++i) {
    std::string joined;
    for (int len = 1; len <= static_cast<int>(lexicon.max_words()) && i + len <= n; ++len) {
      if (len > 1) joined += " ";
      joined += tokens[i + len - 1];
      if (const auto* es = lexicon.lookup(joined)) {
        for (const auto& e : *es) chart.add_lexical(i, i + len, e);
      }
    }
  }
  if (env) {
    for (const auto& d : dynamic_entries(tokens, *env)) chart.add_lexical(d.start, d.end, d.entry);
  }
  chart.fill();

  struct Root {
    int item;
    int end;
    double score;
  };
  std::map<std::string, std::vector<Root>> by_lf;
  std::vector<std::string> order;
  std::unordered_map<const lf::Expr*, std::string> canon_cache;
  std::map<std::string, bool> accepted;
  for (int j = 1; j <= n; ++j) {
    for (int id : chart.cell(0, j)) {
      const ChartItem& it = chart.item(id);
      auto cit = canon_cache.find(it.node.logical_form.get());
      if (cit == canon_cache.end()) {
        cit = canon_cache.emplace(it.node.logical_form.get(), lf::canonical(it.node.logical_form)).first;
      }
      const std::string& canon = cit->second;
      auto acc = accepted.find(canon);
      if (acc == accepted.end()) {
        acc = accepted.emplace(canon, !root_filter || root_filter(it.node.logical_form)).first;
      }
      if (!acc->second) continue;
      double s = it.score + theta.dot(root_features(it.node, j, tokens));
      auto& group = by_lf[canon];
      if (group.empty()) order.push_back(canon);
      group.push_back({id, j, s});
    }
  }

  std::vector<ScoredParse> out;
  for (const auto& canon : order) {
    const auto& group = by_lf[canon];
    ScoredParse p;
    p.canonical = canon;
    std::vector<double> scores;
    for (const auto& r : group) scores.push_back(r.score);
    p.log_weight = log_sum_exp(scores);
    p.num_trees = static_cast<int>(group.size());
    const Root* best = &group.front();
    for (const auto& r : group) {
      if (r.score > best->score) best = &r;
      FeatureVector f = chart.features(r.item);
      f.add(root_features(chart.item(r.item).node, r.end, tokens));
      p.expected_features.add(f, std::exp(r.score - p.log_weight));
    }
    const ChartItem& bi = chart.item(best->item);
    p.logical_form = bi.node.logical_form;
    p.root_category = bi.node.category->key;
    p.best_score = best->score;
    p.best_tree = chart.tree(best->item, best->end);
    out.push_back(std::move(p));
  }
  std::stable_sort(out.begin(), out.end(), [](const ScoredParse& a, const ScoredParse& b) {
    if (a.log_weight != b.log_weight) return a.log_weight > b.log_weight;
    return a.canonical < b.canonical;
  });
  if (config.lf_count > 0 && out.size() > config.lf_count) out.resize(config.lf_count);
  return out;
}

}  // namespace webqa::ccg
