#include "webqa/oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "webqa/answer.hpp"
#include "webqa/domain.hpp"
#include "webqa/errors.hpp"
#include "webqa/generator.hpp"
#include "webqa/text.hpp"

namespace webqa::oracle {

using ccg::ParseNode;
using ccg::ParseTree;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

ParseTree graft(const ParseTree& l, const ParseTree& r, ParseNode parent) {
  ParseTree t;
  t.nodes = l.nodes;
  const int off = static_cast<int>(t.nodes.size());
  for (ParseNode n : r.nodes) {
    if (n.left >= 0) n.left += off;
    if (n.right >= 0) n.right += off;
    t.nodes.push_back(std::move(n));
  }
  parent.left = l.root;
  parent.right = r.root + off;
  t.nodes.push_back(std::move(parent));
  t.root = static_cast<int>(t.nodes.size()) - 1;
  return t;
}

double lse(const std::vector<double>& xs) {
  return train::log_sum_exp(xs);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

}  // namespace

// ------------------------------------------------------------ derivations

DerivationEnumerator::DerivationEnumerator(const std::vector<std::string>& tokens, const ccg::Lexicon& lexicon,
                                           const Environment* env)
    : n_(static_cast<int>(tokens.size())),
      memo_(static_cast<std::size_t>(n_ * (n_ + 1))),
      done_(static_cast<std::size_t>(n_ * (n_ + 1)), false) {
  for (int i = 0; i < n_; ++i) {
    std::string joined;
    for (int j = i + 1; j <= n_; ++j) {
      joined += (j > i + 1 ? " " : "") + tokens[j - 1];
      if (const auto* es = lexicon.lookup(joined)) {
        for (const auto& e : *es) lexical_.push_back({i, j, e});
      }
    }
  }
  if (env) {
    for (const auto& d : ccg::dynamic_entries(tokens, *env)) lexical_.push_back(d);
  }
}

const std::vector<ParseTree>& DerivationEnumerator::spans(int i, int j) {
  const auto key = static_cast<std::size_t>(i * (n_ + 1) + j);
  if (done_[key]) return memo_[key];
  std::vector<ParseTree> out;
  for (const auto& l : lexical_) {
    if (l.end != j || l.start < i) continue;
    ParseNode n;
    n.start = i;
    n.end = j;
    n.lexical_start = l.start;
    n.category = l.entry->category;
    n.logical_form = l.entry->logical_form;
    n.head_predicate = l.entry->predicate;
    n.head_word = l.start;
    n.entry = l.entry;
    for (int a = 0; a < n.category->arity; ++a) n.slots.push_back({n.category, n.head_predicate, l.start, a + 1});
    ParseTree t;
    t.nodes.push_back(std::move(n));
    t.root = 0;
    out.push_back(std::move(t));
  }
  for (int k = i + 1; k < j; ++k) {
    const auto left = spans(i, k);
    const auto right = spans(k, j);
    for (const auto& lt : left) {
      for (const auto& rt : right) {
        for (auto rule : {ccg::Rule::ForwardApply, ccg::Rule::BackwardApply, ccg::Rule::ForwardCompose}) {
          auto c = ccg::combine(rule, lt.nodes[lt.root], rt.nodes[rt.root]);
          if (!c || !lf::well_typed(c->logical_form)) continue;
          ParseNode p;
          p.rule = rule;
          p.start = i;
          p.end = j;
          p.category = c->category;
          p.logical_form = c->logical_form;
          p.head_predicate = c->head_predicate;
          p.head_word = c->head_word;
          p.slots = c->slots;
          out.push_back(graft(lt, rt, std::move(p)));
        }
      }
    }
  }
  done_[key] = true;
  memo_[key] = std::move(out);
  return memo_[key];
}

std::vector<ParseTree> DerivationEnumerator::roots() {
  std::vector<ParseTree> out;
  for (int j = 1; j <= n_; ++j) {
    for (ParseTree t : spans(0, j)) {
      t.root_end = j;
      out.push_back(std::move(t));
    }
  }
  return out;
}

std::map<std::string, double> marginal_log_weights(const std::vector<std::string>& tokens,
                                                   const ccg::Lexicon& lexicon, const Environment* env,
                                                   const Weights& theta,
                                                   const std::function<bool(const lf::ExprPtr&)>& root_filter) {
  DerivationEnumerator e(tokens, lexicon, env);
  std::map<std::string, std::vector<double>> scores;
  for (const auto& t : e.roots()) {
    const auto& form = t.nodes[t.root].logical_form;
    if (root_filter && !root_filter(form)) continue;
    scores[lf::canonical(form)].push_back(theta.dot(ccg::parse_features(t, tokens)));
  }
  std::map<std::string, double> out;
  for (const auto& [form, s] : scores) out[form] = lse(s);
  return out;
}

// ----------------------------------------------------------------- cycles

std::array<double, 4> cycle_features(std::size_t n, const std::vector<bool>& adj) {
  const int inf = 1 << 20;
  std::vector<int> d(n * n, inf);
  for (std::size_t i = 0; i < n; ++i) {
    d[i * n + i] = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && adj[i * n + j]) d[i * n + j] = 1;
    }
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        d[i * n + j] = std::min(d[i * n + j], d[i * n + k] + d[k * n + j]);

  std::array<int, 3> count{0, 0, 0};
  std::vector<double> tail;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      if (i == j || !adj[i * n + j] || d[j * n + i] >= inf) continue;
      const int len = d[j * n + i] + 1;
      if (len <= 4) {
        ++count[len - 2];
      } else {
        tail.push_back(1.0 / len);
      }
    }
  }
  double t = 0;
  for (double x : tail) t += x;
  return {count[0] / 2.0, count[1] / 3.0, count[2] / 4.0, t};
}

// ------------------------------------------------------------- likelihood

ExactLikelihood::ExactLikelihood(const train::Example& ex, const ccg::Lexicon& lexicon,
                                 const model::RoleVocabulary& roles, const train::InferenceConfig& cfg,
                                 std::size_t choose_budget) {
  std::set<FeatureId> pf, ef;
  std::map<std::string, std::size_t> form_index;
  std::vector<lf::ExprPtr> forms;
  DerivationEnumerator e(ex.tokens, lexicon, ex.env);
  for (const auto& t : e.roots()) {
    const auto& form = t.nodes[t.root].logical_form;
    if (!domain::is_executable(form)) continue;
    auto [it, fresh] = form_index.emplace(lf::canonical(form), forms.size());
    if (fresh) forms.push_back(form);
    Tree tree{ccg::parse_features(t, ex.tokens), it->second};
    for (const auto& [id, v] : tree.features) pf.insert(id);
    trees_.push_back(std::move(tree));
  }
  model::InstanceFeatureCache cache(*ex.env);
  answer::SupervisionOracle oracle(*ex.env, ex.options, ex.answer);
  for (const auto& form : forms) {
    const auto prog = domain::compile(form);
    model::ExecutionFeaturizer phi(cache, prog, &roles, cfg.features);
    std::vector<Execution> execs;
    for (auto& r : exec::exhaustive_execute(prog.bind(*ex.env), phi, Weights{}, choose_budget)) {
      for (const auto& [id, v] : r.features) ef.insert(id);
      execs.push_back({r.features, oracle.accept_complete(r.world, r.denotation)});
    }
    executions_.push_back(std::move(execs));
  }
  parser_features_.assign(pf.begin(), pf.end());
  exec_features_.assign(ef.begin(), ef.end());
}

double ExactLikelihood::log_likelihood(const Weights& parser, const Weights& exec) const {
  std::vector<double> all_f, good_f;
  for (const auto& execs : executions_) {
    std::vector<double> a, g;
    for (const auto& x : execs) {
      const double s = exec.dot(x.features);
      a.push_back(s);
      if (x.correct) g.push_back(s);
    }
    all_f.push_back(lse(a));
    good_f.push_back(lse(g));
  }
  std::vector<double> num, den;
  for (const auto& t : trees_) {
    const double s = parser.dot(t.features);
    num.push_back(s + good_f[t.form]);
    den.push_back(s + all_f[t.form]);
  }
  return lse(num) - lse(den);
}

std::size_t ExactLikelihood::num_executions() const {
  std::size_t n = 0;
  for (const auto& e : executions_) n += e.size();
  return n;
}

std::size_t ExactLikelihood::num_correct() const {
  std::size_t n = 0;
  for (const auto& e : executions_)
    for (const auto& x : e) n += x.correct ? 1 : 0;
  return n;
}

// --------------------------------------------------------------- fixtures

std::string small_lexicon() {
  return R"(what := S/(S\N) : λf.f
how many := S/(S\N) : λf.count(f)
eats := (S\N)/N : λy.λx.eats(x, y)
eats := (S\N)/N : λy.λx.eats(y, x)
if := (S/N)/S : λx.λy.λf.cause(x, f(y))
die := S\N : λx.decrease(x)
die := S\N : λx.increase(x)
grow := S\N : λx.increase(x)
herbivore := N : λx.herbivore(x)
herbivore := N : λx.producer(x)
)";
}

namespace {

template <class T>
const T& pick(const std::vector<T>& v, std::mt19937_64& rng) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Random small web: texts with direct, noisy linkages.
std::unique_ptr<Environment> small_web(std::mt19937_64& rng, int organisms, std::vector<std::string>& names) {
  static const std::vector<std::vector<std::string>> pools = {
      {"grass", "algae", "fern", "clover"}, {"mouse", "rabbit", "deer", "snail"}, {"snake", "fox", "owl", "hawk"}};
  std::vector<int> level;
  names.clear();
  std::set<std::string> used;
  for (int i = 0; i < organisms; ++i) {
    const int l = i < 3 ? i : static_cast<int>(rng() % 3);
    std::string name;
    do {
      name = pick(pools[l], rng);
    } while (used.contains(name));
    used.insert(name);
    names.push_back(name);
    level.push_back(l);
  }
  GoldFoodWeb gold;
  for (const auto& n : names) gold.organisms.insert(n);
  for (int a = 0; a < organisms; ++a) {
    for (int b = 0; b < organisms; ++b) {
      if (a == b) continue;
      const bool natural = level[a] == level[b] + 1;
      if (uniform(rng, 0, 1) < (natural ? 0.8 : 0.1)) gold.eats.insert({names[a], names[b]});
    }
  }
  EnvironmentData d;
  for (int i = 0; i < organisms; ++i) {
    d.texts.push_back({"t" + std::to_string(i), names[i], {100.0 * i, 50.0 * level[i], 60, 20}, uniform(rng, 0.7, 1)});
  }
  int arrow = 0;
  for (int a = 0; a < organisms; ++a) {
    for (int b = 0; b < organisms; ++b) {
      if (a == b) continue;
      const bool real = gold.eats.contains({names[a], names[b]});
      if (!real && uniform(rng, 0, 1) > 0.3) continue;
      const std::string id = "a" + std::to_string(arrow++);
      const double score = real ? uniform(rng, 0.5, 1.0) : uniform(rng, 0.0, 0.5);
      d.arrows.push_back({id, uniform(rng, 0.5, 1.0), {}});
      // The eaten organism is the source.
      d.interobject_linkages.push_back({"t" + std::to_string(b), "t" + std::to_string(a), id, score});
    }
  }
  d.gold = std::move(gold);
  return std::make_unique<Environment>(std::move(d));
}

}  // namespace

SmallExample sample_small_example(std::mt19937_64& rng, int organisms) {
  for (;;) {
    SmallExample s;
    std::vector<std::string> names;
    s.env = small_web(rng, organisms, names);
    const std::string a = pick(names, rng);
    std::string b;
    do {
      b = pick(names, rng);
    } while (b == a);
    std::string q, form;
    switch (rng() % 5) {
      case 0: q = "what eats " + a + " ?"; form = "λx.eats(x, " + a + ")"; break;
      case 1: q = "how many eats " + a + " ?"; form = "count(λx.eats(x, " + a + "))"; break;
      case 2: q = "if " + a + " die " + b + " will ?"; form = "λf.cause(decrease(" + a + "), f(" + b + "))"; break;
      case 3: q = "if " + a + " grow " + b + " will ?"; form = "λf.cause(increase(" + a + "), f(" + b + "))"; break;
      default: q = "which is herbivore ?"; form = "λx.herbivore(x)"; break;
    }
    const auto prog = domain::compile(lf::parse(form));
    const auto gold = domain::run_decided(prog, *s.env, domain::world_from_gold(*s.env, *s.env->gold()));
    auto opts = gen::make_options(gold, names, rng);
    if (!opts) continue;
    s.record.id = "small";
    s.record.question = q;
    s.record.options = opts->options;
    s.record.answer = opts->answer;
    s.record.env = "inline";
    s.record.logical_form = lf::to_sexpr(prog.form);
    s.example = corpus::make_example(s.record, *s.env);
    return s;
  }
}

Weights random_weights(const std::vector<FeatureId>& features, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  Weights w;
  for (FeatureId f : features) w.set(f, g(rng));
  return w;
}

// ----------------------------------------------------------------- checks

CheckResult check_beam_vs_exhaustive(std::uint64_t seed, int programs) {
  Timer timer;
  CheckResult r{"beam/exhaustive equivalence"};
  std::mt19937_64 rng(seed);
  int done = 0, attempts = 0, chooses = 0;
  double worst = 0;
  std::string failure;
  while (done < programs && attempts < 50 * programs) {
    ++attempts;
    std::vector<std::string> names;
    auto env = small_web(rng, 3 + static_cast<int>(rng() % 2), names);
    const std::string a = pick(names, rng), b = pick(names, rng);
    static const std::vector<std::string> roles = {"herbivore", "carnivore", "omnivore", "producer",
                                                   "predator",  "prey",      "consumer"};
    const std::vector<std::string> forms = {"λx.eats(x, " + a + ")",
                                            "λx.eats(" + a + ", x)",
                                            "count(λx.eats(x, " + a + "))",
                                            "λx." + pick(roles, rng) + "(x)",
                                            "λf.cause(decrease(" + a + "), f(" + b + "))",
                                            "λx.and(predator(x), prey(x))",
                                            "eats(" + a + ", " + b + ")",
                                            a};
    const auto prog = domain::compile(lf::parse(pick(forms, rng)));
    model::InstanceFeatureCache cache(*env);
    model::RoleVocabulary no_roles;
    model::ExecutionFeaturizer phi(cache, prog, &no_roles);
    const auto program = prog.bind(*env);
    std::vector<exec::ExecutionResult> probe;
    try {
      probe = exec::exhaustive_execute(program, phi, Weights{}, 12);
    } catch (const BudgetExceeded&) {
      continue;
    }
    std::set<FeatureId> fs;
    for (const auto& x : probe) {
      for (const auto& [id, v] : x.features) fs.insert(id);
      chooses = std::max<int>(chooses, static_cast<int>(x.path.size()));
    }
    const Weights theta = random_weights({fs.begin(), fs.end()}, rng, 1.0);
    auto exact = exec::exhaustive_execute(program, phi, theta, 12);
    auto beam = exec::beam_execute(program, phi, theta, 4096);
    auto key = [](const std::vector<exec::ExecutionResult>& rs) {
      std::vector<std::pair<std::string, double>> k;
      for (const auto& x : rs) k.emplace_back(x.denotation.to_string(), x.log_score);
      std::sort(k.begin(), k.end());
      return k;
    };
    auto ke = key(exact), kb = key(beam);
    bool same = ke.size() == kb.size();
    for (std::size_t i = 0; same && i < ke.size(); ++i) {
      same = ke[i].first == kb[i].first && std::abs(ke[i].second - kb[i].second) <= 1e-9;
      worst = std::max(worst, std::abs(ke[i].second - kb[i].second));
    }
    if (!same && failure.empty()) failure = "mismatch on " + prog.canonical;
    ++done;
  }
  r.seconds = timer.seconds();
  r.passed = done == programs && failure.empty() && r.seconds < 10.0;
  r.detail = std::to_string(done) + " programs (max " + std::to_string(chooses) + " chooses), max |Δscore| " +
             fmt(worst) + ", " + fmt(r.seconds) + " s" + (failure.empty() ? "" : "; " + failure);
  return r;
}

CheckResult check_gradient(std::uint64_t seed, int examples) {
  Timer timer;
  CheckResult r{"gradient vs finite differences"};
  std::mt19937_64 rng(seed);
  const auto lexicon = ccg::Lexicon::parse(small_lexicon());
  train::InferenceConfig cfg;
  cfg.parser.beam_width = std::numeric_limits<std::size_t>::max();
  cfg.parser.lf_count = 0;
  cfg.exec_beam = 1 << 20;
  const double h = 1e-5;
  int done = 0, attempts = 0;
  std::size_t coords = 0;
  double worst = 0;
  std::string failure;
  while (done < examples && attempts < 100 * examples) {
    ++attempts;
    auto s = sample_small_example(rng, 3);
    if (s.example.tokens.size() > 6) continue;
    train::Model m;
    std::unique_ptr<ExactLikelihood> exact;
    try {
      exact = std::make_unique<ExactLikelihood>(s.example, lexicon, m.roles, cfg, 12);
    } catch (const BudgetExceeded&) {
      continue;
    }
    if (exact->num_correct() == 0) continue;
    m.parser = random_weights(exact->parser_features(), rng, 0.5);
    m.exec = random_weights(exact->exec_features(), rng, 0.5);
    train::Workspace ws(lexicon);
    const auto g = train::example_gradient(ws, s.example, m, cfg);
    if (!g.found) {
      failure = "no correct execution found for '" + s.record.question + "'";
      break;
    }
    const double ll = exact->log_likelihood(m.parser, m.exec);
    if (std::abs(ll - g.log_likelihood) > 1e-9) {
      failure = "log-likelihood mismatch on '" + s.record.question + "'";
      break;
    }
    auto probe = [&](bool parser_side, FeatureId f) {
      train::Model p = m, q = m;
      Weights& wp = parser_side ? p.parser : p.exec;
      Weights& wq = parser_side ? q.parser : q.exec;
      wp.set(f, wp.get(f) + h);
      wq.set(f, wq.get(f) - h);
      const double fd = (exact->log_likelihood(p.parser, p.exec) - exact->log_likelihood(q.parser, q.exec)) / (2 * h);
      const double an = parser_side ? g.parser.get(f) : g.exec.get(f);
      worst = std::max(worst, std::abs(fd - an));
      ++coords;
    };
    for (FeatureId f : exact->parser_features()) probe(true, f);
    for (FeatureId f : exact->exec_features()) probe(false, f);
    ++done;
  }
  r.seconds = timer.seconds();
  r.passed = failure.empty() && done == examples && worst <= 1e-4 && r.seconds < 60.0;
  r.detail = std::to_string(done) + " examples, " + std::to_string(coords) + " coordinates, max |Δ| " + fmt(worst) +
             ", " + fmt(r.seconds) + " s" + (failure.empty() ? "" : "; " + failure);
  return r;
}

CheckResult check_cycle_features(std::uint64_t seed, std::size_t exhaustive_up_to, int random_graphs) {
  Timer timer;
  CheckResult r{"cycle features vs shortest-path oracle"};
  std::size_t graphs = 0, mismatches = 0;
  auto compare = [&](std::size_t n, const std::vector<bool>& adj) {
    ++graphs;
    const auto a = model::cycle_features(n, adj);
    const auto b = cycle_features(n, adj);
    bool same = a[0] == b[0] && a[1] == b[1] && a[2] == b[2] && std::abs(a[3] - b[3]) <= 1e-12;
    if (!same) ++mismatches;
  };
  for (std::size_t n = 1; n <= exhaustive_up_to; ++n) {
    const std::size_t edges = n * (n - 1);
    std::vector<bool> adj(n * n, false);
    for (std::uint64_t mask = 0; mask < (1ull << edges); ++mask) {
      std::size_t bit = 0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (i != j) adj[i * n + j] = (mask >> bit++) & 1;
      compare(n, adj);
    }
  }
  std::mt19937_64 rng(seed);
  for (int t = 0; t < random_graphs; ++t) {
    const std::size_t n = 6 + static_cast<std::size_t>(rng() % 3);
    std::vector<bool> adj(n * n, false);
    const double density = uniform(rng, 0.1, 0.5);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) adj[i * n + j] = i != j && uniform(rng, 0, 1) < density;
    compare(n, adj);
  }
  // A single k-cycle scores exactly 1 on its own feature.
  bool single = true;
  for (std::size_t k = 2; k <= 7; ++k) {
    std::vector<bool> adj(k * k, false);
    for (std::size_t i = 0; i < k; ++i) adj[i * k + (i + 1) % k] = true;
    const auto c = model::cycle_features(k, adj);
    const std::size_t slot = std::min<std::size_t>(k, 5) - 2;
    single = single && (k <= 4 ? c[slot] == 1.0 : std::abs(c[slot] - 1.0) <= 1e-12);
    for (std::size_t s = 0; s < 4; ++s) single = single && (s == slot || c[s] == 0.0);
  }
  r.seconds = timer.seconds();
  r.passed = mismatches == 0 && single;
  r.detail = std::to_string(graphs) + " graphs, " + std::to_string(mismatches) + " mismatches, single cycles " +
             (single ? "score 1" : "WRONG") + ", " + fmt(r.seconds) + " s";
  return r;
}

CheckResult check_parser(std::uint64_t seed) {
  Timer timer;
  CheckResult r{"parser"};
  std::vector<std::string> problems;

  // The example parse. Skipping is penalized (weight -1 per skipped word);
  // with θ = 0 every partial parse ties with the full one.
  const auto fig = ccg::Lexicon::parse(R"(if := (S/N)/S : λx.λy.λf.cause(x, f(y))
mice := N : mice
die := S\N : λx.decrease(x)
snakes := N : snakes
)");
  const auto tokens = text::tokenize("if mice die snakes will ?");
  Weights skip;
  for (const auto& t : tokens) skip.set("skip:" + t, -1.0);
  auto parses = ccg::parse(tokens, fig, nullptr, skip, {});
  const std::string want = lf::canonical(lf::parse("λf.cause(decrease(mice), f(snakes))"));
  if (parses.empty() || parses[0].canonical != want) {
    problems.push_back("top form is not the cause filter");
  } else {
    const auto f = ccg::parse_features(parses[0].best_tree, tokens);
    std::vector<std::string> skipped;
    for (const auto& t : tokens) {
      if (f.get("skip:" + t) != 0.0) skipped.push_back(t);
    }
    if (skipped != std::vector<std::string>{"will", "?"}) problems.push_back("wrong skipped words");
  }

  // Unbounded chart vs enumeration.
  ccg::ParserConfig all;
  all.beam_width = std::numeric_limits<std::size_t>::max();
  all.lf_count = 0;
  std::mt19937_64 rng(seed);
  int fixtures = 0;
  double worst = 0;
  auto compare = [&](const std::vector<std::string>& toks, const ccg::Lexicon& lex, const Environment* env) {
    DerivationEnumerator e(toks, lex, env);
    std::set<FeatureId> fs;
    for (const auto& t : e.roots())
      for (const auto& [id, v] : ccg::parse_features(t, toks)) fs.insert(id);
    const Weights theta = random_weights({fs.begin(), fs.end()}, rng, 0.7);
    auto chart = ccg::parse(toks, lex, env, theta, all);
    auto exact = marginal_log_weights(toks, lex, env, theta);
    ++fixtures;
    if (chart.size() != exact.size()) {
      problems.push_back("form count differs on '" + text::join(toks, " ") + "'");
      return;
    }
    for (const auto& p : chart) {
      auto it = exact.find(p.canonical);
      if (it == exact.end()) {
        problems.push_back("unexpected form " + p.canonical);
        return;
      }
      worst = std::max(worst, std::abs(it->second - p.log_weight));
    }
  };
  compare(tokens, fig, nullptr);
  const auto spurious = ccg::Lexicon::parse(R"(f := S/S : λp.and(p, organism(wolf))
g := S/S : λq.and(organism(deer), q)
h := S : organism(grass)
)");
  compare({"f", "g", "h"}, spurious, nullptr);
  compare({"f", "g", "f", "g", "h"}, spurious, nullptr);
  compare({"g", "x", "f", "g", "h", "y"}, spurious, nullptr);
  const auto small = ccg::Lexicon::parse(small_lexicon());
  for (int i = 0; i < 30; ++i) {
    auto s = sample_small_example(rng, 3 + i % 2);
    compare(s.example.tokens, small, s.env.get());
  }
  if (worst > 1e-9) problems.push_back("log weight differs by " + fmt(worst));
  r.seconds = timer.seconds();
  r.passed = problems.empty();
  r.detail = "example parse " + std::string(parses.empty() ? "none" : lf::to_lambda_notation(parses[0].logical_form)) +
             "; " + std::to_string(fixtures) + " chart/enumeration fixtures, max |Δ| " + fmt(worst);
  for (const auto& p : problems) r.detail += "; " + p;
  return r;
}

CheckResult check_oracle_uniqueness(std::uint64_t seed, int fixtures) {
  Timer timer;
  CheckResult r{"oracle uniqueness"};
  std::mt19937_64 rng(seed);
  gen::SyntheticSpec spec;
  int done = 0, violations = 0, wrong_survivors = 0, missing = 0;
  while (done < fixtures) {
    const auto j = gen::sample_environment(spec, rng);
    const Environment env = Environment::from_json(j);
    const exec::World gold = domain::world_from_gold(env, *env.gold());
    for (const auto& q : gen::sample_questions(spec, env, "inline", "f", rng)) {
      if (done >= fixtures) break;
      ++done;
      const auto prog = domain::compile(lf::parse(*q.logical_form));
      const auto program = prog.bind(env);
      exec::NullFeaturizer phi;
      answer::SupervisionOracle right(env, q.options, q.answer);
      const auto kept = exec::exhaustive_execute(program, phi, Weights{}, 1 << 12, &right);
      if (kept.size() > 1) ++violations;
      const auto pick = answer::select(domain::run_decided(prog, env, gold), q.options);
      if (pick && *pick == q.answer && kept.size() != 1) ++missing;
      answer::SupervisionOracle wrong(env, q.options, (q.answer + 1) % q.options.size());
      if (!exec::exhaustive_execute(program, phi, Weights{}, 1 << 12, &wrong).empty()) ++wrong_survivors;
    }
  }
  r.seconds = timer.seconds();
  r.passed = violations == 0 && missing == 0 && wrong_survivors == 0;
  r.detail = std::to_string(done) + " fixtures, " + std::to_string(violations) + " with >1 survivor, " +
             std::to_string(missing) + " gold answers unreached, " + std::to_string(wrong_survivors) +
             " wrong answers reached";
  return r;
}

std::vector<CheckResult> run_checks(std::uint64_t seed) {
  return {check_beam_vs_exhaustive(seed), check_gradient(seed + 1), check_cycle_features(seed + 2),
          check_parser(seed + 3), check_oracle_uniqueness(seed + 4)};
}

}  // namespace webqa::oracle
