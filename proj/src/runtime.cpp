#include "webqa/runtime.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

#include "webqa/errors.hpp"

namespace webqa::exec {

std::string_view direction_name(Direction d) {
  switch (d) {
    case Direction::Decrease: return "decrease";
    case Direction::Increase: return "increase";
    case Direction::Unchanged: return "unchanged";
  }
  return "?";
}

Direction opposite(Direction d) {
  switch (d) {
    case Direction::Decrease: return Direction::Increase;
    case Direction::Increase: return Direction::Decrease;
    default: return Direction::Unchanged;
  }
}

World::World(std::size_t num_labels)
    : n_(num_labels), org_(num_labels, -1), eats_(num_labels * num_labels, -1) {}

void World::set_organism(int x, bool value) {
  auto& slot = org_.at(static_cast<std::size_t>(x));
  if (slot != -1) throw Error("organism instance decided twice");
  slot = value ? 1 : 0;
  last_ = Instance{Instance::Kind::Organism, x, -1, value};
  ++decided_;
}

void World::set_eats(int x, int y, bool value) {
  auto& slot = eats_.at(static_cast<std::size_t>(x) * n_ + static_cast<std::size_t>(y));
  if (slot != -1) throw Error("eats instance decided twice");
  slot = value ? 1 : 0;
  last_ = Instance{Instance::Kind::Eats, x, y, value};
  ++decided_;
}

// ------------------------------------------------------------ denotations

Denotation Denotation::entity_set(std::vector<std::string> e) {
  Denotation d;
  d.kind = Kind::EntitySet;
  d.entities = std::move(e);
  return d;
}

Denotation Denotation::event_set(std::vector<std::pair<Direction, std::string>> e) {
  Denotation d;
  d.kind = Kind::EventSet;
  d.events = std::move(e);
  return d;
}

Denotation Denotation::direction_set(std::vector<Direction> dirs, std::string subject) {
  Denotation d;
  d.kind = Kind::DirectionSet;
  d.directions = std::move(dirs);
  d.subject = std::move(subject);
  return d;
}

Denotation Denotation::of_integer(std::int64_t v) {
  Denotation d;
  d.kind = Kind::Integer;
  d.integer = v;
  return d;
}

Denotation Denotation::of_truth(bool v) {
  Denotation d;
  d.kind = Kind::Truth;
  d.truth = v;
  return d;
}

std::size_t Denotation::size() const {
  switch (kind) {
    case Kind::EntitySet: return entities.size();
    case Kind::EventSet: return events.size();
    case Kind::DirectionSet: return directions.size();
    case Kind::Failure: return 0;
    default: return 1;
  }
}

std::string_view kind_name(Denotation::Kind k) {
  switch (k) {
    case Denotation::Kind::EntitySet: return "entity_set";
    case Denotation::Kind::EventSet: return "event_set";
    case Denotation::Kind::DirectionSet: return "direction_set";
    case Denotation::Kind::Integer: return "integer";
    case Denotation::Kind::Truth: return "truth";
    case Denotation::Kind::Failure: return "failure";
  }
  return "?";
}

std::string Denotation::to_string() const {
  std::string out;
  auto list = [&](auto&& items, auto&& fmt) {
    out += "{";
    bool first = true;
    for (const auto& it : items) {
      if (!first) out += ", ";
      first = false;
      out += fmt(it);
    }
    out += "}";
  };
  switch (kind) {
    case Kind::EntitySet:
      list(entities, [](const std::string& s) { return s; });
      break;
    case Kind::EventSet:
      list(events, [](const auto& e) { return std::string(direction_name(e.first)) + "(" + e.second + ")"; });
      break;
    case Kind::DirectionSet:
      list(directions, [](Direction d) { return std::string(direction_name(d)); });
      if (!subject.empty()) out += " of " + subject;
      break;
    case Kind::Integer: out = std::to_string(integer); break;
    case Kind::Truth: out = truth ? "true" : "false"; break;
    case Kind::Failure: out = "failure"; break;
  }
  return out;
}

std::string Value::to_string() const {
  struct Printer {
    std::string operator()(std::monostate) const { return "()"; }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(EntityRef e) const { return "entity#" + std::to_string(e.label); }
    std::string operator()(Event e) const {
      return std::string(direction_name(e.direction)) + "(#" + std::to_string(e.label) + ")";
    }
    std::string operator()(Direction d) const { return std::string(direction_name(d)); }
    std::string operator()(const std::shared_ptr<const Closure>&) const { return "<closure>"; }
    std::string operator()(const std::shared_ptr<const PartialApplication>&) const { return "<function>"; }
  };
  return std::visit(Printer{}, v);
}

// ------------------------------------------------------------------ steps

Step Step::done(Denotation d) {
  Step s;
  s.kind_ = Kind::Done;
  s.denotation_ = std::make_shared<const Denotation>(std::move(d));
  return s;
}

Step Step::fail() { return Step{}; }

Step Step::choice(std::string site, std::vector<Value> alternatives, Cont k) {
  return choice(std::make_shared<const std::string>(std::move(site)),
                std::make_shared<const std::vector<Value>>(std::move(alternatives)), std::move(k));
}

Step Step::choice(std::shared_ptr<const std::string> site, std::shared_ptr<const std::vector<Value>> alternatives,
                  Cont k) {
  Step s;
  s.kind_ = alternatives->empty() ? Kind::Fail : Kind::Choice;
  s.site_ = std::move(site);
  s.alternatives_ = std::move(alternatives);
  s.k_ = std::move(k);
  return s;
}

Step Step::resume(Cont k, Value v) {
  Step s;
  s.kind_ = Kind::Continue;
  s.k_ = std::move(k);
  s.value_ = std::move(v);
  return s;
}

const Denotation& Step::denotation() const {
  static const Denotation none;
  return denotation_ ? *denotation_ : none;
}

const std::string& Step::site() const {
  static const std::string none;
  return site_ ? *site_ : none;
}

const std::vector<Value>& Step::alternatives() const {
  static const std::vector<Value> none;
  return alternatives_ ? *alternatives_ : none;
}

Step drive(Step s, World& w) {
  while (s.kind_ == Step::Kind::Continue) {
    Cont k = std::move(s.k_);
    Value v = std::move(s.value_);
    s = k(v, w);
  }
  return s;
}

// ------------------------------------------------------------- execution

namespace detail {

struct TraceNode {
  std::shared_ptr<const TraceNode> parent;
  ChoiceRecord record;  // chosen_value is filled in by trace()
  Value chosen;
  bool initial = false;
};

}  // namespace detail

std::vector<ChoiceRecord> ExecutionResult::trace() const {
  std::vector<ChoiceRecord> out;
  for (const detail::TraceNode* n = last.get(); n; n = n->parent.get()) {
    if (n->initial) continue;
    out.push_back(n->record);
    out.back().chosen_value = n->chosen.to_string();
  }
  std::reverse(out.begin(), out.end());
  return out;
}

namespace {

using detail::TraceNode;
using TracePtr = std::shared_ptr<const TraceNode>;

struct State {
  Step step;
  World world;
  double score = 0.0;
  TracePtr trace;
  std::vector<std::uint32_t> path;
};

ExecutionResult finalize(Denotation den, World world, double score, const TracePtr& trace,
                         std::vector<std::uint32_t> path) {
  ExecutionResult r;
  r.denotation = std::move(den);
  r.world = std::move(world);
  r.log_score = score;
  std::vector<const TraceNode*> nodes;
  for (const TraceNode* n = trace.get(); n; n = n->parent.get()) nodes.push_back(n);
  for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) r.features.add((*it)->record.features);
  r.path = std::move(path);
  r.last = trace;
  return r;
}

/// Outcome of advancing a program by one transition.
struct Advance {
  bool alive = false;
  Step step;
  World world;
  double score = 0.0;
  TracePtr trace;
};

Advance advance(Step next, const World& before, World after, const Value* chosen, const std::string& site,
                std::size_t num_alts, std::size_t index, double base_score, TracePtr parent,
                const TransitionFeaturizer& featurizer, const Weights& theta, const ExecutionOracle* oracle) {
  Advance a;
  if (next.kind() == Step::Kind::Fail) return a;
  if (oracle && !oracle->accept_partial(after)) return a;
  const bool done = next.kind() == Step::Kind::Done;
  if (done && oracle && !oracle->accept_complete(after, next.denotation())) return a;

  auto node = std::make_shared<TraceNode>();
  node->parent = std::move(parent);
  node->initial = chosen == nullptr;
  node->record.features = featurizer.features(Transition{before, after, chosen, done ? &next.denotation() : nullptr});
  node->record.site = site;
  node->record.num_alternatives = num_alts;
  node->record.chosen = index;
  if (chosen) node->chosen = *chosen;

  a.alive = true;
  a.score = base_score + theta.dot(node->record.features);
  a.trace = std::move(node);
  a.step = std::move(next);
  a.world = std::move(after);
  return a;
}

Advance start(const Program& program, const TransitionFeaturizer& featurizer, const Weights& theta,
              const ExecutionOracle* oracle) {
  World w(program.num_labels);
  World before = w;
  Step s = drive(program.start(w), w);
  return advance(std::move(s), std::move(before), std::move(w), nullptr, {}, 0, 0, 0.0, nullptr, featurizer, theta,
                 oracle);
}

Advance take(const Step& step, const World& world, double score, const TracePtr& trace, std::size_t i,
             const TransitionFeaturizer& featurizer, const Weights& theta, const ExecutionOracle* oracle) {
  const Value& alt = step.alternatives()[i];
  World w = world;
  w.clear_last();
  Step next = drive(step.continuation()(alt, w), w);
  return advance(std::move(next), world, std::move(w), &alt, step.site(), step.alternatives().size(), i, score, trace,
                 featurizer, theta, oracle);
}

bool path_less(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

void sort_results(std::vector<ExecutionResult>& rs) {
  std::stable_sort(rs.begin(), rs.end(), [](const auto& a, const auto& b) {
    if (a.log_score != b.log_score) return a.log_score > b.log_score;
    return path_less(a.path, b.path);
  });
}

}  // namespace

std::vector<ExecutionResult> beam_execute(const Program& program, const TransitionFeaturizer& featurizer,
                                          const Weights& theta, std::size_t beam_width,
                                          const ExecutionOracle* oracle) {
  std::vector<ExecutionResult> pool;
  std::vector<State> beam;

  Advance init = start(program, featurizer, theta, oracle);
  if (init.alive) {
    if (init.step.kind() == Step::Kind::Done) {
      pool.push_back(finalize(init.step.denotation(), std::move(init.world), init.score, init.trace, {}));
    } else if (beam_width > 0) {
      beam.push_back(State{std::move(init.step), std::move(init.world), init.score, std::move(init.trace), {}});
    }
  }

  while (!beam.empty()) {
    // Successors at the next depth, terminated or not, compete for the beam.
    std::vector<State> next;
    for (const State& st : beam) {
      for (std::size_t i = 0; i < st.step.alternatives().size(); ++i) {
        Advance a = take(st.step, st.world, st.score, st.trace, i, featurizer, theta, oracle);
        if (!a.alive) continue;
        std::vector<std::uint32_t> path = st.path;
        path.push_back(static_cast<std::uint32_t>(i));
        next.push_back(State{std::move(a.step), std::move(a.world), a.score, std::move(a.trace), std::move(path)});
      }
    }
    auto better = [](const State& a, const State& b) {
      if (a.score != b.score) return a.score > b.score;
      return path_less(a.path, b.path);
    };
    if (next.size() > beam_width) {
      std::partial_sort(next.begin(), next.begin() + static_cast<std::ptrdiff_t>(beam_width), next.end(), better);
      next.resize(beam_width);
    }
    beam.clear();
    for (State& st : next) {
      if (st.step.kind() == Step::Kind::Done) {
        pool.push_back(finalize(st.step.denotation(), std::move(st.world), st.score, st.trace, std::move(st.path)));
      } else {
        beam.push_back(std::move(st));
      }
    }
  }

  sort_results(pool);
  return pool;
}

namespace {

void dfs(const Step& step, const World& world, double score, const TracePtr& trace, std::vector<std::uint32_t>& path,
         std::size_t budget, const TransitionFeaturizer& featurizer, const Weights& theta,
         const ExecutionOracle* oracle, std::vector<ExecutionResult>& out) {
  if (path.size() >= budget) {
    throw BudgetExceeded("execution needs more than " + std::to_string(budget) + " choices");
  }
  for (std::size_t i = 0; i < step.alternatives().size(); ++i) {
    Advance a = take(step, world, score, trace, i, featurizer, theta, oracle);
    if (!a.alive) continue;
    path.push_back(static_cast<std::uint32_t>(i));
    if (a.step.kind() == Step::Kind::Done) {
      out.push_back(finalize(a.step.denotation(), std::move(a.world), a.score, a.trace, path));
    } else {
      dfs(a.step, a.world, a.score, a.trace, path, budget, featurizer, theta, oracle, out);
    }
    path.pop_back();
  }
}

}  // namespace

std::vector<ExecutionResult> exhaustive_execute(const Program& program, const TransitionFeaturizer& featurizer,
                                                const Weights& theta, std::size_t choose_budget,
                                                const ExecutionOracle* oracle) {
  std::vector<ExecutionResult> pool;
  Advance init = start(program, featurizer, theta, oracle);
  if (init.alive) {
    if (init.step.kind() == Step::Kind::Done) {
      pool.push_back(finalize(init.step.denotation(), std::move(init.world), init.score, init.trace, {}));
    } else {
      std::vector<std::uint32_t> path;
      dfs(init.step, init.world, init.score, init.trace, path, choose_budget, featurizer, theta, oracle, pool);
    }
  }
  sort_results(pool);
  return pool;
}

void dump_trace(const ExecutionResult& r, std::ostream& os) {
  for (const auto& c : r.trace()) {
    os << c.site << "\t" << c.num_alternatives << "\t" << c.chosen << "=" << c.chosen_value << "\t"
       << c.features.to_string() << "\n";
  }
  os << "=> " << r.denotation.to_string() << "\tscore=" << r.log_score << "\n";
}

}  // namespace webqa::exec
