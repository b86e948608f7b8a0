#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "webqa/features.hpp"

namespace webqa::exec {

enum class Direction : std::uint8_t { Decrease, Increase, Unchanged };

std::string_view direction_name(Direction d);
/// increase <-> decrease; unchanged is its own opposite.
Direction opposite(Direction d);
constexpr Direction kDirections[] = {Direction::Decrease, Direction::Increase, Direction::Unchanged};

enum class Truth : std::int8_t { Undef = -1, False = 0, True = 1 };

/// Memoized truth values of organism(x) and eats(x, y) over label indices.
/// eats(x, y) means x eats y. A decided instance is never reassigned.
class World {
 public:
  struct Instance {
    enum class Kind : std::uint8_t { Organism, Eats } kind;
    int x = -1;
    int y = -1;
    bool value = false;
  };

  World() = default;
  explicit World(std::size_t num_labels);

  std::size_t num_labels() const { return n_; }
  Truth organism(int x) const { return static_cast<Truth>(org_[x]); }
  Truth eats(int x, int y) const { return static_cast<Truth>(eats_[static_cast<std::size_t>(x) * n_ + y]); }
  void set_organism(int x, bool value);
  void set_eats(int x, int y, bool value);

  /// The instance decided by the most recent set_*() since clear_last().
  const std::optional<Instance>& last_decided() const { return last_; }
  void clear_last() { last_.reset(); }
  int num_decided() const { return decided_; }

  bool operator==(const World& o) const { return n_ == o.n_ && org_ == o.org_ && eats_ == o.eats_; }

 private:
  std::size_t n_ = 0;
  std::vector<std::int8_t> org_;
  std::vector<std::int8_t> eats_;
  std::optional<Instance> last_;
  int decided_ = 0;
};

/// The value an execution returns.
struct Denotation {
  enum class Kind : std::uint8_t { EntitySet, EventSet, DirectionSet, Integer, Truth, Failure };

  Kind kind = Kind::Failure;
  std::vector<std::string> entities;
  std::vector<std::pair<Direction, std::string>> events;
  std::vector<Direction> directions;
  /// Entity the directions apply to, when known.
  std::string subject;
  std::int64_t integer = 0;
  bool truth = false;

  static Denotation entity_set(std::vector<std::string> e);
  static Denotation event_set(std::vector<std::pair<Direction, std::string>> e);
  static Denotation direction_set(std::vector<Direction> d, std::string subject = {});
  static Denotation of_integer(std::int64_t v);
  static Denotation of_truth(bool v);
  static Denotation failure() { return {}; }

  /// Number of elements of a set-valued denotation; 1 for scalars.
  std::size_t size() const;
  bool is_set() const { return kind == Kind::EntitySet || kind == Kind::EventSet || kind == Kind::DirectionSet; }
  /// Canonical printed form, also used as a key.
  std::string to_string() const;
  bool operator==(const Denotation& o) const { return to_string() == o.to_string(); }
  bool operator<(const Denotation& o) const { return to_string() < o.to_string(); }
};

std::string_view kind_name(Denotation::Kind k);

struct Closure;
struct PartialApplication;

struct EntityRef {
  int label = -1;
  bool operator==(const EntityRef&) const = default;
};

struct Event {
  Direction direction;
  int label = -1;
  bool operator==(const Event&) const = default;
};

/// Runtime value flowing through a program.
struct Value {
  std::variant<std::monostate, bool, std::int64_t, EntityRef, Event, Direction,
               std::shared_ptr<const Closure>, std::shared_ptr<const PartialApplication>>
      v;

  Value() = default;
  Value(bool b) : v(b) {}
  Value(std::int64_t i) : v(i) {}
  Value(int i) : v(static_cast<std::int64_t>(i)) {}
  Value(EntityRef e) : v(e) {}
  Value(Event e) : v(e) {}
  Value(Direction d) : v(d) {}
  Value(std::shared_ptr<const Closure> c) : v(std::move(c)) {}
  Value(std::shared_ptr<const PartialApplication> p) : v(std::move(p)) {}

  bool as_bool() const { return std::get<bool>(v); }
  std::int64_t as_int() const { return std::get<std::int64_t>(v); }
  std::string to_string() const;
};

/// Immutable callable with shared ownership. Continuations are resumed
/// once per alternative, so copies must be cheap.
template <class Sig>
class SharedFunction;

template <class R, class... A>
class SharedFunction<R(A...)> {
 public:
  SharedFunction() = default;
  template <class F, class = std::enable_if_t<!std::is_same_v<std::decay_t<F>, SharedFunction> &&
                                              std::is_invocable_r_v<R, const F&, A...>>>
  SharedFunction(F f) : impl_(std::make_shared<const Model<F>>(std::move(f))) {}

  R operator()(A... a) const { return impl_->call(std::forward<A>(a)...); }
  explicit operator bool() const { return impl_ != nullptr; }

 private:
  struct Base {
    virtual ~Base() = default;
    virtual R call(A... a) const = 0;
  };
  template <class F>
  struct Model final : Base {
    explicit Model(F g) : f(std::move(g)) {}
    R call(A... a) const override { return f(std::forward<A>(a)...); }
    F f;
  };
  std::shared_ptr<const Base> impl_;
};

class Step;
/// Continuation: receives a value and the execution's world.
using Cont = SharedFunction<Step(const Value&, World&)>;

/// What a program does next: finish, fail, suspend at a choose, or bounce
/// back to the driver to keep the native stack shallow.
class Step {
 public:
  enum class Kind : std::uint8_t { Done, Fail, Choice, Continue };

  static Step done(Denotation d);
  static Step fail();
  /// choose(alternatives...). `k` resumes the program with the chosen value.
  static Step choice(std::string site, std::vector<Value> alternatives, Cont k);
  /// Same, sharing site and alternatives across steps.
  static Step choice(std::shared_ptr<const std::string> site, std::shared_ptr<const std::vector<Value>> alternatives,
                     Cont k);
  static Step resume(Cont k, Value v);

  Kind kind() const { return kind_; }
  const Denotation& denotation() const;
  const std::string& site() const;
  const std::vector<Value>& alternatives() const;
  const Cont& continuation() const { return k_; }
  const Value& value() const { return value_; }

 private:
  friend Step drive(Step s, World& w);

  Kind kind_ = Kind::Fail;
  std::shared_ptr<const Denotation> denotation_;
  std::shared_ptr<const std::string> site_;
  std::shared_ptr<const std::vector<Value>> alternatives_;
  Cont k_;
  Value value_;
};

/// Runs Continue bounces until the program fails, finishes or chooses.
Step drive(Step s, World& w);

/// An executable program in continuation-passing style.
struct Program {
  std::size_t num_labels = 0;
  std::function<Step(World&)> start;
};

/// One call to choose along an execution.
struct ChoiceRecord {
  std::string site;
  std::size_t num_alternatives = 0;
  std::size_t chosen = 0;
  std::string chosen_value;
  /// Features of the transition this choice led to.
  FeatureVector features;
};

namespace detail {
struct TraceNode;
}

struct ExecutionResult {
  Denotation denotation;
  World world;
  double log_score = 0.0;
  /// Sum of all transition features.
  FeatureVector features;
  /// Index of the alternative taken at each choose.
  std::vector<std::uint32_t> path;
  std::shared_ptr<const detail::TraceNode> last;

  /// One record per choose, built on demand.
  std::vector<ChoiceRecord> trace() const;
};

/// Featurizes the move between two successive program states.
struct Transition {
  const World& before;
  const World& after;
  const Value* chosen;           // null for the initial run to the first choose
  const Denotation* terminal;    // set when `after` is a terminated state
};

class TransitionFeaturizer {
 public:
  virtual ~TransitionFeaturizer() = default;
  virtual FeatureVector features(const Transition& t) const = 0;
};

/// Emits nothing; every execution scores 0.
class NullFeaturizer : public TransitionFeaturizer {
 public:
  FeatureVector features(const Transition&) const override { return {}; }
};

/// Marks executions correct. Must be prefix-closed: if a complete execution
/// is accepted, so is every partial state along it.
class ExecutionOracle {
 public:
  virtual ~ExecutionOracle() = default;
  virtual bool accept_partial(const World& w) const = 0;
  virtual bool accept_complete(const World& w, const Denotation& d) const = 0;
};

/// Breadth-synchronized beam search over the execution tree. Each iteration
/// advances every beam state past its next choose and keeps the
/// `beam_width` best successors by log-score (ties: lexicographically
/// smaller choice path). Kept successors that terminated move to the result
/// pool and free their slot for later depths; failures are dropped. With an
/// oracle, rejected states are dropped at every step. Results are ordered by
/// descending score.
std::vector<ExecutionResult> beam_execute(const Program& program, const TransitionFeaturizer& featurizer,
                                          const Weights& theta, std::size_t beam_width,
                                          const ExecutionOracle* oracle = nullptr);

/// Depth-first enumeration of the whole execution tree. Throws
/// BudgetExceeded if some execution makes more than `choose_budget` choices.
std::vector<ExecutionResult> exhaustive_execute(const Program& program, const TransitionFeaturizer& featurizer,
                                                const Weights& theta, std::size_t choose_budget = 16,
                                                const ExecutionOracle* oracle = nullptr);

/// One line per choose: site, alternatives, chosen index, transition features.
void dump_trace(const ExecutionResult& r, std::ostream& os);

}  // namespace webqa::exec
