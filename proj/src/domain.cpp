#include "webqa/domain.hpp"

#include <memory>

#include "webqa/errors.hpp"

namespace webqa::exec {

struct ScopeNode {
  std::string name;
  Value value;
  std::shared_ptr<const ScopeNode> next;
};
using Scope = std::shared_ptr<const ScopeNode>;

struct Closure {
  lf::ExprPtr lambda;
  Scope scope;
};

struct PartialApplication {
  lf::Primitive prim;
  std::vector<Value> args;
};

}  // namespace webqa::exec

namespace webqa::domain {

using exec::Cont;
using exec::Denotation;
using exec::Direction;
using exec::EntityRef;
using exec::Step;
using exec::Truth;
using exec::Value;
using exec::World;
using lf::Expr;
using lf::ExprPtr;
using lf::Primitive;

namespace {

using Indices = std::shared_ptr<const std::vector<int>>;
using ListCont = exec::SharedFunction<Step(const Indices&, World&)>;
using Thunk = exec::SharedFunction<Step(Cont, World&)>;
using Pred = exec::SharedFunction<Step(int, Cont, World&)>;

Step bounce(exec::SharedFunction<Step(World&)> f) {
  return Step::resume([f = std::move(f)](const Value&, World& w) { return f(w); }, Value{});
}

int entity_of(const Value& v) {
  if (const auto* e = std::get_if<EntityRef>(&v.v)) return e->label;
  throw Error("expected an entity, got " + v.to_string());
}

/// CPS interpreter for logical forms over one environment's labels.
class Interpreter {
 public:
  Interpreter(const std::vector<std::string>& labels, exec::SharedFunction<int(std::string_view)> lookup)
      : labels_(labels), lookup_(std::move(lookup)), n_(static_cast<int>(labels.size())) {
    for (const auto& a : labels_) {
      org_sites_.push_back(std::make_shared<const std::string>("organism(" + a + ")"));
      for (const auto& b : labels_) eats_sites_.push_back(std::make_shared<const std::string>("eats(" + a + "," + b + ")"));
    }
  }

  int num_labels() const { return n_; }
  const std::string& label(int i) const { return labels_[i]; }

  Step organism(int x, Cont k, World& w) const {
    Truth t = w.organism(x);
    if (t != Truth::Undef) return Step::resume(std::move(k), Value(t == Truth::True));
    return Step::choice(org_sites_[x], truth_values(),
                        [k = std::move(k), x](const Value& v, World& w) {
                          w.set_organism(x, v.as_bool());
                          return k(v, w);
                        });
  }

  Step eats(int x, int y, Cont k, World& w) const {
    Truth t = w.eats(x, y);
    if (t != Truth::Undef) return Step::resume(std::move(k), Value(t == Truth::True));
    return Step::choice(eats_sites_[static_cast<std::size_t>(x) * n_ + y], truth_values(),
                        [k = std::move(k), x, y](const Value& v, World& w) {
                          w.set_eats(x, y, v.as_bool());
                          return k(v, w);
                        });
  }

  /// Entity constant: the label must exist and be an organism.
  Step get_organism(const std::string& name, Cont k, World& w) const {
    int x = lookup_(name);
    if (x < 0) return Step::fail();
    return organism(x, [k = std::move(k), x](const Value& v, World&) {
      if (!v.as_bool()) return Step::fail();
      return Step::resume(k, Value(EntityRef{x}));
    }, w);
  }

  Step eval(const ExprPtr& e, const exec::Scope& s, Cont k, World& w) const {
    switch (e->kind) {
      case Expr::Kind::Var:
        for (const exec::ScopeNode* n = s.get(); n; n = n->next.get()) {
          if (n->name == e->name) return Step::resume(std::move(k), n->value);
        }
        throw Error("unbound variable " + e->name);
      case Expr::Kind::Lambda:
        return Step::resume(std::move(k), Value(std::make_shared<const exec::Closure>(exec::Closure{e, s})));
      case Expr::Kind::Entity:
        return get_organism(e->name, std::move(k), w);
      case Expr::Kind::Int:
        return Step::resume(std::move(k), Value(e->value));
      case Expr::Kind::Prim:
        if (lf::is_direction(e->prim)) return Step::resume(std::move(k), Value(to_direction(e->prim)));
        return Step::resume(std::move(k),
                            Value(std::make_shared<const exec::PartialApplication>(
                                exec::PartialApplication{e->prim, {}})));
      case Expr::Kind::Apply:
        return eval(e->fn, s, [this, e, s, k = std::move(k)](const Value& f, World& w) {
          return eval(e->arg, s, [this, f, k](const Value& a, World& w) { return apply(f, a, k, w); }, w);
        }, w);
    }
    throw Error("bad expression");
  }

  Step apply(const Value& f, const Value& a, Cont k, World& w) const {
    if (const auto* c = std::get_if<std::shared_ptr<const exec::Closure>>(&f.v)) {
      const auto& lam = (*c)->lambda;
      auto scope = std::make_shared<const exec::ScopeNode>(exec::ScopeNode{lam->name, a, (*c)->scope});
      return eval(lam->fn, scope, std::move(k), w);
    }
    if (const auto* d = std::get_if<Direction>(&f.v)) {
      return Step::resume(std::move(k), Value(exec::Event{*d, entity_of(a)}));
    }
    if (const auto* p = std::get_if<std::shared_ptr<const exec::PartialApplication>>(&f.v)) {
      std::vector<Value> args = (*p)->args;
      args.push_back(a);
      if (static_cast<int>(args.size()) == lf::primitive_arity((*p)->prim)) {
        return call((*p)->prim, args, std::move(k), w);
      }
      return Step::resume(std::move(k), Value(std::make_shared<const exec::PartialApplication>(
                                            exec::PartialApplication{(*p)->prim, std::move(args)})));
    }
    throw Error("applying a non-function value " + f.to_string());
  }

  /// Organisms x, in label order, for which fn(x) holds.
  Step filter_entities(Value fn, int i, Indices acc, ListCont done, World& w) const {
    if (i >= n_) return done(acc, w);
    return organism(i, [this, fn, i, acc, done](const Value& is_org, World& w) {
      auto next = [this, fn, i, done](Indices a) {
        return bounce([this, fn, i, done, a](World& w) { return filter_entities(fn, i + 1, a, done, w); });
      };
      if (!is_org.as_bool()) return next(acc);
      return apply(fn, Value(EntityRef{i}), [acc, i, next](const Value& keep, World&) {
        if (!keep.as_bool()) return next(acc);
        auto grown = std::make_shared<std::vector<int>>(*acc);
        grown->push_back(i);
        return next(std::move(grown));
      }, w);
    }, w);
  }

  Step filter_directions(Value fn, std::size_t i, std::vector<Direction> acc,
                         exec::SharedFunction<Step(const std::vector<Direction>&)> done, World& w) const {
    if (i >= std::size(exec::kDirections)) return done(acc);
    Direction d = exec::kDirections[i];
    return apply(fn, Value(d), [this, fn, i, acc, done, d](const Value& keep, World&) {
      auto grown = acc;
      if (keep.as_bool()) grown.push_back(d);
      return bounce([this, fn, i, grown, done](World& w) { return filter_directions(fn, i + 1, grown, done, w); });
    }, w);
  }

  // ---------------------------------------------------------------- roles

  Step both(Thunk a, Thunk b, Cont k, World& w) const {
    return a([b = std::move(b), k](const Value& v, World& w) {
      if (!v.as_bool()) return Step::resume(k, Value(false));
      return b(k, w);
    }, w);
  }

  /// Does pred(y) hold for some label y != x? Short-circuits.
  Step exists(int x, int y, Pred pred, Cont k, World& w) const {
    while (y == x) ++y;
    if (y >= n_) return Step::resume(std::move(k), Value(false));
    return pred(y, [this, x, y, pred, k](const Value& v, World&) {
      if (v.as_bool()) return Step::resume(k, Value(true));
      return bounce([this, x, y, pred, k](World& w) { return exists(x, y + 1, pred, k, w); });
    }, w);
  }

  Step negate(Thunk a, Cont k, World& w) const {
    return a([k = std::move(k)](const Value& v, World&) { return Step::resume(k, Value(!v.as_bool())); }, w);
  }

  Thunk org_thunk(int x) const {
    return [this, x](Cont k, World& w) { return organism(x, std::move(k), w); };
  }

  /// x eats y and y is an organism.
  Step eats_organism(int x, int y, Cont k, World& w) const {
    return both(org_thunk(y), [this, x, y](Cont k, World& w) { return eats(x, y, std::move(k), w); }, std::move(k),
                w);
  }

  Step eats_any(int x, Cont k, World& w) const {
    return exists(x, 0, [this, x](int y, Cont k, World& w) { return eats_organism(x, y, std::move(k), w); },
                  std::move(k), w);
  }

  /// Every organism x eats satisfies pred.
  Step eats_only(int x, Primitive role, Cont k, World& w) const {
    Pred violates = [this, x, role](int y, Cont k, World& w) {
      return both([this, x, y](Cont k, World& w) { return eats_organism(x, y, std::move(k), w); },
                  [this, y, role](Cont k, World& w) {
                    return negate([this, y, role](Cont k, World& w) { return call_role(role, y, std::move(k), w); },
                                  std::move(k), w);
                  },
                  std::move(k), w);
    };
    return negate([this, x, violates](Cont k, World& w) { return exists(x, 0, violates, std::move(k), w); },
                  std::move(k), w);
  }

  /// x eats some organism with the given role.
  Step eats_some(int x, Primitive role, Cont k, World& w) const {
    return exists(x, 0, [this, x, role](int y, Cont k, World& w) {
      return both([this, x, y](Cont k, World& w) { return eats_organism(x, y, std::move(k), w); },
                  [this, y, role](Cont k, World& w) { return call_role(role, y, std::move(k), w); }, std::move(k), w);
    }, std::move(k), w);
  }

  Step call_role(Primitive role, int x, Cont k, World& w) const {
    auto consumer = [this, x](Cont k, World& w) { return call_role(Primitive::Consumer, x, std::move(k), w); };
    switch (role) {
      case Primitive::Consumer:
      case Primitive::Predator:
        return both(org_thunk(x), [this, x](Cont k, World& w) { return eats_any(x, std::move(k), w); }, std::move(k),
                    w);
      case Primitive::Producer:
        return both(org_thunk(x), [this, x](Cont k, World& w) {
          return negate([this, x](Cont k, World& w) { return eats_any(x, std::move(k), w); }, std::move(k), w);
        }, std::move(k), w);
      case Primitive::Herbivore:
        return both(consumer, [this, x](Cont k, World& w) {
          return eats_only(x, Primitive::Producer, std::move(k), w);
        }, std::move(k), w);
      case Primitive::Carnivore:
        return both(consumer, [this, x](Cont k, World& w) {
          return eats_only(x, Primitive::Consumer, std::move(k), w);
        }, std::move(k), w);
      case Primitive::Omnivore:
        return both(org_thunk(x), [this, x](Cont k, World& w) {
          return both([this, x](Cont k, World& w) { return eats_some(x, Primitive::Producer, std::move(k), w); },
                      [this, x](Cont k, World& w) { return eats_some(x, Primitive::Consumer, std::move(k), w); },
                      std::move(k), w);
        }, std::move(k), w);
      case Primitive::Prey:
        return both(org_thunk(x), [this, x](Cont k, World& w) {
          return exists(x, 0, [this, x](int y, Cont k, World& w) {
            return both(org_thunk(y), [this, x, y](Cont k, World& w) { return eats(y, x, std::move(k), w); },
                        std::move(k), w);
          }, std::move(k), w);
        }, std::move(k), w);
      case Primitive::Decomposer:
        return Step::resume(std::move(k), Value(false));
      default:
        throw Error("not a role: " + std::string(lf::primitive_name(role)));
    }
  }

  Step call(Primitive p, const std::vector<Value>& args, Cont k, World& w) const {
    switch (p) {
      case Primitive::Organism:
        return organism(entity_of(args[0]), std::move(k), w);
      case Primitive::Eats:
        return eats(entity_of(args[0]), entity_of(args[1]), std::move(k), w);
      case Primitive::Count:
        return filter_entities(args[0], 0, std::make_shared<const std::vector<int>>(),
                               [k = std::move(k)](const Indices& xs, World&) {
                                 return Step::resume(k, Value(static_cast<std::int64_t>(xs->size())));
                               },
                               w);
      case Primitive::Cause: {
        const auto& c = std::get<exec::Event>(args[0].v);
        const auto& e = std::get<exec::Event>(args[1].v);
        return eats(c.label, e.label, [this, c, e, k = std::move(k)](const Value& e12, World& w) {
          return eats(e.label, c.label, [c, e, e12, k](const Value& e21, World&) {
            return Step::resume(k, Value(evaluate_cause(c.direction, e.direction, e12.as_bool(), e21.as_bool())));
          }, w);
        }, w);
      }
      case Primitive::And:
        return Step::resume(std::move(k), Value(args[0].as_bool() && args[1].as_bool()));
      default:
        if (lf::is_role(p)) return call_role(p, entity_of(args[0]), std::move(k), w);
        throw Error("cannot call " + std::string(lf::primitive_name(p)));
    }
  }

  static Direction to_direction(Primitive p) {
    switch (p) {
      case Primitive::Decrease: return Direction::Decrease;
      case Primitive::Increase: return Direction::Increase;
      default: return Direction::Unchanged;
    }
  }

 private:
  static const std::shared_ptr<const std::vector<Value>>& truth_values() {
    static const auto values = std::make_shared<const std::vector<Value>>(std::vector<Value>{Value(true), Value(false)});
    return values;
  }

  std::vector<std::string> labels_;
  std::vector<std::shared_ptr<const std::string>> org_sites_, eats_sites_;
  exec::SharedFunction<int(std::string_view)> lookup_;
  int n_;
};

bool is_arrow(const lf::TypePtr& t, const lf::TypePtr& from, const lf::TypePtr& to) {
  return t->kind == lf::Type::Kind::Arrow && lf::type_equal(t->from, from) && lf::type_equal(t->to, to);
}

std::string find_subject(const ExprPtr& body, const std::string& f) {
  if (body->is(Expr::Kind::Apply)) {
    if (body->fn->is(Expr::Kind::Var) && body->fn->name == f && body->arg->is(Expr::Kind::Entity)) {
      return body->arg->name;
    }
    std::string s = find_subject(body->fn, f);
    return s.empty() ? find_subject(body->arg, f) : s;
  }
  if (body->is(Expr::Kind::Lambda) && body->name != f) return find_subject(body->fn, f);
  return {};
}

exec::Step start_program(const std::shared_ptr<const Interpreter>& interp, const CompiledProgram& p, World& w) {
  const Interpreter* in = interp.get();
  switch (p.root) {
    case RootKind::Truth:
      return in->eval(p.form, nullptr, [](const Value& v, World&) {
        return Step::done(Denotation::of_truth(v.as_bool()));
      }, w);
    case RootKind::Integer:
      return in->eval(p.form, nullptr, [](const Value& v, World&) {
        return Step::done(Denotation::of_integer(v.as_int()));
      }, w);
    case RootKind::Entity:
      return in->eval(p.form, nullptr, [in](const Value& v, World&) {
        return Step::done(Denotation::entity_set({in->label(entity_of(v))}));
      }, w);
    case RootKind::Event:
      return in->eval(p.form, nullptr, [in](const Value& v, World&) {
        const auto& e = std::get<exec::Event>(v.v);
        return Step::done(Denotation::event_set({{e.direction, in->label(e.label)}}));
      }, w);
    case RootKind::EntityFilter:
      return in->eval(p.form, nullptr, [in](const Value& fn, World& w) {
        return in->filter_entities(fn, 0, std::make_shared<const std::vector<int>>(),
                                   [in](const Indices& xs, World&) {
                                     std::vector<std::string> names;
                                     for (int x : *xs) names.push_back(in->label(x));
                                     return Step::done(Denotation::entity_set(std::move(names)));
                                   },
                                   w);
      }, w);
    case RootKind::DirectionFilter: {
      std::string subject = p.subject;
      return in->eval(p.form, nullptr, [in, subject](const Value& fn, World& w) {
        return in->filter_directions(fn, 0, {}, [subject](const std::vector<Direction>& ds) {
          return Step::done(Denotation::direction_set(ds, subject));
        }, w);
      }, w);
    }
  }
  return Step::fail();
}

std::shared_ptr<const Interpreter> interpreter_for(const Environment& env) {
  return std::make_shared<const Interpreter>(env.labels(),
                                             [&env](std::string_view s) { return env.label_index(s); });
}

exec::Step drive_decided(exec::Step s, World& w) {
  s = exec::drive(std::move(s), w);
  if (s.kind() == Step::Kind::Choice) throw Error("evaluation needs undecided instance " + s.site());
  return s;
}

}  // namespace

bool evaluate_cause(Direction cause, Direction effect, bool e12, bool e21) {
  if (e12 && e21) return false;
  if (e21) return effect == cause;
  if (e12) return effect == exec::opposite(cause);
  return effect == Direction::Unchanged;
}

std::string CompiledProgram::type_key() const {
  std::string key(exec::kind_name(denotation_kind));
  key += ":";
  key += head ? std::string(lf::primitive_name(*head)) : "none";
  return key;
}

CompiledProgram compile(const ExprPtr& form) {
  CompiledProgram p;
  p.form = lf::beta_normalize(form);
  p.canonical = lf::canonical(p.form);
  if (!lf::free_vars(p.form).empty()) throw TypeError("logical form has free variables: " + p.canonical);
  p.type = lf::infer_type(p.form);
  const auto& t = p.type;
  using K = lf::Type::Kind;
  if (t->kind == K::Truth) {
    p.root = RootKind::Truth;
    p.denotation_kind = Denotation::Kind::Truth;
  } else if (t->kind == K::Int) {
    p.root = RootKind::Integer;
    p.denotation_kind = Denotation::Kind::Integer;
  } else if (t->kind == K::Entity) {
    p.root = RootKind::Entity;
    p.denotation_kind = Denotation::Kind::EntitySet;
  } else if (t->kind == K::Event) {
    p.root = RootKind::Event;
    p.denotation_kind = Denotation::Kind::EventSet;
  } else if (is_arrow(t, lf::entity_type(), lf::truth_type())) {
    p.root = RootKind::EntityFilter;
    p.denotation_kind = Denotation::Kind::EntitySet;
  } else if (is_arrow(t, lf::direction_type(), lf::truth_type())) {
    p.root = RootKind::DirectionFilter;
    p.denotation_kind = Denotation::Kind::DirectionSet;
    if (p.form->is(Expr::Kind::Lambda)) p.subject = find_subject(p.form->fn, p.form->name);
  } else {
    throw TypeError("logical form of type " + lf::type_to_string(t) + " is not executable: " + p.canonical);
  }
  p.head = lf::head_primitive(p.form);
  const ExprPtr& f = p.form;
  if (f->is(Expr::Kind::Prim) && lf::is_role(f->prim)) {
    p.role = f->prim;
  } else if (f->is(Expr::Kind::Lambda) && f->fn->is(Expr::Kind::Apply) && f->fn->fn->is(Expr::Kind::Prim) &&
             lf::is_role(f->fn->fn->prim) && f->fn->arg->is(Expr::Kind::Var) && f->fn->arg->name == f->name) {
    p.role = f->fn->fn->prim;
  }
  return p;
}

bool is_executable(const ExprPtr& form) {
  try {
    compile(form);
    return true;
  } catch (const Error&) {
    return false;
  }
}

exec::Program CompiledProgram::bind(const Environment& env) const {
  exec::Program prog;
  prog.num_labels = env.num_labels();
  auto interp = interpreter_for(env);
  CompiledProgram self = *this;
  prog.start = [interp, self](World& w) { return start_program(interp, self, w); };
  return prog;
}

bool evaluate_role(Primitive role, int x, const World& world) {
  std::vector<std::string> labels(world.num_labels());
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = "#" + std::to_string(i);
  Interpreter in(labels, [](std::string_view) { return -1; });
  World w = world;
  Step s = drive_decided(in.call_role(role, x, [](const Value& v, World&) {
    return Step::done(Denotation::of_truth(v.as_bool()));
  }, w), w);
  return s.denotation().truth;
}

World world_from_gold(const Environment& env, const GoldFoodWeb& gold) {
  const auto& labels = env.labels();
  World w(labels.size());
  for (std::size_t x = 0; x < labels.size(); ++x) {
    w.set_organism(static_cast<int>(x), gold.has_organism(labels[x]));
    for (std::size_t y = 0; y < labels.size(); ++y) {
      w.set_eats(static_cast<int>(x), static_cast<int>(y), gold.has_eats(labels[x], labels[y]));
    }
  }
  w.clear_last();
  return w;
}

Denotation run_decided(const CompiledProgram& program, const Environment& env, const World& world) {
  exec::Program prog = program.bind(env);
  World w = world;
  Step s = drive_decided(prog.start(w), w);
  if (s.kind() == Step::Kind::Done) return s.denotation();
  return Denotation::failure();
}

}  // namespace webqa::domain
