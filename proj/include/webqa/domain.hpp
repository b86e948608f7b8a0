#pragma once

#include <optional>
#include <string>
#include <vector>

#include "webqa/environment.hpp"
#include "webqa/logical_form.hpp"
#include "webqa/runtime.hpp"

namespace webqa::domain {

/// How the value of a logical form becomes a denotation.
enum class RootKind : std::uint8_t {
  EntityFilter,     // <e,t>: the organisms satisfying it
  DirectionFilter,  // <<e,ev>,t>: the directions satisfying it
  Entity,           // e
  Event,            // ev
  Truth,            // t
  Integer,          // i
};

/// A type-checked logical form ready to run against any environment.
struct CompiledProgram {
  lf::ExprPtr form;  // beta-normal
  std::string canonical;
  lf::TypePtr type;
  RootKind root = RootKind::Truth;
  exec::Denotation::Kind denotation_kind = exec::Denotation::Kind::Truth;
  std::optional<lf::Primitive> head;
  /// Set when the form denotes exactly the animals with one role.
  std::optional<lf::Primitive> role;
  /// For direction filters: the entity the directions are applied to.
  std::string subject;

  /// "<denotation kind>:<head primitive>", e.g. "entity_set:eats".
  std::string type_key() const;

  /// Binds to an environment's labels. The environment must outlive every
  /// execution of the returned program.
  exec::Program bind(const Environment& env) const;
};

/// Throws TypeError if the form is ill-typed or has no executable type.
CompiledProgram compile(const lf::ExprPtr& form);
bool is_executable(const lf::ExprPtr& form);

/// cause(cause_event, effect_event) given e12 = eats(cause animal, effect
/// animal) and e21 = eats(effect animal, cause animal). Mutual eating is
/// never a valid causal chain.
bool evaluate_cause(exec::Direction cause, exec::Direction effect, bool e12, bool e21);

/// Role of label `x` in a world where every instance the role needs is
/// decided. Throws Error if evaluation would have to choose.
bool evaluate_role(lf::Primitive role, int x, const exec::World& world);

/// The fully decided world of a gold food web.
exec::World world_from_gold(const Environment& env, const GoldFoodWeb& gold);

/// Runs a compiled program on a fully decided world. Returns a failure
/// denotation if the program fails; throws Error if it would have to choose.
exec::Denotation run_decided(const CompiledProgram& program, const Environment& env, const exec::World& world);

}  // namespace webqa::domain
