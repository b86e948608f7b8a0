#pragma once

#include <array>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "webqa/domain.hpp"
#include "webqa/environment.hpp"
#include "webqa/features.hpp"
#include "webqa/runtime.hpp"

namespace webqa::model {

/// Histogram bin edges for link scores and link path scores. Bins are
/// left-closed, right-open; the last one is closed at 1.
const std::vector<double>& link_score_bins();
const std::vector<double>& path_score_bins();
/// Index of the bin containing v (clamped into [0, 1]).
std::size_t bin_index(const std::vector<double>& edges, double v);
std::string bin_name(const std::vector<double>& edges, std::size_t i);

FeatureVector organism_instance_features(int label, bool value, const Environment& env);
FeatureVector eats_instance_features(int x, int y, bool value, const Environment& env);

/// Cycle features (k = 2, 3, 4, >=5) of a directed graph given as an n x n
/// row-major adjacency matrix. For each edge (i, j), i != j, let d be the
/// shortest path length from j back to i; the edge closes a cycle of length
/// m = d + 1. Entries are n_2/2, n_3/3, n_4/4 and the sum of 1/m over m >= 5.
std::array<double, 4> cycle_features(std::size_t n, const std::vector<bool>& adjacency);

/// Global feature vector G(world) of the eats predicate: cycles and arrow reuse.
FeatureVector eats_predicate_features(const exec::World& w, const Environment& env);
/// Global feature vector of the organism predicate: overlapping true labels.
FeatureVector organism_predicate_features(const exec::World& w, const Environment& env);
/// G(after) - G(before) over both predicates.
FeatureVector predicate_delta(const exec::World& before, const exec::World& after, const Environment& env);

/// (role, animal) pairs frequent enough in training to get their own feature.
class RoleVocabulary {
 public:
  RoleVocabulary() = default;
  /// Counts, over distinct gold webs, every animal holding each role.
  static RoleVocabulary from_environments(const std::vector<const Environment*>& envs, int threshold = 5);

  bool contains(lf::Primitive role, const std::string& animal) const;
  std::size_t size() const { return pairs_.size(); }
  nlohmann::json to_json() const;
  static RoleVocabulary from_json(const nlohmann::json& j);
  bool operator==(const RoleVocabulary&) const = default;

 private:
  std::set<std::pair<std::string, std::string>> pairs_;
};

FeatureVector denotation_features(const domain::CompiledProgram& program, const exec::Denotation& d,
                                  const RoleVocabulary* roles);

struct ExecFeatureConfig {
  bool predicate_features = true;
  bool denotation_features = true;
};

/// Precomputed instance features of one environment.
class InstanceFeatureCache {
 public:
  explicit InstanceFeatureCache(const Environment& env);
  const Environment& env() const { return *env_; }
  const FeatureVector& organism(int x, bool value) const { return org_[2 * x + (value ? 1 : 0)]; }
  const FeatureVector& eats(int x, int y, bool value) const {
    return eats_[2 * (static_cast<std::size_t>(x) * n_ + y) + (value ? 1 : 0)];
  }
  /// G(after) - G(before) when `after` differs from `before` only in the
  /// instance it decided last.
  FeatureVector predicate_step(const exec::World& before, const exec::World& after) const;

 private:
  const Environment* env_;
  std::size_t n_;
  std::vector<FeatureVector> org_;
  std::vector<FeatureVector> eats_;
  std::vector<int> arrow_;     // arrow index behind eats(x, y), -1 when unlinked
  std::vector<bool> overlap_;  // label boxes overlap
};

/// φ(e_prev, e_next, ℓ, v): instance features of the newly decided instance,
/// the predicate delta, and denotation features on termination.
class ExecutionFeaturizer : public exec::TransitionFeaturizer {
 public:
  ExecutionFeaturizer(const InstanceFeatureCache& cache, const domain::CompiledProgram& program,
                      const RoleVocabulary* roles, ExecFeatureConfig config = {});
  FeatureVector features(const exec::Transition& t) const override;

 private:
  const InstanceFeatureCache& cache_;
  const domain::CompiledProgram& program_;
  const RoleVocabulary* roles_;
  ExecFeatureConfig config_;
};

}  // namespace webqa::model
