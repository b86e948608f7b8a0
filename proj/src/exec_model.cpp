#include "webqa/exec_model.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <deque>
#include <map>

#include "webqa/text.hpp"

namespace webqa::model {

using exec::Denotation;
using exec::Truth;
using exec::World;

const std::vector<double>& link_score_bins() {
  static const std::vector<double> edges = {0, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 1.0};
  return edges;
}

const std::vector<double>& path_score_bins() {
  static const std::vector<double> edges = {0, 0.01, 0.05, 0.1, 0.3, 0.7, 1.0};
  return edges;
}

std::size_t bin_index(const std::vector<double>& edges, double v) {
  const std::size_t bins = edges.size() - 1;
  for (std::size_t i = 0; i < bins; ++i) {
    if (v < edges[i + 1]) return i;
  }
  return bins - 1;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string prefix(const char* pred, bool value) {
  return std::string(pred) + ":" + (value ? "true" : "false") + ":";
}

}  // namespace

std::string bin_name(const std::vector<double>& edges, std::size_t i) {
  const bool last = i + 2 == edges.size();
  return "[" + fmt(edges[i]) + "," + fmt(edges[i + 1]) + (last ? "]" : ")");
}

FeatureVector organism_instance_features(int label, bool value, const Environment& env) {
  const std::string p = prefix("org", value);
  const TextElement& t = env.label_text(label);
  FeatureVector f;
  f.add(p + "text_score", t.score);
  f.add(p + "bias", 1.0);
  for (const auto& other : env.texts()) {
    if (&other != &t && other.box.area() > t.box.area() && other.box.contains(t.box)) {
      f.add(p + "sub_bbox", 1.0);
      break;
    }
  }
  const std::size_t words = text::word_tokens(t.text).size();
  if (words >= 4) f.add(p + "words>=4", 1.0);
  if (words >= 6) f.add(p + "words>=6", 1.0);
  return f;
}

FeatureVector eats_instance_features(int x, int y, bool value, const Environment& env) {
  const std::string p = prefix("eats", value);
  FeatureVector f;
  if (x == y) f.add(p + "self_link", 1.0);
  // x eats y: the arrow runs from y to x.
  const auto& link = env.label_link(y, x);
  if (!link) {
    f.add(p + "no_link", 1.0);
    return f;
  }
  f.add(p + "link_exists", 1.0);
  f.add(p + "link_bin=" + bin_name(link_score_bins(), bin_index(link_score_bins(), link->link_score)), 1.0);
  f.add(p + "link_score", link->link_score);
  f.add(p + "path_bin=" + bin_name(path_score_bins(), bin_index(path_score_bins(), link->path_score)), 1.0);
  f.add(p + "path_score", link->path_score);
  return f;
}

namespace {

using Rows = std::vector<std::uint64_t>;

/// Cycle features over adjacency bit rows (n <= 64).
std::array<double, 4> cycle_counts(const Rows& rows) {
  const std::size_t n = rows.size();
  std::uint64_t has_in = 0;
  for (std::size_t i = 0; i < n; ++i) has_in |= rows[i] & ~(1ull << i);
  std::array<int, 3> short_cycles{0, 0, 0};
  double long_cycles = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (!(has_in >> j & 1)) continue;
    std::uint64_t pred = 0;  // i with edge i -> j
    for (std::size_t i = 0; i < n; ++i) {
      if (i != j && (rows[i] >> j & 1)) pred |= 1ull << i;
    }
    // Breadth-first from j, level by level.
    std::uint64_t seen = 1ull << j, frontier = seen;
    for (int d = 1; frontier && pred; ++d) {
      std::uint64_t next = 0;
      for (std::uint64_t f = frontier; f; f &= f - 1) next |= rows[static_cast<std::size_t>(std::countr_zero(f))];
      next &= ~seen;
      seen |= next;
      frontier = next;
      const int hits = std::popcount(next & pred);
      if (hits) {
        const int m = d + 1;
        if (m <= 4) {
          short_cycles[m - 2] += hits;
        } else {
          long_cycles += hits / static_cast<double>(m);
        }
        pred &= ~next;
      }
    }
  }
  return {short_cycles[0] / 2.0, short_cycles[1] / 3.0, short_cycles[2] / 4.0, long_cycles};
}

bool reaches(const Rows& rows, std::size_t from, std::size_t to) {
  std::uint64_t seen = 1ull << from, frontier = seen;
  while (frontier) {
    if (seen >> to & 1) return true;
    std::uint64_t next = 0;
    for (std::uint64_t f = frontier; f; f &= f - 1) next |= rows[static_cast<std::size_t>(std::countr_zero(f))];
    frontier = next & ~seen;
    seen |= next;
  }
  return seen >> to & 1;
}

Rows true_eats_rows(const World& w) {
  const std::size_t n = w.num_labels();
  Rows rows(n, 0);
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      if (w.eats(static_cast<int>(x), static_cast<int>(y)) == Truth::True) rows[x] |= 1ull << y;
  return rows;
}

const FeatureId kCycleIds[4] = {FeatureIndex::intern("pred:eats:cycle2"), FeatureIndex::intern("pred:eats:cycle3"),
                                FeatureIndex::intern("pred:eats:cycle4"), FeatureIndex::intern("pred:eats:cycle5+")};
const FeatureId kReuseIds[3] = {FeatureIndex::intern("pred:eats:reuse2"), FeatureIndex::intern("pred:eats:reuse3"),
                                FeatureIndex::intern("pred:eats:reuse4+")};
const FeatureId kOverlapId = FeatureIndex::intern("pred:organism:overlap");

}  // namespace

std::array<double, 4> cycle_features(std::size_t n, const std::vector<bool>& adj) {
  if (n <= 64) {
    Rows rows(n, 0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (adj[i * n + j]) rows[i] |= 1ull << j;
    return cycle_counts(rows);
  }
  std::array<int, 3> short_cycles{0, 0, 0};
  double long_cycles = 0;
  std::vector<int> dist(n);
  std::vector<std::size_t> queue;
  queue.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    bool has_in = false;
    for (std::size_t i = 0; i < n && !has_in; ++i) has_in = i != j && adj[i * n + j];
    if (!has_in) continue;
    std::fill(dist.begin(), dist.end(), -1);
    dist[j] = 0;
    queue.clear();
    queue.push_back(j);
    for (std::size_t h = 0; h < queue.size(); ++h) {
      std::size_t u = queue[h];
      for (std::size_t v = 0; v < n; ++v) {
        if (adj[u * n + v] && dist[v] < 0) {
          dist[v] = dist[u] + 1;
          queue.push_back(v);
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (i == j || !adj[i * n + j] || dist[i] < 0) continue;
      const int m = dist[i] + 1;
      if (m <= 4) {
        ++short_cycles[m - 2];
      } else {
        long_cycles += 1.0 / m;
      }
    }
  }
  return {short_cycles[0] / 2.0, short_cycles[1] / 3.0, short_cycles[2] / 4.0, long_cycles};
}

FeatureVector eats_predicate_features(const World& w, const Environment& env) {
  const std::size_t n = w.num_labels();
  std::vector<bool> adj(n * n, false);
  std::map<std::string, int> arrow_uses;
  bool any = false;
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      if (w.eats(static_cast<int>(x), static_cast<int>(y)) != Truth::True) continue;
      adj[x * n + y] = true;
      any = true;
      if (const auto& link = env.label_link(static_cast<int>(y), static_cast<int>(x))) ++arrow_uses[link->arrow_id];
    }
  }
  FeatureVector f;
  if (!any) return f;
  auto cyc = cycle_features(n, adj);
  for (int k = 0; k < 4; ++k) f.add(kCycleIds[k], cyc[k]);
  int reuse[3] = {0, 0, 0};
  for (const auto& [id, c] : arrow_uses) {
    if (c >= 2) ++reuse[std::min(c, 4) - 2];
  }
  for (int k = 0; k < 3; ++k) f.add(kReuseIds[k], reuse[k]);
  return f;
}

FeatureVector organism_predicate_features(const World& w, const Environment& env) {
  const int n = static_cast<int>(w.num_labels());
  int overlaps = 0;
  for (int a = 0; a < n; ++a) {
    if (w.organism(a) != Truth::True) continue;
    for (int b = a + 1; b < n; ++b) {
      if (w.organism(b) == Truth::True && env.label_text(a).box.overlaps(env.label_text(b).box)) ++overlaps;
    }
  }
  FeatureVector f;
  f.add(kOverlapId, overlaps);
  return f;
}

FeatureVector predicate_delta(const World& before, const World& after, const Environment& env) {
  FeatureVector f = organism_predicate_features(after, env) - organism_predicate_features(before, env);
  f.add(eats_predicate_features(after, env));
  f.add(eats_predicate_features(before, env), -1.0);
  return f;
}

// ------------------------------------------------------------------ roles

RoleVocabulary RoleVocabulary::from_environments(const std::vector<const Environment*>& envs, int threshold) {
  std::map<std::pair<std::string, std::string>, int> counts;
  std::set<const Environment*> seen;
  for (const Environment* env : envs) {
    if (!env->gold() || !seen.insert(env).second) continue;
    World w = domain::world_from_gold(*env, *env->gold());
    for (lf::Primitive p : lf::all_primitives()) {
      if (!lf::is_role(p)) continue;
      for (int x = 0; x < static_cast<int>(env->num_labels()); ++x) {
        if (domain::evaluate_role(p, x, w)) ++counts[{std::string(lf::primitive_name(p)), env->labels()[x]}];
      }
    }
  }
  RoleVocabulary v;
  for (const auto& [key, c] : counts) {
    if (c >= threshold) v.pairs_.insert(key);
  }
  return v;
}

bool RoleVocabulary::contains(lf::Primitive role, const std::string& animal) const {
  return pairs_.contains({std::string(lf::primitive_name(role)), animal});
}

nlohmann::json RoleVocabulary::to_json() const {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& [r, a] : pairs_) j.push_back({r, a});
  return j;
}

RoleVocabulary RoleVocabulary::from_json(const nlohmann::json& j) {
  RoleVocabulary v;
  for (const auto& p : j) v.pairs_.insert({p.at(0).get<std::string>(), p.at(1).get<std::string>()});
  return v;
}

// ----------------------------------------------------------- denotations

FeatureVector denotation_features(const domain::CompiledProgram& program, const Denotation& d,
                                  const RoleVocabulary* roles) {
  FeatureVector f;
  if (d.kind == Denotation::Kind::Failure) return f;
  if (d.is_set()) {
    const std::size_t s = d.size();
    f.add("den:size:" + program.type_key() + "=" + (s >= 4 ? std::string("4+") : std::to_string(s)), 1.0);
  }
  if (d.kind == Denotation::Kind::Integer) {
    f.add("den:count=" + (d.integer >= 4 ? std::string("4+") : std::to_string(d.integer)), 1.0);
  }
  if (d.kind == Denotation::Kind::EntitySet && program.role && roles) {
    for (const auto& e : d.entities) {
      if (roles->contains(*program.role, e)) {
        f.add("den:role:" + std::string(lf::primitive_name(*program.role)) + ":" + e, 1.0);
      }
    }
  }
  if (d.kind == Denotation::Kind::DirectionSet) {
    for (auto dir : d.directions) f.add("den:direction:" + std::string(exec::direction_name(dir)), 1.0);
  }
  return f;
}

// ------------------------------------------------------------ featurizer

InstanceFeatureCache::InstanceFeatureCache(const Environment& env) : env_(&env), n_(env.num_labels()) {
  org_.reserve(2 * n_);
  for (std::size_t x = 0; x < n_; ++x) {
    org_.push_back(organism_instance_features(static_cast<int>(x), false, env));
    org_.push_back(organism_instance_features(static_cast<int>(x), true, env));
  }
  eats_.reserve(2 * n_ * n_);
  for (std::size_t x = 0; x < n_; ++x) {
    for (std::size_t y = 0; y < n_; ++y) {
      eats_.push_back(eats_instance_features(static_cast<int>(x), static_cast<int>(y), false, env));
      eats_.push_back(eats_instance_features(static_cast<int>(x), static_cast<int>(y), true, env));
    }
  }
  std::map<std::string, int> arrow_ids;
  arrow_.assign(n_ * n_, -1);
  overlap_.assign(n_ * n_, false);
  for (std::size_t x = 0; x < n_; ++x) {
    for (std::size_t y = 0; y < n_; ++y) {
      const int xi = static_cast<int>(x), yi = static_cast<int>(y);
      if (const auto& link = env.label_link(yi, xi)) {
        arrow_[x * n_ + y] = arrow_ids.try_emplace(link->arrow_id, static_cast<int>(arrow_ids.size())).first->second;
      }
      overlap_[x * n_ + y] = x != y && env.label_text(xi).box.overlaps(env.label_text(yi).box);
    }
  }
}

FeatureVector InstanceFeatureCache::predicate_step(const World& before, const World& after) const {
  FeatureVector f;
  const auto& inst = after.last_decided();
  if (!inst || !inst->value) return f;
  if (n_ > 64) {
    f = predicate_delta(before, after, *env_);
    return f;
  }
  const std::size_t x = static_cast<std::size_t>(inst->x);
  if (inst->kind == World::Instance::Kind::Organism) {
    int overlaps = 0;
    for (std::size_t b = 0; b < n_; ++b) {
      if (b != x && overlap_[x * n_ + b] && before.organism(static_cast<int>(b)) == Truth::True) ++overlaps;
    }
    f.add(kOverlapId, overlaps);
    return f;
  }
  const std::size_t y = static_cast<std::size_t>(inst->y);
  if (const int a = arrow_[x * n_ + y]; a >= 0) {
    int uses = 0;
    for (std::size_t i = 0; i < n_ * n_; ++i) {
      if (arrow_[i] == a && i != x * n_ + y &&
          before.eats(static_cast<int>(i / n_), static_cast<int>(i % n_)) == Truth::True) {
        ++uses;
      }
    }
    // Bucket of an arrow used c times: none below 2, then 2, 3, 4+.
    auto bucket = [](int c) { return c < 2 ? -1 : std::min(c, 4) - 2; };
    if (bucket(uses + 1) != bucket(uses)) {
      f.add(kReuseIds[bucket(uses + 1)], 1.0);
      if (bucket(uses) >= 0) f.add(kReuseIds[bucket(uses)], -1.0);
    }
  }
  if (x != y) {
    const Rows after_rows = true_eats_rows(after);
    if (reaches(after_rows, y, x)) {
      Rows before_rows = after_rows;
      before_rows[x] &= ~(1ull << y);
      const auto a = cycle_counts(after_rows), b = cycle_counts(before_rows);
      for (int k = 0; k < 4; ++k) f.add(kCycleIds[k], a[k] - b[k]);
    }
  }
  return f;
}

ExecutionFeaturizer::ExecutionFeaturizer(const InstanceFeatureCache& cache, const domain::CompiledProgram& program,
                                         const RoleVocabulary* roles, ExecFeatureConfig config)
    : cache_(cache), program_(program), roles_(roles), config_(config) {}

FeatureVector ExecutionFeaturizer::features(const exec::Transition& t) const {
  FeatureVector f;
  if (const auto& inst = t.after.last_decided()) {
    using Kind = World::Instance::Kind;
    if (inst->kind == Kind::Organism) {
      f = cache_.organism(inst->x, inst->value);
    } else {
      f = cache_.eats(inst->x, inst->y, inst->value);
    }
    if (config_.predicate_features && inst->value) f.add(cache_.predicate_step(t.before, t.after));
  }
  if (t.terminal && config_.denotation_features) f.add(denotation_features(program_, *t.terminal, roles_));
  return f;
}

}  // namespace webqa::model
