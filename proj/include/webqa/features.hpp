#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace webqa {

using FeatureId = std::uint32_t;

/// Process-wide bidirectional map between feature names and dense ids.
/// Ids are an in-memory detail; everything persisted uses names.
class FeatureIndex {
 public:
  static FeatureId intern(std::string_view name);
  static const std::string& name(FeatureId id);
  static std::size_t size();
};

/// Sparse feature vector kept sorted by id. Zero entries are never stored.
class FeatureVector {
 public:
  using Entry = std::pair<FeatureId, double>;

  FeatureVector() = default;

  void add(FeatureId id, double value);
  void add(std::string_view name, double value) { add(FeatureIndex::intern(name), value); }
  void add(const FeatureVector& other, double scale = 1.0);

  double get(FeatureId id) const;
  double get(std::string_view name) const { return get(FeatureIndex::intern(name)); }

  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  const std::vector<Entry>& entries() const { return entries_; }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  FeatureVector scaled(double s) const;
  FeatureVector operator+(const FeatureVector& o) const;
  FeatureVector operator-(const FeatureVector& o) const;
  bool operator==(const FeatureVector& o) const = default;

  /// name -> value, ordered by name.
  std::map<std::string, double> named() const;
  std::string to_string() const;

 private:
  std::vector<Entry> entries_;
};

/// Dense weight vector indexed by FeatureId; grows on demand.
class Weights {
 public:
  double get(FeatureId id) const { return id < w_.size() ? w_[id] : 0.0; }
  double get(std::string_view name) const { return get(FeatureIndex::intern(name)); }
  void set(FeatureId id, double v);
  void set(std::string_view name, double v) { set(FeatureIndex::intern(name), v); }
  void add(const FeatureVector& v, double scale);
  /// w <- (1 - decay) * w, applied to every stored coordinate.
  void shrink(double decay);
  double dot(const FeatureVector& v) const;

  std::map<std::string, double> named() const;
  bool operator==(const Weights& o) const { return named() == o.named(); }

 private:
  std::vector<double> w_;
};

}  // namespace webqa
