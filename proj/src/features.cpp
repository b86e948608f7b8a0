#include "webqa/features.hpp"

#include <algorithm>
#include <deque>
#include <mutex>
#include <shared_mutex>
#include <sstream>
#include <unordered_map>

namespace webqa {

namespace {

struct Interner {
  std::shared_mutex mu;
  std::unordered_map<std::string, FeatureId> ids;
  std::deque<std::string> names;  // stable references
};

Interner& interner() {
  static Interner in;
  return in;
}

}  // namespace

FeatureId FeatureIndex::intern(std::string_view name) {
  auto& in = interner();
  std::string key(name);
  {
    std::shared_lock lock(in.mu);
    if (auto it = in.ids.find(key); it != in.ids.end()) return it->second;
  }
  std::unique_lock lock(in.mu);
  auto [it, inserted] = in.ids.try_emplace(key, static_cast<FeatureId>(in.names.size()));
  if (inserted) in.names.push_back(key);
  return it->second;
}

const std::string& FeatureIndex::name(FeatureId id) {
  auto& in = interner();
  std::shared_lock lock(in.mu);
  return in.names.at(id);
}

std::size_t FeatureIndex::size() {
  auto& in = interner();
  std::shared_lock lock(in.mu);
  return in.names.size();
}

void FeatureVector::add(FeatureId id, double value) {
  if (value == 0.0) return;
  auto it = std::lower_bound(entries_.begin(), entries_.end(), id,
                             [](const Entry& e, FeatureId k) { return e.first < k; });
  if (it != entries_.end() && it->first == id) {
    it->second += value;
    if (it->second == 0.0) entries_.erase(it);
  } else {
    entries_.insert(it, {id, value});
  }
}

void FeatureVector::add(const FeatureVector& other, double scale) {
  if (other.empty() || scale == 0.0) return;
  std::vector<Entry> merged;
  merged.reserve(entries_.size() + other.entries_.size());
  auto a = entries_.begin();
  auto b = other.entries_.begin();
  while (a != entries_.end() || b != other.entries_.end()) {
    if (b == other.entries_.end() || (a != entries_.end() && a->first < b->first)) {
      merged.push_back(*a++);
    } else if (a == entries_.end() || b->first < a->first) {
      double v = b->second * scale;
      if (v != 0.0) merged.emplace_back(b->first, v);
      ++b;
    } else {
      double v = a->second + b->second * scale;
      if (v != 0.0) merged.emplace_back(a->first, v);
      ++a;
      ++b;
    }
  }
  entries_ = std::move(merged);
}

double FeatureVector::get(FeatureId id) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), id,
                             [](const Entry& e, FeatureId k) { return e.first < k; });
  return (it != entries_.end() && it->first == id) ? it->second : 0.0;
}

FeatureVector FeatureVector::scaled(double s) const {
  FeatureVector out;
  out.add(*this, s);
  return out;
}

FeatureVector FeatureVector::operator+(const FeatureVector& o) const {
  FeatureVector out = *this;
  out.add(o);
  return out;
}

FeatureVector FeatureVector::operator-(const FeatureVector& o) const {
  FeatureVector out = *this;
  out.add(o, -1.0);
  return out;
}

std::map<std::string, double> FeatureVector::named() const {
  std::map<std::string, double> out;
  for (const auto& [id, v] : entries_) out[FeatureIndex::name(id)] = v;
  return out;
}

std::string FeatureVector::to_string() const {
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  for (const auto& [k, v] : named()) {
    if (!first) os << ' ';
    first = false;
    os << k << '=' << v;
  }
  return os.str();
}

void Weights::set(FeatureId id, double v) {
  if (id >= w_.size()) {
    if (v == 0.0) return;
    w_.resize(id + 1, 0.0);
  }
  w_[id] = v;
}

void Weights::add(const FeatureVector& v, double scale) {
  for (const auto& [id, x] : v) set(id, get(id) + scale * x);
}

void Weights::shrink(double decay) {
  if (decay == 0.0) return;
  for (auto& x : w_) x *= (1.0 - decay);
}

double Weights::dot(const FeatureVector& v) const {
  double s = 0.0;
  for (const auto& [id, x] : v) s += get(id) * x;
  return s;
}

std::map<std::string, double> Weights::named() const {
  std::map<std::string, double> out;
  for (FeatureId id = 0; id < w_.size(); ++id)
    if (w_[id] != 0.0) out[FeatureIndex::name(id)] = w_[id];
  return out;
}

}  // namespace webqa
