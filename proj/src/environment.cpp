#include "webqa/environment.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

#include "webqa/errors.hpp"
#include "webqa/text.hpp"

namespace webqa {

using nlohmann::json;

bool BoundingBox::contains(const BoundingBox& o) const {
  return o.x >= x && o.y >= y && o.x + o.width <= x + width && o.y + o.height <= y + height;
}

bool BoundingBox::overlaps(const BoundingBox& o) const {
  double w = std::min(x + width, o.x + o.width) - std::max(x, o.x);
  double h = std::min(y + height, o.y + o.height) - std::max(y, o.y);
  return w > 0 && h > 0;
}

namespace {

// Minimum-cost assignment on a square matrix (Kuhn-Munkres with
// potentials). Returns the column assigned to each row.
std::vector<int> solve_assignment(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      int i0 = p[j0], j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

double clamp_score(double s, const std::string& what, std::vector<std::string>& warnings) {
  if (s >= 0.0 && s <= 1.0) return s;
  double c = std::clamp(s, 0.0, 1.0);
  std::ostringstream os;
  os << what << ": score " << s << " clamped to " << c;
  warnings.push_back(os.str());
  return c;
}

// Best intraobject score per (text, blob); duplicates keep the maximum.
std::map<TextPair, double> label_scores(const EnvironmentData& data) {
  std::map<TextPair, double> out;
  for (const auto& l : data.intraobject_labels) {
    auto [it, inserted] = out.try_emplace({l.text_id, l.blob_id}, l.score);
    if (!inserted) it->second = std::max(it->second, l.score);
  }
  return out;
}

}  // namespace

TextBlobMatching match_text_to_blobs(const EnvironmentData& data) {
  TextBlobMatching out;
  auto scores = label_scores(data);
  if (scores.empty()) return out;

  // Rows and columns in id order so the solver's tie-breaking prefers
  // lexicographically smaller pairs.
  std::vector<std::string> texts, blobs;
  for (const auto& t : data.texts) texts.push_back(t.id);
  for (const auto& b : data.blobs) blobs.push_back(b.id);
  std::sort(texts.begin(), texts.end());
  std::sort(blobs.begin(), blobs.end());
  const std::size_t n = std::max(texts.size(), blobs.size());
  std::vector<std::vector<double>> cost(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < texts.size(); ++i)
    for (std::size_t j = 0; j < blobs.size(); ++j)
      if (auto it = scores.find({texts[i], blobs[j]}); it != scores.end()) cost[i][j] = -it->second;

  auto assign = solve_assignment(cost);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    int j = assign[i];
    if (j < 0 || static_cast<std::size_t>(j) >= blobs.size()) continue;
    auto it = scores.find({texts[i], blobs[j]});
    // A zero-score label adds nothing to the objective; leave it unmatched.
    if (it != scores.end() && it->second > 0.0) out[texts[i]] = blobs[j];
  }
  return out;
}

BestLinkMap best_arrow_per_pair(const EnvironmentData& data, const TextBlobMatching& matching) {
  std::set<std::string> text_ids;
  for (const auto& t : data.texts) text_ids.insert(t.id);
  std::map<std::string, std::string> blob_to_text;
  for (const auto& [t, b] : matching) blob_to_text[b] = t;
  auto scores = label_scores(data);

  // An endpoint resolves to at most one text, with the intraobject factor
  // on the path.
  auto resolve = [&](const std::string& id) -> std::optional<std::pair<std::string, double>> {
    if (text_ids.contains(id)) return std::pair{id, 1.0};
    auto it = blob_to_text.find(id);
    if (it == blob_to_text.end()) return std::nullopt;
    return std::pair{it->second, scores.at({it->second, id})};
  };

  BestLinkMap out;
  for (const auto& link : data.interobject_linkages) {
    auto src = resolve(link.source_id);
    auto dst = resolve(link.target_id);
    if (!src || !dst) continue;
    BestLink cand{link.arrow_id, link.score, link.score * src->second * dst->second};
    auto key = TextPair{src->first, dst->first};
    auto it = out.find(key);
    if (it == out.end()) {
      out.emplace(key, cand);
      continue;
    }
    const BestLink& cur = it->second;
    bool better = cand.link_score > cur.link_score ||
                  (cand.link_score == cur.link_score &&
                   (cand.arrow_id < cur.arrow_id ||
                    (cand.arrow_id == cur.arrow_id && cand.path_score > cur.path_score)));
    if (better) it->second = cand;
  }
  return out;
}

Environment::Environment(EnvironmentData data) : data_(std::move(data)) {
  std::set<std::string> ids;
  auto claim = [&](const std::string& id, const char* kind) {
    if (id.empty()) throw ParseError(std::string(kind) + ": empty id");
    if (!ids.insert(id).second) throw ParseError(std::string(kind) + ": duplicate id '" + id + "'");
  };
  std::set<std::string> text_ids, blob_ids, arrow_ids;
  for (auto& t : data_.texts) {
    claim(t.id, "texts");
    text_ids.insert(t.id);
    if (text::normalize_label(t.text).empty()) throw ParseError("texts: '" + t.id + "' has empty text");
    t.score = clamp_score(t.score, "text " + t.id, warnings_);
  }
  for (auto& b : data_.blobs) {
    claim(b.id, "blobs");
    blob_ids.insert(b.id);
    b.score = clamp_score(b.score, "blob " + b.id, warnings_);
  }
  for (auto& a : data_.arrows) {
    claim(a.id, "arrows");
    arrow_ids.insert(a.id);
    a.score = clamp_score(a.score, "arrow " + a.id, warnings_);
  }
  for (auto& l : data_.intraobject_labels) {
    if (!text_ids.contains(l.text_id))
      throw DanglingIdError("intraobject label refers to unknown text '" + l.text_id + "'");
    if (!blob_ids.contains(l.blob_id))
      throw DanglingIdError("intraobject label refers to unknown blob '" + l.blob_id + "'");
    l.score = clamp_score(l.score, "intraobject label " + l.text_id + "/" + l.blob_id, warnings_);
  }
  for (auto& l : data_.interobject_linkages) {
    for (const auto* id : {&l.source_id, &l.target_id})
      if (!text_ids.contains(*id) && !blob_ids.contains(*id))
        throw DanglingIdError("interobject linkage refers to unknown element '" + *id + "'");
    if (!arrow_ids.contains(l.arrow_id))
      throw DanglingIdError("interobject linkage refers to unknown arrow '" + l.arrow_id + "'");
    l.score = clamp_score(l.score, "interobject linkage via " + l.arrow_id, warnings_);
  }
  if (data_.gold) {
    GoldFoodWeb norm;
    for (const auto& o : data_.gold->organisms) norm.organisms.insert(text::normalize_label(o));
    for (const auto& [x, y] : data_.gold->eats) {
      auto a = text::normalize_label(x), b = text::normalize_label(y);
      if (!norm.organisms.contains(a) || !norm.organisms.contains(b))
        throw ParseError("gold_food_web: eats pair (" + a + ", " + b + ") names a non-organism");
      norm.eats.insert({a, b});
    }
    data_.gold = std::move(norm);
  }

  for (std::size_t i = 0; i < data_.texts.size(); ++i) {
    auto label = text::normalize_label(data_.texts[i].text);
    auto [it, inserted] = label_ids_.try_emplace(label, static_cast<int>(labels_.size()));
    if (inserted) {
      labels_.push_back(label);
      label_rep_.push_back(i);
    } else if (data_.texts[i].score > data_.texts[label_rep_[it->second]].score) {
      label_rep_[it->second] = i;
    }
  }

  matching_ = match_text_to_blobs(data_);
  best_links_ = best_arrow_per_pair(data_, matching_);

  std::map<std::string, int> text_label;
  for (const auto& t : data_.texts) text_label[t.id] = label_ids_.at(text::normalize_label(t.text));
  const std::size_t n = labels_.size();
  label_links_.assign(n * n, std::nullopt);
  for (const auto& [pair, link] : best_links_) {
    auto& slot = label_links_[text_label[pair.first] * n + text_label[pair.second]];
    if (!slot || link.link_score > slot->link_score ||
        (link.link_score == slot->link_score && link.arrow_id < slot->arrow_id))
      slot = link;
  }
}

int Environment::label_index(std::string_view label) const {
  auto it = label_ids_.find(label);
  return it == label_ids_.end() ? -1 : it->second;
}

namespace {

[[noreturn]] void field_error(const std::string& path, const std::string& msg) {
  throw ParseError(path + ": " + msg);
}

const json& field(const json& obj, const char* name, const std::string& path) {
  if (!obj.is_object()) field_error(path, "expected an object");
  auto it = obj.find(name);
  if (it == obj.end()) field_error(path + "." + name, "missing field");
  return *it;
}

std::string get_string(const json& obj, const char* name, const std::string& path) {
  const json& v = field(obj, name, path);
  if (!v.is_string()) field_error(path + "." + name, "expected a string");
  return v.get<std::string>();
}

double get_number(const json& obj, const char* name, const std::string& path) {
  const json& v = field(obj, name, path);
  if (!v.is_number()) field_error(path + "." + name, "expected a number");
  return v.get<double>();
}

BoundingBox get_box(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 4 ||
      !std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number(); }))
    field_error(path, "expected [x, y, w, h]");
  BoundingBox b{v[0].get<double>(), v[1].get<double>(), v[2].get<double>(), v[3].get<double>()};
  if (b.width < 0 || b.height < 0) field_error(path, "negative width or height");
  return b;
}

const json& get_array(const json& obj, const char* name) {
  static const json empty = json::array();
  auto it = obj.find(name);
  if (it == obj.end()) return empty;
  if (!it->is_array()) field_error(name, "expected an array");
  return *it;
}

json box_json(const BoundingBox& b) { return json::array({b.x, b.y, b.width, b.height}); }

}  // namespace

Environment Environment::from_json(const json& j) {
  if (!j.is_object()) throw ParseError("environment: expected a JSON object");
  EnvironmentData d;
  const json& texts = get_array(j, "texts");
  for (std::size_t i = 0; i < texts.size(); ++i) {
    std::string p = "texts[" + std::to_string(i) + "]";
    d.texts.push_back({get_string(texts[i], "id", p), get_string(texts[i], "text", p),
                       get_box(field(texts[i], "box", p), p + ".box"),
                       get_number(texts[i], "score", p)});
  }
  const json& blobs = get_array(j, "blobs");
  for (std::size_t i = 0; i < blobs.size(); ++i) {
    std::string p = "blobs[" + std::to_string(i) + "]";
    d.blobs.push_back({get_string(blobs[i], "id", p), get_box(field(blobs[i], "box", p), p + ".box"),
                       get_number(blobs[i], "score", p)});
  }
  const json& arrows = get_array(j, "arrows");
  for (std::size_t i = 0; i < arrows.size(); ++i) {
    std::string p = "arrows[" + std::to_string(i) + "]";
    Arrow a{get_string(arrows[i], "id", p), get_number(arrows[i], "score", p), {}};
    if (auto it = arrows[i].find("heads"); it != arrows[i].end()) {
      if (!it->is_array()) field_error(p + ".heads", "expected an array of boxes");
      for (std::size_t h = 0; h < it->size(); ++h)
        a.heads.push_back(get_box((*it)[h], p + ".heads[" + std::to_string(h) + "]"));
    }
    d.arrows.push_back(std::move(a));
  }
  const json& intra = get_array(j, "intraobject_labels");
  for (std::size_t i = 0; i < intra.size(); ++i) {
    std::string p = "intraobject_labels[" + std::to_string(i) + "]";
    d.intraobject_labels.push_back({get_string(intra[i], "text_id", p), get_string(intra[i], "blob_id", p),
                                    get_number(intra[i], "score", p)});
  }
  const json& inter = get_array(j, "interobject_linkages");
  for (std::size_t i = 0; i < inter.size(); ++i) {
    std::string p = "interobject_linkages[" + std::to_string(i) + "]";
    d.interobject_linkages.push_back({get_string(inter[i], "source_id", p),
                                      get_string(inter[i], "target_id", p),
                                      get_string(inter[i], "arrow_id", p), get_number(inter[i], "score", p)});
  }
  if (auto it = j.find("gold_food_web"); it != j.end() && !it->is_null()) {
    GoldFoodWeb g;
    const json& orgs = field(*it, "organisms", "gold_food_web");
    if (!orgs.is_array()) field_error("gold_food_web.organisms", "expected an array of strings");
    for (const auto& o : orgs) {
      if (!o.is_string()) field_error("gold_food_web.organisms", "expected an array of strings");
      g.organisms.insert(o.get<std::string>());
    }
    const json& eats = field(*it, "eats", "gold_food_web");
    if (!eats.is_array()) field_error("gold_food_web.eats", "expected an array of pairs");
    for (std::size_t i = 0; i < eats.size(); ++i) {
      const json& e = eats[i];
      if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string())
        field_error("gold_food_web.eats[" + std::to_string(i) + "]", "expected [eater, eaten]");
      g.eats.insert({e[0].get<std::string>(), e[1].get<std::string>()});
    }
    d.gold = std::move(g);
  }
  return Environment(std::move(d));
}

Environment Environment::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open environment file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string content = buf.str();
  json j;
  try {
    j = json::parse(content);
  } catch (const json::parse_error& e) {
    auto upto = std::min<std::size_t>(e.byte, content.size());
    int line = 1 + static_cast<int>(std::count(content.begin(), content.begin() + upto, '\n'));
    throw ParseError(path + ": " + e.what(), line);
  }
  try {
    return from_json(j);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

json Environment::to_json() const {
  json j;
  j["texts"] = json::array();
  for (const auto& t : data_.texts)
    j["texts"].push_back({{"id", t.id}, {"text", t.text}, {"box", box_json(t.box)}, {"score", t.score}});
  j["blobs"] = json::array();
  for (const auto& b : data_.blobs)
    j["blobs"].push_back({{"id", b.id}, {"box", box_json(b.box)}, {"score", b.score}});
  j["arrows"] = json::array();
  for (const auto& a : data_.arrows) {
    json heads = json::array();
    for (const auto& h : a.heads) heads.push_back(box_json(h));
    j["arrows"].push_back({{"id", a.id}, {"score", a.score}, {"heads", heads}});
  }
  j["intraobject_labels"] = json::array();
  for (const auto& l : data_.intraobject_labels)
    j["intraobject_labels"].push_back({{"text_id", l.text_id}, {"blob_id", l.blob_id}, {"score", l.score}});
  j["interobject_linkages"] = json::array();
  for (const auto& l : data_.interobject_linkages)
    j["interobject_linkages"].push_back(
        {{"source_id", l.source_id}, {"target_id", l.target_id}, {"arrow_id", l.arrow_id}, {"score", l.score}});
  if (data_.gold) {
    json eats = json::array();
    for (const auto& [x, y] : data_.gold->eats) eats.push_back({x, y});
    j["gold_food_web"] = {{"organisms", data_.gold->organisms}, {"eats", eats}};
  }
  return j;
}

}  // namespace webqa
