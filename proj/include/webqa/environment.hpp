#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace webqa {

struct BoundingBox {
  double x = 0, y = 0, width = 0, height = 0;

  double area() const { return width * height; }
  /// Closed containment: `other` lies entirely inside this box.
  bool contains(const BoundingBox& other) const;
  /// Positive-area intersection.
  bool overlaps(const BoundingBox& other) const;
  bool operator==(const BoundingBox&) const = default;
};

struct TextElement {
  std::string id;
  std::string text;
  BoundingBox box;
  double score = 1.0;
};

struct Blob {
  std::string id;
  BoundingBox box;
  double score = 1.0;
};

struct Arrow {
  std::string id;
  double score = 1.0;
  std::vector<BoundingBox> heads;
};

struct IntraobjectLabel {
  std::string text_id;
  std::string blob_id;
  double score = 1.0;
};

/// Arrow-mediated link. The target eats the source.
struct InterobjectLinkage {
  std::string source_id;
  std::string target_id;
  std::string arrow_id;
  double score = 1.0;
};

/// Organisms and (eater, eaten) pairs, stored as normalized label strings.
struct GoldFoodWeb {
  std::set<std::string> organisms;
  std::set<std::pair<std::string, std::string>> eats;

  bool has_organism(const std::string& label) const { return organisms.contains(label); }
  bool has_eats(const std::string& eater, const std::string& eaten) const {
    return eats.contains({eater, eaten});
  }
};

/// Raw vision extractions as read from an environment file.
struct EnvironmentData {
  std::vector<TextElement> texts;
  std::vector<Blob> blobs;
  std::vector<Arrow> arrows;
  std::vector<IntraobjectLabel> intraobject_labels;
  std::vector<InterobjectLinkage> interobject_linkages;
  std::optional<GoldFoodWeb> gold;
};

struct BestLink {
  std::string arrow_id;
  double link_score = 0.0;
  double path_score = 0.0;
  bool operator==(const BestLink&) const = default;
};

using TextBlobMatching = std::map<std::string, std::string>;
using TextPair = std::pair<std::string, std::string>;
/// Keyed by (source text id, target text id).
using BestLinkMap = std::map<TextPair, BestLink>;

/// Maximum-weight bipartite matching between texts and blobs, weighted by
/// intraobject label scores. Pairs without a label are never matched.
TextBlobMatching match_text_to_blobs(const EnvironmentData& data);

/// Best interobject linkage (by link score) for every ordered text pair,
/// either direct or through matched blobs.
BestLinkMap best_arrow_per_pair(const EnvironmentData& data, const TextBlobMatching& matching);

/// A diagram: raw extractions plus the derived matchings. Immutable once
/// built. Text labels are identified by their normalized string; several
/// text elements may share one label.
class Environment {
 public:
  /// Validates references and computes the derived fields. Throws
  /// DanglingIdError / ParseError.
  explicit Environment(EnvironmentData data);

  static Environment from_json(const nlohmann::json& j);
  static Environment load(const std::string& path);
  nlohmann::json to_json() const;

  const EnvironmentData& data() const { return data_; }
  const std::vector<TextElement>& texts() const { return data_.texts; }
  const std::vector<Blob>& blobs() const { return data_.blobs; }
  const std::vector<Arrow>& arrows() const { return data_.arrows; }
  const std::optional<GoldFoodWeb>& gold() const { return data_.gold; }

  const TextBlobMatching& text_to_blob() const { return matching_; }
  const BestLinkMap& best_links() const { return best_links_; }

  /// Distinct normalized label strings, in order of first appearance.
  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t num_labels() const { return labels_.size(); }
  /// -1 when the string is not a label.
  int label_index(std::string_view label) const;
  /// Highest-scoring text element carrying this label.
  const TextElement& label_text(int label) const { return data_.texts[label_rep_[label]]; }
  /// Best link from any text of `source` to any text of `target`.
  const std::optional<BestLink>& label_link(int source, int target) const {
    return label_links_[static_cast<std::size_t>(source) * labels_.size() + target];
  }

  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  EnvironmentData data_;
  TextBlobMatching matching_;
  BestLinkMap best_links_;
  std::vector<std::string> labels_;
  std::vector<std::size_t> label_rep_;
  std::map<std::string, int, std::less<>> label_ids_;
  std::vector<std::optional<BestLink>> label_links_;
  std::vector<std::string> warnings_;
};

}  // namespace webqa
