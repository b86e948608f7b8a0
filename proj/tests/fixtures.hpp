#pragma once

#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "webqa/environment.hpp"

namespace fixtures {

struct Link {
  std::string source;  // label eaten
  std::string target;  // label that eats
  double score = 1.0;
};

/// Environment with one text element per label laid out on a row, direct
/// text-to-text linkages and an optional gold web.
inline webqa::Environment make_env(const std::vector<std::string>& labels, const std::vector<Link>& links = {},
                                   const std::vector<std::string>& gold_organisms = {},
                                   const std::vector<std::pair<std::string, std::string>>& gold_eats = {},
                                   bool with_gold = false) {
  webqa::EnvironmentData d;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    d.texts.push_back({"t" + std::to_string(i), labels[i], {100.0 * i, 0, 60, 20}, 1.0});
  }
  auto text_id = [&](const std::string& label) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == label) return "t" + std::to_string(i);
    }
    return std::string("?");
  };
  for (std::size_t i = 0; i < links.size(); ++i) {
    d.arrows.push_back({"a" + std::to_string(i), 1.0, {}});
    d.interobject_linkages.push_back(
        {text_id(links[i].source), text_id(links[i].target), "a" + std::to_string(i), links[i].score});
  }
  if (with_gold || !gold_organisms.empty()) {
    webqa::GoldFoodWeb g;
    for (const auto& o : gold_organisms) g.organisms.insert(o);
    for (const auto& e : gold_eats) g.eats.insert(e);
    d.gold = g;
  }
  return webqa::Environment(std::move(d));
}

}  // namespace fixtures
