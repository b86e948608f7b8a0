#include "webqa/text.hpp"

#include <algorithm>
#include <cctype>

namespace webqa::text {

namespace {

bool is_word_char(unsigned char c) {
  return std::isalnum(c) || c >= 0x80;
}

}  // namespace

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : s) {
    auto c = static_cast<unsigned char>(ch);
    if (is_word_char(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
      continue;
    }
    if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
    if (!std::isspace(c)) tokens.emplace_back(1, ch);
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

bool is_punctuation(std::string_view token) {
  return !token.empty() &&
         std::none_of(token.begin(), token.end(),
                      [](char c) { return is_word_char(static_cast<unsigned char>(c)); });
}

std::vector<std::string> word_tokens(std::string_view s) {
  auto tokens = tokenize(s);
  std::erase_if(tokens, [](const std::string& t) { return is_punctuation(t); });
  return tokens;
}

std::string normalize_label(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char ch : s) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

std::string stem(std::string_view word) {
  std::string w(word);
  if (w.size() > 3 && w.ends_with("ies")) return w.substr(0, w.size() - 3) + "y";
  if (w.size() > 3 && w.back() == 's' && !w.ends_with("ss")) w.pop_back();
  return w;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double edit_similarity(std::string_view a, std::string_view b) {
  std::size_t len = std::max(a.size(), b.size());
  if (len == 0) return 1.0;
  return 1.0 - static_cast<double>(edit_distance(a, b)) / static_cast<double>(len);
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace webqa::text
