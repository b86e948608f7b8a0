#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace webqa::text {

/// Lowercases and splits on whitespace and punctuation. Punctuation
/// characters are kept as single-character tokens.
std::vector<std::string> tokenize(std::string_view s);

/// Like tokenize() but drops punctuation tokens.
std::vector<std::string> word_tokens(std::string_view s);

std::string to_lower(std::string_view s);

/// Lowercase, trim and collapse internal whitespace. Used as the identity of
/// a text label.
std::string normalize_label(std::string_view s);

/// Plural stemming: "ies" -> "y", otherwise a trailing "s" is dropped
/// (not "ss", and only for words longer than three characters).
std::string stem(std::string_view word);

bool is_punctuation(std::string_view token);

std::size_t edit_distance(std::string_view a, std::string_view b);

/// 1 - distance / max(len). Two empty strings have similarity 1.
double edit_similarity(std::string_view a, std::string_view b);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace webqa::text
