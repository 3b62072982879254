#pragma once

#include <algorithm>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace council::text {

inline std::string trim(std::string_view s) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

/// Lowercase, trim, and collapse internal whitespace runs to single spaces.
inline std::string normalize(std::string_view s) {
  std::string lowered = to_lower(trim(s));
  std::string out;
  out.reserve(lowered.size());
  bool in_ws = false;
  for (unsigned char c : lowered) {
    if (std::isspace(c)) {
      in_ws = true;
      continue;
    }
    if (in_ws && !out.empty()) out.push_back(' ');
    in_ws = false;
    out.push_back(static_cast<char>(c));
  }
  return out;
}

/// normalize() plus punctuation stripping; the reference claim-identity key.
inline std::string normalize_claim_key(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool in_ws = false;
  for (unsigned char c : s) {
    if (std::isspace(c)) {
      in_ws = true;
      continue;
    }
    if (std::ispunct(c)) continue;
    if (in_ws && !out.empty()) out.push_back(' ');
    in_ws = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

inline std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) tokens.emplace_back(s.substr(start, i - start));
  }
  return tokens;
}

/// Whitespace-delimited token count after trimming.
inline std::size_t token_count(std::string_view s) { return split_whitespace(s).size(); }

/// Sentence segmentation on ./!/? terminators; keeps the terminator attached.
inline std::vector<std::string> split_sentences(std::string_view s) {
  std::vector<std::string> sentences;
  std::string current;
  for (std::size_t i = 0; i < s.size(); ++i) {
    current.push_back(s[i]);
    char c = s[i];
    if (c == '.' || c == '!' || c == '?') {
      // Swallow runs of terminators ("now??", "wait...").
      while (i + 1 < s.size() && (s[i + 1] == '.' || s[i + 1] == '!' || s[i + 1] == '?')) {
        current.push_back(s[++i]);
      }
      std::string t = trim(current);
      if (!t.empty()) sentences.push_back(std::move(t));
      current.clear();
    }
  }
  std::string tail = trim(current);
  if (!tail.empty()) sentences.push_back(std::move(tail));
  return sentences;
}

}  // namespace council::text
