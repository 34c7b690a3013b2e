#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace confshape::detail {

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

inline std::string_view trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

// Whitespace-delimited tokens. This is the project's token unit for CoT
// truncation and mock token counting.
inline std::vector<std::string_view> ws_tokens(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t b = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    if (i > b) out.push_back(s.substr(b, i - b));
  }
  return out;
}

inline std::string join_tokens(const std::vector<std::string_view>& toks,
                               std::size_t count) {
  std::string out;
  for (std::size_t i = 0; i < count && i < toks.size(); ++i) {
    if (i) out += ' ';
    out.append(toks[i]);
  }
  return out;
}

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

inline std::string collapse_ws(std::string_view s) {
  std::string out;
  bool in_ws = true;  // also strips leading whitespace
  for (char c : s) {
    if (is_space(c)) {
      if (!in_ws) out += ' ';
      in_ws = true;
    } else {
      out += c;
      in_ws = false;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

inline bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

// Case-insensitive substring search with word-boundary checks at both ends
// (only enforced where the needle itself starts/ends with a word character).
// Returns the match offset or npos.
inline std::size_t find_term_ci(std::string_view lower_haystack,
                                std::string_view lower_needle,
                                std::size_t from = 0) {
  if (lower_needle.empty()) return std::string_view::npos;
  const bool check_front = is_word_char(lower_needle.front());
  const bool check_back = is_word_char(lower_needle.back());
  std::size_t pos = from;
  while (pos + lower_needle.size() <= lower_haystack.size()) {
    pos = lower_haystack.find(lower_needle, pos);
    if (pos == std::string_view::npos) return std::string_view::npos;
    const bool front_ok =
        !check_front || pos == 0 || !is_word_char(lower_haystack[pos - 1]);
    const std::size_t end = pos + lower_needle.size();
    const bool back_ok = !check_back || end == lower_haystack.size() ||
                         !is_word_char(lower_haystack[end]);
    if (front_ok && back_ok) return pos;
    ++pos;
  }
  return std::string_view::npos;
}

// Byte offsets one past each sentence end. A sentence ends at a run of
// terminal punctuation (. ! ?) followed by whitespace or end of text.
inline std::vector<std::size_t> sentence_ends(std::string_view text) {
  std::vector<std::size_t> ends;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    std::size_t j = i;
    while (j + 1 < text.size() &&
           (text[j + 1] == '.' || text[j + 1] == '!' || text[j + 1] == '?')) {
      ++j;
    }
    if (j + 1 >= text.size() || is_space(text[j + 1])) {
      ends.push_back(j + 1);
      i = j;
    }
  }
  if (!detail::trim(text).empty() &&
      (ends.empty() || ends.back() < text.size())) {
    ends.push_back(text.size());  // trailing text without terminal punctuation
  }
  return ends;
}

}  // namespace confshape::detail
