#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "confshape/detail/text.hpp"

namespace confshape::harness {

enum class AnswerFormat { AnswerTag, Boxed, McqLetter };

namespace detail_extract {

// Last well-formed <answer>...</answer> pair. Degenerate completions can end
// in long runs of orphan close tags; those are ignored, only an open tag with
// a following close tag counts.
inline std::optional<std::string> last_answer_tag(std::string_view text) {
  constexpr std::string_view kOpen = "<answer>";
  constexpr std::string_view kClose = "</answer>";
  std::size_t search_end = text.size();
  while (true) {
    std::size_t open = text.rfind(kOpen, search_end == 0 ? 0 : search_end - 1);
    if (open == std::string_view::npos) return std::nullopt;
    std::size_t body = open + kOpen.size();
    std::size_t close = text.find(kClose, body);
    if (close != std::string_view::npos) {
      return std::string(confshape::detail::trim(text.substr(body, close - body)));
    }
    if (open == 0) return std::nullopt;
    search_end = open;
  }
}

// Last balanced \boxed{...}, brace matching with nesting.
inline std::optional<std::string> last_boxed(std::string_view text) {
  constexpr std::string_view kBoxed = "\\boxed{";
  std::size_t search_end = text.size();
  while (true) {
    std::size_t pos = text.rfind(kBoxed, search_end == 0 ? 0 : search_end - 1);
    if (pos == std::string_view::npos) return std::nullopt;
    std::size_t i = pos + kBoxed.size();
    int depth = 1;
    for (; i < text.size(); ++i) {
      if (text[i] == '{') {
        ++depth;
      } else if (text[i] == '}') {
        if (--depth == 0) break;
      }
    }
    if (depth == 0) {
      std::size_t body = pos + kBoxed.size();
      return std::string(text.substr(body, i - body));
    }
    if (pos == 0) return std::nullopt;
    search_end = pos;  // unbalanced; try an earlier occurrence
  }
}

// Last standalone option letter A-E. A token counts when the letter stands
// alone or is wrapped/punctuated ("C", "(C)", "C.", "[c]", "C:"). Bare
// lowercase letters are not counted so the article "a" cannot match.
inline std::optional<std::string> last_mcq_letter(std::string_view text) {
  auto tokens = confshape::detail::ws_tokens(text);
  for (std::size_t i = tokens.size(); i-- > 0;) {
    std::string_view tok = tokens[i];
    bool wrapped = false;
    while (!tok.empty() && (tok.front() == '(' || tok.front() == '[' ||
                            tok.front() == '*' || tok.front() == '"')) {
      tok.remove_prefix(1);
      wrapped = true;
    }
    while (!tok.empty() &&
           (tok.back() == ')' || tok.back() == ']' || tok.back() == '.' ||
            tok.back() == ':' || tok.back() == ',' || tok.back() == '*' ||
            tok.back() == '"')) {
      tok.remove_suffix(1);
      wrapped = true;
    }
    if (tok.size() != 1) continue;
    char c = tok[0];
    if (c >= 'A' && c <= 'E') return std::string(1, c);
    if (wrapped && c >= 'a' && c <= 'e') {
      return std::string(1, static_cast<char>(c - 'a' + 'A'));
    }
  }
  return std::nullopt;
}

}  // namespace detail_extract

inline std::optional<std::string> extract_answer(std::string_view text,
                                                 AnswerFormat format) {
  switch (format) {
    case AnswerFormat::AnswerTag:
      return detail_extract::last_answer_tag(text);
    case AnswerFormat::Boxed:
      return detail_extract::last_boxed(text);
    case AnswerFormat::McqLetter:
      return detail_extract::last_mcq_letter(text);
  }
  return std::nullopt;
}

}  // namespace confshape::harness
