#include "subprompt/text.hpp"

#include <cctype>
#include <sstream>

namespace subprompt {

std::string normalize_text(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (std::isalnum(c)) {
      out.push_back(static_cast<char>(std::tolower(c)));
    } else if (c == '\'') {
      // keep apostrophes only between word characters (don't -> don't, 'x -> x)
      bool prev_word = !out.empty() && std::isalnum(static_cast<unsigned char>(out.back()));
      bool next_word = i + 1 < text.size() && std::isalnum(static_cast<unsigned char>(text[i + 1]));
      if (prev_word && next_word) out.push_back('\'');
    } else if (c >= 0x80) {
      out.push_back(text[i]);  // pass non-ASCII bytes through untouched
    } else {
      out.push_back(' ');
    }
  }
  return out;
}

std::vector<std::string> tokenize(const std::string& text) {
  std::istringstream iss(normalize_text(text));
  std::vector<std::string> words;
  std::string w;
  while (iss >> w) words.push_back(w);
  return words;
}

std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out.push_back(' ');
    out += words[i];
  }
  return out;
}

}  // namespace subprompt
