#pragma once

#include <string>
#include <vector>

namespace subprompt {

// Normalization applied before tokenization and scoring: lowercase ASCII,
// strip punctuation except intra-word apostrophes.
std::string normalize_text(const std::string& text);

// Whitespace tokenization of normalized text.
std::vector<std::string> tokenize(const std::string& text);

std::string join_words(const std::vector<std::string>& words);

}  // namespace subprompt
