#include "subprompt/decoder_input.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "subprompt/text.hpp"

namespace subprompt {

std::size_t DecoderInput::prompt_len() const {
  return static_cast<std::size_t>(std::count(roles.begin(), roles.end(), Role::prompt));
}

std::size_t DecoderInput::target_len() const {
  return static_cast<std::size_t>(std::count(roles.begin(), roles.end(), Role::target));
}

DecoderInput assemble_decoder_input(const Vocab& vocab, const std::string& subtitle,
                                    const std::string& target) {
  DecoderInput d;
  auto push = [&](int id, Role role) {
    d.ids.push_back(id);
    d.roles.push_back(role);
    d.loss_mask.push_back(role == Role::target || role == Role::eot ? 1 : 0);
  };
  push(Vocab::kSop, Role::control);
  for (int id : vocab.encode(subtitle)) push(id, Role::prompt);
  push(Vocab::kSot, Role::control);
  push(Vocab::kLang, Role::control);
  push(Vocab::kTranscribe, Role::control);
  push(Vocab::kNoTimestamps, Role::control);
  for (int id : vocab.encode(target)) push(id, Role::target);
  push(Vocab::kEot, Role::eot);
  return d;
}

FilterDecision hallucination_filter(const std::string& transcript, int max_tokens,
                                    double max_rep_ratio) {
  if (max_tokens < 1) throw std::invalid_argument("hallucination_filter: max_tokens < 1");
  if (max_rep_ratio <= 0.0 || max_rep_ratio > 1.0)
    throw std::invalid_argument("hallucination_filter: max_rep_ratio out of (0,1]");
  auto words = tokenize(transcript);
  if (static_cast<int>(words.size()) > max_tokens) return FilterDecision::drop;
  if (words.size() >= 5) {
    std::map<std::string, std::size_t> counts;
    std::size_t top = 0;
    for (const auto& w : words) top = std::max(top, ++counts[w]);
    if (static_cast<double>(top) / static_cast<double>(words.size()) > max_rep_ratio)
      return FilterDecision::drop;
  }
  return FilterDecision::keep;
}

}  // namespace subprompt
