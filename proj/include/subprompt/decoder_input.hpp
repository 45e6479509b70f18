#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "subprompt/vocab.hpp"

namespace subprompt {

enum class Role : std::uint8_t { prompt, control, target, eot };

// Decoder token sequence in the fixed layout
//   <|sop|> prompt* <|sot|> <|lang|> <|transcribe|> <|notimestamps|> target* <|eot|>
// loss_mask is true exactly on target and eot positions.
struct DecoderInput {
  std::vector<int> ids;
  std::vector<Role> roles;
  std::vector<std::uint8_t> loss_mask;

  std::size_t length() const { return ids.size(); }
  std::size_t prompt_len() const;  // T_p
  std::size_t target_len() const;  // T_t
  // Positions [prompt_begin, prompt_begin + T_p) hold prompt tokens.
  static constexpr std::size_t prompt_begin = 1;
};

DecoderInput assemble_decoder_input(const Vocab& vocab, const std::string& subtitle,
                                    const std::string& target);

enum class FilterDecision { keep, drop };

// Rejects degenerate transcripts: too long, or (at >= 5 tokens) dominated by
// one repeated word.
FilterDecision hallucination_filter(const std::string& transcript, int max_tokens = 100,
                                    double max_rep_ratio = 0.5);

}  // namespace subprompt
