#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace subprompt {

enum class EditKind { match, substitution, deletion, insertion };

struct EditOp {
  EditKind kind;
  std::string ref;  // empty for insertions
  std::string hyp;  // empty for deletions
};

struct Alignment {
  std::vector<EditOp> ops;
  long cost() const;  // substitutions + deletions + insertions
};

struct ErrorCounts {
  long matches = 0, subs = 0, dels = 0, ins = 0;
  long total_ref_words = 0;
};

struct EvalReport {
  double wer = 0.0;  // percent
  std::optional<double> rwer;
  std::optional<double> ower;
  ErrorCounts counts;
  long rare_ref_words = 0, oov_ref_words = 0;
  long rare_errors = 0, oov_errors = 0;

  std::string to_json() const;
  std::string table() const;  // human-readable
};

// Minimal-cost word alignment, unit costs, deterministic tie-break
// match > substitution > deletion > insertion.
Alignment align(const std::vector<std::string>& ref, const std::vector<std::string>& hyp);

// Corpus-pooled WER: errors summed over all pairs before dividing by the
// total reference word count. Text is normalized/tokenized internally.
EvalReport corpus_wer(const std::vector<std::pair<std::string, std::string>>& ref_hyp_pairs);

std::map<std::string, long> word_frequencies(const std::vector<std::string>& training_corpus);

// WER plus rare/OOV breakdowns. A reference word is oov when its training
// frequency is 0, rare when 0 < freq < rare_threshold. A reference word
// counts as a class error iff its alignment op is a substitution or deletion;
// insertions never enter class tallies. A class with no reference words
// reports its rate as absent.
EvalReport breakdown_wer(const std::vector<std::pair<std::string, std::string>>& ref_hyp_pairs,
                         const std::map<std::string, long>& freqs, int rare_threshold = 10);

}  // namespace subprompt
