#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace subprompt {

// Word-level vocabulary with a fixed block of special tokens at the lowest
// ids. Encoding maps out-of-vocabulary words to <|unk|>.
class Vocab {
 public:
  enum Special : int {
    kSop = 0,           // <|sop|>  start of prompt
    kSot = 1,           // <|sot|>  start of transcript
    kLang = 2,          // <|lang|>
    kTranscribe = 3,    // <|transcribe|>
    kNoTimestamps = 4,  // <|notimestamps|>
    kEot = 5,           // <|eot|>
    kUnk = 6,           // <|unk|>
    kPad = 7,           // <|pad|>
    kNumSpecials = 8,
  };

  Vocab() = default;
  explicit Vocab(std::vector<std::string> words);  // ids assigned in given order

  int size() const { return kNumSpecials + static_cast<int>(words_.size()); }

  int id_of(const std::string& word) const;  // kUnk when absent
  bool contains(const std::string& word) const { return id_of_.count(word) > 0; }
  const std::string& word_of(int id) const;  // specials render as <|name|>

  // Normalizes, tokenizes, maps each word to its id.
  std::vector<int> encode(const std::string& text) const;
  // Inverse for non-special ids; special ids are skipped.
  std::string decode(const std::vector<int>& ids) const;

  std::string to_json() const;  // deterministic key order
  static Vocab from_json(const std::string& text);

  void save(const std::string& path) const;
  static Vocab load(const std::string& path);

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> id_of_;
};

// Words with count >= min_count, ordered by descending count then
// lexicographically. Input strings are normalized/tokenized first.
Vocab build_vocab(const std::vector<std::string>& corpus, int min_count);

}  // namespace subprompt
