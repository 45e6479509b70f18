#include "subprompt/vocab.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "json.hpp"
#include "subprompt/manifest.hpp"
#include "subprompt/text.hpp"

using nlohmann::ordered_json;

namespace subprompt {

namespace {
const char* kSpecialNames[Vocab::kNumSpecials] = {
    "<|sop|>", "<|sot|>", "<|lang|>", "<|transcribe|>", "<|notimestamps|>",
    "<|eot|>", "<|unk|>", "<|pad|>"};
}

Vocab::Vocab(std::vector<std::string> words) : words_(std::move(words)) {
  for (std::size_t i = 0; i < words_.size(); ++i) {
    auto [it, inserted] = id_of_.emplace(words_[i], kNumSpecials + static_cast<int>(i));
    if (!inserted) throw std::invalid_argument("duplicate vocab word: " + words_[i]);
  }
}

int Vocab::id_of(const std::string& word) const {
  auto it = id_of_.find(word);
  return it == id_of_.end() ? kUnk : it->second;
}

const std::string& Vocab::word_of(int id) const {
  if (id < 0 || id >= size()) throw std::out_of_range("token id out of range");
  if (id < kNumSpecials) {
    static const std::vector<std::string> names(kSpecialNames, kSpecialNames + kNumSpecials);
    return names[id];
  }
  return words_[id - kNumSpecials];
}

std::vector<int> Vocab::encode(const std::string& text) const {
  std::vector<int> ids;
  for (const auto& w : tokenize(text)) ids.push_back(id_of(w));
  return ids;
}

std::string Vocab::decode(const std::vector<int>& ids) const {
  std::string out;
  for (int id : ids) {
    if (id < kNumSpecials) continue;
    if (!out.empty()) out.push_back(' ');
    out += word_of(id);
  }
  return out;
}

std::string Vocab::to_json() const {
  ordered_json j;
  ordered_json specials;
  for (int i = 0; i < kNumSpecials; ++i) specials[kSpecialNames[i]] = i;
  j["specials"] = specials;
  ordered_json words;
  for (std::size_t i = 0; i < words_.size(); ++i)
    words[words_[i]] = kNumSpecials + static_cast<int>(i);
  j["words"] = words;
  return j.dump(2);
}

Vocab Vocab::from_json(const std::string& text) {
  auto j = ordered_json::parse(text);
  std::vector<std::pair<int, std::string>> by_id;
  for (auto& [word, id] : j.at("words").items()) by_id.emplace_back(id.get<int>(), word);
  std::sort(by_id.begin(), by_id.end());
  std::vector<std::string> words;
  for (std::size_t i = 0; i < by_id.size(); ++i) {
    if (by_id[i].first != kNumSpecials + static_cast<int>(i))
      throw std::runtime_error("vocab json: non-contiguous word ids");
    words.push_back(by_id[i].second);
  }
  return Vocab(std::move(words));
}

void Vocab::save(const std::string& path) const { write_file_atomic(path, to_json()); }

Vocab Vocab::load(const std::string& path) { return from_json(read_file(path)); }

Vocab build_vocab(const std::vector<std::string>& corpus, int min_count) {
  std::map<std::string, long> counts;
  for (const auto& line : corpus)
    for (const auto& w : tokenize(line)) ++counts[w];
  std::vector<std::pair<std::string, long>> kept;
  for (const auto& [w, c] : counts)
    if (c >= min_count) kept.emplace_back(w, c);
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> words;
  words.reserve(kept.size());
  for (auto& [w, c] : kept) words.push_back(w);
  return Vocab(std::move(words));
}

}  // namespace subprompt
