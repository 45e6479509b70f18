#include "subprompt/wer.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "subprompt/text.hpp"

using nlohmann::ordered_json;

namespace subprompt {

long Alignment::cost() const {
  long c = 0;
  for (const auto& op : ops)
    if (op.kind != EditKind::match) ++c;
  return c;
}

Alignment align(const std::vector<std::string>& ref, const std::vector<std::string>& hyp) {
  const std::size_t r = ref.size(), h = hyp.size();
  std::vector<long> dp((r + 1) * (h + 1));
  auto d = [&](std::size_t i, std::size_t j) -> long& { return dp[i * (h + 1) + j]; };
  for (std::size_t i = 0; i <= r; ++i) d(i, 0) = static_cast<long>(i);
  for (std::size_t j = 0; j <= h; ++j) d(0, j) = static_cast<long>(j);
  for (std::size_t i = 1; i <= r; ++i)
    for (std::size_t j = 1; j <= h; ++j) {
      long diag = d(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      d(i, j) = std::min({diag, d(i - 1, j) + 1, d(i, j - 1) + 1});
    }

  Alignment a;
  std::size_t i = r, j = h;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && ref[i - 1] == hyp[j - 1] && d(i, j) == d(i - 1, j - 1)) {
      a.ops.push_back({EditKind::match, ref[i - 1], hyp[j - 1]});
      --i, --j;
    } else if (i > 0 && j > 0 && d(i, j) == d(i - 1, j - 1) + 1) {
      a.ops.push_back({EditKind::substitution, ref[i - 1], hyp[j - 1]});
      --i, --j;
    } else if (i > 0 && d(i, j) == d(i - 1, j) + 1) {
      a.ops.push_back({EditKind::deletion, ref[i - 1], ""});
      --i;
    } else {
      a.ops.push_back({EditKind::insertion, "", hyp[j - 1]});
      --j;
    }
  }
  std::reverse(a.ops.begin(), a.ops.end());
  return a;
}

namespace {

void tally(const Alignment& a, ErrorCounts& c) {
  for (const auto& op : a.ops) {
    switch (op.kind) {
      case EditKind::match: ++c.matches; break;
      case EditKind::substitution: ++c.subs; break;
      case EditKind::deletion: ++c.dels; break;
      case EditKind::insertion: ++c.ins; break;
    }
  }
}

double percent(long num, long den) { return 100.0 * static_cast<double>(num) / static_cast<double>(den); }

}  // namespace

EvalReport corpus_wer(const std::vector<std::pair<std::string, std::string>>& pairs) {
  EvalReport rep;
  for (const auto& [ref, hyp] : pairs) {
    auto rw = tokenize(ref);
    rep.counts.total_ref_words += static_cast<long>(rw.size());
    tally(align(rw, tokenize(hyp)), rep.counts);
  }
  if (rep.counts.total_ref_words == 0)
    throw std::invalid_argument("corpus_wer: no reference words");
  rep.wer = percent(rep.counts.subs + rep.counts.dels + rep.counts.ins, rep.counts.total_ref_words);
  return rep;
}

std::map<std::string, long> word_frequencies(const std::vector<std::string>& corpus) {
  std::map<std::string, long> freqs;
  for (const auto& line : corpus)
    for (const auto& w : tokenize(line)) ++freqs[w];
  return freqs;
}

EvalReport breakdown_wer(const std::vector<std::pair<std::string, std::string>>& pairs,
                         const std::map<std::string, long>& freqs, int rare_threshold) {
  if (rare_threshold < 1) throw std::invalid_argument("breakdown_wer: rare_threshold < 1");
  EvalReport rep;
  for (const auto& [ref, hyp] : pairs) {
    auto rw = tokenize(ref);
    rep.counts.total_ref_words += static_cast<long>(rw.size());
    Alignment a = align(rw, tokenize(hyp));
    tally(a, rep.counts);
    for (const auto& op : a.ops) {
      if (op.kind == EditKind::insertion) continue;  // no reference word to classify
      auto it = freqs.find(op.ref);
      long f = it == freqs.end() ? 0 : it->second;
      bool err = op.kind == EditKind::substitution || op.kind == EditKind::deletion;
      if (f == 0) {
        ++rep.oov_ref_words;
        if (err) ++rep.oov_errors;
      } else if (f < rare_threshold) {
        ++rep.rare_ref_words;
        if (err) ++rep.rare_errors;
      }
    }
  }
  if (rep.counts.total_ref_words == 0)
    throw std::invalid_argument("breakdown_wer: no reference words");
  rep.wer = percent(rep.counts.subs + rep.counts.dels + rep.counts.ins, rep.counts.total_ref_words);
  if (rep.rare_ref_words > 0) rep.rwer = percent(rep.rare_errors, rep.rare_ref_words);
  if (rep.oov_ref_words > 0) rep.ower = percent(rep.oov_errors, rep.oov_ref_words);
  return rep;
}

std::string EvalReport::to_json() const {
  ordered_json j;
  j["wer"] = wer;
  j["rwer"] = rwer ? ordered_json(*rwer) : ordered_json(nullptr);
  j["ower"] = ower ? ordered_json(*ower) : ordered_json(nullptr);
  j["counts"] = {{"matches", counts.matches},
                 {"substitutions", counts.subs},
                 {"deletions", counts.dels},
                 {"insertions", counts.ins}};
  j["totals"] = {{"ref_words", counts.total_ref_words},
                 {"rare_ref_words", rare_ref_words},
                 {"oov_ref_words", oov_ref_words},
                 {"rare_errors", rare_errors},
                 {"oov_errors", oov_errors}};
  return j.dump(2);
}

std::string EvalReport::table() const {
  std::ostringstream os;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%-12s %8.2f%%\n", "WER", wer);
  os << buf;
  if (rwer) {
    std::snprintf(buf, sizeof(buf), "%-12s %8.2f%%  (%ld/%ld)\n", "rWER", *rwer, rare_errors,
                  rare_ref_words);
    os << buf;
  }
  if (ower) {
    std::snprintf(buf, sizeof(buf), "%-12s %8.2f%%  (%ld/%ld)\n", "oWER", *ower, oov_errors,
                  oov_ref_words);
    os << buf;
  }
  std::snprintf(buf, sizeof(buf), "matches %ld  subs %ld  dels %ld  ins %ld  ref words %ld\n",
                counts.matches, counts.subs, counts.dels, counts.ins, counts.total_ref_words);
  os << buf;
  return os.str();
}

}  // namespace subprompt
