#include "subprompt/synth.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

#include "subprompt/text.hpp"

namespace subprompt {

void SynthConfig::validate() const {
  if (n_word_types < 2 || n_train < 1 || n_heldout < 0)
    throw std::invalid_argument("SynthConfig: bad sizes");
  if (words_per_utt_min < 1 || words_per_utt_max < words_per_utt_min)
    throw std::invalid_argument("SynthConfig: bad words_per_utt range");
  if (frames_per_word_min < 1 || frames_per_word_max < frames_per_word_min)
    throw std::invalid_argument("SynthConfig: bad frames_per_word range");
  for (double p : {p_drop, p_sub, p_ins, rare_keep_boost, p_pseudo_sub, p_pseudo_sub_rare, p_pseudo_del, p_pseudo_ins,
                   p_lead_del})
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("SynthConfig: probability out of [0,1]");
  if (d_feat < 1) throw std::invalid_argument("SynthConfig: d_feat < 1");
}

namespace {

std::vector<std::string> make_lexicon(int n) {
  const std::string consonants = "bdfghklmnprstvwz";
  const std::string vowels = "aeiou";
  std::vector<std::string> syllables;
  for (char c : consonants)
    for (char v : vowels) syllables.push_back(std::string{c, v});
  std::vector<std::string> words;
  const int s = static_cast<int>(syllables.size());
  for (int i = 0; i < n; ++i)
    words.push_back(syllables[(i / s) % s] + syllables[i % s] + (i >= s * s ? "x" : ""));
  return words;
}

struct Sampler {
  std::mt19937_64 rng;
  std::discrete_distribution<int> zipf;

  int word() { return zipf(rng); }
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }
  int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
  double gauss() { return std::normal_distribution<double>(0.0, 1.0)(rng); }
};

}  // namespace

SynthDataset synth_dataset(const SynthConfig& cfg) {
  cfg.validate();
  SynthDataset ds;
  auto lexicon = make_lexicon(cfg.n_word_types);
  ds.vocab = Vocab(lexicon);

  Sampler s;
  s.rng.seed(cfg.seed);
  std::vector<double> weights(cfg.n_word_types);
  for (int r = 0; r < cfg.n_word_types; ++r)
    weights[r] = 1.0 / std::pow(static_cast<double>(r + 1), cfg.zipf_s);
  s.zipf = std::discrete_distribution<int>(weights.begin(), weights.end());

  // fixed per-type feature embedding
  std::vector<Mat> word_vecs;
  for (int r = 0; r < cfg.n_word_types; ++r) {
    Mat v(1, cfg.d_feat);
    for (double& x : v.v) x = s.gauss();
    word_vecs.push_back(std::move(v));
  }
  if (cfg.rare_pair_spread > 0.0) {
    // pair up rare types as near-homophones: the second member of each pair is
    // a jittered copy of the first
    for (int r = cfg.rare_rank_min; r + 1 < cfg.n_word_types; r += 2)
      for (std::size_t j = 0; j < word_vecs[r].v.size(); ++j)
        word_vecs[static_cast<std::size_t>(r) + 1].v[j] =
            word_vecs[static_cast<std::size_t>(r)].v[j] + cfg.rare_pair_spread * s.gauss();
  }

  auto corrupt_subtitle = [&](const std::vector<int>& ref) {
    std::vector<int> out;
    for (int w : ref) {
      double p_keep = 1.0 - cfg.p_drop;
      if (w >= cfg.rare_rank_min) p_keep = std::max(p_keep, cfg.rare_keep_boost);
      if (s.uniform() < p_keep) out.push_back(s.uniform() < cfg.p_sub ? s.word() : w);
      if (s.uniform() < cfg.p_ins) out.push_back(s.word());
    }
    return out;
  };

  auto corrupt_pseudo = [&](std::vector<int> ref) {
    if (!ref.empty() && s.uniform() < cfg.p_lead_del) {
      int k = s.uniform_int(1, std::max(1, static_cast<int>(ref.size()) / 2));
      ref.erase(ref.begin(), ref.begin() + k);
    }
    std::vector<int> out;
    for (int w : ref) {
      double p_sub = w >= cfg.rare_rank_min ? cfg.p_pseudo_sub_rare : cfg.p_pseudo_sub;
      if (s.uniform() >= cfg.p_pseudo_del)
        out.push_back(s.uniform() < p_sub ? s.word() : w);
      if (s.uniform() < cfg.p_pseudo_ins) out.push_back(s.word());
    }
    return out;
  };

  auto words_to_text = [&](const std::vector<int>& ws) {
    std::vector<std::string> strs;
    for (int w : ws) strs.push_back(lexicon[static_cast<std::size_t>(w)]);
    return join_words(strs);
  };

  auto gen = [&](const std::string& prefix, int count, bool is_train) {
    std::vector<Utterance> utts;
    for (int i = 0; i < count; ++i) {
      int n_words = s.uniform_int(cfg.words_per_utt_min, cfg.words_per_utt_max);
      std::vector<int> ref;
      for (int k = 0; k < n_words; ++k) ref.push_back(s.word());

      std::vector<std::pair<int, int>> frames;  // (word, n_frames)
      std::size_t total_frames = 0;
      for (int w : ref) {
        int f = s.uniform_int(cfg.frames_per_word_min, cfg.frames_per_word_max);
        frames.emplace_back(w, f);
        total_frames += static_cast<std::size_t>(f);
      }
      Utterance u;
      char idbuf[32];
      std::snprintf(idbuf, sizeof(idbuf), "%s-%04d", prefix.c_str(), i);
      u.id = idbuf;
      u.features = Mat(total_frames, cfg.d_feat);
      std::size_t row = 0;
      for (auto [w, f] : frames)
        for (int k = 0; k < f; ++k, ++row)
          for (int j = 0; j < cfg.d_feat; ++j)
            u.features.at(row, static_cast<std::size_t>(j)) =
                word_vecs[static_cast<std::size_t>(w)].v[static_cast<std::size_t>(j)] +
                cfg.feature_noise_sigma * s.gauss();
      u.duration_ms = static_cast<std::int64_t>(total_frames) * 100;
      u.reference = words_to_text(ref);
      u.subtitle = words_to_text(corrupt_subtitle(ref));
      u.pseudo_transcript = words_to_text(corrupt_pseudo(ref));
      utts.push_back(std::move(u));
    }
    (void)is_train;
    return utts;
  };

  ds.train = gen("train", cfg.n_train, true);
  ds.heldout = gen("heldout", cfg.n_heldout, false);
  for (const auto& u : ds.train) ds.train_corpus.push_back(u.pseudo_transcript);
  return ds;
}

}  // namespace subprompt
