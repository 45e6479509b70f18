#include "subprompt/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "subprompt/decoder_input.hpp"
#include "subprompt/text.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace subprompt {

namespace {

std::string decode_text(const Model& model, const Vocab& vocab, const Utterance& u,
                        bool use_prompt, const WaConfig& wa) {
  DecodeOutput out = greedy_decode(model, u.features, vocab, use_prompt ? u.subtitle : "", wa);
  return vocab.decode(out.tokens);
}

ordered_json report_to_json_obj(const EvalReport& r) { return ordered_json::parse(r.to_json()); }

EvalReport report_from_json_obj(const ordered_json& j) {
  EvalReport r;
  r.wer = j.at("wer");
  if (!j.at("rwer").is_null()) r.rwer = j.at("rwer").get<double>();
  if (!j.at("ower").is_null()) r.ower = j.at("ower").get<double>();
  r.counts.matches = j.at("counts").at("matches");
  r.counts.subs = j.at("counts").at("substitutions");
  r.counts.dels = j.at("counts").at("deletions");
  r.counts.ins = j.at("counts").at("insertions");
  r.counts.total_ref_words = j.at("totals").at("ref_words");
  r.rare_ref_words = j.at("totals").at("rare_ref_words");
  r.oov_ref_words = j.at("totals").at("oov_ref_words");
  r.rare_errors = j.at("totals").at("rare_errors");
  r.oov_errors = j.at("totals").at("oov_errors");
  return r;
}

}  // namespace

std::vector<Utterance> bootstrap_pseudo_labels(const Model* base, const Vocab& vocab,
                                               const std::vector<Utterance>& manifest,
                                               const FilterConfig& filter) {
  std::vector<Utterance> out;
  for (const auto& u : manifest) {
    Utterance v = u;
    if (base) v.pseudo_transcript = decode_text(*base, vocab, u, false, {});
    if (hallucination_filter(v.pseudo_transcript, filter.max_tokens, filter.max_rep_ratio) ==
        FilterDecision::keep)
      out.push_back(std::move(v));
  }
  return out;
}

EvalReport evaluate_manifest(const Model& model, const std::vector<Utterance>& utts,
                             const Vocab& vocab, bool use_prompt, const WaConfig& wa,
                             const std::map<std::string, long>& train_freqs, int rare_threshold) {
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& u : utts) {
    if (!u.reference) continue;
    pairs.emplace_back(*u.reference, decode_text(model, vocab, u, use_prompt, wa));
  }
  return breakdown_wer(pairs, train_freqs, rare_threshold);
}

std::vector<TrainExample> build_train_examples(const std::vector<Utterance>& manifest,
                                               const Vocab& vocab, bool use_prompt,
                                               double prompt_dropout, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x70726f6d7074ULL);  // independent of the shuffle stream
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<TrainExample> examples;
  examples.reserve(manifest.size());
  for (const auto& u : manifest) {
    std::string prompt;
    if (use_prompt && coin(rng) >= prompt_dropout) {
      // whole-prompt dropout: a fraction of examples train without the subtitle
      // so the model keeps an audio-only pathway. Dropping individual words
      // would shift the position ids of the remaining prompt words and break
      // their alignment with the target slots, so the prompt is dropped whole.
      prompt = u.subtitle;
    }
    examples.push_back(
        {u.features, assemble_decoder_input(vocab, prompt, u.pseudo_transcript)});
  }
  return examples;
}

IterationResult run_iteration(const IterationState& prev, Model model,
                              const std::vector<Utterance>& heldout, const Vocab& vocab,
                              const std::map<std::string, long>& train_freqs,
                              const IterationConfig& cfg, const std::string& out_dir) {
  // 1. fine-tune on (subtitle, Y_pt_{t-1})
  std::vector<TrainExample> examples =
      build_train_examples(prev.manifest, vocab, cfg.use_prompt, cfg.prompt_dropout,
                           cfg.optim.seed + static_cast<std::uint64_t>(prev.t));
  IterationResult res;
  OptimConfig optim = cfg.optim;
  for (int t = 0; t < prev.t; ++t) optim.lr *= cfg.refine_lr_decay;
  res.train_log = train(model, examples, optim);

  // 2. regenerate pseudo labels over the full training manifest
  res.state.t = prev.t + 1;
  res.state.manifest = prev.manifest;
  for (auto& u : res.state.manifest) {
    std::string hyp = decode_text(model, vocab, u, cfg.use_prompt, cfg.wa);
    if (hallucination_filter(hyp, cfg.filter.max_tokens, cfg.filter.max_rep_ratio) ==
        FilterDecision::keep) {
      u.pseudo_transcript = hyp;
    } else {
      ++res.filter_retained_previous;  // keep Y_pt_{t-1} for this utterance
    }
  }

  // 3. held-out evaluation
  res.state.metrics =
      evaluate_manifest(model, heldout, vocab, cfg.use_prompt, cfg.wa, train_freqs,
                        cfg.rare_threshold);

  // 4. persist
  fs::path dir = fs::path(out_dir) / ("iter" + std::to_string(res.state.t));
  fs::create_directories(dir);
  res.state.checkpoint_path = (dir / "checkpoint").string();
  save_checkpoint(model, res.state.checkpoint_path);
  write_manifest(res.state.manifest, (dir / "manifest.jsonl").string());
  write_file_atomic((dir / "metrics.json").string(), res.state.metrics->to_json());
  return res;
}

std::string ExperimentReport::to_json() const {
  ordered_json j;
  j["bootstrap_pseudo_wer"] = bootstrap_pseudo_wer;
  ordered_json cells_j = ordered_json::array();
  for (const auto& c : cells) {
    ordered_json cj;
    cj["name"] = c.name;
    cj["use_prompt"] = c.use_prompt;
    cj["pseudo_label_wer"] = c.pseudo_label_wer;
    ordered_json hj;
    for (const auto& [strat, reports] : c.heldout) {
      ordered_json arr = ordered_json::array();
      for (const auto& r : reports) arr.push_back(report_to_json_obj(r));
      hj[strat] = arr;
    }
    cj["heldout"] = hj;
    if (!c.error.empty()) cj["error"] = c.error;
    cells_j.push_back(cj);
  }
  j["cells"] = cells_j;
  return j.dump(2);
}

std::string ExperimentReport::table() const {
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "bootstrap pseudo-label WER (train set): %.2f%%\n\n",
                bootstrap_pseudo_wer);
  os << buf;
  std::snprintf(buf, sizeof(buf), "%-6s %-9s %-5s %8s %8s %8s\n", "cell", "wa", "iter", "WER",
                "rWER", "oWER");
  os << buf;
  for (const auto& c : cells) {
    if (!c.error.empty()) {
      os << c.name << "  FAILED: " << c.error << "\n";
      continue;
    }
    for (const auto& [strat, reports] : c.heldout)
      for (std::size_t t = 0; t < reports.size(); ++t) {
        const auto& r = reports[t];
        std::snprintf(buf, sizeof(buf), "%-6s %-9s %-5zu %7.2f%% %7.2f%% %7.2f%%\n",
                      c.name.c_str(), strat.c_str(), t + 1, r.wer, r.rwer.value_or(-1.0),
                      r.ower.value_or(-1.0));
        os << buf;
      }
  }
  return os.str();
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  SynthDataset ds = synth_dataset(cfg.synth);

  ModelConfig mc = cfg.model;
  mc.d_feat = cfg.synth.d_feat;
  mc.vocab_size = ds.vocab.size();
  mc.validate();

  std::vector<Utterance> train_manifest = bootstrap_pseudo_labels(nullptr, ds.vocab, ds.train,
                                                                  cfg.filter);
  std::vector<std::string> corpus;
  for (const auto& u : train_manifest) corpus.push_back(u.pseudo_transcript);
  auto freqs = word_frequencies(corpus);
  ds.vocab.save((fs::path(cfg.out_dir) / "vocab.json").string());

  ExperimentReport report;
  {
    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& u : train_manifest) pairs.emplace_back(*u.reference, u.pseudo_transcript);
    report.bootstrap_pseudo_wer = corpus_wer(pairs).wer;
  }

  struct CellSpec {
    std::string name;
    bool use_prompt;
    int iterations;
  };
  std::vector<CellSpec> specs{{"np", false, 1}, {"sp", true, cfg.iterations}};

  for (const auto& spec : specs) {
    ExperimentCell cell;
    cell.name = spec.name;
    cell.use_prompt = spec.use_prompt;
    fs::path cell_dir = fs::path(cfg.out_dir) / spec.name;
    fs::path cell_report = cell_dir / "cell.json";
    try {
      if (fs::exists(cell_report)) {
        auto j = ordered_json::parse(read_file(cell_report.string()));
        cell.pseudo_label_wer = j.at("pseudo_label_wer").get<std::vector<double>>();
        for (const auto& [strat, arr] : j.at("heldout").items()) {
          std::vector<EvalReport> reports;
          for (const auto& rj : arr) reports.push_back(report_from_json_obj(rj));
          cell.heldout[strat] = reports;
        }
        report.cells.push_back(std::move(cell));
        continue;
      }
      fs::create_directories(cell_dir);

      IterationState state;
      state.t = 0;
      state.manifest = train_manifest;
      Model model(mc);
      save_checkpoint(model, (cell_dir / "iter0_checkpoint").string());

      IterationConfig icfg;
      icfg.optim = cfg.optim;
      icfg.filter = cfg.filter;
      icfg.use_prompt = spec.use_prompt;
      icfg.prompt_dropout = cfg.prompt_dropout;
      icfg.refine_lr_decay = cfg.refine_lr_decay;
      icfg.rare_threshold = cfg.rare_threshold;
      // regeneration runs the first configured strategy; the rest are
      // evaluated on held-out only
      icfg.wa.strategy = cfg.wa_strategies.empty() ? WaStrategy::none : cfg.wa_strategies.front();

      for (int t = 1; t <= spec.iterations; ++t) {
        Model step_model = cfg.cold_start || state.checkpoint_path.empty()
                               ? Model(mc)
                               : load_checkpoint(state.checkpoint_path);
        IterationResult res = run_iteration(state, std::move(step_model), ds.heldout, ds.vocab,
                                            freqs, icfg, cell_dir.string());
        state = std::move(res.state);
        Model trained = load_checkpoint(state.checkpoint_path);
        {
          std::vector<std::pair<std::string, std::string>> pairs;
          for (const auto& u : state.manifest)
            pairs.emplace_back(*u.reference, u.pseudo_transcript);
          cell.pseudo_label_wer.push_back(corpus_wer(pairs).wer);
        }
        for (WaStrategy strat : cfg.wa_strategies) {
          WaConfig wc;
          wc.strategy = strat;
          cell.heldout[to_string(strat)].push_back(evaluate_manifest(
              trained, ds.heldout, ds.vocab, spec.use_prompt, wc, freqs, cfg.rare_threshold));
        }
      }

      ordered_json cj;
      cj["name"] = cell.name;
      cj["use_prompt"] = cell.use_prompt;
      cj["pseudo_label_wer"] = cell.pseudo_label_wer;
      ordered_json hj;
      for (const auto& [strat, reports] : cell.heldout) {
        ordered_json arr = ordered_json::array();
        for (const auto& r : reports) arr.push_back(report_to_json_obj(r));
        hj[strat] = arr;
      }
      cj["heldout"] = hj;
      write_file_atomic(cell_report.string(), cj.dump(2));
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
    report.cells.push_back(std::move(cell));
  }

  write_file_atomic((fs::path(cfg.out_dir) / "report.json").string(), report.to_json());
  write_file_atomic((fs::path(cfg.out_dir) / "report.txt").string(), report.table());
  return report;
}

namespace {

std::map<std::string, std::string> parse_kv_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(is, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    if (!key.empty()) kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

}  // namespace

ExperimentConfig apply_config_overrides(const std::map<std::string, std::string>& kv,
                                        ExperimentConfig c) {
  auto to_bool = [](const std::string& v) { return v == "1" || v == "true" || v == "on"; };
  for (const auto& [k, v] : kv) {
    if (k == "synth.n_word_types") c.synth.n_word_types = std::stoi(v);
    else if (k == "synth.zipf_s") c.synth.zipf_s = std::stod(v);
    else if (k == "synth.n_train") c.synth.n_train = std::stoi(v);
    else if (k == "synth.n_heldout") c.synth.n_heldout = std::stoi(v);
    else if (k == "synth.words_per_utt_min") c.synth.words_per_utt_min = std::stoi(v);
    else if (k == "synth.words_per_utt_max") c.synth.words_per_utt_max = std::stoi(v);
    else if (k == "synth.frames_per_word_min") c.synth.frames_per_word_min = std::stoi(v);
    else if (k == "synth.frames_per_word_max") c.synth.frames_per_word_max = std::stoi(v);
    else if (k == "synth.d_feat") c.synth.d_feat = std::stoi(v);
    else if (k == "synth.feature_noise_sigma") c.synth.feature_noise_sigma = std::stod(v);
    else if (k == "synth.p_drop") c.synth.p_drop = std::stod(v);
    else if (k == "synth.p_sub") c.synth.p_sub = std::stod(v);
    else if (k == "synth.p_ins") c.synth.p_ins = std::stod(v);
    else if (k == "synth.rare_keep_boost") c.synth.rare_keep_boost = std::stod(v);
    else if (k == "synth.rare_rank_min") c.synth.rare_rank_min = std::stoi(v);
    else if (k == "synth.p_pseudo_sub") c.synth.p_pseudo_sub = std::stod(v);
    else if (k == "synth.p_pseudo_sub_rare") c.synth.p_pseudo_sub_rare = std::stod(v);
    else if (k == "synth.rare_pair_spread") c.synth.rare_pair_spread = std::stod(v);
    else if (k == "synth.p_pseudo_del") c.synth.p_pseudo_del = std::stod(v);
    else if (k == "synth.p_pseudo_ins") c.synth.p_pseudo_ins = std::stod(v);
    else if (k == "synth.p_lead_del") c.synth.p_lead_del = std::stod(v);
    else if (k == "synth.seed") c.synth.seed = std::stoull(v);
    else if (k == "model.d_model") c.model.d_model = std::stoi(v);
    else if (k == "model.n_heads") c.model.n_heads = std::stoi(v);
    else if (k == "model.n_enc_layers") c.model.n_enc_layers = std::stoi(v);
    else if (k == "model.n_dec_layers") c.model.n_dec_layers = std::stoi(v);
    else if (k == "model.d_ff") c.model.d_ff = std::stoi(v);
    else if (k == "model.max_seq") c.model.max_seq = std::stoi(v);
    else if (k == "model.seed") c.model.seed = std::stoull(v);
    else if (k == "model.scale_keys") c.model.scale_keys = to_bool(v);
    else if (k == "optim.lr") c.optim.lr = std::stod(v);
    else if (k == "optim.warmup_steps") c.optim.warmup_steps = std::stoi(v);
    else if (k == "optim.epochs") c.optim.epochs = std::stoi(v);
    else if (k == "optim.batch_size") c.optim.batch_size = std::stoi(v);
    else if (k == "optim.beta1") c.optim.beta1 = std::stod(v);
    else if (k == "optim.beta2") c.optim.beta2 = std::stod(v);
    else if (k == "optim.eps") c.optim.eps = std::stod(v);
    else if (k == "optim.weight_decay") c.optim.weight_decay = std::stod(v);
    else if (k == "optim.seed") c.optim.seed = std::stoull(v);
    else if (k == "filter.max_tokens") c.filter.max_tokens = std::stoi(v);
    else if (k == "filter.max_rep_ratio") c.filter.max_rep_ratio = std::stod(v);
    else if (k == "iterations") c.iterations = std::stoi(v);
    else if (k == "prompt_dropout") c.prompt_dropout = std::stod(v);
    else if (k == "refine_lr_decay") c.refine_lr_decay = std::stod(v);
    else if (k == "cold_start") c.cold_start = to_bool(v);
    else if (k == "rare_threshold") c.rare_threshold = std::stoi(v);
    else if (k == "out_dir") c.out_dir = v;
    else if (k == "seed") {
      c.synth.seed = std::stoull(v);
      c.model.seed = std::stoull(v);
      c.optim.seed = std::stoull(v);
    } else if (k == "wa_strategies") {
      c.wa_strategies.clear();
      std::istringstream iss(v);
      std::string item;
      while (std::getline(iss, item, ',')) c.wa_strategies.push_back(wa_strategy_from_string(item));
    } else {
      throw std::runtime_error("unknown config key: " + k);
    }
  }
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path, const ExperimentConfig& base) {
  return apply_config_overrides(parse_kv_file(path), base);
}

}  // namespace subprompt
