#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "subprompt/decoder_input.hpp"
#include "subprompt/pipeline.hpp"
#include "subprompt/srt.hpp"
#include "subprompt/text.hpp"

namespace fs = std::filesystem;
using namespace subprompt;

namespace {

ExperimentConfig make_config(const std::string& config_path, std::uint64_t seed, bool seed_set,
                             const std::string& out_dir) {
  ExperimentConfig cfg;
  if (!config_path.empty()) cfg = load_experiment_config(config_path, cfg);
  if (seed_set) {
    cfg.synth.seed = seed;
    cfg.model.seed = seed;
    cfg.optim.seed = seed;
  }
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  return cfg;
}

std::vector<std::string> corpus_lines(const std::string& path) {
  std::vector<std::string> lines;
  std::istringstream is(read_file(path));
  std::string line;
  while (std::getline(is, line))
    if (!line.empty()) lines.push_back(line);
  return lines;
}

WaConfig parse_wa(const std::string& wa, const std::string& wa_layers) {
  WaConfig w;
  w.strategy = wa_strategy_from_string(wa);
  if (wa_layers == "all") {
    w.all_layers = true;
  } else {
    w.all_layers = false;
    std::istringstream iss(wa_layers);
    std::string item;
    while (std::getline(iss, item, ',')) w.layers.push_back(std::stoi(item));
  }
  return w;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"subtitle-prompted transcript refinement toolkit"};
  app.fallthrough();  // shared flags may follow the subcommand
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  app.add_option("--config", config_path, "key=value config file")->capture_default_str();
  app.add_option("--seed", seed, "seed for synth/model/optim")->each([&](const std::string&) {
    seed_set = true;
  });
  app.add_option("--out-dir", out_dir, "output directory");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic corpus");

  // ingest
  auto* ingest_cmd = app.add_subcommand("ingest", "build a manifest from SRT + feature files");
  std::string srt_path, features_dir, ingest_out;
  ingest_cmd->add_option("--srt", srt_path, "SubRip file")->required();
  ingest_cmd->add_option("--features", features_dir, "directory of <id>__<start>-<end>.sbrf files")
      ->required();
  ingest_cmd->add_option("--out", ingest_out, "output manifest path")->required();

  // bootstrap
  auto* boot_cmd = app.add_subcommand("bootstrap", "generate/filter initial pseudo labels");
  std::string boot_manifest, boot_out, boot_ckpt, boot_vocab;
  int max_tokens = 100;
  double max_rep_ratio = 0.5;
  boot_cmd->add_option("--manifest", boot_manifest)->required();
  boot_cmd->add_option("--out", boot_out)->required();
  boot_cmd->add_option("--checkpoint", boot_ckpt, "base model (omit for corruption-channel mode)");
  boot_cmd->add_option("--vocab", boot_vocab, "vocab json (required with --checkpoint)");
  boot_cmd->add_option("--max-tokens", max_tokens);
  boot_cmd->add_option("--max-rep-ratio", max_rep_ratio);

  // train
  auto* train_cmd = app.add_subcommand("train", "fine-tune on a manifest");
  std::string train_manifest, train_vocab, train_out, train_init;
  bool train_no_prompt = false;
  train_cmd->add_option("--manifest", train_manifest)->required();
  train_cmd->add_option("--vocab", train_vocab)->required();
  train_cmd->add_option("--out", train_out, "checkpoint output path")->required();
  train_cmd->add_option("--init", train_init, "warm-start checkpoint");
  train_cmd->add_flag("--no-prompt", train_no_prompt, "train without subtitle prompts");

  // decode
  auto* decode_cmd = app.add_subcommand("decode", "greedy decoding of a manifest");
  std::string dec_manifest, dec_vocab, dec_ckpt, dec_out, dec_wa = "none", dec_layers = "all";
  bool dec_prompt = true;
  decode_cmd->add_option("--manifest", dec_manifest)->required();
  decode_cmd->add_option("--vocab", dec_vocab)->required();
  decode_cmd->add_option("--checkpoint", dec_ckpt)->required();
  decode_cmd->add_option("--out", dec_out, "output manifest with decoded pseudo_transcript")
      ->required();
  decode_cmd->add_option("--wa", dec_wa, "none|gini|max|entropy");
  decode_cmd->add_option("--wa-layers", dec_layers, "all|<comma list>");
  decode_cmd->add_flag("--prompt,!--no-prompt", dec_prompt, "condition on the subtitle prompt")->capture_default_str();

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "WER / rWER / oWER report");
  std::string eval_ref, eval_hyp, eval_corpus, eval_out;
  int rare_threshold = 10;
  eval_cmd->add_option("--ref", eval_ref, "manifest with references")->required();
  eval_cmd->add_option("--hyp", eval_hyp, "manifest with hypotheses in pseudo_transcript")
      ->required();
  eval_cmd->add_option("--train-corpus", eval_corpus, "text file for word frequencies")->required();
  eval_cmd->add_option("--rare-threshold", rare_threshold);
  eval_cmd->add_option("--out", eval_out, "write JSON report here");

  // experiment
  auto* exp_cmd = app.add_subcommand("experiment", "full refinement grid on a synthetic corpus");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth_cmd->parsed()) {
      ExperimentConfig cfg = make_config(config_path, seed, seed_set, out_dir);
      SynthDataset ds = synth_dataset(cfg.synth);
      fs::create_directories(cfg.out_dir);
      write_manifest(ds.train, (fs::path(cfg.out_dir) / "train.jsonl").string());
      write_manifest(ds.heldout, (fs::path(cfg.out_dir) / "heldout.jsonl").string());
      std::string corpus;
      for (const auto& line : ds.train_corpus) corpus += line + "\n";
      write_file_atomic((fs::path(cfg.out_dir) / "corpus.txt").string(), corpus);
      ds.vocab.save((fs::path(cfg.out_dir) / "vocab.json").string());
      std::cout << "wrote " << ds.train.size() << " train / " << ds.heldout.size()
                << " held-out utterances to " << cfg.out_dir << "\n";
    } else if (ingest_cmd->parsed()) {
      auto cues = parse_srt(read_file(srt_path));
      std::vector<Utterance> utts;
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(features_dir))
        if (e.path().extension() == ".sbrf") files.push_back(e.path());
      std::sort(files.begin(), files.end());
      for (const auto& f : files) {
        std::string stem = f.stem().string();
        auto sep = stem.rfind("__");
        auto dash = stem.rfind('-');
        if (sep == std::string::npos || dash == std::string::npos || dash < sep)
          throw std::runtime_error("feature file " + f.filename().string() +
                                   " is not named <id>__<start_ms>-<end_ms>.sbrf");
        Utterance u;
        u.id = stem.substr(0, sep);
        std::int64_t start = std::stoll(stem.substr(sep + 2, dash - sep - 2));
        std::int64_t end = std::stoll(stem.substr(dash + 1));
        u.features = read_features(f.string());
        u.duration_ms = end - start;
        u.subtitle = cues_in_window(cues, start, end);
        u.feature_file = u.id + ".sbrf";
        utts.push_back(std::move(u));
      }
      write_manifest(utts, ingest_out);
      std::cout << "wrote " << utts.size() << " utterances to " << ingest_out << "\n";
    } else if (boot_cmd->parsed()) {
      auto manifest = load_manifest(boot_manifest);
      FilterConfig filter{max_tokens, max_rep_ratio};
      std::vector<Utterance> out;
      if (boot_ckpt.empty()) {
        out = bootstrap_pseudo_labels(nullptr, Vocab(), manifest, filter);
      } else {
        if (boot_vocab.empty()) throw std::runtime_error("--vocab required with --checkpoint");
        Model base = load_checkpoint(boot_ckpt);
        out = bootstrap_pseudo_labels(&base, Vocab::load(boot_vocab), manifest, filter);
      }
      write_manifest(out, boot_out);
      std::cout << "kept " << out.size() << "/" << manifest.size() << " utterances\n";
    } else if (train_cmd->parsed()) {
      ExperimentConfig cfg = make_config(config_path, seed, seed_set, out_dir);
      auto manifest = load_manifest(train_manifest);
      Vocab vocab = Vocab::load(train_vocab);
      ModelConfig mc = cfg.model;
      mc.d_feat = static_cast<int>(manifest.at(0).features.cols);
      mc.vocab_size = vocab.size();
      Model model = train_init.empty() ? Model(mc) : load_checkpoint(train_init);
      std::vector<TrainExample> examples = build_train_examples(
          manifest, vocab, !train_no_prompt, cfg.prompt_dropout, cfg.optim.seed);
      TrainLog log = train(model, examples, cfg.optim);
      save_checkpoint(model, train_out);
      for (std::size_t e = 0; e < log.epoch_mean_loss.size(); ++e)
        std::cout << "epoch " << e + 1 << " mean loss " << log.epoch_mean_loss[e] << "\n";
    } else if (decode_cmd->parsed()) {
      auto manifest = load_manifest(dec_manifest);
      Vocab vocab = Vocab::load(dec_vocab);
      Model model = load_checkpoint(dec_ckpt);
      WaConfig wa = parse_wa(dec_wa, dec_layers);
      for (auto& u : manifest) {
        DecodeOutput out =
            greedy_decode(model, u.features, vocab, dec_prompt ? u.subtitle : "", wa);
        u.pseudo_transcript = vocab.decode(out.tokens);
      }
      write_manifest(manifest, dec_out);
      std::cout << "decoded " << manifest.size() << " utterances to " << dec_out << "\n";
    } else if (eval_cmd->parsed()) {
      auto refs = load_manifest(eval_ref);
      auto hyps = load_manifest(eval_hyp);
      std::map<std::string, std::string> hyp_by_id;
      for (const auto& u : hyps) hyp_by_id[u.id] = u.pseudo_transcript;
      std::vector<std::pair<std::string, std::string>> pairs;
      long unmatched = 0;
      for (const auto& u : refs) {
        if (!u.reference) continue;
        auto it = hyp_by_id.find(u.id);
        if (it == hyp_by_id.end()) {
          ++unmatched;
          continue;
        }
        pairs.emplace_back(*u.reference, it->second);
      }
      if (unmatched > 0)
        std::cerr << "warning: " << unmatched << " reference utterances have no hypothesis"
                  << " and were skipped\n";
      if (pairs.empty()) throw std::runtime_error("no overlapping utterance ids to score");
      EvalReport rep = breakdown_wer(pairs, word_frequencies(corpus_lines(eval_corpus)),
                                     rare_threshold);
      std::cout << rep.table();
      if (!eval_out.empty()) write_file_atomic(eval_out, rep.to_json());
    } else if (exp_cmd->parsed()) {
      ExperimentConfig cfg = make_config(config_path, seed, seed_set, out_dir);
      ExperimentReport rep = run_experiment(cfg);
      std::cout << rep.table();
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
