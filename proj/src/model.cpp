#include "subprompt/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <stdexcept>

#include "json.hpp"
#include "subprompt/manifest.hpp"

using nlohmann::ordered_json;

namespace subprompt {

void ModelConfig::validate() const {
  if (d_model <= 0 || n_heads <= 0 || d_model % n_heads != 0)
    throw std::invalid_argument("ModelConfig: d_model must be a positive multiple of n_heads");
  if (n_enc_layers < 1 || n_dec_layers < 1 || d_feat < 1 || max_seq < 8 || vocab_size < 1)
    throw std::invalid_argument("ModelConfig: bad dimensions");
}

bool WaApply::applies_to(int layer) const {
  return std::find(layers.begin(), layers.end(), layer) != layers.end();
}

namespace {

std::vector<std::string> param_names(const ModelConfig& cfg) {
  std::vector<std::string> names;
  auto block = [&](const std::string& pre) {
    for (const char* s : {".wq", ".wk", ".wv", ".wo", ".bq", ".bk", ".bv", ".bo"})
      names.push_back(pre + s);
  };
  names.push_back("enc.in_proj.w");
  names.push_back("enc.in_proj.b");
  for (int l = 0; l < cfg.n_enc_layers; ++l) {
    std::string p = "enc.l" + std::to_string(l);
    names.push_back(p + ".ln1.g");
    names.push_back(p + ".ln1.b");
    block(p + ".attn");
    names.push_back(p + ".ln2.g");
    names.push_back(p + ".ln2.b");
    for (const char* s : {".ffn.w1", ".ffn.b1", ".ffn.w2", ".ffn.b2"}) names.push_back(p + s);
  }
  names.push_back("enc.ln_f.g");
  names.push_back("enc.ln_f.b");
  names.push_back("dec.tok_emb");
  names.push_back("dec.pos_emb");
  names.push_back("dec.seg_emb");
  for (int l = 0; l < cfg.n_dec_layers; ++l) {
    std::string p = "dec.l" + std::to_string(l);
    names.push_back(p + ".ln1.g");
    names.push_back(p + ".ln1.b");
    block(p + ".self");
    names.push_back(p + ".ln2.g");
    names.push_back(p + ".ln2.b");
    block(p + ".cross");
    names.push_back(p + ".ln3.g");
    names.push_back(p + ".ln3.b");
    for (const char* s : {".ffn.w1", ".ffn.b1", ".ffn.w2", ".ffn.b2"}) names.push_back(p + s);
  }
  names.push_back("dec.ln_f.g");
  names.push_back("dec.ln_f.b");
  names.push_back("dec.out.b");
  return names;
}

std::pair<std::size_t, std::size_t> param_shape(const ModelConfig& cfg, const std::string& name) {
  const std::size_t d = static_cast<std::size_t>(cfg.d_model);
  const std::size_t ff = static_cast<std::size_t>(cfg.ff_dim());
  const std::size_t v = static_cast<std::size_t>(cfg.vocab_size);
  auto ends_with = [&](const char* s) {
    std::string suf(s);
    return name.size() >= suf.size() && name.compare(name.size() - suf.size(), suf.size(), suf) == 0;
  };
  if (name == "enc.in_proj.w") return {static_cast<std::size_t>(cfg.d_feat), d};
  if (name == "dec.tok_emb") return {v, d};
  if (name == "dec.pos_emb") return {static_cast<std::size_t>(cfg.max_seq), d};
  if (name == "dec.seg_emb") return {3, d};
  if (name == "dec.out.b") return {1, v};
  if (ends_with(".ffn.w1")) return {d, ff};
  if (ends_with(".ffn.b1")) return {1, ff};
  if (ends_with(".ffn.w2")) return {ff, d};
  if (ends_with(".wq") || ends_with(".wk") || ends_with(".wv") || ends_with(".wo")) return {d, d};
  return {1, d};  // biases, layernorm gains/biases, ffn.b2, in_proj.b
}

bool is_ln_gain(const std::string& name) {
  auto n = name.size();
  return n > 2 && name[n - 1] == 'g' && name[n - 2] == '.' && name.find(".ln") != std::string::npos;
}

bool is_bias(const std::string& name) {
  auto n = name.size();
  return n > 2 && name[n - 2] == '.' &&
         (name[n - 1] == 'b' || (name[n - 1] >= '1' && name[n - 1] <= '9' && name[n - 3] == 'b'));
}

Mat sinusoidal_positions(std::size_t n, std::size_t d) {
  Mat p(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      double angle = static_cast<double>(i) /
                     std::pow(10000.0, 2.0 * static_cast<double>(j / 2) / static_cast<double>(d));
      p.at(i, j) = (j % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
  return p;
}

// Binds checkpoint tensors to graph leaves, one leaf per name per forward.
struct Bank {
  const ModelParams& params;
  bool grad;
  std::map<std::string, ag::Var>* leaves;

  ag::Var operator()(const std::string& name) const {
    auto it = leaves->find(name);
    if (it != leaves->end()) return it->second;
    auto pit = params.t.find(name);
    if (pit == params.t.end()) throw std::logic_error("missing parameter " + name);
    auto v = ag::leaf(pit->second, grad);
    leaves->emplace(name, v);
    return v;
  }
};

ag::Var linear(const Bank& p, const ag::Var& x, const std::string& w, const std::string& b) {
  return ag::add_rowvec(ag::matmul(x, p(w)), p(b));
}

ag::Var mha(const Bank& p, const std::string& pre, const ag::Var& xq, const ag::Var& xkv,
            int n_heads, const Mat* additive_mask, const std::vector<double>* k_factors,
            const std::vector<double>* v_factors, Mat* capture_mean_probs) {
  ag::Var q = linear(p, xq, pre + ".wq", pre + ".bq");
  ag::Var k = linear(p, xkv, pre + ".wk", pre + ".bk");
  ag::Var v = linear(p, xkv, pre + ".wv", pre + ".bv");
  if (k_factors) k = ag::rowscale_const(k, *k_factors);
  if (v_factors) v = ag::rowscale_const(v, *v_factors);
  const std::size_t d = q->val.cols;
  const std::size_t dh = d / static_cast<std::size_t>(n_heads);
  std::vector<ag::Var> heads;
  for (int h = 0; h < n_heads; ++h) {
    ag::Var qh = ag::slice_cols(q, h * dh, (h + 1) * dh);
    ag::Var kh = ag::slice_cols(k, h * dh, (h + 1) * dh);
    ag::Var vh = ag::slice_cols(v, h * dh, (h + 1) * dh);
    ag::Var scores = ag::scale(ag::matmul_nt(qh, kh), 1.0 / std::sqrt(static_cast<double>(dh)));
    ag::Var probs = ag::softmax_rows(scores, additive_mask);
    if (capture_mean_probs) {
      if (capture_mean_probs->size() == 0)
        *capture_mean_probs = Mat(probs->val.rows, probs->val.cols);
      for (std::size_t i = 0; i < probs->val.size(); ++i)
        capture_mean_probs->v[i] += probs->val.v[i] / static_cast<double>(n_heads);
    }
    heads.push_back(ag::matmul(probs, vh));
  }
  return linear(p, ag::concat_cols(heads), pre + ".wo", pre + ".bo");
}

ag::Var ffn(const Bank& p, const std::string& pre, const ag::Var& x) {
  return linear(p, ag::gelu(linear(p, x, pre + ".w1", pre + ".b1")), pre + ".w2", pre + ".b2");
}

}  // namespace

ModelParams init_params(const ModelConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 0.02);
  ModelParams p;
  for (const auto& name : param_names(cfg)) {
    auto [r, c] = param_shape(cfg, name);
    Mat m(r, c);
    if (is_ln_gain(name)) {
      std::fill(m.v.begin(), m.v.end(), 1.0);
    } else if (!is_bias(name)) {
      for (double& x : m.v) x = normal(rng);
    }
    p.t.emplace(name, std::move(m));
  }
  return p;
}

Model::Model(ModelConfig cfg) : cfg_(cfg), params_(init_params(cfg)) {}

Model::Model(ModelConfig cfg, ModelParams params) : cfg_(cfg), params_(std::move(params)) {
  cfg_.validate();
}

ForwardResult Model::forward(const Mat& features, const std::vector<int>& token_ids, bool with_grad,
                             const WaApply* wa) const {
  if (features.cols != static_cast<std::size_t>(cfg_.d_feat))
    throw std::invalid_argument("forward: feature width != d_feat");
  if (features.rows < 1) throw std::invalid_argument("forward: empty features");
  const std::size_t t_len = token_ids.size();
  if (t_len < 1) throw std::invalid_argument("forward: empty token sequence");
  if (t_len > static_cast<std::size_t>(cfg_.max_seq))
    throw std::invalid_argument("forward: sequence length " + std::to_string(t_len) +
                                " exceeds max_seq " + std::to_string(cfg_.max_seq));

  ForwardResult res;
  Bank p{params_, with_grad, &res.leaves};

  // encoder
  ag::Var h = linear(p, ag::leaf(features), "enc.in_proj.w", "enc.in_proj.b");
  h = ag::add(h, ag::leaf(sinusoidal_positions(features.rows, h->val.cols)));
  for (int l = 0; l < cfg_.n_enc_layers; ++l) {
    std::string pre = "enc.l" + std::to_string(l);
    ag::Var x = ag::layernorm(h, p(pre + ".ln1.g"), p(pre + ".ln1.b"));
    h = ag::add(h, mha(p, pre + ".attn", x, x, cfg_.n_heads, nullptr, nullptr, nullptr, nullptr));
    x = ag::layernorm(h, p(pre + ".ln2.g"), p(pre + ".ln2.b"));
    h = ag::add(h, ffn(p, pre + ".ffn", x));
  }
  ag::Var enc_out = ag::layernorm(h, p("enc.ln_f.g"), p("enc.ln_f.b"));

  // decoder: prompt words receive the position ids of the target slots they
  // align with, plus a segment embedding to keep the roles distinguishable.
  // This turns "copy the aligned prompt word" into a position-id match instead
  // of a learned offset computation, which generalizes across word types.
  std::vector<int> positions(t_len);
  std::vector<int> segments(t_len);  // 0 = control, 1 = prompt, 2 = target
  std::size_t sot = 0;
  if (t_len > 1 && token_ids[0] == Vocab::kSop) {
    while (sot < t_len && token_ids[sot] != Vocab::kSot) ++sot;
  }
  if (sot > 0 && sot < t_len) {
    for (std::size_t i = 0; i < t_len; ++i) {
      if (i < 1 || (i >= sot && i < sot + 4)) {
        // <|sop|> and the four control tokens: positions 0..4
        positions[i] = static_cast<int>(i < 1 ? 0 : 1 + (i - sot));
        segments[i] = 0;
      } else if (i < sot) {
        positions[i] = static_cast<int>(5 + (i - 1));
        segments[i] = 1;
      } else {
        positions[i] = static_cast<int>(5 + (i - sot - 4));
        segments[i] = 2;
      }
    }
  } else {
    for (std::size_t i = 0; i < t_len; ++i) {
      positions[i] = static_cast<int>(i);
      segments[i] = 2;
    }
  }
  ag::Var d = ag::add(
      ag::add(ag::embed(p("dec.tok_emb"), token_ids), ag::embed(p("dec.pos_emb"), positions)),
      ag::embed(p("dec.seg_emb"), segments));

  Mat causal(t_len, t_len);
  for (std::size_t i = 0; i < t_len; ++i)
    for (std::size_t j = i + 1; j < t_len; ++j)
      causal.at(i, j) = -std::numeric_limits<double>::infinity();

  // per-row WA factors over the full decoder sequence (identity off-prompt)
  std::vector<double> wa_factors;
  if (wa && wa->prompt_len > 0) {
    wa_factors.assign(t_len, 1.0);
    for (std::size_t i = 0; i < wa->prompt_len && wa->prompt_begin + i < t_len; ++i)
      wa_factors[wa->prompt_begin + i] = wa->g[i];
  }

  for (int l = 0; l < cfg_.n_dec_layers; ++l) {
    std::string pre = "dec.l" + std::to_string(l);
    bool weighted = !wa_factors.empty() && wa->applies_to(l);
    const std::vector<double>* kf = weighted && wa->scale_keys ? &wa_factors : nullptr;
    const std::vector<double>* vf = weighted ? &wa_factors : nullptr;
    ag::Var x = ag::layernorm(d, p(pre + ".ln1.g"), p(pre + ".ln1.b"));
    d = ag::add(d, mha(p, pre + ".self", x, x, cfg_.n_heads, &causal, kf, vf, nullptr));
    x = ag::layernorm(d, p(pre + ".ln2.g"), p(pre + ".ln2.b"));
    Mat* capture = l == 0 ? &res.first_cross_attention : nullptr;
    d = ag::add(d, mha(p, pre + ".cross", x, enc_out, cfg_.n_heads, nullptr, nullptr, nullptr,
                       capture));
    x = ag::layernorm(d, p(pre + ".ln3.g"), p(pre + ".ln3.b"));
    d = ag::add(d, ffn(p, pre + ".ffn", x));
  }
  d = ag::layernorm(d, p("dec.ln_f.g"), p("dec.ln_f.b"));
  // Output projection is tied to the token embedding so that routing a prompt
  // token into the residual stream directly raises that token's logit, even
  // for rare types whose parameters receive few gradient updates.
  res.logits = ag::add_rowvec(ag::matmul_nt(d, p("dec.tok_emb")), p("dec.out.b"));
  return res;
}

ag::Var sequence_loss(const ForwardResult& fwd, const DecoderInput& input) {
  const std::size_t t_len = input.length();
  if (fwd.logits->val.rows != t_len) throw std::invalid_argument("sequence_loss: length mismatch");
  std::vector<int> targets(t_len, 0);
  std::vector<std::uint8_t> mask(t_len, 0);
  for (std::size_t t = 0; t + 1 < t_len; ++t) {
    targets[t] = input.ids[t + 1];
    mask[t] = input.loss_mask[t + 1];
  }
  return ag::masked_cross_entropy(fwd.logits, targets, mask);
}

TrainLog train(Model& model, const std::vector<TrainExample>& dataset, const OptimConfig& opt) {
  if (dataset.empty()) throw std::invalid_argument("train: empty dataset");
  std::map<std::string, Mat> m1, m2;
  for (const auto& [name, mat] : model.params().t) {
    m1.emplace(name, Mat(mat.rows, mat.cols));
    m2.emplace(name, Mat(mat.rows, mat.cols));
  }
  std::mt19937_64 rng(opt.seed);
  std::vector<std::size_t> order(dataset.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  TrainLog log;
  long step = 0;
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    std::size_t n_batches = 0;
    for (std::size_t b0 = 0; b0 < order.size(); b0 += static_cast<std::size_t>(opt.batch_size)) {
      std::size_t b1 = std::min(order.size(), b0 + static_cast<std::size_t>(opt.batch_size));
      std::map<std::string, Mat> grads;
      double batch_loss = 0.0;
      for (std::size_t k = b0; k < b1; ++k) {
        const TrainExample& ex = dataset[order[k]];
        ForwardResult fwd = model.forward(ex.features, ex.input.ids, true);
        ag::Var loss = sequence_loss(fwd, ex.input);
        batch_loss += loss->val.at(0, 0);
        ag::backward(loss);
        for (auto& [name, leafv] : fwd.leaves) {
          if (leafv->grad.size() == 0) continue;
          auto it = grads.find(name);
          if (it == grads.end()) {
            grads.emplace(name, leafv->grad);
          } else {
            for (std::size_t i = 0; i < it->second.size(); ++i)
              it->second.v[i] += leafv->grad.v[i];
          }
        }
      }
      double n = static_cast<double>(b1 - b0);
      batch_loss /= n;
      if (std::isnan(batch_loss) || std::isinf(batch_loss))
        throw std::runtime_error("train: non-finite loss in epoch " + std::to_string(epoch) +
                                 " batch " + std::to_string(n_batches));
      epoch_loss += batch_loss;
      ++n_batches;
      ++step;
      double lr = opt.lr;
      if (opt.warmup_steps > 0)
        lr *= std::min(1.0, static_cast<double>(step) / static_cast<double>(opt.warmup_steps));
      double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(step));
      double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(step));
      for (auto& [name, g] : grads) {
        Mat& param = model.params().t.at(name);
        Mat& m = m1.at(name);
        Mat& v = m2.at(name);
        double wd = (is_bias(name) || is_ln_gain(name)) ? 0.0 : opt.weight_decay;
        for (std::size_t i = 0; i < param.size(); ++i) {
          double gi = g.v[i] / n;
          m.v[i] = opt.beta1 * m.v[i] + (1.0 - opt.beta1) * gi;
          v.v[i] = opt.beta2 * v.v[i] + (1.0 - opt.beta2) * gi * gi;
          param.v[i] -= lr * ((m.v[i] / bc1) / (std::sqrt(v.v[i] / bc2) + opt.eps) + wd * param.v[i]);
        }
      }
    }
    log.epoch_mean_loss.push_back(epoch_loss / static_cast<double>(n_batches));
  }
  return log;
}

namespace {

std::vector<int> prompt_prefix(const Vocab& vocab, const std::string& subtitle,
                               std::size_t& prompt_len) {
  std::vector<int> ids{Vocab::kSop};
  for (int id : vocab.encode(subtitle)) ids.push_back(id);
  prompt_len = ids.size() - 1;
  ids.push_back(Vocab::kSot);
  ids.push_back(Vocab::kLang);
  ids.push_back(Vocab::kTranscribe);
  ids.push_back(Vocab::kNoTimestamps);
  return ids;
}

DecodeOutput decode_impl(const Model& model, const Mat& features, const Vocab& vocab,
                         const std::string& subtitle, WaStrategy strategy,
                         const std::vector<double>* custom_g, std::vector<int> layers,
                         bool all_layers, bool scale_keys) {
  std::size_t prompt_len = 0;
  std::vector<int> ids = prompt_prefix(vocab, subtitle, prompt_len);
  const std::size_t max_seq = static_cast<std::size_t>(model.config().max_seq);
  if (ids.size() >= max_seq) throw std::invalid_argument("decode: prompt exceeds max_seq");

  // prefix pass: capture first-layer cross-attention rows for prompt tokens
  ForwardResult prefix = model.forward(features, ids, false);
  DecodeOutput out;
  const Mat& ca = prefix.first_cross_attention;
  out.cross_attention = Mat(prompt_len, ca.cols);
  for (std::size_t i = 0; i < prompt_len; ++i)
    for (std::size_t j = 0; j < ca.cols; ++j)
      out.cross_attention.at(i, j) = ca.at(DecoderInput::prompt_begin + i, j);

  WaApply wa;
  const WaApply* wa_ptr = nullptr;
  bool use_wa = prompt_len > 0 && (custom_g != nullptr || strategy != WaStrategy::none);
  if (use_wa) {
    wa.g = custom_g ? *custom_g : relevance_weights(strategy, out.cross_attention).g;
    if (wa.g.size() != prompt_len) throw std::invalid_argument("decode: weight length mismatch");
    if (!custom_g) {
      // normalize strategy weights to mean 1 so reweighting shifts attention
      // between prompt words without softening the prompt as a whole
      double mean = 0.0;
      for (double x : wa.g) mean += x;
      mean /= static_cast<double>(wa.g.size());
      if (mean > 0.0)
        for (double& x : wa.g) x /= mean;
    }
    wa.prompt_begin = DecoderInput::prompt_begin;
    wa.prompt_len = prompt_len;
    wa.scale_keys = scale_keys;
    if (all_layers) {
      for (int l = 0; l < model.config().n_dec_layers; ++l) wa.layers.push_back(l);
    } else {
      wa.layers = std::move(layers);
    }
    wa_ptr = &wa;
  }

  double score_sum = 0.0;
  std::size_t steps = 0;
  while (ids.size() < max_seq) {
    ForwardResult fwd = model.forward(features, ids, false, wa_ptr);
    const Mat& logits = fwd.logits->val;
    const std::size_t last = logits.rows - 1;
    int best = 0;
    double best_v = -std::numeric_limits<double>::infinity();
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < logits.cols; ++j) mx = std::max(mx, logits.at(last, j));
    double denom = 0.0;
    for (std::size_t j = 0; j < logits.cols; ++j) {
      double x = logits.at(last, j);
      denom += std::exp(x - mx);
      if (x > best_v) {
        best_v = x;
        best = static_cast<int>(j);
      }
    }
    score_sum += best_v - mx - std::log(denom);
    ++steps;
    if (best == Vocab::kEot) break;
    ids.push_back(best);
    out.tokens.push_back(best);
  }
  out.score = steps ? score_sum / static_cast<double>(steps) : 0.0;
  return out;
}

}  // namespace

DecodeOutput greedy_decode(const Model& model, const Mat& features, const Vocab& vocab,
                           const std::string& subtitle, const WaConfig& wa) {
  return decode_impl(model, features, vocab, subtitle, wa.strategy, nullptr, wa.layers,
                     wa.all_layers, model.config().scale_keys);
}

DecodeOutput greedy_decode_with_weights(const Model& model, const Mat& features, const Vocab& vocab,
                                        const std::string& subtitle, const std::vector<double>& g,
                                        const std::vector<int>& layers, bool scale_keys) {
  return decode_impl(model, features, vocab, subtitle, WaStrategy::none, &g, layers, false,
                     scale_keys);
}

void save_checkpoint(const Model& model, const std::string& path) {
  const ModelConfig& c = model.config();
  ordered_json j;
  j["format"] = "SPCK";
  j["config"] = {{"d_model", c.d_model},      {"n_heads", c.n_heads},
                 {"n_enc_layers", c.n_enc_layers}, {"n_dec_layers", c.n_dec_layers},
                 {"d_feat", c.d_feat},        {"d_ff", c.d_ff},
                 {"max_seq", c.max_seq},      {"vocab_size", c.vocab_size},
                 {"seed", c.seed},            {"scale_keys", c.scale_keys}};
  ordered_json tensors = ordered_json::array();
  std::size_t offset = 0;
  for (const auto& [name, mat] : model.params().t) {
    tensors.push_back({{"name", name}, {"rows", mat.rows}, {"cols", mat.cols}, {"offset", offset}});
    offset += mat.size();
  }
  j["tensors"] = tensors;
  std::string header = j.dump();

  std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write checkpoint " + path);
    os.write("SPCK", 4);
    std::uint32_t len = static_cast<std::uint32_t>(header.size());
    os.write(reinterpret_cast<const char*>(&len), 4);
    os.write(header.data(), static_cast<std::streamsize>(header.size()));
    for (const auto& [name, mat] : model.params().t)
      for (double d : mat.v) {
        float f = static_cast<float>(d);
        os.write(reinterpret_cast<const char*>(&f), 4);
      }
  }
  std::filesystem::rename(tmp, path);
}

Model load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::string(magic, 4) != "SPCK")
    throw std::runtime_error("bad checkpoint magic in " + path);
  std::uint32_t len = 0;
  is.read(reinterpret_cast<char*>(&len), 4);
  std::string header(len, '\0');
  is.read(header.data(), len);
  if (!is) throw std::runtime_error("truncated checkpoint header in " + path);
  auto j = ordered_json::parse(header);
  const auto& jc = j.at("config");
  ModelConfig cfg;
  cfg.d_model = jc.at("d_model");
  cfg.n_heads = jc.at("n_heads");
  cfg.n_enc_layers = jc.at("n_enc_layers");
  cfg.n_dec_layers = jc.at("n_dec_layers");
  cfg.d_feat = jc.at("d_feat");
  cfg.d_ff = jc.at("d_ff");
  cfg.max_seq = jc.at("max_seq");
  cfg.vocab_size = jc.at("vocab_size");
  cfg.seed = jc.at("seed");
  cfg.scale_keys = jc.at("scale_keys");
  ModelParams params;
  for (const auto& t : j.at("tensors")) {
    Mat m(t.at("rows").get<std::size_t>(), t.at("cols").get<std::size_t>());
    params.t.emplace(t.at("name").get<std::string>(), std::move(m));
  }
  for (auto& [name, mat] : params.t)
    for (std::size_t i = 0; i < mat.size(); ++i) {
      float f;
      is.read(reinterpret_cast<char*>(&f), 4);
      if (!is) throw std::runtime_error("truncated checkpoint data in " + path);
      mat.v[i] = f;
    }
  return Model(cfg, std::move(params));
}

}  // namespace subprompt
