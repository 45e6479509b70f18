#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "subprompt/attention.hpp"
#include "subprompt/decoder_input.hpp"
#include "subprompt/manifest.hpp"
#include "subprompt/model.hpp"
#include "subprompt/pipeline.hpp"
#include "subprompt/srt.hpp"
#include "subprompt/synth.hpp"
#include "subprompt/text.hpp"
#include "subprompt/vocab.hpp"
#include "subprompt/wer.hpp"

namespace py = pybind11;
using namespace subprompt;

namespace {

Mat mat_from_numpy(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D array");
  Mat m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  std::copy(a.data(), a.data() + m.size(), m.v.begin());
  return m;
}

py::array_t<double> mat_to_numpy(const Mat& m) {
  py::array_t<double> a({m.rows, m.cols});
  std::copy(m.v.begin(), m.v.end(), a.mutable_data());
  return a;
}

py::dict report_to_dict(const EvalReport& r) {
  py::dict d;
  d["wer"] = r.wer;
  d["rwer"] = r.rwer ? py::object(py::float_(*r.rwer)) : py::object(py::none());
  d["ower"] = r.ower ? py::object(py::float_(*r.ower)) : py::object(py::none());
  d["matches"] = r.counts.matches;
  d["substitutions"] = r.counts.subs;
  d["deletions"] = r.counts.dels;
  d["insertions"] = r.counts.ins;
  d["ref_words"] = r.counts.total_ref_words;
  return d;
}

}  // namespace

PYBIND11_MODULE(_subprompt, m) {
  m.doc() = "subtitle-prompted transcript refinement core";

  // text + srt
  m.def("normalize_text", &normalize_text);
  m.def("tokenize", &tokenize);
  py::class_<SubtitleCue>(m, "SubtitleCue")
      .def_readonly("index", &SubtitleCue::index)
      .def_readonly("start_ms", &SubtitleCue::start_ms)
      .def_readonly("end_ms", &SubtitleCue::end_ms)
      .def_readonly("text", &SubtitleCue::text);
  m.def("parse_srt", &parse_srt);
  m.def("render_srt", &render_srt);
  m.def("cues_in_window", &cues_in_window);

  // vocab + decoder input
  py::class_<Vocab>(m, "Vocab")
      .def(py::init<std::vector<std::string>>())
      .def("__len__", &Vocab::size)
      .def("id_of", &Vocab::id_of)
      .def("encode", &Vocab::encode)
      .def("decode", &Vocab::decode)
      .def("to_json", &Vocab::to_json)
      .def_static("from_json", &Vocab::from_json);
  m.def("build_vocab", &build_vocab, py::arg("corpus"), py::arg("min_count") = 1);
  m.def("assemble_decoder_input", [](const Vocab& v, const std::string& subtitle,
                                     const std::string& target) {
    DecoderInput d = assemble_decoder_input(v, subtitle, target);
    std::vector<bool> mask(d.loss_mask.begin(), d.loss_mask.end());
    return py::make_tuple(d.ids, mask);
  });
  m.def(
      "hallucination_filter",
      [](const std::string& text, int max_tokens, double max_rep_ratio) {
        return hallucination_filter(text, max_tokens, max_rep_ratio) == FilterDecision::keep;
      },
      py::arg("text"), py::arg("max_tokens") = 100, py::arg("max_rep_ratio") = 0.5,
      "True when the transcript passes the filter");

  // relevance weights + attention
  auto weights = [](RelevanceWeights (*fn)(const Mat&)) {
    return [fn](const py::array_t<double, py::array::c_style | py::array::forcecast>& rows) {
      return fn(mat_from_numpy(rows)).g;
    };
  };
  m.def("gini_weights", weights(&gini_weights));
  m.def("max_weights", weights(&max_weights));
  m.def("entropy_weights", weights(&entropy_weights));
  m.def("attention",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& q,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& k,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& v,
           const std::vector<bool>& mask) {
          std::vector<std::uint8_t> m8(mask.begin(), mask.end());
          return mat_to_numpy(attention(mat_from_numpy(q), mat_from_numpy(k), mat_from_numpy(v), m8));
        });

  // evaluation
  m.def("align_ops", [](const std::vector<std::string>& ref, const std::vector<std::string>& hyp) {
    std::vector<py::tuple> ops;
    for (const EditOp& op : align(ref, hyp).ops) {
      const char* kind = op.kind == EditKind::match          ? "match"
                         : op.kind == EditKind::substitution ? "sub"
                         : op.kind == EditKind::deletion     ? "del"
                                                             : "ins";
      ops.push_back(py::make_tuple(kind, op.ref, op.hyp));
    }
    return ops;
  });
  m.def("corpus_wer", [](const std::vector<std::pair<std::string, std::string>>& pairs) {
    return report_to_dict(corpus_wer(pairs));
  });
  m.def("breakdown_wer",
        [](const std::vector<std::pair<std::string, std::string>>& pairs,
           const std::map<std::string, long>& freqs, int rare_threshold) {
          return report_to_dict(breakdown_wer(pairs, freqs, rare_threshold));
        },
        py::arg("pairs"), py::arg("freqs"), py::arg("rare_threshold") = 10);
  m.def("word_frequencies", &word_frequencies);

  // model
  py::class_<Model>(m, "Model");
  m.def("make_model",
        [](int vocab_size, int d_model, int n_heads, int n_layers, int d_feat, int max_seq,
           std::uint64_t seed) {
          ModelConfig cfg;
          cfg.vocab_size = vocab_size;
          cfg.d_model = d_model;
          cfg.n_heads = n_heads;
          cfg.n_enc_layers = n_layers;
          cfg.n_dec_layers = n_layers;
          cfg.d_feat = d_feat;
          cfg.max_seq = max_seq;
          cfg.seed = seed;
          return Model(cfg);
        },
        py::arg("vocab_size"), py::arg("d_model") = 64, py::arg("n_heads") = 4,
        py::arg("n_layers") = 2, py::arg("d_feat") = 16, py::arg("max_seq") = 256,
        py::arg("seed") = 0);
  m.def("load_checkpoint", &load_checkpoint);
  m.def("save_checkpoint", &save_checkpoint);
  m.def("greedy_decode",
        [](const Model& model,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& features,
           const Vocab& vocab, const std::string& subtitle, const std::string& strategy) {
          WaConfig wa;
          wa.strategy = wa_strategy_from_string(strategy);
          DecodeOutput out = greedy_decode(model, mat_from_numpy(features), vocab, subtitle, wa);
          return py::make_tuple(vocab.decode(out.tokens), out.score);
        },
        py::arg("model"), py::arg("features"), py::arg("vocab"), py::arg("subtitle") = "",
        py::arg("strategy") = "none");
  // synthesis + manifests
  m.def("synth_corpus",
        [](int n_train, int n_heldout, std::uint64_t seed, const std::string& out_dir) {
          SynthConfig cfg;
          cfg.n_train = n_train;
          cfg.n_heldout = n_heldout;
          cfg.seed = seed;
          SynthDataset ds = synth_dataset(cfg);
          write_manifest(ds.train, out_dir + "/train.jsonl");
          write_manifest(ds.heldout, out_dir + "/heldout.jsonl");
          ds.vocab.save(out_dir + "/vocab.json");
          return py::make_tuple(out_dir + "/train.jsonl", out_dir + "/heldout.jsonl",
                                out_dir + "/vocab.json");
        },
        py::arg("n_train") = 400, py::arg("n_heldout") = 120, py::arg("seed") = 0,
        py::arg("out_dir") = ".");
  m.def("load_manifest", [](const std::string& path) {
    std::vector<py::dict> rows;
    for (const Utterance& u : load_manifest(path)) {
      py::dict d;
      d["id"] = u.id;
      d["subtitle"] = u.subtitle;
      d["pseudo_transcript"] = u.pseudo_transcript;
      d["reference"] = u.reference ? py::object(py::str(*u.reference)) : py::object(py::none());
      d["duration_ms"] = u.duration_ms;
      d["features"] = mat_to_numpy(u.features);
      rows.push_back(d);
    }
    return rows;
  });
}
