#include <numeric>

#include "doctest.h"
#include "subprompt/decoder_input.hpp"
#include "subprompt/text.hpp"
#include "subprompt/vocab.hpp"

using namespace subprompt;

TEST_CASE("normalization") {
  CHECK(tokenize("Hallo, Wereld!") == std::vector<std::string>{"hallo", "wereld"});
  CHECK(tokenize("'s avonds don't") == std::vector<std::string>{"s", "avonds", "don't"});
  CHECK(tokenize("") == std::vector<std::string>{});
}

TEST_CASE("build_vocab ordering and min_count") {
  Vocab v = build_vocab({"a a b"}, 1);
  CHECK(v.contains("a"));
  CHECK(v.contains("b"));
  CHECK(v.id_of("a") < v.id_of("b"));  // descending count
  CHECK(v.id_of("a") == Vocab::kNumSpecials);

  Vocab v2 = build_vocab({"a a b"}, 2);
  CHECK(v2.contains("a"));
  CHECK(v2.id_of("b") == Vocab::kUnk);
}

TEST_CASE("build_vocab deterministic") {
  Vocab a = build_vocab({"x y z y", "q x"}, 1);
  Vocab b = build_vocab({"x y z y", "q x"}, 1);
  CHECK(a.to_json() == b.to_json());
}

TEST_CASE("vocab json round trip") {
  Vocab v = build_vocab({"een twee drie twee"}, 1);
  Vocab w = Vocab::from_json(v.to_json());
  CHECK(w.to_json() == v.to_json());
  CHECK(w.id_of("twee") == v.id_of("twee"));
}

TEST_CASE("encode/decode round trip for in-vocab text") {
  Vocab v = build_vocab({"de kat zat op de mat"}, 1);
  std::string s = "de kat op de mat";
  CHECK(v.decode(v.encode(s)) == s);
}

TEST_CASE("decoder input layout from the worked example") {
  Vocab v = build_vocab({"hallo wereld"}, 1);
  DecoderInput d = assemble_decoder_input(v, "hallo", "hallo wereld");
  std::vector<Role> expected{Role::control, Role::prompt, Role::control, Role::control,
                             Role::control, Role::control, Role::target, Role::target, Role::eot};
  CHECK(d.roles == expected);
  CHECK(d.ids.front() == Vocab::kSop);
  CHECK(d.ids.back() == Vocab::kEot);
  CHECK(d.prompt_len() == 1);
  CHECK(d.target_len() == 2);
  CHECK(d.length() == d.prompt_len() + d.target_len() + 6);
}

TEST_CASE("empty subtitle gives T_p = 0 and length 7") {
  Vocab v = build_vocab({"x"}, 1);
  DecoderInput d = assemble_decoder_input(v, "", "x");
  CHECK(d.prompt_len() == 0);
  CHECK(d.length() == 7);
  CHECK(d.ids[0] == Vocab::kSop);
  CHECK(d.ids[1] == Vocab::kSot);
}

TEST_CASE("loss mask is exactly target and eot positions") {
  Vocab v = build_vocab({"a b c d"}, 1);
  for (const auto& [sub, tgt] : std::vector<std::pair<std::string, std::string>>{
           {"a b", "c d"}, {"", "a"}, {"a b c", ""}}) {
    DecoderInput d = assemble_decoder_input(v, sub, tgt);
    long mask_sum = 0;
    for (std::size_t i = 0; i < d.length(); ++i) {
      bool expect = d.roles[i] == Role::target || d.roles[i] == Role::eot;
      CHECK(static_cast<bool>(d.loss_mask[i]) == expect);
      mask_sum += d.loss_mask[i];
    }
    CHECK(mask_sum == static_cast<long>(d.target_len()) + 1);
  }
}

TEST_CASE("hallucination filter") {
  CHECK(hallucination_filter("a b c", 100, 0.5) == FilterDecision::keep);

  std::string ja;
  for (int i = 0; i < 60; ++i) ja += "ja ";
  CHECK(hallucination_filter(ja, 100, 0.5) == FilterDecision::drop);

  std::string many;
  for (int i = 0; i < 101; ++i) many += "w" + std::to_string(i) + " ";
  CHECK(hallucination_filter(many, 100, 0.5) == FilterDecision::drop);

  // repetition rule applies only from 5 tokens on
  CHECK(hallucination_filter("ja ja ja", 100, 0.5) == FilterDecision::keep);
  CHECK(hallucination_filter("ja ja ja ja ja", 100, 0.5) == FilterDecision::drop);
}
