#pragma once

// Synthetic labelled short-text corpora with a controllable class signal.

#include <cstdint>
#include <string>
#include <vector>

#include "alcrowd/corpus.hpp"
#include "alcrowd/error.hpp"
#include "alcrowd/io.hpp"
#include "alcrowd/rng.hpp"

namespace alcrowd::simulator {

// Each document has `class_tokens` slots filled from a class vocabulary (its
// own class with probability `signal`, the other class otherwise) and
// `background_tokens` slots filled from a shared background vocabulary.
// Class vocabularies are disjoint. The label is flipped with probability `noise`.
struct SynthSpec {
  std::size_t n_docs = 1000;
  std::size_t class_vocab = 50;       // tokens per class
  std::size_t background_vocab = 500;
  double class_balance = 0.5;         // P(label = 1)
  double signal = 0.9;
  double noise = 0.0;
  std::size_t class_tokens = 5;
  std::size_t background_tokens = 10;
  std::uint64_t seed = 0;
};

inline void check_spec(const SynthSpec& s) {
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(std::string(name) + " must be in [0, 1]");
  };
  prob(s.class_balance, "class_balance");
  prob(s.signal, "signal");
  prob(s.noise, "noise");
  if (s.n_docs < 1) throw Error("n_docs must be >= 1");
  if (s.class_vocab == 0 && s.background_vocab == 0) throw Error("degenerate spec: zero vocabulary");
  if (s.class_tokens > 0 && s.class_vocab == 0) throw Error("degenerate spec: class tokens requested but class_vocab is 0");
  if (s.background_tokens > 0 && s.background_vocab == 0)
    throw Error("degenerate spec: background tokens requested but background_vocab is 0");
  if (s.class_tokens + s.background_tokens == 0) throw Error("degenerate spec: documents would be empty");
}

inline std::vector<corpus::Document> generate_synthetic_corpus(const SynthSpec& spec) {
  check_spec(spec);
  Rng rng(derive_seed(spec.seed, {tag("synth")}));
  std::vector<corpus::Document> docs;
  docs.reserve(spec.n_docs);
  const int width = static_cast<int>(std::to_string(spec.n_docs).size());
  for (std::size_t i = 0; i < spec.n_docs; ++i) {
    const int cls = bernoulli(rng, spec.class_balance) ? 1 : 0;
    std::string text;
    auto add = [&](const std::string& tok) {
      if (!text.empty()) text.push_back(' ');
      text += tok;
    };
    // Class and background slots are interleaved so bigrams mix both kinds.
    std::vector<std::string> toks;
    for (std::size_t k = 0; k < spec.class_tokens; ++k) {
      const int from = bernoulli(rng, spec.signal) ? cls : 1 - cls;
      toks.push_back("c" + std::to_string(from) + "t" + std::to_string(uniform_index(rng, spec.class_vocab)));
    }
    for (std::size_t k = 0; k < spec.background_tokens; ++k)
      toks.push_back("w" + std::to_string(uniform_index(rng, spec.background_vocab)));
    for (std::size_t k = toks.size(); k > 1; --k) std::swap(toks[k - 1], toks[uniform_index(rng, k)]);
    for (const auto& t : toks) add(t);

    const int label = bernoulli(rng, spec.noise) ? 1 - cls : cls;
    corpus::Document d;
    std::string num = std::to_string(i);
    d.id = "synth-" + std::string(static_cast<std::size_t>(width) - num.size(), '0') + num;
    d.raw_text = text;
    d.norm_text = text;
    d.label = label;
    d.lang = "en";
    d.source = "synthetic";
    docs.push_back(std::move(d));
  }
  return docs;
}

inline io::Json spec_to_json(const SynthSpec& s) {
  return {{"n_docs", s.n_docs},
          {"class_vocab", s.class_vocab},
          {"background_vocab", s.background_vocab},
          {"class_balance", s.class_balance},
          {"signal", s.signal},
          {"noise", s.noise},
          {"class_tokens", s.class_tokens},
          {"background_tokens", s.background_tokens},
          {"seed", s.seed}};
}

}  // namespace alcrowd::simulator
