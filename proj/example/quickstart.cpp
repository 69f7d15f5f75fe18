// Generates a small synthetic corpus and compares entropy sampling against
// random sampling with logistic regression.

#include <iostream>

#include "alcrowd/alcrowd.hpp"

int main() {
  using namespace alcrowd;

  simulator::SynthSpec spec;
  spec.n_docs = 1600;
  spec.class_vocab = 200;
  spec.class_tokens = 2;
  spec.signal = 0.85;
  spec.noise = 0.02;
  spec.seed = 7;
  const auto docs = simulator::generate_synthetic_corpus(spec);

  simulator::ExperimentConfig cfg;
  cfg.train_size = 100;
  cfg.test_size = 500;
  cfg.seed_size = 100;
  cfg.batch_size = 100;
  cfg.repeats = 3;
  cfg.master_seed = 42;
  cfg.strategies = {strategies::StrategyKind::Random, strategies::StrategyKind::Entropy};
  cfg.learners = {simulator::LearnerSpec{{learners::LearnerKind::LR}}};

  const auto result = simulator::run_experiment(docs, cfg);
  for (const auto& s : result.summaries) {
    std::cout << s.strategy << " + " << s.learner << ": full-pool F1 " << s.full_value << ", labels to 95% ";
    if (s.labels_to_target) std::cout << *s.labels_to_target;
    else std::cout << "not reached";
    std::cout << ", AUC " << s.auc << "\n";
  }
}
