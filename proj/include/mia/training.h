// Copyright 2026 The MIA Engine Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MIA_TRAINING_H_
#define MIA_TRAINING_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mia/attack_model.h"
#include "mia/feature_store.h"
#include "mia/pseudo_label.h"

namespace mia {

enum class Optimizer { kSgd, kAdam };

std::string_view ToString(Optimizer optimizer);
Optimizer ParseOptimizer(std::string_view token);

struct TrainConfig {
  int epochs = 20;
  double learning_rate = 1e-5;
  Optimizer optimizer = Optimizer::kAdam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 32;
  std::uint64_t seed = 0;
  Eigen::Index attention_width = 128;
  Eigen::Index hidden_width = 256;

  // Throws ConfigError on epochs < 1, learning_rate <= 0, batch_size < 1.
  void Validate() const;
};

// Per-parameter first-order update over a flat parameter vector.
class ParameterUpdater {
 public:
  ParameterUpdater(const TrainConfig& cfg, Eigen::Index size);
  void Step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);

 private:
  TrainConfig cfg_;
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
  long step_ = 0;
};

// Mean BCE loss over the labeled examples, the objective being minimized.
struct TrainingHistory {
  double initial_loss = 0.0;
  std::vector<double> epoch_losses;  // full-data loss after each epoch
};

template <typename Net>
struct TrainedNet {
  Net net;
  TrainingHistory history;
};

// Labeled example views; the referenced sequences must outlive the call.
struct UtteranceExample {
  const FeatureSequence* seq;
  double label;
};

struct PairExample {
  const FeatureSequence* a;
  const FeatureSequence* b;
  double label;
};

// Resolves pseudo-labels against the pool (positives -> 1, negatives -> 0).
// Throws DataError listing ids without features.
std::vector<UtteranceExample> UtteranceExamples(const PseudoLabelSet& labels,
                                                std::span<const FeatureSequence> pool);

// All unordered within-speaker pairs of every pseudo-seen speaker (label 1)
// and every pseudo-unseen speaker (label 0). Throws DataError for unknown
// speakers and InsufficientDataError for a selected speaker with n < 2.
std::vector<PairExample> SpeakerPairExamples(const PseudoLabelSet& labels,
                                             std::span<const FeatureSequence> pool);

// Parameters are initialized from DeriveSeed(cfg.seed, 1) and examples are
// reshuffled every epoch from DeriveSeed(cfg.seed, 2).
TrainedNet<UtteranceNet> TrainUtteranceAttack(const PseudoLabelSet& labels,
                                              std::span<const FeatureSequence> pool,
                                              const TrainConfig& cfg);
TrainedNet<SpeakerNet> TrainSpeakerAttack(const PseudoLabelSet& labels,
                                          std::span<const FeatureSequence> pool,
                                          const TrainConfig& cfg);

// Lower-level entry points over explicit examples and a starting net.
TrainedNet<UtteranceNet> TrainUtteranceNet(UtteranceNet net,
                                           std::span<const UtteranceExample> examples,
                                           const TrainConfig& cfg);
TrainedNet<SpeakerNet> TrainSpeakerNet(SpeakerNet net, std::span<const PairExample> examples,
                                       const TrainConfig& cfg);

double MeanLoss(const UtteranceNet& net, std::span<const UtteranceExample> examples);
double MeanLoss(const SpeakerNet& net, std::span<const PairExample> examples);

}  // namespace mia

#endif  // MIA_TRAINING_H_
