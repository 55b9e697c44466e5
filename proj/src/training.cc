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

#include "mia/training.h"

#include <cmath>
#include <numeric>
#include <unordered_map>

#include "mia/errors.h"
#include "mia/rng.h"

namespace mia {
namespace {

constexpr std::uint64_t kInitStage = 1;
constexpr std::uint64_t kShuffleStage = 2;

double ExampleLoss(const UtteranceNet& net, const UtteranceExample& ex, UtteranceNet& grad) {
  return UtteranceLossAndGradient(net, ex.seq->frames, ex.label, grad);
}

double ExampleLoss(const SpeakerNet& net, const PairExample& ex, SpeakerNet& grad) {
  return SpeakerLossAndGradient(net, ex.a->frames, ex.b->frames, ex.label, grad);
}

double ExampleLossOnly(const UtteranceNet& net, const UtteranceExample& ex) {
  return BinaryCrossEntropy(UtteranceForward(net, ex.seq->frames), ex.label).loss;
}

double ExampleLossOnly(const SpeakerNet& net, const PairExample& ex) {
  return BinaryCrossEntropy(SpeakerForward(net, ex.a->frames, ex.b->frames), ex.label).loss;
}

UtteranceNet ZeroLike(const UtteranceNet& net) { return ZeroUtteranceNet(ShapeOf(net)); }
SpeakerNet ZeroLike(const SpeakerNet& net) { return ZeroSpeakerNet(ShapeOf(net)); }

template <typename Net, typename Example>
double MeanLossImpl(const Net& net, std::span<const Example> examples) {
  if (examples.empty()) return 0.0;
  double total = 0.0;
  for (const auto& ex : examples) total += ExampleLossOnly(net, ex);
  return total / static_cast<double>(examples.size());
}

template <typename Net, typename Example>
TrainedNet<Net> Train(Net net, std::span<const Example> examples, const TrainConfig& cfg) {
  cfg.Validate();
  if (examples.empty()) throw DataError("no training examples");
  TrainedNet<Net> out;
  out.history.initial_loss = MeanLossImpl(net, examples);

  Rng shuffle_rng(DeriveSeed(cfg.seed, kShuffleStage));
  ParameterUpdater updater(cfg, ParameterCount(net));
  Eigen::VectorXd params = Flatten(net);
  std::vector<std::size_t> order(examples.size());
  const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle_rng.Shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t stop = std::min(order.size(), start + batch);
      Net grad = ZeroLike(net);
      for (std::size_t i = start; i < stop; ++i) ExampleLoss(net, examples[order[i]], grad);
      Eigen::VectorXd flat_grad = Flatten(grad) / static_cast<double>(stop - start);
      updater.Step(params, flat_grad);
      Unflatten(params, net);
    }
    out.history.epoch_losses.push_back(MeanLossImpl(net, examples));
  }
  out.net = std::move(net);
  return out;
}

std::unordered_map<std::string, const FeatureSequence*> IndexByUtterance(
    std::span<const FeatureSequence> pool) {
  std::unordered_map<std::string, const FeatureSequence*> index;
  for (const auto& seq : pool) index.emplace(seq.utterance_id, &seq);
  return index;
}

std::size_t DimOf(std::span<const FeatureSequence> pool) {
  if (pool.empty()) throw DataError("empty feature pool");
  return pool.front().dim();
}

}  // namespace

std::string_view ToString(Optimizer optimizer) {
  return optimizer == Optimizer::kAdam ? "adam" : "sgd";
}

Optimizer ParseOptimizer(std::string_view token) {
  if (token == "adam") return Optimizer::kAdam;
  if (token == "sgd") return Optimizer::kSgd;
  throw ConfigError("unknown optimizer \"" + std::string(token) + "\"");
}

void TrainConfig::Validate() const {
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be positive");
  }
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (attention_width < 1 || hidden_width < 1) throw ConfigError("network widths must be positive");
}

ParameterUpdater::ParameterUpdater(const TrainConfig& cfg, Eigen::Index size)
    : cfg_(cfg), m_(Eigen::VectorXd::Zero(size)), v_(Eigen::VectorXd::Zero(size)) {}

void ParameterUpdater::Step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
  ++step_;
  if (cfg_.optimizer == Optimizer::kSgd) {
    params.noalias() -= cfg_.learning_rate * grad;
    return;
  }
  m_ = cfg_.beta1 * m_ + (1.0 - cfg_.beta1) * grad;
  v_ = cfg_.beta2 * v_ + (1.0 - cfg_.beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
  params.array() -= cfg_.learning_rate * (m_.array() / c1) /
                    ((v_.array() / c2).sqrt() + cfg_.epsilon);
}

std::vector<UtteranceExample> UtteranceExamples(const PseudoLabelSet& labels,
                                                std::span<const FeatureSequence> pool) {
  const auto index = IndexByUtterance(pool);
  std::vector<UtteranceExample> examples;
  std::string missing;
  auto add = [&](const std::vector<std::string>& ids, double label) {
    for (const auto& id : ids) {
      auto it = index.find(id);
      if (it == index.end()) {
        missing += (missing.empty() ? "" : ", ") + id;
        continue;
      }
      examples.push_back(UtteranceExample{it->second, label});
    }
  };
  add(labels.positives, 1.0);
  add(labels.negatives, 0.0);
  if (!missing.empty()) throw DataError("no features for pseudo-labeled utterance(s): " + missing);
  return examples;
}

std::vector<PairExample> SpeakerPairExamples(const PseudoLabelSet& labels,
                                             std::span<const FeatureSequence> pool) {
  std::unordered_map<std::string, std::vector<const FeatureSequence*>> by_speaker;
  for (const auto& seq : pool) by_speaker[seq.speaker_id].push_back(&seq);

  std::vector<PairExample> examples;
  std::string missing;
  auto add = [&](const std::vector<std::string>& ids, double label) {
    for (const auto& id : ids) {
      auto it = by_speaker.find(id);
      if (it == by_speaker.end()) {
        missing += (missing.empty() ? "" : ", ") + id;
        continue;
      }
      const auto& utts = it->second;
      if (utts.size() < 2) {
        throw InsufficientDataError("pseudo-labeled speaker \"" + id + "\" has " +
                                    std::to_string(utts.size()) +
                                    " utterance(s); pair training needs at least 2");
      }
      for (std::size_t i = 0; i < utts.size(); ++i) {
        for (std::size_t j = i + 1; j < utts.size(); ++j) {
          examples.push_back(PairExample{utts[i], utts[j], label});
        }
      }
    }
  };
  add(labels.positives, 1.0);
  add(labels.negatives, 0.0);
  if (!missing.empty()) throw DataError("no features for pseudo-labeled speaker(s): " + missing);
  return examples;
}

TrainedNet<UtteranceNet> TrainUtteranceNet(UtteranceNet net,
                                           std::span<const UtteranceExample> examples,
                                           const TrainConfig& cfg) {
  return Train<UtteranceNet, UtteranceExample>(std::move(net), examples, cfg);
}

TrainedNet<SpeakerNet> TrainSpeakerNet(SpeakerNet net, std::span<const PairExample> examples,
                                       const TrainConfig& cfg) {
  return Train<SpeakerNet, PairExample>(std::move(net), examples, cfg);
}

TrainedNet<UtteranceNet> TrainUtteranceAttack(const PseudoLabelSet& labels,
                                              std::span<const FeatureSequence> pool,
                                              const TrainConfig& cfg) {
  cfg.Validate();
  const auto examples = UtteranceExamples(labels, pool);
  Rng init_rng(DeriveSeed(cfg.seed, kInitStage));
  const NetShape shape{static_cast<Eigen::Index>(DimOf(pool)), cfg.attention_width,
                       cfg.hidden_width};
  return TrainUtteranceNet(InitUtteranceNet(shape, init_rng), examples, cfg);
}

TrainedNet<SpeakerNet> TrainSpeakerAttack(const PseudoLabelSet& labels,
                                          std::span<const FeatureSequence> pool,
                                          const TrainConfig& cfg) {
  cfg.Validate();
  const auto examples = SpeakerPairExamples(labels, pool);
  Rng init_rng(DeriveSeed(cfg.seed, kInitStage));
  const NetShape shape{static_cast<Eigen::Index>(DimOf(pool)), cfg.attention_width,
                       cfg.hidden_width};
  return TrainSpeakerNet(InitSpeakerNet(shape, init_rng), examples, cfg);
}

double MeanLoss(const UtteranceNet& net, std::span<const UtteranceExample> examples) {
  return MeanLossImpl(net, examples);
}

double MeanLoss(const SpeakerNet& net, std::span<const PairExample> examples) {
  return MeanLossImpl(net, examples);
}

}  // namespace mia
