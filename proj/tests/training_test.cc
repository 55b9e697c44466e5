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

#include <random>

#include <gtest/gtest.h>

#include "mia/errors.h"
#include "test_util.h"

namespace mia {
namespace {

using testing::RandomSequence;

FeatureSequence Shifted(std::mt19937_64& gen, double shift, const std::string& id,
                        const std::string& spk) {
  auto seq = RandomSequence(gen, 8, 4, id, spk);
  seq.frames.array() += shift;
  return seq;
}

// Two utterances that a linear probe separates trivially.
std::vector<FeatureSequence> ToyPool(std::mt19937_64& gen) {
  return {Shifted(gen, 2.0, "pos", "a"), Shifted(gen, -2.0, "neg", "b")};
}

TrainConfig SmallConfig() {
  TrainConfig cfg;
  cfg.epochs = 200;
  cfg.learning_rate = 1e-2;
  cfg.attention_width = 6;
  cfg.hidden_width = 8;
  cfg.seed = 5;
  return cfg;
}

TEST(TrainUtteranceTest, SeparableToyReducesLoss) {
  std::mt19937_64 gen(1);
  const auto pool = ToyPool(gen);
  const PseudoLabelSet labels{Level::kUtterance, 1, {"pos"}, {"neg"}};
  const auto trained = TrainUtteranceAttack(labels, pool, SmallConfig());
  ASSERT_EQ(trained.history.epoch_losses.size(), 200u);
  EXPECT_LT(trained.history.epoch_losses.back(), trained.history.initial_loss);
  EXPECT_LT(trained.history.epoch_losses.back(), 0.05);
  EXPECT_GT(ImprovedUtteranceScore(trained.net, pool[0]),
            ImprovedUtteranceScore(trained.net, pool[1]));
  EXPECT_TRUE(Flatten(trained.net).allFinite());
}

TEST(TrainUtteranceTest, SgdAlsoReducesLoss) {
  std::mt19937_64 gen(2);
  const auto pool = ToyPool(gen);
  auto cfg = SmallConfig();
  cfg.optimizer = Optimizer::kSgd;
  cfg.learning_rate = 0.1;
  const auto trained =
      TrainUtteranceAttack({Level::kUtterance, 1, {"pos"}, {"neg"}}, pool, cfg);
  EXPECT_LT(trained.history.epoch_losses.back(), trained.history.initial_loss);
}

TEST(TrainUtteranceTest, SameSeedIsBitIdentical) {
  std::mt19937_64 gen(3);
  std::vector<FeatureSequence> pool;
  for (int i = 0; i < 12; ++i) {
    pool.push_back(Shifted(gen, i < 6 ? 0.5 : -0.5, "u" + std::to_string(i), "s"));
  }
  const PseudoLabelSet labels{Level::kUtterance, 3, {"u0", "u1", "u2"}, {"u9", "u10", "u11"}};
  auto cfg = SmallConfig();
  cfg.epochs = 10;
  cfg.batch_size = 4;
  const auto a = TrainUtteranceAttack(labels, pool, cfg);
  const auto b = TrainUtteranceAttack(labels, pool, cfg);
  EXPECT_EQ(Flatten(a.net), Flatten(b.net));
  EXPECT_EQ(a.history.epoch_losses, b.history.epoch_losses);
  cfg.seed += 1;
  EXPECT_NE(Flatten(TrainUtteranceAttack(labels, pool, cfg).net), Flatten(a.net));
}

TEST(TrainUtteranceTest, MissingFeaturesNamed) {
  std::mt19937_64 gen(4);
  const auto pool = ToyPool(gen);
  try {
    UtteranceExamples({Level::kUtterance, 1, {"pos"}, {"ghost"}}, pool);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("ghost"), std::string::npos);
  }
}

std::vector<FeatureSequence> SpeakerPool(std::mt19937_64& gen) {
  std::vector<FeatureSequence> pool;
  for (int i = 0; i < 3; ++i) pool.push_back(Shifted(gen, 1.0, "a" + std::to_string(i), "A"));
  for (int i = 0; i < 2; ++i) pool.push_back(Shifted(gen, -1.0, "b" + std::to_string(i), "B"));
  pool.push_back(Shifted(gen, 0.0, "c0", "C"));
  return pool;
}

TEST(TrainSpeakerTest, PairsAreWithinSpeaker) {
  std::mt19937_64 gen(5);
  const auto pool = SpeakerPool(gen);
  const auto pairs = SpeakerPairExamples({Level::kSpeaker, 1, {"A"}, {"B"}}, pool);
  int positives = 0, negatives = 0;
  for (const auto& p : pairs) {
    EXPECT_EQ(p.a->speaker_id, p.b->speaker_id);
    EXPECT_NE(p.a, p.b);
    (p.label == 1.0 ? positives : negatives)++;
  }
  EXPECT_EQ(positives, 3);
  EXPECT_EQ(negatives, 1);
}

TEST(TrainSpeakerTest, SingleUtteranceSpeakerRejected) {
  std::mt19937_64 gen(6);
  const auto pool = SpeakerPool(gen);
  EXPECT_THROW(SpeakerPairExamples({Level::kSpeaker, 1, {"A"}, {"C"}}, pool),
               InsufficientDataError);
  EXPECT_THROW(SpeakerPairExamples({Level::kSpeaker, 1, {"A"}, {"Z"}}, pool), DataError);
}

TEST(TrainSpeakerTest, ReducesLossAndIsDeterministic) {
  std::mt19937_64 gen(7);
  const auto pool = SpeakerPool(gen);
  const PseudoLabelSet labels{Level::kSpeaker, 1, {"A"}, {"B"}};
  const auto a = TrainSpeakerAttack(labels, pool, SmallConfig());
  const auto b = TrainSpeakerAttack(labels, pool, SmallConfig());
  EXPECT_LT(a.history.epoch_losses.back(), a.history.initial_loss);
  EXPECT_EQ(Flatten(a.net), Flatten(b.net));
}

TEST(TrainConfigTest, Validation) {
  TrainConfig cfg;
  EXPECT_NO_THROW(cfg.Validate());
  cfg.epochs = 0;
  EXPECT_THROW(cfg.Validate(), ConfigError);
  cfg = {};
  cfg.learning_rate = 0;
  EXPECT_THROW(cfg.Validate(), ConfigError);
  cfg = {};
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.Validate(), ConfigError);
  EXPECT_EQ(ParseOptimizer("sgd"), Optimizer::kSgd);
  EXPECT_THROW(ParseOptimizer("rmsprop"), ConfigError);
}

TEST(ParameterUpdaterTest, AdamFirstStepIsSignTimesRate) {
  TrainConfig cfg;
  cfg.learning_rate = 0.1;
  ParameterUpdater updater(cfg, 2);
  Eigen::VectorXd params = Eigen::VectorXd::Zero(2);
  Eigen::VectorXd grad(2);
  grad << 3.0, -0.5;
  updater.Step(params, grad);
  // Bias-corrected first step: m_hat / sqrt(v_hat) = sign(g).
  EXPECT_NEAR(params(0), -0.1, 1e-8);
  EXPECT_NEAR(params(1), 0.1, 1e-7);
}

}  // namespace
}  // namespace mia
