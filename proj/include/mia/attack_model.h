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

#ifndef MIA_ATTACK_MODEL_H_
#define MIA_ATTACK_MODEL_H_

#include <cstdint>
#include <span>

#include <Eigen/Dense>

#include "mia/feature_store.h"
#include "mia/rng.h"

namespace mia {

// Single-head attentive pooling over frames h_i:
//   e_i = u . tanh(W1 h_i + b1),  a = softmax(e),  c = sum_i a_i h_i.
struct AttentivePooling {
  Eigen::MatrixXd w1;  // p x q
  Eigen::VectorXd b1;  // p
  Eigen::VectorXd u;   // p

  Eigen::Index attention_width() const { return w1.rows(); }
  Eigen::Index input_dim() const { return w1.cols(); }
};

// Improved utterance-level attack network:
//   c = pool(H),  z = relu(W2 c + b2),  logit = w3 . z + b3.
struct UtteranceNet {
  AttentivePooling pool;
  Eigen::MatrixXd w2;  // r x q
  Eigen::VectorXd b2;  // r
  Eigen::VectorXd w3;  // r
  double b3 = 0.0;
};

// Improved speaker-level attack network over a pair of utterances:
//   z_x = W pool(H_x) + b,  logit = z_a . z_b.
struct SpeakerNet {
  AttentivePooling pool;
  Eigen::MatrixXd w;  // r x q
  Eigen::VectorXd b;  // r
};

struct NetShape {
  Eigen::Index input_dim = 0;          // q
  Eigen::Index attention_width = 128;  // p
  Eigen::Index hidden_width = 256;     // r
};

// Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero.
UtteranceNet InitUtteranceNet(const NetShape& shape, Rng& rng);
SpeakerNet InitSpeakerNet(const NetShape& shape, Rng& rng);
// All-zero parameters of the given shape; also used as gradient accumulators.
UtteranceNet ZeroUtteranceNet(const NetShape& shape);
SpeakerNet ZeroSpeakerNet(const NetShape& shape);

NetShape ShapeOf(const UtteranceNet& net);
NetShape ShapeOf(const SpeakerNet& net);

double Sigmoid(double x);
// log(1 + exp(x)) without overflow.
double Softplus(double x);

struct BceResult {
  double loss = 0.0;
  double grad = 0.0;  // d loss / d logit
};

// loss = softplus(logit) - label * logit, evaluated as
// label * softplus(-logit) + (1 - label) * softplus(logit).
BceResult BinaryCrossEntropy(double logit, double label);

struct PoolCache {
  Eigen::MatrixXd activations;  // m x p, tanh(W1 h_i + b1)
  Eigen::VectorXd attention;    // m
  Eigen::VectorXd pooled;       // q
};

// `frame_mass`, when non-empty, scales each frame's unnormalized attention:
// a_i proportional to mass_i * exp(e_i). A frame repeated k times behaves as
// one frame with mass k.
PoolCache PoolForward(const AttentivePooling& pool, const FrameMatrix& frames,
                      std::span<const double> frame_mass = {});

// Accumulates (+=) parameter gradients of the pooling layer into `grad`.
void PoolBackward(const AttentivePooling& pool, const FrameMatrix& frames, const PoolCache& cache,
                  const Eigen::VectorXd& d_pooled, AttentivePooling& grad);

double UtteranceForward(const UtteranceNet& net, const FeatureSequence& seq);
double UtteranceForward(const UtteranceNet& net, const FrameMatrix& frames,
                        std::span<const double> frame_mass = {});

// BCE of the utterance logit against `label`; gradients added to `grad`.
double UtteranceLossAndGradient(const UtteranceNet& net, const FrameMatrix& frames, double label,
                                UtteranceNet& grad, std::span<const double> frame_mass = {});

double SpeakerForward(const SpeakerNet& net, const FeatureSequence& a, const FeatureSequence& b);
double SpeakerForward(const SpeakerNet& net, const FrameMatrix& a, const FrameMatrix& b);

double SpeakerLossAndGradient(const SpeakerNet& net, const FrameMatrix& a, const FrameMatrix& b,
                              double label, SpeakerNet& grad);

// sigmoid(utterance logit).
double ImprovedUtteranceScore(const UtteranceNet& net, const FeatureSequence& seq);
// Mean over all unordered utterance pairs of sigmoid(pair logit).
// Throws TooFewUtterancesError for fewer than two utterances.
double ImprovedSpeakerScore(const SpeakerNet& net, const SpeakerGroup& group);

// Flat parameter views, in checkpoint order:
//   utterance: W1 (row-major), b1, u, W2 (row-major), b2, w3, b3
//   speaker:   W1 (row-major), b1, u, W (row-major), b
Eigen::VectorXd Flatten(const UtteranceNet& net);
Eigen::VectorXd Flatten(const SpeakerNet& net);
void Unflatten(const Eigen::VectorXd& params, UtteranceNet& net);
void Unflatten(const Eigen::VectorXd& params, SpeakerNet& net);
Eigen::Index ParameterCount(const UtteranceNet& net);
Eigen::Index ParameterCount(const SpeakerNet& net);

}  // namespace mia

#endif  // MIA_ATTACK_MODEL_H_
