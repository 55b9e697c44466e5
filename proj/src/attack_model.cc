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

#include "mia/attack_model.h"

#include <cmath>
#include <string>
#include <vector>

#include "mia/errors.h"

namespace mia {
namespace {

void FillUniform(Eigen::Ref<Eigen::MatrixXd> m, double bound, Rng& rng) {
  // Row-major fill so the draw order matches the documented parameter order.
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.Uniform(-bound, bound);
  }
}

void FillUniform(Eigen::VectorXd& v, double bound, Rng& rng) {
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.Uniform(-bound, bound);
}

AttentivePooling ZeroPooling(const NetShape& s) {
  return AttentivePooling{Eigen::MatrixXd::Zero(s.attention_width, s.input_dim),
                          Eigen::VectorXd::Zero(s.attention_width),
                          Eigen::VectorXd::Zero(s.attention_width)};
}

void InitPooling(AttentivePooling& pool, Rng& rng) {
  FillUniform(pool.w1, 1.0 / std::sqrt(static_cast<double>(pool.w1.cols())), rng);
  FillUniform(pool.u, 1.0 / std::sqrt(static_cast<double>(pool.u.size())), rng);
}

void CheckFrames(const AttentivePooling& pool, const FrameMatrix& frames,
                 std::span<const double> mass) {
  if (frames.rows() < 1) throw TooFewFramesError("attentive pooling needs at least one frame");
  if (frames.cols() != pool.input_dim()) {
    throw ConfigError("frame dimension " + std::to_string(frames.cols()) +
                      " does not match network input dimension " +
                      std::to_string(pool.input_dim()));
  }
  if (!mass.empty() && static_cast<Eigen::Index>(mass.size()) != frames.rows()) {
    throw ConfigError("frame mass length does not match frame count");
  }
}

void CheckShape(const NetShape& s) {
  if (s.input_dim < 1 || s.attention_width < 1 || s.hidden_width < 1) {
    throw ConfigError("network widths and input dimension must be positive");
  }
}

template <typename Vec>
void Append(Eigen::VectorXd& out, Eigen::Index& pos, const Vec& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) out(pos++) = v(i);
}

void AppendRowMajor(Eigen::VectorXd& out, Eigen::Index& pos, const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out(pos++) = m(i, j);
  }
}

template <typename Vec>
void Extract(const Eigen::VectorXd& in, Eigen::Index& pos, Vec& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = in(pos++);
}

void ExtractRowMajor(const Eigen::VectorXd& in, Eigen::Index& pos, Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = in(pos++);
  }
}

Eigen::Index PoolParameterCount(const AttentivePooling& pool) {
  return pool.w1.size() + pool.b1.size() + pool.u.size();
}

}  // namespace

UtteranceNet ZeroUtteranceNet(const NetShape& s) {
  CheckShape(s);
  return UtteranceNet{ZeroPooling(s), Eigen::MatrixXd::Zero(s.hidden_width, s.input_dim),
                      Eigen::VectorXd::Zero(s.hidden_width), Eigen::VectorXd::Zero(s.hidden_width),
                      0.0};
}

SpeakerNet ZeroSpeakerNet(const NetShape& s) {
  CheckShape(s);
  return SpeakerNet{ZeroPooling(s), Eigen::MatrixXd::Zero(s.hidden_width, s.input_dim),
                    Eigen::VectorXd::Zero(s.hidden_width)};
}

UtteranceNet InitUtteranceNet(const NetShape& s, Rng& rng) {
  UtteranceNet net = ZeroUtteranceNet(s);
  InitPooling(net.pool, rng);
  FillUniform(net.w2, 1.0 / std::sqrt(static_cast<double>(s.input_dim)), rng);
  FillUniform(net.w3, 1.0 / std::sqrt(static_cast<double>(s.hidden_width)), rng);
  return net;
}

SpeakerNet InitSpeakerNet(const NetShape& s, Rng& rng) {
  SpeakerNet net = ZeroSpeakerNet(s);
  InitPooling(net.pool, rng);
  FillUniform(net.w, 1.0 / std::sqrt(static_cast<double>(s.input_dim)), rng);
  return net;
}

NetShape ShapeOf(const UtteranceNet& net) {
  return NetShape{net.pool.input_dim(), net.pool.attention_width(), net.w2.rows()};
}

NetShape ShapeOf(const SpeakerNet& net) {
  return NetShape{net.pool.input_dim(), net.pool.attention_width(), net.w.rows()};
}

double Sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double Softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

BceResult BinaryCrossEntropy(double logit, double label) {
  return BceResult{label * Softplus(-logit) + (1.0 - label) * Softplus(logit),
                   Sigmoid(logit) - label};
}

PoolCache PoolForward(const AttentivePooling& pool, const FrameMatrix& frames,
                      std::span<const double> frame_mass) {
  CheckFrames(pool, frames, frame_mass);
  PoolCache cache;
  Eigen::MatrixXd pre = frames * pool.w1.transpose();
  pre.rowwise() += pool.b1.transpose();
  cache.activations = pre.array().tanh().matrix();
  const Eigen::VectorXd energy = cache.activations * pool.u;
  const double peak = energy.maxCoeff();
  cache.attention = (energy.array() - peak).exp().matrix();
  if (!frame_mass.empty()) {
    for (Eigen::Index i = 0; i < frames.rows(); ++i) {
      cache.attention(i) *= frame_mass[static_cast<std::size_t>(i)];
    }
  }
  cache.attention /= cache.attention.sum();
  cache.pooled = frames.transpose() * cache.attention;
  return cache;
}

void PoolBackward(const AttentivePooling& pool, const FrameMatrix& frames, const PoolCache& cache,
                  const Eigen::VectorXd& d_pooled, AttentivePooling& grad) {
  const Eigen::VectorXd d_attention = frames * d_pooled;
  const double mean = cache.attention.dot(d_attention);
  const Eigen::VectorXd d_energy =
      (cache.attention.array() * (d_attention.array() - mean)).matrix();
  grad.u.noalias() += cache.activations.transpose() * d_energy;
  const Eigen::MatrixXd d_pre =
      ((d_energy * pool.u.transpose()).array() * (1.0 - cache.activations.array().square()))
          .matrix();
  grad.w1.noalias() += d_pre.transpose() * frames;
  grad.b1.noalias() += d_pre.colwise().sum().transpose();
}

double UtteranceForward(const UtteranceNet& net, const FrameMatrix& frames,
                        std::span<const double> frame_mass) {
  const PoolCache cache = PoolForward(net.pool, frames, frame_mass);
  const Eigen::VectorXd hidden = (net.w2 * cache.pooled + net.b2).cwiseMax(0.0);
  return net.w3.dot(hidden) + net.b3;
}

double UtteranceForward(const UtteranceNet& net, const FeatureSequence& seq) {
  return UtteranceForward(net, seq.frames);
}

double UtteranceLossAndGradient(const UtteranceNet& net, const FrameMatrix& frames, double label,
                                UtteranceNet& grad, std::span<const double> frame_mass) {
  const PoolCache cache = PoolForward(net.pool, frames, frame_mass);
  const Eigen::VectorXd pre = net.w2 * cache.pooled + net.b2;
  const Eigen::VectorXd hidden = pre.cwiseMax(0.0);
  const double logit = net.w3.dot(hidden) + net.b3;
  const BceResult bce = BinaryCrossEntropy(logit, label);

  grad.b3 += bce.grad;
  grad.w3.noalias() += bce.grad * hidden;
  const Eigen::VectorXd d_pre =
      (bce.grad * net.w3.array() * (pre.array() > 0.0).cast<double>()).matrix();
  grad.w2.noalias() += d_pre * cache.pooled.transpose();
  grad.b2.noalias() += d_pre;
  const Eigen::VectorXd d_pooled = net.w2.transpose() * d_pre;
  PoolBackward(net.pool, frames, cache, d_pooled, grad.pool);
  return bce.loss;
}

double SpeakerForward(const SpeakerNet& net, const FrameMatrix& a, const FrameMatrix& b) {
  const Eigen::VectorXd za = net.w * PoolForward(net.pool, a).pooled + net.b;
  const Eigen::VectorXd zb = net.w * PoolForward(net.pool, b).pooled + net.b;
  return za.dot(zb);
}

double SpeakerForward(const SpeakerNet& net, const FeatureSequence& a, const FeatureSequence& b) {
  return SpeakerForward(net, a.frames, b.frames);
}

double SpeakerLossAndGradient(const SpeakerNet& net, const FrameMatrix& a, const FrameMatrix& b,
                              double label, SpeakerNet& grad) {
  const PoolCache ca = PoolForward(net.pool, a);
  const PoolCache cb = PoolForward(net.pool, b);
  const Eigen::VectorXd za = net.w * ca.pooled + net.b;
  const Eigen::VectorXd zb = net.w * cb.pooled + net.b;
  const BceResult bce = BinaryCrossEntropy(za.dot(zb), label);

  const Eigen::VectorXd d_za = bce.grad * zb;
  const Eigen::VectorXd d_zb = bce.grad * za;
  grad.w.noalias() += d_za * ca.pooled.transpose() + d_zb * cb.pooled.transpose();
  grad.b.noalias() += d_za + d_zb;
  PoolBackward(net.pool, a, ca, net.w.transpose() * d_za, grad.pool);
  PoolBackward(net.pool, b, cb, net.w.transpose() * d_zb, grad.pool);
  return bce.loss;
}

double ImprovedUtteranceScore(const UtteranceNet& net, const FeatureSequence& seq) {
  return Sigmoid(UtteranceForward(net, seq));
}

double ImprovedSpeakerScore(const SpeakerNet& net, const SpeakerGroup& group) {
  const std::size_t n = group.sequences.size();
  if (n < 2) {
    throw TooFewUtterancesError("speaker \"" + group.speaker_id + "\" has " + std::to_string(n) +
                                " utterance(s); at least 2 are required");
  }
  std::vector<Eigen::VectorXd> embeddings;
  embeddings.reserve(n);
  for (const auto& seq : group.sequences) {
    embeddings.push_back(net.w * PoolForward(net.pool, seq.frames).pooled + net.b);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) total += Sigmoid(embeddings[i].dot(embeddings[j]));
  }
  return total / static_cast<double>(n * (n - 1) / 2);
}

Eigen::Index ParameterCount(const UtteranceNet& net) {
  return PoolParameterCount(net.pool) + net.w2.size() + net.b2.size() + net.w3.size() + 1;
}

Eigen::Index ParameterCount(const SpeakerNet& net) {
  return PoolParameterCount(net.pool) + net.w.size() + net.b.size();
}

Eigen::VectorXd Flatten(const UtteranceNet& net) {
  Eigen::VectorXd out(ParameterCount(net));
  Eigen::Index pos = 0;
  AppendRowMajor(out, pos, net.pool.w1);
  Append(out, pos, net.pool.b1);
  Append(out, pos, net.pool.u);
  AppendRowMajor(out, pos, net.w2);
  Append(out, pos, net.b2);
  Append(out, pos, net.w3);
  out(pos++) = net.b3;
  return out;
}

Eigen::VectorXd Flatten(const SpeakerNet& net) {
  Eigen::VectorXd out(ParameterCount(net));
  Eigen::Index pos = 0;
  AppendRowMajor(out, pos, net.pool.w1);
  Append(out, pos, net.pool.b1);
  Append(out, pos, net.pool.u);
  AppendRowMajor(out, pos, net.w);
  Append(out, pos, net.b);
  return out;
}

void Unflatten(const Eigen::VectorXd& params, UtteranceNet& net) {
  if (params.size() != ParameterCount(net)) throw ConfigError("parameter count mismatch");
  Eigen::Index pos = 0;
  ExtractRowMajor(params, pos, net.pool.w1);
  Extract(params, pos, net.pool.b1);
  Extract(params, pos, net.pool.u);
  ExtractRowMajor(params, pos, net.w2);
  Extract(params, pos, net.b2);
  Extract(params, pos, net.w3);
  net.b3 = params(pos++);
}

void Unflatten(const Eigen::VectorXd& params, SpeakerNet& net) {
  if (params.size() != ParameterCount(net)) throw ConfigError("parameter count mismatch");
  Eigen::Index pos = 0;
  ExtractRowMajor(params, pos, net.pool.w1);
  Extract(params, pos, net.pool.b1);
  Extract(params, pos, net.pool.u);
  ExtractRowMajor(params, pos, net.w);
  Extract(params, pos, net.b);
}

}  // namespace mia
