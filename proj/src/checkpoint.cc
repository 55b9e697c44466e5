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

#include "mia/checkpoint.h"

#include "binary_io.h"
#include "mia/errors.h"

namespace mia {
namespace {

constexpr char kMagic[4] = {'M', 'I', 'A', 'C'};

nlohmann::json ParameterOrder(Level level) {
  if (level == Level::kUtterance) {
    return {"pool.w1[p][q]", "pool.b1[p]", "pool.u[p]", "w2[r][q]", "b2[r]", "w3[r]", "b3"};
  }
  return {"pool.w1[p][q]", "pool.b1[p]", "pool.u[p]", "w[r][q]", "b[r]"};
}

}  // namespace

nlohmann::json TrainConfigToJson(const TrainConfig& cfg) {
  return {{"epochs", cfg.epochs},
          {"learning_rate", cfg.learning_rate},
          {"optimizer", ToString(cfg.optimizer)},
          {"beta1", cfg.beta1},
          {"beta2", cfg.beta2},
          {"epsilon", cfg.epsilon},
          {"batch_size", cfg.batch_size},
          {"seed", cfg.seed},
          {"attention_width", cfg.attention_width},
          {"hidden_width", cfg.hidden_width}};
}

TrainConfig TrainConfigFromJson(const nlohmann::json& j, TrainConfig cfg) {
  if (!j.is_object()) throw ConfigError("training config must be a JSON object");
  try {
    if (j.contains("epochs")) cfg.epochs = j["epochs"].get<int>();
    if (j.contains("learning_rate")) cfg.learning_rate = j["learning_rate"].get<double>();
    if (j.contains("optimizer")) cfg.optimizer = ParseOptimizer(j["optimizer"].get<std::string>());
    if (j.contains("beta1")) cfg.beta1 = j["beta1"].get<double>();
    if (j.contains("beta2")) cfg.beta2 = j["beta2"].get<double>();
    if (j.contains("epsilon")) cfg.epsilon = j["epsilon"].get<double>();
    if (j.contains("batch_size")) cfg.batch_size = j["batch_size"].get<int>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("attention_width")) cfg.attention_width = j["attention_width"].get<Eigen::Index>();
    if (j.contains("hidden_width")) cfg.hidden_width = j["hidden_width"].get<Eigen::Index>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("training config: ") + e.what());
  }
  cfg.Validate();
  return cfg;
}

std::string EncodeCheckpoint(const Checkpoint& checkpoint) {
  const Level level = checkpoint.level();
  const NetShape shape = std::visit([](const auto& net) { return ShapeOf(net); }, checkpoint.net);
  const Eigen::VectorXd params =
      std::visit([](const auto& net) { return Flatten(net); }, checkpoint.net);

  const nlohmann::json header = {{"architecture", ToString(level)},
                                 {"q", shape.input_dim},
                                 {"p", shape.attention_width},
                                 {"r", shape.hidden_width},
                                 {"seed", checkpoint.train.seed},
                                 {"train", TrainConfigToJson(checkpoint.train)},
                                 {"parameter_order", ParameterOrder(level)},
                                 {"parameter_dtype", "float64-le"}};
  const std::string header_text = header.dump();

  std::string bytes(kMagic, 4);
  internal::AppendU32(bytes, kCheckpointVersion);
  internal::AppendU64(bytes, header_text.size());
  bytes += header_text;
  internal::AppendU64(bytes, static_cast<std::uint64_t>(params.size()));
  for (Eigen::Index i = 0; i < params.size(); ++i) internal::AppendF64(bytes, params(i));
  return bytes;
}

Checkpoint DecodeCheckpoint(std::string_view bytes) {
  if (bytes.size() < 16 || bytes.substr(0, 4) != std::string_view(kMagic, 4)) {
    throw FormatError("not a checkpoint file (bad magic)");
  }
  const std::uint32_t version = internal::LoadU32(bytes.data() + 4);
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  const std::uint64_t header_len = internal::LoadU64(bytes.data() + 8);
  if (bytes.size() < 16 + header_len + 8) throw FormatError("truncated checkpoint header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(16, header_len));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint header: ") + e.what());
  }
  const std::size_t blob_at = 16 + header_len;
  const std::uint64_t count = internal::LoadU64(bytes.data() + blob_at);
  if (bytes.size() != blob_at + 8 + 8 * count) throw FormatError("checkpoint parameter blob size mismatch");

  Checkpoint checkpoint;
  NetShape shape;
  Level level;
  try {
    level = ParseLevel(header.at("architecture").get<std::string>());
    shape.input_dim = header.at("q").get<Eigen::Index>();
    shape.attention_width = header.at("p").get<Eigen::Index>();
    shape.hidden_width = header.at("r").get<Eigen::Index>();
    checkpoint.train = TrainConfigFromJson(header.at("train"));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint header: ") + e.what());
  }

  Eigen::VectorXd params(static_cast<Eigen::Index>(count));
  for (std::uint64_t i = 0; i < count; ++i) {
    params(static_cast<Eigen::Index>(i)) = internal::LoadF64(bytes.data() + blob_at + 8 + 8 * i);
  }
  auto load = [&](auto net) {
    if (ParameterCount(net) != params.size()) {
      throw FormatError("checkpoint parameter count does not match its header shape");
    }
    Unflatten(params, net);
    checkpoint.net = std::move(net);
  };
  if (level == Level::kUtterance) {
    load(ZeroUtteranceNet(shape));
  } else {
    load(ZeroSpeakerNet(shape));
  }
  return checkpoint;
}

void WriteCheckpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  internal::WriteFileBytes(path, EncodeCheckpoint(checkpoint));
}

Checkpoint ReadCheckpoint(const std::filesystem::path& path) {
  return DecodeCheckpoint(internal::ReadFileBytes(path));
}

}  // namespace mia
