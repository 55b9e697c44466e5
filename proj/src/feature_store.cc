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

#include "mia/feature_store.h"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "binary_io.h"
#include "json.hpp"
#include "mia/errors.h"

namespace mia {
namespace {

using internal::AppendF32;
using internal::AppendU32;
using internal::LoadF32;
using internal::LoadU32;

FeatureHeader ParseHeader(std::string_view bytes, const std::filesystem::path& path) {
  if (bytes.size() < kFeatureHeaderBytes) {
    throw FormatError(path.string() + ": truncated header (" +
                      std::to_string(bytes.size()) + " bytes)");
  }
  if (bytes.substr(0, 4) != std::string_view(kFeatureMagic, 4)) {
    throw FormatError(path.string() + ": bad magic, expected MIAF");
  }
  FeatureHeader header;
  header.version = LoadU32(bytes.data() + 4);
  if (header.version != kFeatureVersion) {
    throw FormatError(path.string() + ": unsupported feature file version " +
                      std::to_string(header.version));
  }
  header.num_frames = LoadU32(bytes.data() + 8);
  header.dim = LoadU32(bytes.data() + 12);
  return header;
}

}  // namespace

std::string_view ToString(Membership m) {
  switch (m) {
    case Membership::kSeen:
      return "seen";
    case Membership::kUnseen:
      return "unseen";
    case Membership::kUnknown:
      return "unknown";
  }
  return "unknown";
}

Membership ParseMembership(std::string_view token) {
  if (token == "seen") return Membership::kSeen;
  if (token == "unseen") return Membership::kUnseen;
  if (token == "unknown") return Membership::kUnknown;
  throw ValidationError("unknown membership token \"" + std::string(token) + "\"");
}

void WriteFeatureFile(const FeatureSequence& seq, const std::filesystem::path& path) {
  const auto m = seq.frames.rows();
  const auto q = seq.frames.cols();
  if (q < 1) throw ValidationError("feature sequence has q = 0");
  if (static_cast<std::uint64_t>(m) > std::numeric_limits<std::uint32_t>::max() ||
      static_cast<std::uint64_t>(q) > std::numeric_limits<std::uint32_t>::max()) {
    throw ValidationError("feature sequence too large for u32 header");
  }
  std::string bytes;
  bytes.reserve(kFeatureHeaderBytes + 4 * static_cast<std::size_t>(m * q));
  bytes.append(kFeatureMagic, 4);
  AppendU32(bytes, kFeatureVersion);
  AppendU32(bytes, static_cast<std::uint32_t>(m));
  AppendU32(bytes, static_cast<std::uint32_t>(q));
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < q; ++j) {
      const double v = seq.frames(i, j);
      const float f = static_cast<float>(v);
      if (!std::isfinite(v) || !std::isfinite(f)) {
        throw ValidationError("non-finite value at frame " + std::to_string(i) +
                              ", dim " + std::to_string(j) + " in " +
                              (seq.utterance_id.empty() ? path.string() : seq.utterance_id));
      }
      AppendF32(bytes, f);
    }
  }
  internal::WriteFileBytes(path, bytes);
}

FeatureHeader ReadFeatureHeader(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StorageError("cannot open " + path.string());
  char buf[kFeatureHeaderBytes];
  in.read(buf, kFeatureHeaderBytes);
  return ParseHeader(std::string_view(buf, static_cast<std::size_t>(in.gcount())), path);
}

FeatureSequence ReadFeatureFile(const std::filesystem::path& path) {
  const std::string bytes = internal::ReadFileBytes(path);
  const FeatureHeader header = ParseHeader(bytes, path);
  const std::uint64_t count = std::uint64_t{header.num_frames} * header.dim;
  const std::uint64_t expected = kFeatureHeaderBytes + 4 * count;
  if (bytes.size() < expected) {
    throw FormatError(path.string() + ": truncated payload, expected " +
                      std::to_string(expected) + " bytes, found " +
                      std::to_string(bytes.size()));
  }
  if (bytes.size() > expected) {
    throw FormatError(path.string() + ": " + std::to_string(bytes.size() - expected) +
                      " trailing bytes after payload");
  }
  FeatureSequence seq;
  seq.frames.resize(header.num_frames, header.dim);
  const char* p = bytes.data() + kFeatureHeaderBytes;
  for (std::uint32_t i = 0; i < header.num_frames; ++i) {
    for (std::uint32_t j = 0; j < header.dim; ++j, p += 4) {
      const float f = LoadF32(p);
      if (!std::isfinite(f)) {
        throw FormatError(path.string() + ": non-finite value at frame " + std::to_string(i));
      }
      seq.frames(i, j) = f;
    }
  }
  return seq;
}

std::filesystem::path Manifest::Resolve(const ManifestEntry& entry) const {
  std::filesystem::path p(entry.path);
  return p.is_absolute() ? p : base_dir / p;
}

Manifest LoadManifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw StorageError("cannot open manifest " + path.string());
  Manifest manifest;
  manifest.base_dir = path.parent_path();

  std::map<std::string, int> id_counts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": malformed JSON: " + e.what());
    }
    if (!obj.is_object()) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": expected a JSON object");
    }
    if (obj.contains("metadata")) {
      const auto& meta = obj["metadata"];
      manifest.metadata_json = meta.dump();
      if (meta.is_object() && meta.contains("q")) {
        manifest.dim = meta["q"].get<std::uint32_t>();
      }
      continue;
    }
    ManifestEntry entry;
    try {
      entry.utterance_id = obj.at("utterance_id").get<std::string>();
      entry.speaker_id = obj.at("speaker_id").get<std::string>();
      entry.path = obj.at("path").get<std::string>();
      if (obj.contains("membership")) {
        entry.membership = ParseMembership(obj["membership"].get<std::string>());
      }
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    ++id_counts[entry.utterance_id];
    manifest.entries.push_back(std::move(entry));
  }

  std::string duplicates;
  for (const auto& [id, count] : id_counts) {
    if (count > 1) duplicates += (duplicates.empty() ? "" : ", ") + ("\"" + id + "\"");
  }
  if (!duplicates.empty()) {
    throw ValidationError("duplicate utterance_id in " + path.string() + ": " + duplicates);
  }

  for (const auto& entry : manifest.entries) {
    const FeatureHeader header = ReadFeatureHeader(manifest.Resolve(entry));
    if (!manifest.dim) manifest.dim = header.dim;
    if (header.dim != *manifest.dim) {
      throw ValidationError("utterance \"" + entry.utterance_id + "\" has q = " +
                            std::to_string(header.dim) + ", manifest q = " +
                            std::to_string(*manifest.dim));
    }
  }
  return manifest;
}

void WriteManifest(const Manifest& manifest, const std::filesystem::path& path) {
  std::ostringstream out;
  if (!manifest.metadata_json.empty()) {
    nlohmann::json meta = {{"metadata", nlohmann::json::parse(manifest.metadata_json)}};
    out << meta.dump() << '\n';
  }
  for (const auto& e : manifest.entries) {
    nlohmann::json obj = {{"utterance_id", e.utterance_id},
                          {"speaker_id", e.speaker_id},
                          {"path", e.path},
                          {"membership", ToString(e.membership)}};
    out << obj.dump() << '\n';
  }
  internal::WriteFileBytes(path, out.str());
}

FeatureSequence LoadSequence(const Manifest& manifest, const ManifestEntry& entry) {
  FeatureSequence seq = ReadFeatureFile(manifest.Resolve(entry));
  if (manifest.dim && seq.dim() != *manifest.dim) {
    throw ValidationError("utterance \"" + entry.utterance_id + "\" changed q since load");
  }
  seq.utterance_id = entry.utterance_id;
  seq.speaker_id = entry.speaker_id;
  return seq;
}

std::vector<FeatureSequence> LoadSequences(const Manifest& manifest) {
  std::vector<FeatureSequence> out;
  out.reserve(manifest.entries.size());
  for (const auto& entry : manifest.entries) out.push_back(LoadSequence(manifest, entry));
  return out;
}

std::vector<SpeakerGroup> GroupBySpeaker(std::span<const FeatureSequence> sequences) {
  std::vector<SpeakerGroup> groups;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& seq : sequences) {
    auto [it, inserted] = index.try_emplace(seq.speaker_id, groups.size());
    if (inserted) groups.push_back(SpeakerGroup{seq.speaker_id, {}});
    groups[it->second].sequences.push_back(seq);
  }
  return groups;
}

std::vector<SpeakerGroup> GroupBySpeaker(const Manifest& manifest) {
  const auto sequences = LoadSequences(manifest);
  return GroupBySpeaker(sequences);
}

}  // namespace mia
