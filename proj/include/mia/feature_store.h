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

#ifndef MIA_FEATURE_STORE_H_
#define MIA_FEATURE_STORE_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace mia {

// Frame-major storage so each frame is a contiguous row.
using FrameMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Membership { kSeen, kUnseen, kUnknown };

std::string_view ToString(Membership m);
// Throws ValidationError on anything but "seen", "unseen" or "unknown".
Membership ParseMembership(std::string_view token);

// One utterance's frame-level representations, m frames by q dimensions.
// Values are held in double precision after load.
struct FeatureSequence {
  std::string utterance_id;
  std::string speaker_id;
  FrameMatrix frames;

  std::size_t num_frames() const { return static_cast<std::size_t>(frames.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(frames.cols()); }
};

struct SpeakerGroup {
  std::string speaker_id;
  std::vector<FeatureSequence> sequences;
};

// Feature file layout (little-endian):
//   "MIAF" | u32 version = 1 | u32 m | u32 q | m*q float32, frame-major.
inline constexpr char kFeatureMagic[4] = {'M', 'I', 'A', 'F'};
inline constexpr std::uint32_t kFeatureVersion = 1;
inline constexpr std::size_t kFeatureHeaderBytes = 16;

struct FeatureHeader {
  std::uint32_t version = kFeatureVersion;
  std::uint32_t num_frames = 0;
  std::uint32_t dim = 0;
};

// Values are narrowed to float32. Throws ValidationError if any value is
// non-finite before or after narrowing, StorageError on I/O failure.
void WriteFeatureFile(const FeatureSequence& seq, const std::filesystem::path& path);

// Identity fields of the result are left empty; the manifest supplies them.
// Throws FormatError on bad magic, unsupported version or truncated payload.
FeatureSequence ReadFeatureFile(const std::filesystem::path& path);
FeatureHeader ReadFeatureHeader(const std::filesystem::path& path);

struct ManifestEntry {
  std::string utterance_id;
  std::string speaker_id;
  std::string path;  // as written, relative to the manifest's directory
  Membership membership = Membership::kUnknown;
};

// NDJSON index of feature files. A line whose object carries a "metadata"
// key is a metadata line rather than an entry; its optional "q" declares the
// dataset dimensionality.
struct Manifest {
  std::filesystem::path base_dir;
  std::vector<ManifestEntry> entries;
  std::optional<std::uint32_t> dim;
  std::string metadata_json;  // raw metadata object, empty when absent

  std::filesystem::path Resolve(const ManifestEntry& entry) const;
};

// Parses and validates: unique utterance ids, known membership tokens, every
// path readable with a header whose q matches the declared (or first) q.
Manifest LoadManifest(const std::filesystem::path& path);
void WriteManifest(const Manifest& manifest, const std::filesystem::path& path);

FeatureSequence LoadSequence(const Manifest& manifest, const ManifestEntry& entry);
std::vector<FeatureSequence> LoadSequences(const Manifest& manifest);

// Partitions by speaker_id, groups ordered by first appearance and sequences
// in input order.
std::vector<SpeakerGroup> GroupBySpeaker(std::span<const FeatureSequence> sequences);
std::vector<SpeakerGroup> GroupBySpeaker(const Manifest& manifest);

}  // namespace mia

#endif  // MIA_FEATURE_STORE_H_
