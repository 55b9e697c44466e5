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
#include <random>

#include <gtest/gtest.h>

#include "mia/errors.h"
#include "test_util.h"

namespace mia {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

FeatureSequence Make(std::initializer_list<std::initializer_list<double>> rows,
                     std::string id = "u1", std::string spk = "s1") {
  FeatureSequence seq{std::move(id), std::move(spk), {}};
  seq.frames.resize(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) seq.frames(i, j++) = v;
    ++i;
  }
  return seq;
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
}

void WriteRaw(const fs::path& path, const std::string& bytes) {
  std::ofstream(path, std::ios::binary) << bytes;
}

std::string ReadRaw(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

TEST(FeatureFileTest, WritesDocumentedLayout) {
  const auto dir = TempDir("layout");
  const auto seq = Make({{1, 0, 0}, {0, 1, 0}});
  WriteFeatureFile(seq, dir / "a.miaf");
  const std::string bytes = ReadRaw(dir / "a.miaf");
  ASSERT_EQ(bytes.size(), 40u);  // 16-byte header + 6 float32
  EXPECT_EQ(bytes.substr(0, 4), "MIAF");
  const std::string expected_header("MIAF\x01\0\0\0\x02\0\0\0\x03\0\0\0", 16);
  EXPECT_EQ(bytes.substr(0, 16), expected_header);
  // 1.0f little-endian = 00 00 80 3f
  EXPECT_EQ(bytes.substr(16, 4), std::string("\0\0\x80\x3f", 4));

  const auto back = ReadFeatureFile(dir / "a.miaf");
  EXPECT_EQ(back.frames, seq.frames);
}

TEST(FeatureFileTest, SingleFrameIsStorable) {
  const auto dir = TempDir("single");
  const auto seq = Make({{0.5, -2.0}});
  WriteFeatureFile(seq, dir / "a.miaf");
  EXPECT_EQ(ReadFeatureFile(dir / "a.miaf").frames, seq.frames);
}

TEST(FeatureFileTest, RejectsNonFinite) {
  const auto dir = TempDir("nan");
  auto seq = Make({{1, 2}, {3, 4}});
  seq.frames(1, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(WriteFeatureFile(seq, dir / "a.miaf"), ValidationError);
  seq.frames(1, 0) = 1e300;  // overflows float32
  EXPECT_THROW(WriteFeatureFile(seq, dir / "a.miaf"), ValidationError);
}

TEST(FeatureFileTest, TruncatedPayloadIsFormatError) {
  const auto dir = TempDir("trunc");
  WriteFeatureFile(Make({{1, 2, 3}, {4, 5, 6}}), dir / "a.miaf");
  std::string bytes = ReadRaw(dir / "a.miaf");
  bytes.resize(bytes.size() - 3);
  WriteRaw(dir / "a.miaf", bytes);
  EXPECT_THROW(ReadFeatureFile(dir / "a.miaf"), FormatError);
}

TEST(FeatureFileTest, UnsupportedVersionNamesVersion) {
  const auto dir = TempDir("version");
  WriteFeatureFile(Make({{1, 2}}), dir / "a.miaf");
  std::string bytes = ReadRaw(dir / "a.miaf");
  bytes[4] = 99;
  WriteRaw(dir / "a.miaf", bytes);
  try {
    ReadFeatureFile(dir / "a.miaf");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("version 99"), std::string::npos);
  }
}

TEST(FeatureFileTest, BadMagicIsFormatError) {
  const auto dir = TempDir("magic");
  WriteRaw(dir / "a.miaf", std::string("NOPE\x01\0\0\0\0\0\0\0\x01\0\0\0", 16));
  EXPECT_THROW(ReadFeatureFile(dir / "a.miaf"), FormatError);
}

// Round-trip property over random float32-representable sequences.
TEST(FeatureFileTest, RoundTripIsBitExact) {
  const auto dir = TempDir("roundtrip");
  std::mt19937_64 gen(11);
  std::uniform_int_distribution<int> size(1, 12);
  std::normal_distribution<float> value(0.0f, 10.0f);
  for (int trial = 0; trial < 50; ++trial) {
    FeatureSequence seq;
    seq.frames.resize(size(gen), size(gen));
    for (Eigen::Index i = 0; i < seq.frames.size(); ++i) seq.frames.data()[i] = value(gen);
    WriteFeatureFile(seq, dir / "r.miaf");
    const auto back = ReadFeatureFile(dir / "r.miaf");
    ASSERT_EQ(back.frames.rows(), seq.frames.rows());
    ASSERT_EQ(back.frames.cols(), seq.frames.cols());
    for (Eigen::Index i = 0; i < seq.frames.size(); ++i) {
      ASSERT_EQ(std::bit_cast<std::uint64_t>(back.frames.data()[i]),
                std::bit_cast<std::uint64_t>(seq.frames.data()[i]));
    }
  }
}

class ManifestTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = TempDir(::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_ / "f");
  }

  void Feature(const std::string& name, int q = 2) {
    FeatureSequence seq;
    seq.frames = FrameMatrix::Constant(3, q, 1.0);
    WriteFeatureFile(seq, dir_ / "f" / name);
  }

  fs::path dir_;
};

TEST_F(ManifestTest, GroupsBySpeakerInFirstAppearanceOrder) {
  for (auto n : {"a", "b", "c", "d"}) Feature(std::string(n) + ".miaf");
  WriteText(dir_ / "m.ndjson",
            R"({"utterance_id":"a","speaker_id":"s2","path":"f/a.miaf","membership":"seen"}
{"utterance_id":"b","speaker_id":"s1","path":"f/b.miaf","membership":"unseen"}
{"utterance_id":"c","speaker_id":"s2","path":"f/c.miaf","extra":42}
{"utterance_id":"d","speaker_id":"s1","path":"f/d.miaf","membership":"unseen"}
)");
  const Manifest m = LoadManifest(dir_ / "m.ndjson");
  ASSERT_EQ(m.entries.size(), 4u);
  EXPECT_EQ(m.entries[2].membership, Membership::kUnknown);
  EXPECT_EQ(*m.dim, 2u);
  const auto groups = GroupBySpeaker(m);
  ASSERT_EQ(groups.size(), 2u);
  EXPECT_EQ(groups[0].speaker_id, "s2");
  EXPECT_EQ(groups[1].speaker_id, "s1");
  EXPECT_EQ(groups[0].sequences.size(), 2u);
  EXPECT_EQ(groups[0].sequences[1].utterance_id, "c");
  EXPECT_EQ(groups[1].sequences[0].utterance_id, "b");
}

TEST_F(ManifestTest, EmptyFileGivesEmptyManifest) {
  WriteText(dir_ / "m.ndjson", "");
  const Manifest m = LoadManifest(dir_ / "m.ndjson");
  EXPECT_TRUE(m.entries.empty());
  EXPECT_TRUE(GroupBySpeaker(m).empty());
}

TEST_F(ManifestTest, DuplicateIdIsNamed) {
  Feature("a.miaf");
  WriteText(dir_ / "m.ndjson",
            R"({"utterance_id":"u1","speaker_id":"s","path":"f/a.miaf"}
{"utterance_id":"u1","speaker_id":"s","path":"f/a.miaf"}
)");
  try {
    LoadManifest(dir_ / "m.ndjson");
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("\"u1\""), std::string::npos);
  }
}

TEST_F(ManifestTest, UnknownMembershipTokenRejected) {
  Feature("a.miaf");
  WriteText(dir_ / "m.ndjson",
            R"({"utterance_id":"u1","speaker_id":"s","path":"f/a.miaf","membership":"maybe"})");
  EXPECT_THROW(LoadManifest(dir_ / "m.ndjson"), ValidationError);
}

TEST_F(ManifestTest, DimensionMismatchRejected) {
  Feature("a.miaf", 2);
  Feature("b.miaf", 3);
  WriteText(dir_ / "m.ndjson",
            R"({"utterance_id":"a","speaker_id":"s","path":"f/a.miaf"}
{"utterance_id":"b","speaker_id":"s","path":"f/b.miaf"}
)");
  EXPECT_THROW(LoadManifest(dir_ / "m.ndjson"), ValidationError);
}

TEST_F(ManifestTest, DeclaredDimensionChecked) {
  Feature("a.miaf", 2);
  WriteText(dir_ / "m.ndjson",
            R"({"metadata":{"q":4,"layer":"last"}}
{"utterance_id":"a","speaker_id":"s","path":"f/a.miaf"}
)");
  EXPECT_THROW(LoadManifest(dir_ / "m.ndjson"), ValidationError);
}

TEST_F(ManifestTest, MissingFileIsStorageError) {
  WriteText(dir_ / "m.ndjson", R"({"utterance_id":"a","speaker_id":"s","path":"f/none.miaf"})");
  EXPECT_THROW(LoadManifest(dir_ / "m.ndjson"), StorageError);
}

TEST_F(ManifestTest, WriteThenLoadPreservesEntriesAndOrder) {
  Manifest m;
  m.base_dir = dir_;
  m.metadata_json = R"({"q":2})";
  for (int i = 0; i < 5; ++i) {
    const std::string name = "x" + std::to_string(i) + ".miaf";
    Feature(name);
    m.entries.push_back({"id," + std::to_string(i), "spk" + std::to_string(i % 2), "f/" + name,
                         i % 2 ? Membership::kSeen : Membership::kUnseen});
  }
  WriteManifest(m, dir_ / "m.ndjson");
  const Manifest back = LoadManifest(dir_ / "m.ndjson");
  ASSERT_EQ(back.entries.size(), m.entries.size());
  for (std::size_t i = 0; i < m.entries.size(); ++i) {
    EXPECT_EQ(back.entries[i].utterance_id, m.entries[i].utterance_id);
    EXPECT_EQ(back.entries[i].speaker_id, m.entries[i].speaker_id);
    EXPECT_EQ(back.entries[i].membership, m.entries[i].membership);
  }
  // Grouping neither loses nor duplicates sequences.
  const auto groups = GroupBySpeaker(back);
  std::size_t total = 0;
  for (const auto& g : groups) {
    for (const auto& s : g.sequences) EXPECT_EQ(s.speaker_id, g.speaker_id);
    total += g.sequences.size();
  }
  EXPECT_EQ(total, m.entries.size());
}

}  // namespace
}  // namespace mia
