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

#ifndef MIA_ERRORS_H_
#define MIA_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mia {

// Base class for every error raised by the engine. `kind()` is a stable
// machine-readable token used by the CLI's single-line error output.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

class StorageError : public Error {
 public:
  explicit StorageError(const std::string& m) : Error("storage", m) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& m) : Error("format", m) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& m) : Error("validation", m) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& m) : Error("config", m) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& m) : Error("data", m) {}
};

class EvaluationError : public Error {
 public:
  explicit EvaluationError(const std::string& m) : Error("evaluation", m) {}
};

class InsufficientDataError : public Error {
 public:
  explicit InsufficientDataError(const std::string& m)
      : Error("insufficient_data", m) {}
};

// Raised for m < 2 (pairwise utterance scoring) or m < 1 (mean pooling).
class TooFewFramesError : public Error {
 public:
  explicit TooFewFramesError(const std::string& m)
      : Error("too_few_frames", m) {}
};

class TooFewUtterancesError : public Error {
 public:
  explicit TooFewUtterancesError(const std::string& m)
      : Error("too_few_utterances", m) {}
};

// A zero-norm vector was handed to a cosine measure. `index` is the frame
// (or utterance) position when known, otherwise npos.
class DegenerateVectorError : public Error {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  explicit DegenerateVectorError(const std::string& m, std::size_t index = npos)
      : Error("degenerate_vector", m), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

}  // namespace mia

#endif  // MIA_ERRORS_H_
