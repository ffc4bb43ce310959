// Copyright 2026 The emoart Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef EMOART_ERROR_HPP
#define EMOART_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace emoart {

/// Coarse error classes. The C API and the CLI exit codes are derived from
/// these, so every exception thrown by the library carries one.
enum class ErrorKind {
  kInvalidArgument,  // caller passed something structurally wrong
  kValidation,       // input data or configuration violates an invariant
  kIo,               // file missing, unreadable or unwritable
  kRuntime,          // anything that fails while computing
  kDiverged,         // training produced a non-finite loss
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(ErrorKind::kValidation, what) {}
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
      : Error(ErrorKind::kInvalidArgument, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

class RuntimeError : public Error {
 public:
  explicit RuntimeError(const std::string& what)
      : Error(ErrorKind::kRuntime, what) {}
};

/// Manifest parse failure pinned to a 1-based line number (0 when the error
/// is not tied to a single line).
class ManifestError : public ValidationError {
 public:
  ManifestError(std::size_t line, const std::string& what)
      : ValidationError(line == 0 ? what
                                  : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DivergenceError : public Error {
 public:
  DivergenceError(int epoch, std::size_t batch_index, const std::string& what)
      : Error(ErrorKind::kDiverged, what), epoch_(epoch), batch_index_(batch_index) {}

  int epoch() const noexcept { return epoch_; }
  std::size_t batch_index() const noexcept { return batch_index_; }

 private:
  int epoch_;
  std::size_t batch_index_;
};

}  // namespace emoart

#endif  // EMOART_ERROR_HPP
