// Copyright 2026 The gmmdae Authors.
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

#pragma once

#include <stdexcept>
#include <string>

namespace gmmdae {

/// Broad failure classes. The CLI maps each class onto an exit status.
enum class ErrorKind {
  kInvalidArgument,  // caller violated a precondition
  kConfig,           // configuration or validation failure
  kIo,               // file system failure
  kFormat,           // malformed on-disk data
  kNumerical,        // NaN loss, singular covariance, degenerate component
  kIncompatible,     // models that cannot be combined
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
      : Error(ErrorKind::kInvalidArgument, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ErrorKind::kConfig, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(ErrorKind::kNumerical, what) {}
};

class IncompatibleModels : public Error {
 public:
  explicit IncompatibleModels(const std::string& what)
      : Error(ErrorKind::kIncompatible, what) {}
};

/// Specific reasons a tensor or model file fails to parse.
enum class FormatFault {
  kBadMagic,
  kTruncated,
  kShapeMismatch,
  kNonFinite,
  kMalformed,
};

class FormatError : public Error {
 public:
  FormatError(FormatFault fault, const std::string& what)
      : Error(ErrorKind::kFormat, what), fault_(fault) {}

  FormatFault fault() const noexcept { return fault_; }

 private:
  FormatFault fault_;
};

}  // namespace gmmdae
