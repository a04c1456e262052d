// Copyright 2026 The nzip Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace nzip {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor extents disagree with what an operation requires.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A model parameter violates its domain (e.g. non-positive GDN beta).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// A value does not fit the representable range (e.g. |z| >= 2^31 on rounding).
class RangeError : public Error {
 public:
  using Error::Error;
};

// Caller broke an operation's precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

// Malformed, truncated or inconsistent encoded data.
class DecodeError : public Error {
 public:
  using Error::Error;
};

// Compressed file was produced by a different model than the one loaded.
class ModelMismatchError : public DecodeError {
 public:
  using DecodeError::DecodeError;
};

// Container version not understood by this build.
class VersionError : public DecodeError {
 public:
  using DecodeError::DecodeError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace nzip
