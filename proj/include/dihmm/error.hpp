// Copyright 2026 The dihmm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace dihmm {

// Base class for everything thrown by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A numeric argument is outside its legal range (sigma <= 0, c outside
// [0,1], ...).
class InvalidParameterError : public Error {
 public:
  using Error::Error;
};

// The density floor theta_pt leaves no integer tick with pdf >= theta_pt.
class EmptySupportError : public Error {
 public:
  using Error::Error;
};

// Input data (corpus, sequence, segment) violates a structural invariant.
class DataError : public Error {
 public:
  using Error::Error;
};

// A model violates one of its invariants. `field` names the offending part.
class ModelError : public Error {
 public:
  ModelError(const std::string& field, const std::string& msg)
      : Error(field + ": " + msg), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// A model file could not be parsed or failed validation on load.
class LoadError : public Error {
 public:
  LoadError(const std::string& field, const std::string& msg)
      : Error(field + ": " + msg), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// An interval factor was required but no interval model was ever trained.
class UntrainedIntervalError : public Error {
 public:
  using Error::Error;
};

// A generation policy admits no sequence (e.g. no combination sums to T).
class InfeasiblePolicyError : public Error {
 public:
  using Error::Error;
};

// Audio input is not 16-bit mono PCM WAV.
class UnsupportedFormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace dihmm
