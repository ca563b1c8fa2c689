// Copyright 2026 The qbattery Authors
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

namespace qbat {

/// Caller violated a precondition (bad dimension, unknown label, ...).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The requested Fock cutoff leaves more thermal mass outside the
/// truncated space than allowed. Carries the cutoff that would suffice.
class CutoffError : public std::runtime_error {
 public:
  CutoffError(const std::string& what, int required_n_max)
      : std::runtime_error(what), required_n_max_(required_n_max) {}

  int required_n_max() const noexcept { return required_n_max_; }

 private:
  int required_n_max_;
};

/// ODE integration could not proceed (step underflow, non-finite state).
class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A derived quantity (gain, efficiency) has no meaning for the inputs.
class UndefinedQuantity : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace qbat
