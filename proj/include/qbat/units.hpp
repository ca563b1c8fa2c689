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

#include <numbers>

// Internally every energy is an angular frequency (hbar = 1): an energy E
// is stored as E / hbar in rad/s. Times are seconds.
namespace qbat::units {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline constexpr double kHbar = 1.054571817e-34;     // J s
inline constexpr double kBoltzmann = 1.380649e-23;   // J / K

/// Cycles per second to rad/s.
constexpr double hz(double f) { return kTwoPi * f; }

/// rad/s back to Hz.
constexpr double to_hz(double w) { return w / kTwoPi; }

/// Energy stored as rad/s to joules.
constexpr double to_joules(double w) { return kHbar * w; }

/// k_B T / hbar for a temperature in kelvin.
constexpr double kelvin_to_rad(double t_kelvin) {
  return kBoltzmann * t_kelvin / kHbar;
}

}  // namespace qbat::units
