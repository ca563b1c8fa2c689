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

// Charging protocols: classical Raman swap, single-shot quantum charging,
// sequential selective flips and the open-system (master equation) run.
//
// Two-level engines (analytic, eff_numeric, and the 2x2 classical drive)
// start from the {g, e} Gibbs state; three-level engines (full_numeric,
// lindblad) start from the {g, e, m} Gibbs state. The classical reference
// w_eg (p_g^T - p_e^T) always uses the same populations as the engine, so
// K_q and eta do not depend on the choice.

#include <functional>
#include <optional>
#include <string>

#include "qbat/core.hpp"
#include "qbat/dynamics.hpp"
#include "qbat/model.hpp"
#include "qbat/observables.hpp"

namespace qbat {

enum class ProtocolKind { kClassical, kSingleShot, kSequential, kOpenSystem };
enum class Engine { kAnalytic, kEffNumeric, kFullNumeric, kLindblad };

std::string to_string(ProtocolKind kind);
std::string to_string(Engine engine);
ProtocolKind parse_protocol(const std::string& s);
Engine parse_engine(const std::string& s);

struct ProtocolRun {
  ProtocolKind kind = ProtocolKind::kSingleShot;
  ModelParams params;
  ProtocolParams proto;
  ThermalSpec thermal;
  Engine engine = Engine::kAnalytic;
  std::optional<double> tau;    // interaction time; optimised when absent
  std::optional<int> steps;     // sequential flips; automatic when absent
  std::optional<int> n_max;     // Fock cutoff; automatic when absent
  double tail_eps = kDefaultTailEps;
  std::optional<double> t_max;  // optimisation window
  int grid = 400;               // optimisation grid

  void validate() const;
  /// k_B T / hbar.
  double kt() const { return thermal.thermal_energy(params.omega_m); }
};

/// Cutoff actually used: the override (checked against tail_eps) or the
/// automatic value.
int resolve_cutoff(const ProtocolRun& run);

/// Thermal populations of the battery levels for an atom_dim engine.
std::vector<double> battery_populations(const ProtocolRun& run, int atom_dim);

ChargingReport classical_charge(const ProtocolRun& run);

/// S(t) = sum_n A_n [p_g p_n - p_e p_{n+1}] sin^2(Omega_n t).
double single_shot_S(const ProtocolRun& run, double t);

ChargingReport single_shot_quantum(const ProtocolRun& run);

/// Smallest M with Fock tail sum_{n >= M} p_n < tol.
int default_sequential_steps(const ProtocolRun& run, double tol = 1e-8);

ChargingReport sequential_charge(const ProtocolRun& run);

struct TauOptimum {
  double tau = 0.0;
  double value = 0.0;
};

/// Grid scan of f on [0, t_max] followed by golden-section refinement of
/// the best local maxima. Deterministic.
TauOptimum maximize_on_grid(const std::function<double(double)>& f, double t_max, int grid);

/// 4 pi / Omega_min over doublets with thermal weight above 1e-6.
double default_t_max(const ProtocolRun& run);

/// Maximiser of single_shot_S on [0, t_max].
TauOptimum optimize_tau(const ProtocolRun& run, double t_max, int grid);

ChargingReport open_system_run(const ProtocolRun& run, const ReservoirSpec& res);

/// Dispatches on run.kind (open_system takes the reservoirs at run.kt()).
ChargingReport execute(const ProtocolRun& run, double gamma0 = 0.0);

}  // namespace qbat
