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

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qbat/core.hpp"

namespace qbat {

/// Tr(rho H_B0) for a battery-only state; levels are (w_g, w_e[, w_m]).
double internal_energy(const DensityMatrix& rho_b, std::span<const double> levels);

/// Two-level shorthand with w_g = 0: p_e * w_eg (for dim 3, level m is
/// ignored).
double internal_energy(const DensityMatrix& rho_b, double omega_eg);

/// Maximal work extractable by a unitary:
///   E = sum_{k,j} r_k E_j |<r_k|E_j>|^2 - sum_k r_k E_k,
/// r_k descending, E_j ascending. Negative round-off is clamped to 0.
/// rho need not be normalised (sub-blocks of a larger state are allowed).
double ergotropy(const ComplexMatrix& rho, const ComplexMatrix& h);
double ergotropy(const DensityMatrix& rho, const ComplexMatrix& h);

/// K_q = du_q / du_c - 1. Throws UndefinedQuantity for du_c <= 0.
double gain(double delta_u_q, double delta_u_c);

/// Closed-dynamics efficiency (1/(1+xi)) (1 + 2K)/(1 + K).
double efficiency_closed_form(double xi, double k_q);

struct Efficiency {
  double eta = 0.0;
  std::optional<double> eta_corrected;
};

/// eta = E/W; eta_corrected = E/(W + Q_em) only when Q_em > 0.
/// Throws UndefinedQuantity for W <= 0.
Efficiency efficiency(double ergotropy, double work_in, double q_em);

/// Output of every protocol run. Energies in rad/s (hbar = 1).
struct ChargingReport {
  std::string protocol;
  std::string engine;
  double delta_u_battery = 0.0;   // w_eg * (p_e - p_e^T)
  double delta_u_fc = 0.0;        // w_q * (<n> - <n>^T)
  double delta_u_ancilla = 0.0;   // w_m * (p_m - p_m^T), three-level engines
  double delta_u_classical = 0.0; // reference w_eg (p_g^T - p_e^T)
  double ergotropy = 0.0;
  double ergotropy_classical = 0.0;
  double work_in = 0.0;           // W_L
  std::map<std::string, double> heat;
  double k_q = 0.0;
  double eta = 0.0;
  std::optional<double> eta_corrected;
  double tau_used = 0.0;
  double s_value = 0.0;           // transferred population S
  double p_g = 0.0, p_e = 0.0, p_m = 0.0;  // final battery populations
  std::vector<double> step_delta_u;        // sequential increments
  // diagnostics
  double trace_drift = 0.0;
  double truncation_tail = 0.0;
  double closure_residual = 0.0;
  int n_max = 0;
  std::string status;  // empty when every invariant holds
};

/// Re-checks the report invariants (eta range, K_q identity) and returns a
/// non-empty description of the first violation.
std::string check_report(const ChargingReport& r, double tol = 1e-9);

}  // namespace qbat
