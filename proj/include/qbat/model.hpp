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

// Hamiltonians of the Raman-driven battery.
//
// Lab frame: H = w_eg s_ee + w_m s_mm + w_q b^+b
//              + W_L (s_gm e^{i w_L t} + h.c.) + g (s_em b^+ + s_me b),
// with w_g = 0 and two-photon resonance w_q = w_L - w_eg. Moving to the frame
// generated by w_L s_mm + w_eg s_ee + w_q b^+b makes both couplings static:
//
//   H~ = Delta s_mm + W_L (s_gm + s_mg) + g (s_me b + s_em b^+) + d_c s_ee,
//
// Delta = w_m - w_L. The frame generator is diagonal in the bare basis, so
// populations (and therefore every energy in this project) are identical in
// both frames. d_c is the d.c. Stark compensation that puts the target
// doublet {|g,N-1>, |e,N>} on resonance.
//
// Eliminating |m> for Delta >> W_L, g gives the anti-Jaynes-Cummings form
//
//   H_eff = -(g^2 N/Delta) s_gg - (g^2 b^+b/Delta) s_ee
//           + (W_L g/Delta)(s_ge b + s_eg b^+),
//
// block diagonal over doublets {|g,n>, |e,n+1>} plus the dark state |e,0>.

#include "qbat/core.hpp"

namespace qbat {

/// Physical parameters. Every frequency is angular (rad/s).
struct ModelParams {
  double omega_eg = 0.0;    // battery gap w_e - w_g
  double omega_m = 0.0;     // ancilla level (w_g = 0 reference)
  double delta = 0.0;       // one-photon detuning w_m - w_L
  double rabi_drive = 0.0;  // W_L, power-supply coupling
  double rabi_fc = 0.0;     // W_q, classical frequency-changer coupling
  double g_q = 0.0;         // quantised frequency-changer coupling

  /// Build from the frequency ratio xi = w_q / w_eg with w_m and Delta fixed:
  /// w_L = w_m - Delta, w_eg = w_L / (1 + xi). rabi_fc defaults to g_q.
  static ModelParams from_xi(double omega_m, double delta, double rabi_drive, double g_q,
                             double xi);

  /// Delta/2pi = 1 MHz, g_q = Delta/600, W_L = Delta/20, w_m/2pi = 1e12 Hz.
  static ModelParams figure_defaults(double xi);

  double laser_frequency() const { return omega_m - delta; }
  double fc_frequency() const { return laser_frequency() - omega_eg; }
  double xi() const { return fc_frequency() / omega_eg; }
  double r() const { return g_q / rabi_drive; }

  /// Effective classical Raman coupling W_L W_q / Delta.
  double classical_rabi() const { return rabi_drive * rabi_fc / delta; }
  /// Effective battery-f.c. coupling g W_L / Delta.
  double effective_coupling() const { return g_q * rabi_drive / delta; }

  /// Delta >= factor * max(W_L, g_q).
  bool dispersive(double factor = 10.0) const;

  /// Throws UsageError naming the first offending field.
  void validate() const;
};

struct ProtocolParams {
  int target_n = 1;               // N: resonant doublet is {|g,N-1>, |e,N>}
  bool stark_compensation = true;

  void validate() const;
};

/// Energies (w_g, w_e) or (w_g, w_e, w_m).
std::vector<double> battery_levels(const ModelParams& p, int atom_dim);

/// Bare H_B0 + H_fc0 on a layout (diagonal).
ComplexMatrix bare_hamiltonian(const ModelParams& p, const HilbertLayout& layout);
/// Bare H_B0 lifted to a layout (no mode energy).
ComplexMatrix battery_hamiltonian(const ModelParams& p, const HilbertLayout& layout);

/// W_bar (s_ge + s_eg) on {g, e}; W_bar = W_L W_q / Delta.
ComplexMatrix build_h_classical_effective(const ModelParams& p);

/// Three-level rotating-frame Hamiltonian with both classical drives:
/// Delta s_mm + W_L (s_gm + s_mg) + W_q (s_em + s_me) + d s_ee.
ComplexMatrix build_h_classical_rotating(const ModelParams& p, double stark_shift);

/// Result of tuning a Lambda block onto two-photon resonance.
struct ResonantShift {
  double shift = 0.0;      // d_c on s_ee
  double splitting = 0.0;  // minimal gap of the two lower dressed states
};

/// For the block [[0, a, 0], [a, Delta, b], [0, b, d]] in basis {g, m, e},
/// the d that minimises the gap of the two lower eigenvalues. Starts from
/// the second-order value (b^2 - a^2)/Delta.
ResonantShift resonant_shift(double a, double b, double delta);

/// Stark compensation of the classical three-level Hamiltonian.
ResonantShift classical_stark_shift(const ModelParams& p);

/// Stark compensation d_c for H~ with target doublet N (zero when the
/// protocol disables compensation).
double stark_shift(const ModelParams& p, const ProtocolParams& proto);

/// Rotating-frame H~ on a layout with atom_dim == 3.
ComplexMatrix build_h_full_rotating(const ModelParams& p, const ProtocolParams& proto,
                                    const HilbertLayout& layout);

/// Effective anti-JC Hamiltonian on a layout with atom_dim == 2.
ComplexMatrix build_h_eff(const ModelParams& p, const ProtocolParams& proto,
                          const HilbertLayout& layout);

struct DoubletSpectrum {
  double detuning = 0.0;  // Delta_n = r^2 W_L^2 (n + 1 - N) / Delta
  double coupling = 0.0;  // G_n = r W_L^2 sqrt(n + 1) / Delta
  double rabi = 0.0;      // Omega_n = sqrt(Delta_n^2/4 + G_n^2)
  double amplitude = 0.0; // A_n = 1 / (1 + r^2 (n + 1 - N)^2 / (4 (n + 1)))
};

DoubletSpectrum doublet_spectrum(const ModelParams& p, const ProtocolParams& proto, int n);

/// Resonant flip time pi / (2 G_{N-1}) of the target doublet.
double selective_flip_time(const ModelParams& p, int target_n);

}  // namespace qbat
