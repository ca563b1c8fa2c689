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

#include "qbat/model.hpp"

#include <cmath>
#include <iostream>

#include <fmt/format.h>

#include "qbat/errors.hpp"
#include "qbat/units.hpp"

namespace qbat {

ModelParams ModelParams::from_xi(double omega_m, double delta, double rabi_drive, double g_q,
                                 double xi) {
  if (!(xi > 0.0)) throw UsageError(fmt::format("xi must be > 0, got {}", xi));
  ModelParams p;
  p.omega_m = omega_m;
  p.delta = delta;
  p.rabi_drive = rabi_drive;
  p.g_q = g_q;
  p.rabi_fc = g_q;
  p.omega_eg = (omega_m - delta) / (1.0 + xi);
  return p;
}

ModelParams ModelParams::figure_defaults(double xi) {
  const double delta = units::hz(1e6);
  return from_xi(units::hz(1e12), delta, delta / 20.0, delta / 600.0, xi);
}

bool ModelParams::dispersive(double factor) const {
  return delta >= factor * std::max(rabi_drive, g_q);
}

void ModelParams::validate() const {
  auto require = [](bool ok, const char* field, const char* what, double v) {
    if (!ok) throw UsageError(fmt::format("{}: {} (got {})", field, what, v));
  };
  require(std::isfinite(omega_eg) && omega_eg > 0.0, "omega_eg", "must be > 0", omega_eg);
  require(std::isfinite(omega_m) && omega_m > 0.0, "omega_m", "must be > 0", omega_m);
  require(std::isfinite(delta) && delta > 0.0, "delta", "must be > 0", delta);
  require(std::isfinite(rabi_drive) && rabi_drive > 0.0, "omega_l", "must be > 0", rabi_drive);
  require(std::isfinite(rabi_fc) && rabi_fc >= 0.0, "omega_q", "must be >= 0", rabi_fc);
  require(std::isfinite(g_q) && g_q > 0.0, "g_q", "must be > 0", g_q);
  require(fc_frequency() > 0.0, "omega_eg",
          "leaves no room for the frequency changer (w_m - Delta - w_eg <= 0)", omega_eg);
}

void ProtocolParams::validate() const {
  if (target_n < 1) throw UsageError(fmt::format("target_n: must be >= 1 (got {})", target_n));
}

std::vector<double> battery_levels(const ModelParams& p, int atom_dim) {
  if (atom_dim == 2) return {0.0, p.omega_eg};
  if (atom_dim == 3) return {0.0, p.omega_eg, p.omega_m};
  throw UsageError(fmt::format("atom dimension must be 2 or 3, got {}", atom_dim));
}

ComplexMatrix battery_hamiltonian(const ModelParams& p, const HilbertLayout& layout) {
  const auto levels = battery_levels(p, layout.atom_dim());
  ComplexMatrix hb = ComplexMatrix::Zero(layout.atom_dim(), layout.atom_dim());
  for (int j = 0; j < layout.atom_dim(); ++j) hb(j, j) = levels[static_cast<std::size_t>(j)];
  return on_atom(hb, layout);
}

ComplexMatrix bare_hamiltonian(const ModelParams& p, const HilbertLayout& layout) {
  ComplexMatrix h = battery_hamiltonian(p, layout);
  if (layout.has_fock()) {
    const ComplexMatrix b = annihilation(layout.n_max());
    h += p.fc_frequency() * on_fock(b.adjoint() * b, layout);
  }
  return h;
}

ComplexMatrix build_h_classical_effective(const ModelParams& p) {
  if (!(p.rabi_fc > 0.0)) throw UsageError("omega_q: classical coupling must be > 0");
  const double w = p.classical_rabi();
  return w * (sigma(kG, kE, 2) + sigma(kE, kG, 2));
}

ComplexMatrix build_h_classical_rotating(const ModelParams& p, double stark_shift) {
  ComplexMatrix h = p.delta * sigma(kM, kM, 3);
  h += p.rabi_drive * (sigma(kG, kM, 3) + sigma(kM, kG, 3));
  h += p.rabi_fc * (sigma(kE, kM, 3) + sigma(kM, kE, 3));
  h += stark_shift * sigma(kE, kE, 3);
  return h;
}

namespace {

double lower_pair_gap(double a, double b, double delta, double shift) {
  Eigen::Matrix3d m;
  m << 0.0, a, 0.0,
       a, delta, b,
       0.0, b, shift;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(1) - es.eigenvalues()(0);
}

}  // namespace

ResonantShift resonant_shift(double a, double b, double delta) {
  if (!(delta > 0.0)) throw UsageError("resonant_shift: Delta must be > 0");
  const double guess = (b * b - a * a) / delta;
  // Fourth-order shifts are O((a^4 + b^4)/Delta^3); the gap near resonance
  // is O(ab/Delta), so this window always brackets the minimum.
  const double width = 4.0 * (a * a * a * a + b * b * b * b) / (delta * delta * delta) +
                       8.0 * std::abs(a * b) / delta + 1e-300;
  double lo = guess - width;
  double hi = guess + width;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = lower_pair_gap(a, b, delta, x1);
  double f2 = lower_pair_gap(a, b, delta, x2);
  for (int it = 0; it < 200 && (hi - lo) > 1e-15 * (std::abs(guess) + width); ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = lower_pair_gap(a, b, delta, x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = lower_pair_gap(a, b, delta, x2);
    }
  }
  const double best = 0.5 * (lo + hi);
  return {best, lower_pair_gap(a, b, delta, best)};
}

ResonantShift classical_stark_shift(const ModelParams& p) {
  return resonant_shift(p.rabi_drive, p.rabi_fc, p.delta);
}

double stark_shift(const ModelParams& p, const ProtocolParams& proto) {
  proto.validate();
  if (!proto.stark_compensation) return 0.0;
  return resonant_shift(p.rabi_drive, p.g_q * std::sqrt(static_cast<double>(proto.target_n)),
                        p.delta)
      .shift;
}

ComplexMatrix build_h_full_rotating(const ModelParams& p, const ProtocolParams& proto,
                                    const HilbertLayout& layout) {
  if (!layout.has_fock() || layout.atom_dim() != 3) {
    throw UsageError("build_h_full_rotating needs a 3-level atom (x) Fock layout");
  }
  if (!p.dispersive()) {
    std::cerr << "warning: Delta < 10 max(W_L, g_q); adiabatic elimination is not justified\n";
  }
  const ComplexMatrix b = annihilation(layout.n_max());
  const ComplexMatrix bd = b.adjoint();
  ComplexMatrix h = p.delta * on_atom(sigma(kM, kM, 3), layout);
  h += p.rabi_drive * on_atom(sigma(kG, kM, 3) + sigma(kM, kG, 3), layout);
  h += p.g_q * (kron(sigma(kM, kE, 3), b) + kron(sigma(kE, kM, 3), bd));
  h += stark_shift(p, proto) * on_atom(sigma(kE, kE, 3), layout);
  return h;
}

ComplexMatrix build_h_eff(const ModelParams& p, const ProtocolParams& proto,
                          const HilbertLayout& layout) {
  proto.validate();
  if (!layout.has_fock() || layout.atom_dim() != 2) {
    throw UsageError("build_h_eff needs a 2-level atom (x) Fock layout");
  }
  if (!proto.stark_compensation) {
    throw UsageError("build_h_eff implements the Stark-compensated form only");
  }
  const ComplexMatrix b = annihilation(layout.n_max());
  const ComplexMatrix bd = b.adjoint();
  const double g2 = p.g_q * p.g_q / p.delta;
  const auto fock_id = ComplexMatrix::Identity(layout.fock_dim(), layout.fock_dim());
  ComplexMatrix h = -g2 * proto.target_n * kron(sigma(kG, kG, 2), fock_id);
  h -= g2 * kron(sigma(kE, kE, 2), bd * b);
  h += p.effective_coupling() * (kron(sigma(kG, kE, 2), b) + kron(sigma(kE, kG, 2), bd));
  return h;
}

DoubletSpectrum doublet_spectrum(const ModelParams& p, const ProtocolParams& proto, int n) {
  proto.validate();
  if (n < 0) throw UsageError("doublet index must be >= 0");
  const double r = p.r();
  const double w2 = p.rabi_drive * p.rabi_drive / p.delta;
  const double k = static_cast<double>(n + 1 - proto.target_n);
  const double np1 = static_cast<double>(n + 1);
  DoubletSpectrum s;
  s.detuning = r * r * w2 * k;
  s.coupling = r * w2 * std::sqrt(np1);
  s.rabi = std::sqrt(s.detuning * s.detuning / 4.0 + s.coupling * s.coupling);
  s.amplitude = 1.0 / (1.0 + r * r * k * k / (4.0 * np1));
  return s;
}

double selective_flip_time(const ModelParams& p, int target_n) {
  const auto s = doublet_spectrum(p, ProtocolParams{target_n, true}, target_n - 1);
  return units::kPi / (2.0 * s.coupling);
}

}  // namespace qbat
