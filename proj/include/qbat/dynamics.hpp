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

// Time evolution: exact unitary propagation and the master equation
//
//   drho/dt = -i [H, rho] + sum_s G_s (2 L_s rho L_s^+ - {L_s^+ L_s, rho}),
//
// note the factor 2 inside the bracket. Heat per channel is
// Q_s = int Tr{D_s(rho) H_bare} dt and the drive work is the Hamiltonian
// part of d/dt Tr{rho H_bare}, W = int Tr{-i[H, rho] H_bare} dt, so the
// first law closes as dU = W + sum_s Q_s up to integration error.

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qbat/core.hpp"
#include "qbat/model.hpp"

namespace qbat {

/// e^{-iHt} rho e^{iHt} via the spectral decomposition of H.
DensityMatrix propagate_unitary(const ComplexMatrix& h, const DensityMatrix& rho0, double t);

/// Caches the eigensystem of H for repeated propagation of one state.
class UnitaryPropagator {
 public:
  UnitaryPropagator(const ComplexMatrix& h, DensityMatrix rho0);

  DensityMatrix at(double t) const;

 private:
  EigenSystem eig_;
  DensityMatrix rho0_;
  ComplexMatrix rho0_eigenbasis_;
};

enum class ChannelLabel { kGm, kMg, kEm, kMe, kMinus, kPlus };

inline constexpr std::array<ChannelLabel, 6> kAllChannels = {
    ChannelLabel::kGm, ChannelLabel::kMg, ChannelLabel::kEm,
    ChannelLabel::kMe, ChannelLabel::kMinus, ChannelLabel::kPlus};

std::string to_string(ChannelLabel label);

struct LindbladChannel {
  ChannelLabel label;
  ComplexMatrix jump;
  double rate = 0.0;
};

/// Thermal reservoirs with one shared spontaneous rate gamma0 and the mean
/// occupations at w_mg, w_me and w_q.
struct ReservoirSpec {
  double gamma0 = 0.0;
  double nbar_g = 0.0;
  double nbar_e = 0.0;
  double nbar_q = 0.0;

  /// Bose-Einstein occupations of all three reservoirs at thermal energy kt.
  static ReservoirSpec thermal(const ModelParams& p, double kt, double gamma0);

  void validate() const;
  /// Throws UsageError if an occupation deviates from Bose-Einstein at kt by
  /// more than rel_tol (relative) or 1e-300 absolute.
  void check_consistent(const ModelParams& p, double kt, double rel_tol = 1e-9) const;
};

/// Six channels s_gm, s_mg, s_em, s_me, b, b^+ with rates
/// G_jm = g0 (n_j + 1), G_mj = g0 n_j, G_- = g0 (n_q + 1), G_+ = g0 n_q.
/// Zero-rate channels are kept.
std::vector<LindbladChannel> build_channels(const ModelParams& p, const ReservoirSpec& res,
                                            const HilbertLayout& layout);

/// Bare energy operators the heat ledger is evaluated against.
struct EnergyOperators {
  ComplexMatrix battery;  // H_B0 on the joint layout
  ComplexMatrix mode;     // H_fc0 on the joint layout

  static EnergyOperators from_model(const ModelParams& p, const HilbertLayout& layout);
  ComplexMatrix total() const { return battery + mode; }
};

struct EnergyLedger {
  std::map<std::string, double> heat_by_channel;
  double u_battery_initial = 0.0;
  double u_battery = 0.0;
  double u_fc_initial = 0.0;
  double u_fc = 0.0;
  double w_drive = 0.0;

  double total_heat() const;
  double delta_u_total() const { return (u_battery - u_battery_initial) + (u_fc - u_fc_initial); }
  /// dU - W - sum Q.
  double closure_residual() const { return delta_u_total() - w_drive - total_heat(); }
  double heat(ChannelLabel label) const;
};

struct LindbladOptions {
  enum class Method { kExponential, kRk4 };

  Method method = Method::kExponential;
  std::optional<EnergyOperators> energies;  // ledger stays zero without it
  double trace_tol = 1e-8;

  // Runge-Kutta control.
  double rk4_tol = 1e-10;            // per-step error, relative to max |rho|
  double rk4_initial_step = 0.0;     // 0: (50 max(||H||, max rate))^-1
  double rk4_min_step = 0.0;         // 0: t_final * 1e-14

  // Optional CSV trajectory dump.
  std::string dump_path;
  int dump_samples = 200;
};

struct LindbladResult {
  DensityMatrix state;
  EnergyLedger ledger;
  double trace_drift = 0.0;
  bool trace_ok = true;
  double max_symmetrization = 0.0;
  long steps = 0;
};

LindbladResult evolve_lindblad(const ComplexMatrix& h, std::span<const LindbladChannel> channels,
                               const DensityMatrix& rho0, double t_final,
                               const LindbladOptions& opts = {});

/// Exact propagator for a time-independent generator, restricted to the
/// smallest set of matrix elements that the initial state can reach (for a
/// number-conserving problem with a diagonal start this is the
/// zero-coherence sector). The heat and work integrals ride along as extra
/// components of the augmented linear system, so x(t) = exp(G t) x(0)
/// yields them exactly.
class SectorPropagator {
 public:
  struct Point {
    double t = 0.0;
    Eigen::VectorXcd y;
  };

  SectorPropagator(const ComplexMatrix& h, std::span<const LindbladChannel> channels,
                   const DensityMatrix& rho0, std::optional<EnergyOperators> energies);

  Point initial() const { return {0.0, y0_}; }
  Point advance(const Point& from, double dt) const;
  Point at(double t) const { return advance(initial(), t); }

  /// exp(G dt), for fixed-step scans.
  ComplexMatrix step_matrix(double dt) const;

  DensityMatrix density(const Point& pt) const;
  EnergyLedger ledger(const Point& pt) const;
  /// Re Tr(op rho).
  double expectation(const ComplexMatrix& op, const Point& pt) const;
  /// Population of joint basis state `index`.
  double population(int index, const Point& pt) const;

  int sector_size() const { return static_cast<int>(elements_.size()); }
  int dim() const { return layout_.dim(); }

 private:
  HilbertLayout layout_;
  std::vector<std::pair<int, int>> elements_;
  std::vector<int> diag_slot_;  // joint index -> slot of (i,i), or -1
  std::vector<ChannelLabel> labels_;
  std::optional<EnergyOperators> energies_;
  ComplexMatrix generator_;
  Eigen::VectorXcd y0_;
  double acc_scale_ = 1.0;
};

}  // namespace qbat
