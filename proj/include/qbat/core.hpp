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

// Dense complex operator algebra for an atom (x) single-mode system:
// matrices, the two-factor Hilbert layout, density matrices, spectral
// decomposition and thermal states.

#include <Eigen/Dense>

#include <complex>
#include <span>
#include <string>
#include <vector>

namespace qbat {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

// Atom level indices. Level m only exists for atom_dim == 3.
enum Level : int { kG = 0, kE = 1, kM = 2 };

/// |j><k| on a d-level atom.
ComplexMatrix sigma(int j, int k, int d);

/// Bosonic annihilation operator on Fock states 0..n_max.
ComplexMatrix annihilation(int n_max);

/// Kronecker product; (a.rows*b.rows) x (a.cols*b.cols).
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

/// Largest entrywise |h - h^dagger|.
double hermiticity_error(const ComplexMatrix& h);

bool is_finite(const ComplexMatrix& m);

/// Atom (x) Fock layout. The atom factor always comes first; joint index of
/// (atom a, Fock n) is a * (n_max + 1) + n.
class HilbertLayout {
 public:
  enum class Factor { kAtom, kFock };

  /// Atom-only layout (no Fock factor).
  static HilbertLayout atom_only(int atom_dim);
  /// Fock-only layout with Fock states 0..n_max.
  static HilbertLayout fock_only(int n_max);
  /// atom_dim in {2, 3}, n_max >= 1.
  static HilbertLayout joint(int atom_dim, int n_max);

  int atom_dim() const noexcept { return atom_dim_; }
  /// -1 when there is no Fock factor.
  int n_max() const noexcept { return n_max_; }
  int fock_dim() const noexcept { return n_max_ < 0 ? 1 : n_max_ + 1; }
  int dim() const noexcept { return atom_dim_ * fock_dim(); }
  bool has_atom() const noexcept { return has_atom_; }
  bool has_fock() const noexcept { return n_max_ >= 0; }

  int index(int atom, int n) const;

  /// "atom" or "fock"; throws UsageError for anything else.
  static Factor parse_factor(const std::string& label);

  friend bool operator==(const HilbertLayout&, const HilbertLayout&) = default;

 private:
  HilbertLayout(int atom_dim, int n_max, bool has_atom)
      : atom_dim_(atom_dim), n_max_(n_max), has_atom_(has_atom) {}

  int atom_dim_ = 1;
  int n_max_ = -1;
  bool has_atom_ = true;
};

/// Atom operator lifted to the joint space: op (x) I_fock.
ComplexMatrix on_atom(const ComplexMatrix& op, const HilbertLayout& layout);
/// Fock operator lifted to the joint space: I_atom (x) op.
ComplexMatrix on_fock(const ComplexMatrix& op, const HilbertLayout& layout);

/// Hermitian, unit-trace, positive semidefinite state on a layout.
class DensityMatrix {
 public:
  static constexpr double kTraceTol = 1e-9;
  static constexpr double kHermTol = 1e-12;
  static constexpr double kPsdFloor = -1e-9;

  /// Validates trace, hermiticity and the eigenvalue floor.
  DensityMatrix(HilbertLayout layout, ComplexMatrix data);

  /// Skips validation; for integrator output whose drift is tracked
  /// separately. Still requires matching dimensions.
  static DensityMatrix unchecked(HilbertLayout layout, ComplexMatrix data);

  static DensityMatrix diagonal(HilbertLayout layout, std::span<const double> p);
  static DensityMatrix pure(HilbertLayout layout, const Eigen::VectorXcd& psi);

  const HilbertLayout& layout() const noexcept { return layout_; }
  const ComplexMatrix& data() const noexcept { return data_; }
  int dim() const noexcept { return layout_.dim(); }

  double trace() const;
  double purity() const;
  double population(int index) const { return data_(index, index).real(); }
  /// Diagonal of the matrix (real parts).
  RealVector populations() const;

  /// Smallest eigenvalue.
  double min_eigenvalue() const;

 private:
  DensityMatrix(HilbertLayout layout, ComplexMatrix data, bool check);

  HilbertLayout layout_;
  ComplexMatrix data_;
};

/// rho_A (x) rho_B on the joint layout (first factor atom).
DensityMatrix product_state(const DensityMatrix& atom, const DensityMatrix& fock);

/// Reduced state over the kept factor.
DensityMatrix partial_trace(const DensityMatrix& rho, HilbertLayout::Factor keep);
DensityMatrix partial_trace(const DensityMatrix& rho, const std::string& keep);

struct EigenSystem {
  RealVector values;       // ascending
  ComplexMatrix vectors;   // columns
};

/// Spectral decomposition of a Hermitian matrix (tolerance 1e-10).
EigenSystem herm_eig(const ComplexMatrix& h);

/// Temperature specification. Either an absolute temperature in kelvin or
/// the dimensionless T_bar = k_B T / (hbar w_m).
struct ThermalSpec {
  enum class Mode { kKelvin, kTbar };

  Mode mode = Mode::kTbar;
  double value = 0.0;

  static ThermalSpec tbar(double v) { return {Mode::kTbar, v}; }
  static ThermalSpec kelvin(double v) { return {Mode::kKelvin, v}; }

  /// k_B T / hbar in rad/s. omega_m is the reference for T_bar mode.
  double thermal_energy(double omega_m) const;
};

/// Gibbs weights over the given level energies (rad/s) at thermal energy
/// kt = k_B T / hbar. kt == 0 puts all weight on the lowest level(s).
std::vector<double> boltzmann_weights(std::span<const double> energies, double kt);

DensityMatrix thermal_state_atom(std::span<const double> levels, double kt);

/// Default tail mass allowed outside a truncated thermal Fock state.
inline constexpr double kDefaultTailEps = 1e-10;

/// Thermal mass beyond Fock state n_max: x^(n_max+1), x = exp(-w_q/kt).
double fock_tail_mass(double omega_q, double kt, int n_max);

/// Smallest safe cutoff: ceil(log eps / log x) + 4, at least 1.
int auto_fock_cutoff(double omega_q, double kt, double eps = kDefaultTailEps);

/// Geometric thermal state on Fock states 0..n_max, renormalised. Throws
/// CutoffError when the truncated tail mass is >= eps.
DensityMatrix thermal_state_fock(double omega_q, double kt, int n_max,
                                 double eps = kDefaultTailEps);

/// Untruncated thermal occupation p_n = x^n (1 - x).
double fock_thermal_probability(double omega_q, double kt, int n);

/// Bose-Einstein occupation 1 / (exp(w/kt) - 1); 0 at kt == 0.
double bose_einstein(double omega, double kt);

}  // namespace qbat
