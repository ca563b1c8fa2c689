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

#include "qbat/core.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>

#include "qbat/errors.hpp"
#include "qbat/units.hpp"

namespace qbat {

ComplexMatrix sigma(int j, int k, int d) {
  if (j < 0 || k < 0 || j >= d || k >= d) {
    throw UsageError(fmt::format("sigma({}, {}) outside a {}-level atom", j, k, d));
  }
  ComplexMatrix s = ComplexMatrix::Zero(d, d);
  s(j, k) = 1.0;
  return s;
}

ComplexMatrix annihilation(int n_max) {
  if (n_max < 0) throw UsageError("annihilation: n_max must be >= 0");
  ComplexMatrix b = ComplexMatrix::Zero(n_max + 1, n_max + 1);
  for (int n = 1; n <= n_max; ++n) b(n - 1, n) = std::sqrt(static_cast<double>(n));
  return b;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

double hermiticity_error(const ComplexMatrix& h) {
  if (h.rows() != h.cols()) return std::numeric_limits<double>::infinity();
  return (h - h.adjoint()).cwiseAbs().maxCoeff();
}

bool is_finite(const ComplexMatrix& m) {
  return m.allFinite();
}

// --- HilbertLayout --------------------------------------------------------

HilbertLayout HilbertLayout::atom_only(int atom_dim) {
  if (atom_dim < 2 || atom_dim > 3) {
    throw UsageError(fmt::format("atom dimension must be 2 or 3, got {}", atom_dim));
  }
  return HilbertLayout(atom_dim, -1, true);
}

HilbertLayout HilbertLayout::fock_only(int n_max) {
  if (n_max < 1) throw UsageError(fmt::format("Fock cutoff must be >= 1, got {}", n_max));
  return HilbertLayout(1, n_max, false);
}

HilbertLayout HilbertLayout::joint(int atom_dim, int n_max) {
  if (atom_dim < 2 || atom_dim > 3) {
    throw UsageError(fmt::format("atom dimension must be 2 or 3, got {}", atom_dim));
  }
  if (n_max < 1) throw UsageError(fmt::format("Fock cutoff must be >= 1, got {}", n_max));
  return HilbertLayout(atom_dim, n_max, true);
}

int HilbertLayout::index(int atom, int n) const {
  if (atom < 0 || atom >= atom_dim_ || n < 0 || n >= fock_dim()) {
    throw UsageError(fmt::format("basis label ({}, {}) outside layout", atom, n));
  }
  return atom * fock_dim() + n;
}

HilbertLayout::Factor HilbertLayout::parse_factor(const std::string& label) {
  if (label == "atom") return Factor::kAtom;
  if (label == "fock") return Factor::kFock;
  throw UsageError(fmt::format("unknown factor label '{}'", label));
}

ComplexMatrix on_atom(const ComplexMatrix& op, const HilbertLayout& layout) {
  if (op.rows() != layout.atom_dim() || op.cols() != layout.atom_dim()) {
    throw UsageError("on_atom: operator does not match the atom factor");
  }
  if (!layout.has_fock()) return op;
  return kron(op, ComplexMatrix::Identity(layout.fock_dim(), layout.fock_dim()));
}

ComplexMatrix on_fock(const ComplexMatrix& op, const HilbertLayout& layout) {
  if (!layout.has_fock() || op.rows() != layout.fock_dim() || op.cols() != layout.fock_dim()) {
    throw UsageError("on_fock: operator does not match the Fock factor");
  }
  if (!layout.has_atom()) return op;
  return kron(ComplexMatrix::Identity(layout.atom_dim(), layout.atom_dim()), op);
}

// --- DensityMatrix --------------------------------------------------------

DensityMatrix::DensityMatrix(HilbertLayout layout, ComplexMatrix data)
    : DensityMatrix(std::move(layout), std::move(data), true) {}

DensityMatrix::DensityMatrix(HilbertLayout layout, ComplexMatrix data, bool check)
    : layout_(std::move(layout)), data_(std::move(data)) {
  if (data_.rows() != layout_.dim() || data_.cols() != layout_.dim()) {
    throw UsageError(fmt::format("density matrix is {}x{} but layout has dimension {}",
                                 data_.rows(), data_.cols(), layout_.dim()));
  }
  if (!check) return;
  if (!is_finite(data_)) throw UsageError("density matrix has non-finite entries");
  if (std::abs(trace() - 1.0) > kTraceTol) {
    throw UsageError(fmt::format("density matrix trace {} is not 1", trace()));
  }
  if (hermiticity_error(data_) > kHermTol) {
    throw UsageError("density matrix is not Hermitian");
  }
  if (min_eigenvalue() < kPsdFloor) {
    throw UsageError(fmt::format("density matrix has eigenvalue {}", min_eigenvalue()));
  }
}

DensityMatrix DensityMatrix::unchecked(HilbertLayout layout, ComplexMatrix data) {
  return DensityMatrix(std::move(layout), std::move(data), false);
}

DensityMatrix DensityMatrix::diagonal(HilbertLayout layout, std::span<const double> p) {
  if (static_cast<int>(p.size()) != layout.dim()) {
    throw UsageError("diagonal state: population count does not match layout");
  }
  ComplexMatrix d = ComplexMatrix::Zero(layout.dim(), layout.dim());
  for (int i = 0; i < layout.dim(); ++i) d(i, i) = p[static_cast<std::size_t>(i)];
  return DensityMatrix(std::move(layout), std::move(d));
}

DensityMatrix DensityMatrix::pure(HilbertLayout layout, const Eigen::VectorXcd& psi) {
  const double norm = psi.norm();
  if (norm == 0.0) throw UsageError("pure state: zero vector");
  Eigen::VectorXcd v = psi / norm;
  return DensityMatrix(std::move(layout), v * v.adjoint());
}

double DensityMatrix::trace() const { return data_.trace().real(); }

double DensityMatrix::purity() const { return (data_ * data_).trace().real(); }

RealVector DensityMatrix::populations() const { return data_.diagonal().real(); }

double DensityMatrix::min_eigenvalue() const {
  const ComplexMatrix h = 0.5 * (data_ + data_.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

DensityMatrix product_state(const DensityMatrix& atom, const DensityMatrix& fock) {
  const auto& la = atom.layout();
  const auto& lf = fock.layout();
  if (!la.has_atom() || la.has_fock() || !lf.has_fock() || lf.has_atom()) {
    throw UsageError("product_state expects an atom-only and a Fock-only state");
  }
  return DensityMatrix::unchecked(HilbertLayout::joint(la.atom_dim(), lf.n_max()),
                                  kron(atom.data(), fock.data()));
}

DensityMatrix partial_trace(const DensityMatrix& rho, HilbertLayout::Factor keep) {
  const auto& layout = rho.layout();
  if (!layout.has_atom() || !layout.has_fock()) {
    throw UsageError("partial_trace needs a joint atom (x) Fock state");
  }
  const int da = layout.atom_dim();
  const int df = layout.fock_dim();
  const ComplexMatrix& m = rho.data();
  if (keep == HilbertLayout::Factor::kAtom) {
    ComplexMatrix out = ComplexMatrix::Zero(da, da);
    for (int a = 0; a < da; ++a)
      for (int b = 0; b < da; ++b)
        for (int n = 0; n < df; ++n) out(a, b) += m(a * df + n, b * df + n);
    return DensityMatrix::unchecked(HilbertLayout::atom_only(da), std::move(out));
  }
  ComplexMatrix out = ComplexMatrix::Zero(df, df);
  for (int n = 0; n < df; ++n)
    for (int k = 0; k < df; ++k)
      for (int a = 0; a < da; ++a) out(n, k) += m(a * df + n, a * df + k);
  return DensityMatrix::unchecked(HilbertLayout::fock_only(layout.n_max()), std::move(out));
}

DensityMatrix partial_trace(const DensityMatrix& rho, const std::string& keep) {
  return partial_trace(rho, HilbertLayout::parse_factor(keep));
}

EigenSystem herm_eig(const ComplexMatrix& h) {
  if (h.rows() != h.cols()) throw UsageError("herm_eig: matrix is not square");
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if (hermiticity_error(h) > 1e-10 * scale) {
    throw UsageError("herm_eig: matrix is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (h + h.adjoint()));
  if (es.info() != Eigen::Success) throw UsageError("herm_eig: eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

// --- thermal states -------------------------------------------------------

double ThermalSpec::thermal_energy(double omega_m) const {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw UsageError(fmt::format("temperature must be finite and >= 0, got {}", value));
  }
  return mode == Mode::kTbar ? value * omega_m
                             : units::kelvin_to_rad(value);
}

std::vector<double> boltzmann_weights(std::span<const double> energies, double kt) {
  if (energies.empty()) throw UsageError("boltzmann_weights: no levels");
  for (double e : energies) {
    if (!std::isfinite(e)) throw UsageError("boltzmann_weights: non-finite level energy");
  }
  const double e0 = *std::min_element(energies.begin(), energies.end());
  std::vector<double> w(energies.size());
  if (kt == 0.0) {
    for (std::size_t i = 0; i < energies.size(); ++i) w[i] = energies[i] == e0 ? 1.0 : 0.0;
  } else {
    for (std::size_t i = 0; i < energies.size(); ++i) w[i] = std::exp(-(energies[i] - e0) / kt);
  }
  double z = 0.0;
  for (double x : w) z += x;
  for (double& x : w) x /= z;
  return w;
}

DensityMatrix thermal_state_atom(std::span<const double> levels, double kt) {
  const auto w = boltzmann_weights(levels, kt);
  return DensityMatrix::diagonal(HilbertLayout::atom_only(static_cast<int>(levels.size())), w);
}

namespace {

// exp(-w/kt) with the kt == 0 limit.
double fock_ratio(double omega_q, double kt) {
  if (!(omega_q > 0.0)) throw UsageError("Fock mode frequency must be > 0");
  if (kt < 0.0) throw UsageError("thermal energy must be >= 0");
  return kt == 0.0 ? 0.0 : std::exp(-omega_q / kt);
}

}  // namespace

double fock_tail_mass(double omega_q, double kt, int n_max) {
  return std::pow(fock_ratio(omega_q, kt), n_max + 1);
}

int auto_fock_cutoff(double omega_q, double kt, double eps) {
  const double x = fock_ratio(omega_q, kt);
  if (x == 0.0) return 1;
  const double n = std::ceil(std::log(eps) / std::log(x)) + 4.0;
  return std::max(1, static_cast<int>(n));
}

double fock_thermal_probability(double omega_q, double kt, int n) {
  const double x = fock_ratio(omega_q, kt);
  if (n == 0) return 1.0 - x;
  return std::pow(x, n) * (1.0 - x);
}

DensityMatrix thermal_state_fock(double omega_q, double kt, int n_max, double eps) {
  const double tail = fock_tail_mass(omega_q, kt, n_max);
  if (tail >= eps) {
    const int need = auto_fock_cutoff(omega_q, kt, eps);
    throw CutoffError(fmt::format("Fock cutoff {} leaves tail mass {:.3e} >= {:.1e}; need n_max >= {}",
                                  n_max, tail, eps, need),
                      need);
  }
  std::vector<double> p(static_cast<std::size_t>(n_max) + 1);
  double z = 0.0;
  for (int n = 0; n <= n_max; ++n) {
    p[static_cast<std::size_t>(n)] = fock_thermal_probability(omega_q, kt, n);
    z += p[static_cast<std::size_t>(n)];
  }
  for (double& x : p) x /= z;
  return DensityMatrix::diagonal(HilbertLayout::fock_only(n_max), p);
}

double bose_einstein(double omega, double kt) {
  if (kt == 0.0) return 0.0;
  return 1.0 / std::expm1(omega / kt);
}

}  // namespace qbat
