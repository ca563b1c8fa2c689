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

#include "qbat/observables.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "qbat/errors.hpp"

namespace qbat {

double internal_energy(const DensityMatrix& rho_b, std::span<const double> levels) {
  if (rho_b.layout().has_fock() || static_cast<int>(levels.size()) != rho_b.dim()) {
    throw UsageError("internal_energy expects a battery-only state matching the level list");
  }
  double u = 0.0;
  for (int j = 0; j < rho_b.dim(); ++j) u += rho_b.population(j) * levels[static_cast<std::size_t>(j)];
  return u;
}

double internal_energy(const DensityMatrix& rho_b, double omega_eg) {
  if (rho_b.layout().has_fock()) {
    throw UsageError("internal_energy expects a battery-only state");
  }
  return rho_b.population(kE) * omega_eg;
}

double ergotropy(const ComplexMatrix& rho, const ComplexMatrix& h) {
  if (rho.rows() != h.rows() || rho.cols() != h.cols() || rho.rows() != rho.cols()) {
    throw UsageError(fmt::format("ergotropy: state is {}x{} but Hamiltonian is {}x{}", rho.rows(),
                                 rho.cols(), h.rows(), h.cols()));
  }
  const EigenSystem hs = herm_eig(h);
  const EigenSystem rs = herm_eig(rho);
  const Eigen::Index d = rho.rows();
  // Descending state spectrum paired with ascending energies.
  double e = 0.0;
  for (Eigen::Index k = 0; k < d; ++k) {
    const double r_k = rs.values(d - 1 - k);
    const auto rk = rs.vectors.col(d - 1 - k);
    for (Eigen::Index j = 0; j < d; ++j) {
      const double overlap = std::norm(rk.dot(hs.vectors.col(j)));
      e += r_k * hs.values(j) * overlap;
    }
    e -= r_k * hs.values(k);
  }
  return std::max(0.0, e);
}

double ergotropy(const DensityMatrix& rho, const ComplexMatrix& h) {
  return ergotropy(rho.data(), h);
}

double gain(double delta_u_q, double delta_u_c) {
  if (!(delta_u_c > 0.0)) {
    throw UndefinedQuantity(fmt::format("gain undefined for classical charge {} <= 0", delta_u_c));
  }
  return delta_u_q / delta_u_c - 1.0;
}

double efficiency_closed_form(double xi, double k_q) {
  return (1.0 / (1.0 + xi)) * (1.0 + 2.0 * k_q) / (1.0 + k_q);
}

Efficiency efficiency(double ergotropy, double work_in, double q_em) {
  if (!(work_in > 0.0)) {
    throw UndefinedQuantity(fmt::format("efficiency undefined for injected work {} <= 0", work_in));
  }
  Efficiency out;
  out.eta = ergotropy / work_in;
  if (q_em > 0.0) out.eta_corrected = ergotropy / (work_in + q_em);
  return out;
}

std::string check_report(const ChargingReport& r, double tol) {
  if (r.delta_u_classical > 0.0) {
    const double k = r.delta_u_battery / r.delta_u_classical - 1.0;
    if (std::abs(k - r.k_q) > tol * std::max(1.0, std::abs(k))) {
      return fmt::format("k_q {} disagrees with delta_u ratio {}", r.k_q, k);
    }
  }
  if (r.work_in > 0.0) {
    const double eta = r.eta_corrected.value_or(r.eta);
    if (eta < -tol || eta > 1.0 + tol) return fmt::format("efficiency {} outside [0, 1]", eta);
  }
  if (!std::isfinite(r.delta_u_battery) || !std::isfinite(r.work_in)) {
    return "non-finite energy";
  }
  return {};
}

}  // namespace qbat
