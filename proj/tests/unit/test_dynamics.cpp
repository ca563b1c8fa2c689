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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "oracles.hpp"
#include "qbat/dynamics.hpp"
#include "qbat/errors.hpp"
#include "qbat/model.hpp"

using namespace qbat;

namespace {

double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

DensityMatrix thermal_joint(const ModelParams& p, int atom_dim, int n_max, double kt) {
  const auto levels = battery_levels(p, atom_dim);
  return product_state(thermal_state_atom(levels, kt),
                       thermal_state_fock(p.fc_frequency(), kt, n_max, 1e-3));
}

// Small dimensionless three-level problem so RK4 stays cheap.
ModelParams toy_params() {
  ModelParams p;
  p.omega_m = 50.0;
  p.delta = 10.0;
  p.omega_eg = 15.0;
  p.rabi_drive = 1.0;
  p.g_q = 0.8;
  p.rabi_fc = 0.8;
  return p;
}

}  // namespace

TEST_CASE("unitary propagation preserves trace and purity") {
  const ModelParams p = ModelParams::figure_defaults(99.0);
  const HilbertLayout l = HilbertLayout::joint(2, 5);
  const ComplexMatrix h = build_h_eff(p, ProtocolParams{1, true}, l);
  const DensityMatrix rho0 = thermal_joint(p, 2, 5, 0.3 * p.omega_m);
  const DensityMatrix rho = propagate_unitary(h, rho0, 1e-3);
  CHECK(std::abs(rho.trace() - 1.0) < 1e-12);
  CHECK(rho.purity() == doctest::Approx(rho0.purity()).epsilon(1e-10));
  CHECK(hermiticity_error(rho.data()) < 1e-14);
  CHECK(max_abs(propagate_unitary(h, rho0, 0.0).data() - rho0.data()) == 0.0);
}

TEST_CASE("doublet transfer follows the two-level Rabi oracle") {
  ModelParams p = ModelParams::figure_defaults(99.0);
  for (double r : {1.0 / 30.0, 3.0}) {
    p.g_q = r * p.rabi_drive;
    const ProtocolParams proto{2, true};
    const int n_max = 7;
    const HilbertLayout l = HilbertLayout::joint(2, n_max);
    const ComplexMatrix h = build_h_eff(p, proto, l);
    const double g2 = p.g_q * p.g_q / p.delta;
    for (int n = 0; n < n_max; ++n) {
      Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(l.dim());
      psi(l.index(kG, n)) = 1.0;
      const UnitaryPropagator prop(h, DensityMatrix::pure(l, psi));
      const double detuning = -g2 * (n + 1) + g2 * proto.target_n;
      const double coupling = p.effective_coupling() * std::sqrt(n + 1.0);
      for (double t : {1e-4, 7e-4, 3.3e-3}) {
        const double got = prop.at(t).population(l.index(kE, n + 1));
        CHECK(std::abs(got - oracle::rabi_transfer(coupling, detuning, t)) < 1e-10);
      }
    }
  }
}

TEST_CASE("channel rates and labels") {
  const ModelParams p = ModelParams::figure_defaults(99.0);
  const double kt = 0.5 * p.omega_m;
  const ReservoirSpec res = ReservoirSpec::thermal(p, kt, 2.0);
  const HilbertLayout l = HilbertLayout::joint(3, 2);
  const auto ch = build_channels(p, res, l);
  REQUIRE(ch.size() == 6);
  CHECK(to_string(ch[0].label) == "gm");
  CHECK(ch[0].rate == doctest::Approx(2.0 * (bose_einstein(p.omega_m, kt) + 1.0)));
  CHECK(ch[1].rate == doctest::Approx(2.0 * bose_einstein(p.omega_m, kt)));
  CHECK(ch[2].rate == doctest::Approx(2.0 * (bose_einstein(p.omega_m - p.omega_eg, kt) + 1.0)));
  CHECK(ch[5].rate == doctest::Approx(2.0 * bose_einstein(p.fc_frequency(), kt)));
  CHECK(max_abs(ch[0].jump - on_atom(sigma(kG, kM, 3), l)) == 0.0);
  CHECK(max_abs(ch[4].jump - on_fock(annihilation(2), l)) == 0.0);
  CHECK_NOTHROW(res.check_consistent(p, kt));
  ReservoirSpec off = res;
  off.nbar_e *= 1.5;
  CHECK_THROWS_AS(off.check_consistent(p, kt), UsageError);
  ReservoirSpec neg = res;
  neg.gamma0 = -1.0;
  CHECK_THROWS_AS(neg.validate(), UsageError);
}

TEST_CASE("empty channels reproduce unitary evolution") {
  const ModelParams p = toy_params();
  const HilbertLayout l = HilbertLayout::joint(3, 3);
  const ComplexMatrix h = build_h_full_rotating(p, ProtocolParams{1, true}, l);
  const DensityMatrix rho0 = thermal_joint(p, 3, 3, 8.0);
  const double t = 7.5;
  const DensityMatrix want = propagate_unitary(h, rho0, t);
  for (auto method : {LindbladOptions::Method::kExponential, LindbladOptions::Method::kRk4}) {
    LindbladOptions opts;
    opts.method = method;
    const LindbladResult r = evolve_lindblad(h, {}, rho0, t, opts);
    CHECK(max_abs(r.state.data() - want.data()) < 1e-8);
    CHECK(r.trace_ok);
  }
}

TEST_CASE("single-mode decay uses the factor-two convention") {
  const HilbertLayout l = HilbertLayout::joint(3, 1);
  const double gamma = 0.37;
  const std::vector<LindbladChannel> ch = {{ChannelLabel::kMinus, on_fock(annihilation(1), l), gamma}};
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(l.dim());
  psi(l.index(kG, 1)) = 1.0;
  const DensityMatrix rho0 = DensityMatrix::pure(l, psi);
  const ComplexMatrix h = ComplexMatrix::Zero(l.dim(), l.dim());
  for (auto method : {LindbladOptions::Method::kExponential, LindbladOptions::Method::kRk4}) {
    for (double t : {0.5, 2.0, 6.0}) {
      LindbladOptions opts;
      opts.method = method;
      const LindbladResult r = evolve_lindblad(h, ch, rho0, t, opts);
      CHECK(std::abs(r.state.population(l.index(kG, 1)) - oracle::decay_p1(gamma, t)) < 1e-9);
    }
  }
}

TEST_CASE("exponential and Runge-Kutta methods agree with dissipation and drive") {
  const ModelParams p = toy_params();
  const HilbertLayout l = HilbertLayout::joint(3, 3);
  const double kt = 8.0;
  const ComplexMatrix h = build_h_full_rotating(p, ProtocolParams{1, true}, l);
  const auto ch = build_channels(p, ReservoirSpec::thermal(p, kt, 0.05), l);
  const DensityMatrix rho0 = thermal_joint(p, 3, 3, kt);
  LindbladOptions a;
  a.energies = EnergyOperators::from_model(p, l);
  LindbladOptions b = a;
  b.method = LindbladOptions::Method::kRk4;
  const LindbladResult ra = evolve_lindblad(h, ch, rho0, 6.0, a);
  const LindbladResult rb = evolve_lindblad(h, ch, rho0, 6.0, b);
  CHECK(max_abs(ra.state.data() - rb.state.data()) < 1e-7);
  for (ChannelLabel c : kAllChannels) {
    CHECK(std::abs(ra.ledger.heat(c) - rb.ledger.heat(c)) < 1e-6 * p.omega_m);
  }
  CHECK(std::abs(ra.ledger.w_drive - rb.ledger.w_drive) < 1e-6 * p.omega_m);
  // First law: dU = W + sum Q.
  CHECK(std::abs(ra.ledger.closure_residual()) < 1e-9 * p.omega_m);
  CHECK(std::abs(rb.ledger.closure_residual()) < 1e-7 * p.omega_m);
  CHECK(ra.state.min_eigenvalue() > -1e-9);
}

TEST_CASE("sector propagator restricts to reachable elements") {
  const ModelParams p = toy_params();
  const HilbertLayout l = HilbertLayout::joint(3, 4);
  const ComplexMatrix h = build_h_full_rotating(p, ProtocolParams{1, true}, l);
  const auto ch = build_channels(p, ReservoirSpec::thermal(p, 8.0, 0.1), l);
  const DensityMatrix rho0 = thermal_joint(p, 3, 4, 8.0);
  const SectorPropagator prop(h, ch, rho0, EnergyOperators::from_model(p, l));
  CHECK(prop.sector_size() < prop.dim() * prop.dim());
  CHECK(prop.sector_size() >= prop.dim());
  // Advancing in two pieces equals one piece.
  const auto one = prop.at(3.0);
  const auto two = prop.advance(prop.at(1.25), 1.75);
  CHECK((one.y - two.y).cwiseAbs().maxCoeff() < 1e-10 * std::max(1.0, one.y.cwiseAbs().maxCoeff()));
  CHECK_THROWS_AS(prop.advance(one, -1.0), UsageError);
}

TEST_CASE("relaxation toward the thermal state without drives") {
  ModelParams p = toy_params();
  p.rabi_drive = 0.0;
  p.g_q = 0.0;
  const int n_max = 6;
  const HilbertLayout l = HilbertLayout::joint(3, n_max);
  const double kt = 30.0;
  const double gamma = 0.2;
  const ComplexMatrix h = ComplexMatrix::Zero(l.dim(), l.dim());
  const auto ch = build_channels(p, ReservoirSpec::thermal(p, kt, gamma), l);
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(l.dim());
  psi(l.index(kE, 2)) = 1.0;
  const LindbladResult r = evolve_lindblad(h, ch, DensityMatrix::pure(l, psi), 60.0 / gamma);
  const auto levels = battery_levels(p, 3);
  const auto pa = oracle::boltzmann(levels, kt);
  const auto pn = oracle::fock_truncated(p.fc_frequency(), kt, n_max);
  for (int a = 0; a < 3; ++a)
    for (int n = 0; n <= n_max; ++n) {
      CHECK(std::abs(r.state.population(l.index(a, n)) - pa[a] * pn[n]) < 1e-8);
    }
}

TEST_CASE("trajectory dump") {
  const ModelParams p = toy_params();
  const HilbertLayout l = HilbertLayout::joint(3, 2);
  const ComplexMatrix h = build_h_full_rotating(p, ProtocolParams{1, true}, l);
  const auto ch = build_channels(p, ReservoirSpec::thermal(p, 10.0, 0.1), l);
  LindbladOptions opts;
  opts.energies = EnergyOperators::from_model(p, l);
  opts.dump_path = "qbat_test_dump.csv";
  opts.dump_samples = 10;
  evolve_lindblad(h, ch, thermal_joint(p, 3, 2, 10.0), 1.0, opts);
  std::ifstream in(opts.dump_path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,p_g,p_e,p_m,mean_n,heat_gm,heat_mg,heat_em,heat_me,heat_minus,heat_plus");
  int lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  CHECK(lines == 11);
  in.close();
  std::remove(opts.dump_path.c_str());
}

TEST_CASE("argument checks") {
  const HilbertLayout l = HilbertLayout::joint(3, 1);
  const DensityMatrix rho0 = DensityMatrix::diagonal(l, std::vector<double>{1, 0, 0, 0, 0, 0});
  ComplexMatrix nh = ComplexMatrix::Zero(6, 6);
  nh(0, 1) = 1.0;
  CHECK_THROWS_AS(evolve_lindblad(nh, {}, rho0, 1.0), UsageError);
  CHECK_THROWS_AS(evolve_lindblad(ComplexMatrix::Zero(4, 4), {}, rho0, 1.0), UsageError);
  const std::vector<LindbladChannel> neg = {{ChannelLabel::kGm, ComplexMatrix::Zero(6, 6), -1.0}};
  CHECK_THROWS_AS(evolve_lindblad(ComplexMatrix::Zero(6, 6), neg, rho0, 1.0), UsageError);
  CHECK_THROWS_AS(evolve_lindblad(ComplexMatrix::Zero(6, 6), {}, rho0, -1.0), UsageError);
}
