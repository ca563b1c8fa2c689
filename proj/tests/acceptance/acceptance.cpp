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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "oracles.hpp"
#include "qbat/cli.hpp"
#include "qbat/dynamics.hpp"
#include "qbat/observables.hpp"
#include "qbat/protocols.hpp"
#include "qbat/units.hpp"

using namespace qbat;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> lines;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    lines.push_back(fmt::format("{} {}", ok ? "ok  " : "FAIL", what));
  }
  void info(const std::string& what) { lines.push_back("info " + what); }
};

double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

ModelParams selective_params(double xi) {
  ModelParams p = ModelParams::figure_defaults(xi);
  p.rabi_drive = p.g_q / 20.0;
  return p;
}

ProtocolRun make_run(ProtocolKind kind, Engine engine, const ModelParams& p, double tbar) {
  ProtocolRun run;
  run.kind = kind;
  run.engine = engine;
  run.params = p;
  run.thermal = ThermalSpec::tbar(tbar);
  return run;
}

DensityMatrix thermal_product(const ModelParams& p, int atom_dim, int n_max, double kt, double eps) {
  return product_state(thermal_state_atom(battery_levels(p, atom_dim), kt),
                       thermal_state_fock(p.fc_frequency(), kt, n_max, eps));
}

double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  const EigenSystem e = herm_eig(a - b);
  return 0.5 * e.values.cwiseAbs().sum();
}

// 1. Selective flip: H_eff propagation reproduces the swapped joint state.
Outcome criterion1() {
  Outcome o;
  const ModelParams p = selective_params(99.0);
  const double tbar = 0.1;
  const double kt = tbar * p.omega_m;
  const ProtocolParams proto{1, true};
  const int n_max = auto_fock_cutoff(p.fc_frequency(), kt);
  const HilbertLayout l = HilbertLayout::joint(2, n_max);
  const DensityMatrix rho0 = thermal_product(p, 2, n_max, kt, kDefaultTailEps);
  const double tau_q = selective_flip_time(p, 1);
  o.info(fmt::format("r = {:.1f}, n_max = {}, tau_q = {:.6e} s (pi Delta / (2 r W_L^2) = {:.6e} s)", p.r(),
                     n_max, tau_q, units::kPi * p.delta / (2.0 * p.r() * p.rabi_drive * p.rabi_drive)));
  const DensityMatrix rho = propagate_unitary(build_h_eff(p, proto, l), rho0, tau_q);

  const auto pb = oracle::boltzmann({0.0, p.omega_eg}, kt);
  const auto pn = oracle::fock_truncated(p.fc_frequency(), kt, n_max);
  const auto want = oracle::selective_flip_state(pb[0], pb[1], pn, 1);
  ComplexMatrix target = ComplexMatrix::Zero(l.dim(), l.dim());
  for (int a = 0; a < 2; ++a)
    for (int n = 0; n <= n_max; ++n) target(l.index(a, n), l.index(a, n)) = want[a * (n_max + 1) + n];
  const double dev = max_abs(rho.data() - target);
  o.require(dev <= 1e-6, fmt::format("max entrywise deviation from the swapped state {:.3e} (tol 1e-6)", dev));

  const double pe = partial_trace(rho, "atom").population(kE);
  const double du = p.omega_eg * (pe - pb[1]);
  const double du_want = p.omega_eg * (pn[0] * pb[0] - pb[1] * pn[1]);
  const double rel = std::abs(du - du_want) / std::abs(du_want);
  o.require(rel <= 1e-8, fmt::format("dU^q relative deviation {:.3e} (tol 1e-8)", rel));
  const double leak = doublet_spectrum(p, proto, 1).amplitude * pb[0] * pn[1];
  o.info(fmt::format("largest off-resonant doublet weight A_1 p_g p_1 = {:.3e}", leak));
  return o;
}

// 2. Each doublet oscillates as A_n sin^2(W_n t).
Outcome criterion2() {
  Outcome o;
  const ModelParams p = ModelParams::figure_defaults(99.0);
  const ProtocolParams proto{1, true};
  const int n_max = 7;
  const HilbertLayout l = HilbertLayout::joint(2, n_max);
  const ComplexMatrix h = build_h_eff(p, proto, l);
  double worst = 0.0;
  for (int n = 0; n <= 5; ++n) {
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(l.dim());
    psi(l.index(kG, n)) = 1.0;
    const UnitaryPropagator u(h, DensityMatrix::pure(l, psi));
    const DoubletSpectrum d = doublet_spectrum(p, proto, n);
    for (int k = 1; k <= 20; ++k) {
      const double t = k * 2.0 * units::kPi / (20.0 * d.rabi) * 1.37;
      const double got = u.at(t).population(l.index(kE, n + 1));
      const double want = d.amplitude * std::pow(std::sin(d.rabi * t), 2);
      worst = std::max(worst, std::abs(got - want));
    }
  }
  o.require(worst <= 1e-9, fmt::format("max |P_n(t) - A_n sin^2(W_n t)| over 6 doublets x 20 times = {:.3e}", worst));
  return o;
}

// 3. Full three-level model against the effective model.
Outcome criterion3() {
  Outcome o;
  for (double xi : {2.0, 10.0, 99.0}) {
    const ModelParams p = ModelParams::figure_defaults(xi);
    ProtocolRun eff = make_run(ProtocolKind::kSingleShot, Engine::kEffNumeric, p, 0.1);
    const ChargingReport e = single_shot_quantum(eff);
    ProtocolRun full = eff;
    full.engine = Engine::kFullNumeric;
    full.tau = e.tau_used;
    const ChargingReport f = single_shot_quantum(full);
    const double rel = std::abs(f.delta_u_battery - e.delta_u_battery) / std::abs(e.delta_u_battery);
    o.require(rel <= 2e-2 && f.n_max <= 12,
              fmt::format("xi = {}: dU^q full {:.8e}, effective {:.8e}, rel {:.3e} (tol 2e-2), n_max {}", xi,
                          f.delta_u_battery, e.delta_u_battery, rel, f.n_max));
  }
  return o;
}

// 4. Sign of the gain across xi = 1.
Outcome criterion4() {
  Outcome o;
  const std::vector<double> xis = {0.5, 0.9, 1.1, 2.0, 10.0, 99.0};
  o.info("selective regime r = 20, tau = tau_q, T_bar = 0.1 (regime of the swap state the threshold is derived from)");
  for (double xi : xis) {
    const ModelParams p = selective_params(xi);
    ProtocolRun run = make_run(ProtocolKind::kSingleShot, Engine::kAnalytic, p, 0.1);
    run.tau = selective_flip_time(p, 1);
    const ChargingReport r = single_shot_quantum(run);
    const bool ok = xi < 1.0 ? r.k_q <= 0.0 : r.k_q > 0.0;
    o.require(ok, fmt::format("xi = {:>4}: K_q = {:+.6e}", xi, r.k_q));
  }
  o.info("non-selective figure parameters r = 1/30, tau optimised (not scored):");
  for (double xi : xis) {
    const ChargingReport r = single_shot_quantum(
        make_run(ProtocolKind::kSingleShot, Engine::kAnalytic, ModelParams::figure_defaults(xi), 0.1));
    o.info(fmt::format("  xi = {:>4}: K_q = {:+.6e}", xi, r.k_q));
  }
  return o;
}

// 5. Sequential full-charge limit.
Outcome criterion5() {
  Outcome o;
  const ModelParams p = ModelParams::figure_defaults(99.0);
  ProtocolRun warm = make_run(ProtocolKind::kSequential, Engine::kAnalytic, p, 0.4);
  const ChargingReport r = sequential_charge(warm);
  const double kt = 0.4 * p.omega_m;
  const auto pb = oracle::boltzmann({0.0, p.omega_eg}, kt);
  const double p0 = oracle::fock_p(p.fc_frequency(), kt, 0);
  const double dev = std::abs(r.delta_u_battery - r.delta_u_classical - pb[1] * p0 * p.omega_eg) / p.omega_eg;
  o.require(dev < 1e-6, fmt::format("T_bar = 0.4, M = {}: |dU^q - dU^c - p_e p_0 w_eg| / w_eg = {:.3e} (tol 1e-6)",
                                    r.step_delta_u.size(), dev));

  for (Engine e : {Engine::kAnalytic, Engine::kEffNumeric}) {
    const ChargingReport c = sequential_charge(make_run(ProtocolKind::kSequential, e, p, 0.0));
    const double d = std::max(std::abs(c.p_e - 1.0), std::abs(c.p_g));
    o.require(d <= 1e-9, fmt::format("T = 0, {}: max(|p_e - 1|, p_g) = {:.3e} (tol 1e-9)", c.engine, d));
  }
  // Reduced state including coherences after one flip from |g,0>.
  const HilbertLayout l = HilbertLayout::joint(2, 3);
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(l.dim());
  psi(l.index(kG, 0)) = 1.0;
  const DensityMatrix rho = propagate_unitary(build_h_eff(p, ProtocolParams{1, true}, l), DensityMatrix::pure(l, psi),
                                              selective_flip_time(p, 1));
  ComplexMatrix ee = ComplexMatrix::Zero(2, 2);
  ee(kE, kE) = 1.0;
  const double d = max_abs(partial_trace(rho, "atom").data() - ee);
  o.require(d <= 1e-9, fmt::format("T = 0: reduced battery state vs sigma_ee entrywise {:.3e} (tol 1e-9)", d));
  return o;
}

// 6. Efficiency identity and the efficiency bound on the figure table.
Outcome criterion6() {
  Outcome o;
  double worst = 0.0;
  int count = 0;
  for (Engine e : {Engine::kAnalytic, Engine::kEffNumeric}) {
    for (double xi : {2.0, 5.0, 10.0, 50.0, 99.0}) {
      for (double tbar : {0.05, 0.1, 0.2, 0.3, 0.4}) {
        const ChargingReport r =
            single_shot_quantum(make_run(ProtocolKind::kSingleShot, e, ModelParams::figure_defaults(xi), tbar));
        worst = std::max(worst, std::abs(r.ergotropy / r.work_in - efficiency_closed_form(xi, r.k_q)));
        ++count;
      }
    }
  }
  o.require(worst <= 1e-9, fmt::format("{} runs: max |E^q / W_L - (1+2K)/((1+K)(1+xi))| = {:.3e} (tol 1e-9)", count,
                                       worst));
  const cli::Table t = cli::fig2_table(cli::parse_config(nlohmann::json::object()), 0);
  const auto col = [&](const std::string& name) {
    return static_cast<int>(std::find(t.header.begin(), t.header.end(), name) - t.header.begin());
  };
  const int ixi = col("xi");
  const int ieta = col("eta");
  int violations = 0;
  for (const auto& row : t.rows) {
    const double xi = std::get<double>(row[ixi]);
    const double eta = std::get<double>(row[ieta]);
    if (!(eta <= 2.0 / (1.0 + xi))) ++violations;
  }
  o.require(violations == 0,
            fmt::format("eta <= 2/(1+xi) violated on {} of {} figure rows", violations, t.rows.size()));
  return o;
}

// 7. Ergotropy properties.
Outcome criterion7() {
  Outcome o;
  double worst_thermal = 0.0;
  for (double xi : {2.0, 99.0}) {
    const ModelParams p = ModelParams::figure_defaults(xi);
    for (double tbar : {0.0, 0.1, 0.4, 1.0}) {
      const double kt = tbar * p.omega_m;
      for (int dim : {2, 3}) {
        const auto levels = battery_levels(p, dim);
        ComplexMatrix h = ComplexMatrix::Zero(dim, dim);
        for (int i = 0; i < dim; ++i) h(i, i) = levels[i];
        worst_thermal = std::max(worst_thermal, ergotropy(thermal_state_atom(levels, kt), h) / p.omega_eg);
      }
    }
  }
  o.require(worst_thermal <= 1e-12, fmt::format("thermal states: max ergotropy / w_eg = {:.3e} (tol 1e-12)",
                                                worst_thermal));

  double worst_identity = 0.0;
  int runs = 0;
  for (double xi : {2.0, 10.0, 99.0}) {
    for (double tbar : {0.05, 0.1, 0.2, 0.4}) {
      const ModelParams p = ModelParams::figure_defaults(xi);
      std::vector<ChargingReport> reports;
      for (Engine e : {Engine::kAnalytic, Engine::kEffNumeric}) {
        reports.push_back(single_shot_quantum(make_run(ProtocolKind::kSingleShot, e, p, tbar)));
      }
      reports.push_back(sequential_charge(make_run(ProtocolKind::kSequential, Engine::kAnalytic, p, tbar)));
      for (const auto& r : reports) {
        worst_identity = std::max(
            worst_identity, std::abs(r.ergotropy - (2.0 * r.delta_u_battery - r.ergotropy_classical)) / p.omega_eg);
        ++runs;
      }
    }
  }
  o.require(worst_identity <= 1e-9,
            fmt::format("{} protocol outputs: max |E^q - (2 dU^q - E^c)| / w_eg = {:.3e} (tol 1e-9)", runs,
                        worst_identity));

  std::mt19937_64 rng(20260101);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst_perm = 0.0;
  for (int k = 0; k < 100; ++k) {
    std::vector<double> pr(4), en(4);
    double s = 0.0;
    for (auto& x : pr) s += (x = unit(rng));
    for (auto& x : pr) x /= s;
    for (auto& x : en) x = 5.0 * unit(rng);
    ComplexMatrix h = ComplexMatrix::Zero(4, 4);
    for (int i = 0; i < 4; ++i) h(i, i) = en[i];
    ComplexMatrix rho = ComplexMatrix::Zero(4, 4);
    for (int i = 0; i < 4; ++i) rho(i, i) = pr[i];
    const double got = ergotropy(rho, h);
    worst_perm = std::max(worst_perm, std::abs(got - oracle::permutation_ergotropy(pr, en)));
  }
  o.require(worst_perm <= 1e-9, fmt::format("100 random diagonal 4-level states vs permutation search: {:.3e} (tol 1e-9)",
                                            worst_perm));
  return o;
}

// 8. Master-equation solver checks.
Outcome criterion8() {
  Outcome o;
  const ModelParams p = ModelParams::figure_defaults(99.0);
  const ProtocolParams proto{1, true};
  {
    const int n_max = 4;
    const HilbertLayout l = HilbertLayout::joint(3, n_max);
    const double kt = 0.1 * p.omega_m;
    const ComplexMatrix h = build_h_full_rotating(p, proto, l);
    const DensityMatrix rho0 = thermal_product(p, 3, n_max, kt, 1e-6);
    const double tq = selective_flip_time(p, 1);
    const DensityMatrix want = propagate_unitary(h, rho0, tq);
    const LindbladResult r = evolve_lindblad(h, {}, rho0, tq);
    const double d = max_abs(r.state.data() - want.data());
    o.require(d <= 1e-8, fmt::format("(a) no channels vs unitary over tau_q: {:.3e} (tol 1e-8)", d));
  }
  {
    const HilbertLayout l = HilbertLayout::joint(3, 1);
    const double gamma = 0.37;
    const std::vector<LindbladChannel> ch = {{ChannelLabel::kMinus, on_fock(annihilation(1), l), gamma}};
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(l.dim());
    psi(l.index(kG, 1)) = 1.0;
    const DensityMatrix rho0 = DensityMatrix::pure(l, psi);
    const ComplexMatrix h = ComplexMatrix::Zero(l.dim(), l.dim());
    double worst = 0.0;
    for (auto method : {LindbladOptions::Method::kExponential, LindbladOptions::Method::kRk4}) {
      for (double t : {0.1, 0.5, 1.0, 2.0, 5.0}) {
        LindbladOptions opts;
        opts.method = method;
        const LindbladResult r = evolve_lindblad(h, ch, rho0, t, opts);
        worst = std::max(worst, std::abs(r.state.population(l.index(kG, 1)) - oracle::decay_p1(gamma, t)));
      }
    }
    o.require(worst <= 1e-6, fmt::format("(b) |p_1(t) - exp(-2 gamma t)| both methods = {:.3e} (tol 1e-6)", worst));
  }
  // g <-> e equilibrates only through m at a rate ~ gamma0 nbar(w_m), so the
  // scored temperature is one where nbar(w_m) is of order one.
  ModelParams q = p;
  q.rabi_drive = 0.0;
  q.g_q = 0.0;
  for (double tbar : {1.0, 0.5}) {
    const double kt = tbar * q.omega_m;
    const int n_max = 6;
    const HilbertLayout l = HilbertLayout::joint(3, n_max);
    const double gamma0 = q.omega_m * 1e-6;
    const ComplexMatrix h = ComplexMatrix::Zero(l.dim(), l.dim());
    const auto ch = build_channels(q, ReservoirSpec::thermal(q, kt, gamma0), l);
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(l.dim());
    psi(l.index(kE, 2)) = 1.0;
    const LindbladResult r = evolve_lindblad(h, ch, DensityMatrix::pure(l, psi), 10.0 / gamma0);
    const auto pa = oracle::boltzmann(battery_levels(q, 3), kt);
    const auto pn = oracle::fock_truncated(q.fc_frequency(), kt, n_max);
    ComplexMatrix target = ComplexMatrix::Zero(l.dim(), l.dim());
    for (int a = 0; a < 3; ++a)
      for (int n = 0; n <= n_max; ++n) target(l.index(a, n), l.index(a, n)) = pa[a] * pn[n];
    const double d = trace_distance(r.state.data(), target);
    const std::string line = fmt::format(
        "(c) six channels, no drives, T_bar = {}, n_max = {}, t = 10/gamma0: trace distance {:.3e} (tol 1e-3)", tbar,
        n_max, d);
    if (tbar == 1.0) {
      o.require(d < 1e-3, line);
    } else {
      o.info(line + ", not scored");
    }
  }
  return o;
}

// 9 and 10. Open-system gain curves and first-law closure.
struct OpenRun {
  double tbar;
  double gamma0;
  ChargingReport report;
};

std::vector<OpenRun> g_open_runs;

ProtocolRun open_run(double tbar) {
  ProtocolRun run = make_run(ProtocolKind::kOpenSystem, Engine::kLindblad, ModelParams::figure_defaults(99.0), tbar);
  run.n_max = 10;
  run.tail_eps = 1e-4;
  return run;
}

Outcome criterion9() {
  Outcome o;
  const auto tbars = cli::default_tbar_grid();
  const auto ladder = cli::default_gamma0_ladder();
  const double kappa = ModelParams::figure_defaults(99.0).effective_coupling();
  o.info(fmt::format("xi = 99, n_max = 10, gamma0 ladder {{0, 1e-3, 1e-2, 1e-1, 1}} x {:.4f} 1/s", kappa));

  std::vector<std::pair<double, double>> points;
  for (double t : tbars)
    for (double g : ladder) points.emplace_back(t, g);
  g_open_runs.assign(points.size(), {});
  cli::parallel_for(static_cast<int>(points.size()), 0, [&](int i) {
    const auto [t, g] = points[i];
    g_open_runs[i] = {t, g, open_system_run(open_run(t), ReservoirSpec::thermal(open_run(t).params,
                                                                                open_run(t).kt(), g))};
  });
  const auto at = [&](double t, std::size_t k) -> const ChargingReport& {
    const auto it = std::find_if(g_open_runs.begin(), g_open_runs.end(),
                                 [&](const OpenRun& r) { return r.tbar == t && r.gamma0 == ladder[k]; });
    return it->report;
  };

  for (double t : {0.05, 0.1}) {
    ProtocolRun eff = open_run(t);
    eff.kind = ProtocolKind::kSingleShot;
    eff.engine = Engine::kEffNumeric;
    const double k_eff = single_shot_quantum(eff).k_q;
    eff.engine = Engine::kFullNumeric;
    const double k_full = single_shot_quantum(eff).k_q;
    const double k0 = at(t, 0).k_q;
    const double rel = std::abs(k0 - k_eff) / std::abs(k_eff);
    o.require(rel <= 1e-4, fmt::format("T_bar = {}: K_q(gamma0 = 0) = {:.8f} vs effective unitary {:.8f}, rel {:.3e} "
                                       "(tol 1e-4)", t, k0, k_eff, rel));
    o.info(fmt::format("  same T_bar, closed three-level unitary K_q = {:.8f}, rel {:.3e}", k_full,
                       std::abs(k0 - k_full) / std::abs(k_full)));
  }

  int bad = 0;
  int checked = 0;
  for (double t : tbars) {
    if (t < 0.1 - 1e-12) continue;
    ++checked;
    std::string row = fmt::format("T_bar = {:.2f}: K_q =", t);
    bool mono = true;
    for (std::size_t k = 0; k < ladder.size(); ++k) {
      row += fmt::format(" {:.5f}", at(t, k).k_q);
      if (k > 0 && !(at(t, k).k_q <= at(t, k - 1).k_q)) mono = false;
    }
    if (!mono) {
      ++bad;
      o.info(row + "  <- not monotone");
    }
  }
  o.require(bad == 0, fmt::format("K_q non-increasing along the gamma0 ladder at {} of {} T_bar values in [0.1, 1]",
                                  checked - bad, checked));

  double best = -1e300;
  double best_t = 0.0;
  double best_g = 0.0;
  for (const auto& r : g_open_runs) {
    if (r.gamma0 > 0.0 && r.report.k_q > best) {
      best = r.report.k_q;
      best_t = r.tbar;
      best_g = r.gamma0;
    }
  }
  o.require(best > 30.0, fmt::format("max K_q over gamma0 > 0 = {:.3f} at T_bar = {:.2f}, gamma0 = {:.3g} kappa (> 30)",
                                     best, best_t, best_g / kappa));
  for (std::size_t k = 1; k < ladder.size(); ++k) {
    double m = -1e300;
    double mt = 0.0;
    for (double t : tbars)
      if (at(t, k).k_q > m) {
        m = at(t, k).k_q;
        mt = t;
      }
    o.info(fmt::format("  gamma0 = {:g} kappa: max K_q = {:.3f} at T_bar = {:.2f}", ladder[k] / kappa, m, mt));
  }
  return o;
}

Outcome criterion10() {
  Outcome o;
  const double omega_m = ModelParams::figure_defaults(99.0).omega_m;
  double worst = 0.0;
  for (const auto& r : g_open_runs) worst = std::max(worst, std::abs(r.report.closure_residual));
  o.require(!g_open_runs.empty() && worst <= 1e-6 * omega_m,
            fmt::format("{} open-system runs: max |dU - W - sum Q| / w_m = {:.3e} (tol 1e-6)", g_open_runs.size(),
                        worst / omega_m));
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    double limit_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, 1.0, criterion1},   {2, 1.0, criterion2},   {3, 10.0, criterion3},  {4, 30.0, criterion4},
      {5, 5.0, criterion5},   {6, 60.0, criterion6},  {7, 5.0, criterion7},   {8, 60.0, criterion8},
      {9, 600.0, criterion9}, {10, 1.0, criterion10},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.require(false, fmt::format("exception: {}", e.what()));
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.require(secs < c.limit_s, fmt::format("runtime {:.2f} s (limit {:g} s)", secs, c.limit_s));
    if (!o.pass) ++failed;
    std::cout << fmt::format("criterion {}: {}\n", c.id, o.pass ? "PASS" : "FAIL");
    for (const auto& line : o.lines) std::cout << "    " << line << '\n';
    std::cout.flush();
  }
  std::cout << fmt::format("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
