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

#include "qbat/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "qbat/errors.hpp"
#include "qbat/units.hpp"

namespace qbat {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kOccupiedFloor = 1e-6;
constexpr int kRefineCandidates = 3;
constexpr int kGoldenIterations = 80;

void append_status(ChargingReport& r, const std::string& msg) {
  if (msg.empty()) return;
  if (!r.status.empty()) r.status += "; ";
  r.status += msg;
}

void require_kind(const ProtocolRun& run, ProtocolKind kind, const char* who) {
  if (run.kind != kind) {
    throw UsageError(fmt::format("{} called with protocol kind {}", who, to_string(run.kind)));
  }
}

std::vector<double> fock_populations(const ProtocolRun& run, int n_max) {
  const DensityMatrix f =
      thermal_state_fock(run.params.fc_frequency(), run.kt(), n_max, run.tail_eps);
  const RealVector d = f.populations();
  return {d.data(), d.data() + d.size()};
}

ComplexMatrix two_level_h(double omega_eg) {
  ComplexMatrix h = ComplexMatrix::Zero(2, 2);
  h(1, 1) = omega_eg;
  return h;
}

// Ergotropy of the {g, e} block of a battery state against diag(0, w_eg).
double battery_ergotropy(const DensityMatrix& rho_b, double omega_eg) {
  return ergotropy(ComplexMatrix(rho_b.data().topLeftCorner(2, 2)), two_level_h(omega_eg));
}

double mean_photon(const DensityMatrix& rho_f) {
  const RealVector p = rho_f.populations();
  double n = 0.0;
  for (Eigen::Index k = 0; k < p.size(); ++k) n += static_cast<double>(k) * p(k);
  return n;
}

DensityMatrix joint_thermal(const ProtocolRun& run, int atom_dim, int n_max) {
  const auto levels = battery_levels(run.params, atom_dim);
  return product_state(thermal_state_atom(levels, run.kt()),
                       thermal_state_fock(run.params.fc_frequency(), run.kt(), n_max,
                                          run.tail_eps));
}

ChargingReport base_report(const ProtocolRun& run, const std::vector<double>& pops) {
  ChargingReport r;
  r.protocol = to_string(run.kind);
  r.engine = to_string(run.engine);
  const double p_g = pops[0];
  const double p_e = pops[1];
  r.delta_u_classical = run.params.omega_eg * (p_g - p_e);
  r.ergotropy_classical = std::max(0.0, r.delta_u_classical);
  return r;
}

// Fills the final populations and the energies measured on a reduced
// battery state.
void measure_battery(ChargingReport& r, const ModelParams& p, const DensityMatrix& rho_b,
                     const std::vector<double>& pops0) {
  r.p_g = rho_b.population(kG);
  r.p_e = rho_b.population(kE);
  r.p_m = rho_b.dim() > 2 ? rho_b.population(kM) : 0.0;
  r.delta_u_battery = p.omega_eg * (r.p_e - pops0[1]);
  r.s_value = r.p_e - pops0[1];
  if (rho_b.dim() > 2) r.delta_u_ancilla = p.omega_m * (r.p_m - pops0[2]);
  r.ergotropy = battery_ergotropy(rho_b, p.omega_eg);
}

void finish(ChargingReport& r) {
  try {
    r.k_q = gain(r.delta_u_battery, r.delta_u_classical);
  } catch (const UndefinedQuantity& e) {
    r.k_q = kNaN;
    append_status(r, e.what());
  }
  double q_em = 0.0;
  if (auto it = r.heat.find("em"); it != r.heat.end()) q_em += it->second;
  if (auto it = r.heat.find("me"); it != r.heat.end()) q_em += it->second;
  try {
    const Efficiency eff = efficiency(r.ergotropy, r.work_in, q_em);
    r.eta = eff.eta;
    r.eta_corrected = eff.eta_corrected;
  } catch (const UndefinedQuantity& e) {
    r.eta = kNaN;
    append_status(r, e.what());
  }
  if (std::isfinite(r.k_q) && std::isfinite(r.eta)) append_status(r, check_report(r));
}

double golden_max(const std::function<double(double)>& f, double a, double b, double tol,
                  double* f_best) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < kGoldenIterations && (b - a) > tol; ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  if (fc >= fd) {
    *f_best = fc;
    return c;
  }
  *f_best = fd;
  return d;
}

// Refines the best local maxima of pre-sampled values f(k t_max / grid).
TauOptimum refine_samples(const std::function<double(double)>& f, double t_max,
                          const std::vector<double>& values) {
  const int grid = static_cast<int>(values.size()) - 1;
  const double dt = t_max / grid;
  std::vector<int> peaks;
  for (int k = 1; k <= grid; ++k) {
    const bool left = values[k] >= values[k - 1];
    const bool right = k == grid || values[k] >= values[k + 1];
    if (left && right) peaks.push_back(k);
  }
  TauOptimum best{0.0, values[0]};
  for (int k = 0; k <= grid; ++k) {
    if (values[k] > best.value) best = {k * dt, values[k]};
  }
  std::stable_sort(peaks.begin(), peaks.end(),
                   [&](int a, int b) { return values[a] > values[b]; });
  if (peaks.size() > kRefineCandidates) peaks.resize(kRefineCandidates);
  for (int k : peaks) {
    const double a = (k - 1) * dt;
    const double b = std::min(k + 1, grid) * dt;
    double fv = 0.0;
    const double t = golden_max(f, a, b, 1e-12 * t_max, &fv);
    if (fv > best.value || (fv == best.value && t < best.tau)) best = {t, fv};
  }
  return best;
}

void check_window(double t_max, int grid) {
  if (!(t_max > 0.0) || !std::isfinite(t_max)) {
    throw UsageError(fmt::format("t_max must be positive, got {}", t_max));
  }
  if (grid < 100) throw UsageError(fmt::format("grid must be >= 100, got {}", grid));
}

// Population of |e> summed over the Fock factor.
double excited_population(const DensityMatrix& rho) {
  const HilbertLayout& l = rho.layout();
  double p = 0.0;
  for (int n = 0; n < l.fock_dim(); ++n) p += rho.population(l.index(kE, n));
  return p;
}


// Nested fixed-step scans around the best grid maxima. Every level shares
// one step matrix, so refinement costs a handful of exponentials.
double refine_by_subgrid(const SectorPropagator& prop,
                         const std::function<double(const SectorPropagator::Point&)>& f,
                         const std::vector<SectorPropagator::Point>& samples,
                         const std::vector<double>& values) {
  constexpr int kSub = 100;
  constexpr int kLevels = 4;
  const int grid = static_cast<int>(values.size()) - 1;
  const double dt = samples[1].t - samples[0].t;
  struct Bracket {
    SectorPropagator::Point lo;
    int steps;
  };
  std::vector<int> peaks;
  for (int k = 1; k <= grid; ++k) {
    if (values[k] >= values[k - 1] && (k == grid || values[k] >= values[k + 1])) peaks.push_back(k);
  }
  std::stable_sort(peaks.begin(), peaks.end(),
                   [&](int a, int b) { return values[a] > values[b]; });
  if (peaks.size() > kRefineCandidates) peaks.resize(kRefineCandidates);

  double best_t = 0.0;
  double best_v = values[0];
  for (int k = 0; k <= grid; ++k) {
    if (values[k] > best_v) {
      best_v = values[k];
      best_t = samples[k].t;
    }
  }
  std::vector<Bracket> brackets;
  for (int k : peaks) brackets.push_back({samples[k - 1], (std::min(k + 1, grid) - (k - 1)) * kSub / 2});
  double h = 2.0 * dt / kSub;
  for (int level = 0; level < kLevels && !brackets.empty(); ++level) {
    const ComplexMatrix step = prop.step_matrix(h);
    for (Bracket& b : brackets) {
      std::vector<SectorPropagator::Point> pts{b.lo};
      int arg = 0;
      double local = f(b.lo);
      for (int j = 1; j <= b.steps; ++j) {
        pts.push_back({pts.back().t + h, step * pts.back().y});
        const double v = f(pts.back());
        if (v > local) {
          local = v;
          arg = j;
        }
      }
      if (local > best_v) {
        best_v = local;
        best_t = pts[arg].t;
      }
      b = {pts[std::max(arg - 1, 0)], kSub};
    }
    h *= 2.0 / kSub;
  }
  return best_t;
}

}  // namespace

std::string to_string(ProtocolKind kind) {
  switch (kind) {
    case ProtocolKind::kClassical: return "classical";
    case ProtocolKind::kSingleShot: return "quantum_single_shot";
    case ProtocolKind::kSequential: return "quantum_sequential";
    case ProtocolKind::kOpenSystem: return "open_system";
  }
  return "unknown";
}

std::string to_string(Engine engine) {
  switch (engine) {
    case Engine::kAnalytic: return "analytic";
    case Engine::kEffNumeric: return "eff_numeric";
    case Engine::kFullNumeric: return "full_numeric";
    case Engine::kLindblad: return "lindblad";
  }
  return "unknown";
}

ProtocolKind parse_protocol(const std::string& s) {
  if (s == "classical") return ProtocolKind::kClassical;
  if (s == "quantum_single_shot") return ProtocolKind::kSingleShot;
  if (s == "quantum_sequential") return ProtocolKind::kSequential;
  if (s == "open_system") return ProtocolKind::kOpenSystem;
  throw UsageError(fmt::format("unknown protocol '{}'", s));
}

Engine parse_engine(const std::string& s) {
  if (s == "analytic") return Engine::kAnalytic;
  if (s == "eff_numeric") return Engine::kEffNumeric;
  if (s == "full_numeric") return Engine::kFullNumeric;
  if (s == "lindblad") return Engine::kLindblad;
  throw UsageError(fmt::format("unknown engine '{}'", s));
}

void ProtocolRun::validate() const {
  params.validate();
  proto.validate();
  if (!(thermal.value >= 0.0) || !std::isfinite(thermal.value)) {
    throw UsageError(fmt::format("temperature must be >= 0, got {}", thermal.value));
  }
  if (tau && !(*tau > 0.0)) throw UsageError(fmt::format("tau must be > 0, got {}", *tau));
  if (steps && *steps < 1) throw UsageError(fmt::format("steps must be >= 1, got {}", *steps));
  if (n_max && *n_max < 1) throw UsageError(fmt::format("n_max must be >= 1, got {}", *n_max));
  if (!(tail_eps > 0.0 && tail_eps < 1.0)) {
    throw UsageError(fmt::format("eps_trunc must lie in (0, 1), got {}", tail_eps));
  }
  if (t_max) check_window(*t_max, grid);
  if (grid < 100) throw UsageError(fmt::format("grid must be >= 100, got {}", grid));
  const bool lindblad = engine == Engine::kLindblad;
  if (lindblad != (kind == ProtocolKind::kOpenSystem)) {
    throw UsageError(fmt::format("engine {} is not available for protocol {}", to_string(engine),
                                 to_string(kind)));
  }
}

int resolve_cutoff(const ProtocolRun& run) {
  const double wq = run.params.fc_frequency();
  const double kt = run.kt();
  const int needed = auto_fock_cutoff(wq, kt, run.tail_eps);
  if (!run.n_max) return needed;
  if (fock_tail_mass(wq, kt, *run.n_max) >= run.tail_eps) {
    throw CutoffError(fmt::format("n_max = {} leaves tail mass {} >= eps_trunc {}; need n_max >= {}",
                                  *run.n_max, fock_tail_mass(wq, kt, *run.n_max), run.tail_eps,
                                  needed),
                      needed);
  }
  return *run.n_max;
}

std::vector<double> battery_populations(const ProtocolRun& run, int atom_dim) {
  return boltzmann_weights(battery_levels(run.params, atom_dim), run.kt());
}

ChargingReport classical_charge(const ProtocolRun& run) {
  require_kind(run, ProtocolKind::kClassical, "classical_charge");
  run.validate();
  const ModelParams& p = run.params;
  const double rabi = p.classical_rabi();
  if (!(rabi > 0.0)) throw UsageError("classical protocol needs omega_q > 0");
  const int dim = run.engine == Engine::kFullNumeric ? 3 : 2;
  const auto pops = battery_populations(run, dim);
  ChargingReport r = base_report(run, pops);
  r.tau_used = run.tau.value_or(units::kPi / (2.0 * rabi));

  if (run.engine == Engine::kAnalytic) {
    r.p_g = pops[1];
    r.p_e = pops[0];
    r.s_value = pops[0] - pops[1];
    r.delta_u_battery = p.omega_eg * r.s_value;
    const DensityMatrix swapped = DensityMatrix::diagonal(HilbertLayout::atom_only(2),
                                                          std::vector<double>{r.p_g, r.p_e});
    r.ergotropy = battery_ergotropy(swapped, p.omega_eg);
  } else if (run.engine == Engine::kEffNumeric) {
    const DensityMatrix rho0 = DensityMatrix::diagonal(HilbertLayout::atom_only(2), pops);
    const DensityMatrix rho = propagate_unitary(build_h_classical_effective(p), rho0, r.tau_used);
    measure_battery(r, p, rho, pops);
  } else {
    double shift = 0.0;
    if (run.proto.stark_compensation) {
      const ResonantShift rs = classical_stark_shift(p);
      shift = rs.shift;
      if (!run.tau) r.tau_used = units::kPi / rs.splitting;
    }
    const DensityMatrix rho0 = DensityMatrix::diagonal(HilbertLayout::atom_only(3), pops);
    const DensityMatrix rho =
        propagate_unitary(build_h_classical_rotating(p, shift), rho0, r.tau_used);
    measure_battery(r, p, rho, pops);
  }
  // Each Raman cycle absorbs one drive photon and emits one photon into the
  // classical frequency-changing field.
  r.delta_u_fc = p.fc_frequency() * r.s_value;
  r.work_in = r.delta_u_battery + r.delta_u_fc + r.delta_u_ancilla;
  finish(r);
  return r;
}

double single_shot_S(const ProtocolRun& run, double t) {
  const int n_max = resolve_cutoff(run);
  const auto pn = fock_populations(run, n_max);
  const auto pb = battery_populations(run, 2);
  double s = 0.0;
  for (int n = 0; n < n_max; ++n) {
    const double w = pb[0] * pn[n] - pb[1] * pn[n + 1];
    if (w == 0.0) continue;
    const DoubletSpectrum d = doublet_spectrum(run.params, run.proto, n);
    const double sn = std::sin(d.rabi * t);
    s += d.amplitude * w * sn * sn;
  }
  return s;
}

TauOptimum maximize_on_grid(const std::function<double(double)>& f, double t_max, int grid) {
  check_window(t_max, grid);
  std::vector<double> values(static_cast<std::size_t>(grid) + 1);
  for (int k = 0; k <= grid; ++k) values[k] = f(t_max * k / grid);
  return refine_samples(f, t_max, values);
}

double default_t_max(const ProtocolRun& run) {
  const int n_max = resolve_cutoff(run);
  const auto pn = fock_populations(run, n_max);
  double slowest = std::numeric_limits<double>::infinity();
  for (int n = 0; n < n_max; ++n) {
    if (n > 0 && pn[n] < kOccupiedFloor) continue;
    slowest = std::min(slowest, doublet_spectrum(run.params, run.proto, n).rabi);
  }
  return 4.0 * units::kPi / slowest;
}

TauOptimum optimize_tau(const ProtocolRun& run, double t_max, int grid) {
  return maximize_on_grid([&](double t) { return single_shot_S(run, t); }, t_max, grid);
}

ChargingReport single_shot_quantum(const ProtocolRun& run) {
  require_kind(run, ProtocolKind::kSingleShot, "single_shot_quantum");
  run.validate();
  const ModelParams& p = run.params;
  const int n_max = std::max(resolve_cutoff(run), run.proto.target_n);
  const int dim = run.engine == Engine::kFullNumeric ? 3 : 2;
  const auto pops = battery_populations(run, dim);
  ChargingReport r = base_report(run, pops);
  r.n_max = n_max;
  r.truncation_tail = fock_tail_mass(p.fc_frequency(), run.kt(), n_max);
  const double t_max = run.t_max.value_or(0.0);

  if (run.engine == Engine::kAnalytic || run.engine == Engine::kEffNumeric) {
    ProtocolRun sized = run;
    sized.n_max = n_max;
    r.tau_used = run.tau ? *run.tau
                         : optimize_tau(sized, t_max > 0 ? t_max : default_t_max(sized), run.grid).tau;
    if (run.engine == Engine::kAnalytic) {
      const double s = single_shot_S(sized, r.tau_used);
      r.s_value = s;
      r.p_g = pops[0] - s;
      r.p_e = pops[1] + s;
      r.delta_u_battery = p.omega_eg * s;
      r.delta_u_fc = p.fc_frequency() * s;
      const DensityMatrix rho_b = DensityMatrix::unchecked(
          HilbertLayout::atom_only(2),
          ComplexMatrix(Eigen::Vector2cd(r.p_g, r.p_e).asDiagonal()));
      r.ergotropy = battery_ergotropy(rho_b, p.omega_eg);
    } else {
      const HilbertLayout layout = HilbertLayout::joint(2, n_max);
      const DensityMatrix rho0 = joint_thermal(sized, 2, n_max);
      const DensityMatrix rho =
          propagate_unitary(build_h_eff(p, run.proto, layout), rho0, r.tau_used);
      measure_battery(r, p, partial_trace(rho, HilbertLayout::Factor::kAtom), pops);
      r.delta_u_fc = p.fc_frequency() * (mean_photon(partial_trace(rho, HilbertLayout::Factor::kFock)) -
                                         mean_photon(partial_trace(rho0, HilbertLayout::Factor::kFock)));
    }
  } else {
    const HilbertLayout layout = HilbertLayout::joint(3, n_max);
    ProtocolRun sized = run;
    sized.n_max = n_max;
    const DensityMatrix rho0 = joint_thermal(sized, 3, n_max);
    const UnitaryPropagator prop(build_h_full_rotating(p, run.proto, layout), rho0);
    if (run.tau) {
      r.tau_used = *run.tau;
    } else {
      const double window = t_max > 0 ? t_max : default_t_max(sized);
      r.tau_used = maximize_on_grid([&](double t) { return excited_population(prop.at(t)); },
                                    window, run.grid)
                       .tau;
    }
    const DensityMatrix rho = prop.at(r.tau_used);
    measure_battery(r, p, partial_trace(rho, HilbertLayout::Factor::kAtom), pops);
    r.delta_u_fc = p.fc_frequency() * (mean_photon(partial_trace(rho, HilbertLayout::Factor::kFock)) -
                                       mean_photon(partial_trace(rho0, HilbertLayout::Factor::kFock)));
    r.trace_drift = std::abs(rho.trace() - 1.0);
  }
  r.work_in = r.delta_u_battery + r.delta_u_fc + r.delta_u_ancilla;
  finish(r);
  return r;
}

int default_sequential_steps(const ProtocolRun& run, double tol) {
  const double wq = run.params.fc_frequency();
  const double kt = run.kt();
  if (kt <= 0.0) return 1;
  const double log_x = -wq / kt;
  const int m = static_cast<int>(std::floor(std::log(tol) / log_x)) + 1;
  return std::max(1, m);
}

ChargingReport sequential_charge(const ProtocolRun& run) {
  require_kind(run, ProtocolKind::kSequential, "sequential_charge");
  run.validate();
  const ModelParams& p = run.params;
  const int steps = run.steps.value_or(default_sequential_steps(run));
  const int n_max = std::max(resolve_cutoff(run), steps);
  ProtocolRun sized = run;
  sized.n_max = n_max;
  const int dim = run.engine == Engine::kFullNumeric ? 3 : 2;
  const auto pops = battery_populations(run, dim);
  ChargingReport r = base_report(run, pops);
  r.n_max = n_max;
  r.truncation_tail = fock_tail_mass(p.fc_frequency(), run.kt(), n_max);

  auto step_time = [&](int n) { return run.tau ? *run.tau : selective_flip_time(p, n); };

  if (run.engine == Engine::kAnalytic) {
    const auto pn = fock_populations(sized, n_max);
    const int fd = n_max + 1;
    std::vector<double> joint(2 * static_cast<std::size_t>(fd));
    for (int a = 0; a < 2; ++a) {
      for (int n = 0; n < fd; ++n) joint[a * fd + n] = pops[a] * pn[n];
    }
    double n0 = 0.0;
    for (int n = 0; n < fd; ++n) n0 += n * pn[n];
    for (int big_n = 1; big_n <= steps; ++big_n) {
      double& g = joint[0 * fd + big_n - 1];
      double& e = joint[1 * fd + big_n];
      r.step_delta_u.push_back(p.omega_eg * (g - e));
      std::swap(g, e);
      r.tau_used += step_time(big_n);
    }
    double pe = 0.0;
    double n1 = 0.0;
    for (int n = 0; n < fd; ++n) {
      pe += joint[fd + n];
      n1 += n * (joint[n] + joint[fd + n]);
    }
    r.p_e = pe;
    r.p_g = 1.0 - pe;
    r.s_value = pe - pops[1];
    for (double inc : r.step_delta_u) r.delta_u_battery += inc;
    r.delta_u_fc = p.fc_frequency() * (n1 - n0);
    const DensityMatrix rho_b = DensityMatrix::unchecked(
        HilbertLayout::atom_only(2), ComplexMatrix(Eigen::Vector2cd(r.p_g, r.p_e).asDiagonal()));
    r.ergotropy = battery_ergotropy(rho_b, p.omega_eg);
  } else {
    const HilbertLayout layout = HilbertLayout::joint(dim, n_max);
    DensityMatrix rho = joint_thermal(sized, dim, n_max);
    const DensityMatrix rho0 = rho;
    double pe_prev = excited_population(rho);
    for (int big_n = 1; big_n <= steps; ++big_n) {
      ProtocolParams proto = run.proto;
      proto.target_n = big_n;
      const ComplexMatrix h = dim == 2 ? build_h_eff(p, proto, layout)
                                       : build_h_full_rotating(p, proto, layout);
      const double t = step_time(big_n);
      rho = propagate_unitary(h, rho, t);
      const double pe = excited_population(rho);
      r.step_delta_u.push_back(p.omega_eg * (pe - pe_prev));
      pe_prev = pe;
      r.tau_used += t;
    }
    measure_battery(r, p, partial_trace(rho, HilbertLayout::Factor::kAtom), pops);
    r.delta_u_fc = p.fc_frequency() * (mean_photon(partial_trace(rho, HilbertLayout::Factor::kFock)) -
                                       mean_photon(partial_trace(rho0, HilbertLayout::Factor::kFock)));
    r.trace_drift = std::abs(rho.trace() - 1.0);
  }
  r.work_in = r.delta_u_battery + r.delta_u_fc + r.delta_u_ancilla;
  finish(r);
  return r;
}

ChargingReport open_system_run(const ProtocolRun& run, const ReservoirSpec& res) {
  require_kind(run, ProtocolKind::kOpenSystem, "open_system_run");
  run.validate();
  res.validate();
  const ModelParams& p = run.params;
  res.check_consistent(p, run.kt());
  const int n_max = std::max(resolve_cutoff(run), run.proto.target_n);
  ProtocolRun sized = run;
  sized.n_max = n_max;
  const HilbertLayout layout = HilbertLayout::joint(3, n_max);
  const auto pops = battery_populations(run, 3);
  ChargingReport r = base_report(run, pops);
  r.n_max = n_max;
  r.truncation_tail = fock_tail_mass(p.fc_frequency(), run.kt(), n_max);

  const DensityMatrix rho0 = joint_thermal(sized, 3, n_max);
  const ComplexMatrix h = build_h_full_rotating(p, run.proto, layout);
  const auto channels = build_channels(p, res, layout);
  const SectorPropagator prop(h, channels, rho0, EnergyOperators::from_model(p, layout));

  auto excited = [&](const SectorPropagator::Point& pt) {
    double pe = 0.0;
    for (int n = 0; n <= n_max; ++n) pe += prop.population(layout.index(kE, n), pt);
    return pe;
  };

  if (run.tau) {
    r.tau_used = *run.tau;
  } else {
    // The unitary optimum window brackets the damped one as well.
    ProtocolRun closed = sized;
    closed.kind = ProtocolKind::kSingleShot;
    closed.engine = Engine::kAnalytic;
    const double t_max = run.t_max.value_or(default_t_max(closed));
    check_window(t_max, run.grid);
    const double dt = t_max / run.grid;
    const ComplexMatrix step = prop.step_matrix(dt);
    std::vector<SectorPropagator::Point> samples;
    samples.reserve(static_cast<std::size_t>(run.grid) + 1);
    samples.push_back(prop.initial());
    std::vector<double> values{excited(samples.back())};
    for (int k = 1; k <= run.grid; ++k) {
      samples.push_back({k * dt, step * samples.back().y});
      values.push_back(excited(samples.back()));
    }
    r.tau_used = refine_by_subgrid(prop, excited, samples, values);
  }

  const SectorPropagator::Point fin = prop.at(r.tau_used);
  const DensityMatrix rho = prop.density(fin);
  const EnergyLedger ledger = prop.ledger(fin);
  measure_battery(r, p, partial_trace(rho, HilbertLayout::Factor::kAtom), pops);
  r.delta_u_fc = ledger.u_fc - ledger.u_fc_initial;
  r.work_in = ledger.w_drive;
  r.heat = ledger.heat_by_channel;
  r.closure_residual = ledger.closure_residual();
  r.trace_drift = std::abs(rho.trace() - 1.0);
  finish(r);
  return r;
}

ChargingReport execute(const ProtocolRun& run, double gamma0) {
  switch (run.kind) {
    case ProtocolKind::kClassical: return classical_charge(run);
    case ProtocolKind::kSingleShot: return single_shot_quantum(run);
    case ProtocolKind::kSequential: return sequential_charge(run);
    case ProtocolKind::kOpenSystem:
      return open_system_run(run, ReservoirSpec::thermal(run.params, run.kt(), gamma0));
  }
  throw UsageError("unknown protocol kind");
}

}  // namespace qbat
