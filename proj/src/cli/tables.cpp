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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "qbat/cli.hpp"
#include "qbat/errors.hpp"
#include "qbat/units.hpp"

namespace qbat::cli {

namespace {

// Figure runs trade the default tail bound for a fixed small cutoff.
constexpr int kFigureNmax = 10;
constexpr double kFigureEps = 1e-4;

std::string format_double(double v, int precision) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.{}e}", v, precision - 1);
}

Cell optional_cell(const std::optional<double>& v) {
  if (v) return *v;
  return std::monostate{};
}

struct Outcome {
  std::optional<ChargingReport> report;
  std::string error;
  bool numerical = false;
};

Outcome guarded(const std::function<ChargingReport()>& f) {
  Outcome o;
  try {
    o.report = f();
  } catch (const UsageError& e) {
    o.error = fmt::format("invalid: {}", e.what());
  } catch (const CutoffError& e) {
    o.error = fmt::format("invalid: {}", e.what());
  } catch (const std::exception& e) {
    o.error = fmt::format("numerical failure: {}", e.what());
    o.numerical = true;
  }
  return o;
}

double tbar_of(const ProtocolRun& run) { return run.kt() / run.params.omega_m; }

Config figure_config(const Config& user, double xi) {
  Config c = user;
  const ProtocolParams proto = c.run.proto;
  c.run.params = ModelParams::figure_defaults(xi);
  c.run.proto = proto;
  return c;
}

}  // namespace

void write_csv(std::ostream& os, const Table& t) {
  for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << t.header[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
              os << format_double(v, t.precision);
            } else if constexpr (std::is_same_v<T, long>) {
              os << v;
            } else if constexpr (std::is_same_v<T, std::string>) {
              // Quote fields that would break the row.
              if (v.find_first_of(",\"\n") != std::string::npos) {
                std::string q = v;
                std::size_t pos = 0;
                while ((pos = q.find('"', pos)) != std::string::npos) {
                  q.insert(pos, 1, '"');
                  pos += 2;
                }
                std::replace(q.begin(), q.end(), '\n', ' ');
                os << '"' << q << '"';
              } else {
                os << v;
              }
            }
          },
          row[i]);
    }
    os << '\n';
  }
}

void write_csv_file(const std::string& path, const Table& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot open '{}' for writing", path));
  write_csv(out, t);
  if (!out) throw std::runtime_error(fmt::format("failed writing '{}'", path));
}

void parallel_for(int n, int jobs, const std::function<void(int)>& f) {
  if (jobs <= 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  jobs = std::min(jobs, std::max(n, 1));
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
}

std::vector<std::string> report_header() {
  std::vector<std::string> h = {"protocol", "engine", "xi", "tbar", "gamma0",
                                "delta_u_battery_j", "delta_u_classical_j", "delta_u_fc_j",
                                "delta_u_ancilla_j", "ergotropy_j", "ergotropy_classical_j",
                                "work_in_j"};
  for (ChannelLabel l : kAllChannels) h.push_back(fmt::format("q_{}_j", to_string(l)));
  for (const char* s : {"k_q", "eta", "eta_corrected", "tau_used", "s_value", "p_g", "p_e", "p_m",
                        "n_max", "trace_drift", "truncation_tail", "closure_residual_j", "status"}) {
    h.emplace_back(s);
  }
  return h;
}

std::vector<Cell> report_row(const Config& cfg, const ChargingReport& r) {
  using units::to_joules;
  std::vector<Cell> row = {r.protocol,
                           r.engine,
                           cfg.run.params.xi(),
                           tbar_of(cfg.run),
                           cfg.gamma0,
                           to_joules(r.delta_u_battery),
                           to_joules(r.delta_u_classical),
                           to_joules(r.delta_u_fc),
                           to_joules(r.delta_u_ancilla),
                           to_joules(r.ergotropy),
                           to_joules(r.ergotropy_classical),
                           to_joules(r.work_in)};
  for (ChannelLabel l : kAllChannels) {
    auto it = r.heat.find(to_string(l));
    if (it == r.heat.end()) {
      row.emplace_back(std::monostate{});
    } else {
      row.emplace_back(to_joules(it->second));
    }
  }
  row.emplace_back(r.k_q);
  row.emplace_back(r.eta);
  row.push_back(optional_cell(r.eta_corrected));
  row.emplace_back(r.tau_used);
  row.emplace_back(r.s_value);
  row.emplace_back(r.p_g);
  row.emplace_back(r.p_e);
  row.emplace_back(r.p_m);
  row.emplace_back(static_cast<long>(r.n_max));
  row.emplace_back(r.trace_drift);
  row.emplace_back(r.truncation_tail);
  row.emplace_back(to_joules(r.closure_residual));
  row.emplace_back(r.status);
  return row;
}

std::string format_report(const Config& cfg, const ChargingReport& r) {
  const double weg = cfg.run.params.omega_eg;
  std::ostringstream os;
  auto energy = [&](const char* name, double v) {
    os << fmt::format("  {:<22} {:>20.12e} J  ({:.9g} hbar w_eg)\n", name, units::to_joules(v),
                      v / weg);
  };
  os << fmt::format("protocol {}  engine {}\n", r.protocol, r.engine);
  os << fmt::format("  xi = {:.9g}  T_bar = {:.9g}  r = {:.9g}  N = {}  n_max = {}\n",
                    cfg.run.params.xi(), tbar_of(cfg.run), cfg.run.params.r(),
                    cfg.run.proto.target_n, r.n_max);
  if (r.protocol == "open_system") os << fmt::format("  gamma0 = {:.9g} 1/s\n", cfg.gamma0);
  energy("delta_u_battery", r.delta_u_battery);
  energy("delta_u_classical", r.delta_u_classical);
  energy("delta_u_fc", r.delta_u_fc);
  if (r.delta_u_ancilla != 0.0) energy("delta_u_ancilla", r.delta_u_ancilla);
  energy("ergotropy", r.ergotropy);
  energy("ergotropy_classical", r.ergotropy_classical);
  energy("work_in", r.work_in);
  for (const auto& [label, q] : r.heat) energy(fmt::format("heat_{}", label).c_str(), q);
  os << fmt::format("  {:<22} {:>20.12e}\n", "k_q", r.k_q);
  os << fmt::format("  {:<22} {:>20.12e}\n", "eta", r.eta);
  if (r.eta_corrected) os << fmt::format("  {:<22} {:>20.12e}\n", "eta_corrected", *r.eta_corrected);
  if (r.protocol != "open_system" && std::isfinite(r.k_q)) {
    os << fmt::format("  {:<22} {:>20.12e}\n", "eta_closed_form",
                      efficiency_closed_form(cfg.run.params.xi(), r.k_q));
  }
  os << fmt::format("  {:<22} {:>20.12e} s\n", "tau_used", r.tau_used);
  os << fmt::format("  {:<22} {:>20.12e}\n", "s_value", r.s_value);
  os << fmt::format("  populations g/e/m      {:.12g} {:.12g} {:.12g}\n", r.p_g, r.p_e, r.p_m);
  if (!r.step_delta_u.empty()) {
    os << "  step increments (hbar w_eg):";
    for (double s : r.step_delta_u) os << fmt::format(" {:.9g}", s / weg);
    os << '\n';
  }
  os << fmt::format("  trace drift {:.3e}  truncation tail {:.3e}  closure residual {:.3e} J\n",
                    r.trace_drift, r.truncation_tail, units::to_joules(r.closure_residual));
  os << "  status: " << (r.status.empty() ? "ok" : r.status) << '\n';
  return os.str();
}

ChargingReport execute_config(const Config& cfg) { return execute(cfg.run, cfg.gamma0); }

Table sweep_table(const Config& cfg, int jobs) {
  if (!cfg.sweep) throw UsageError("config has no 'sweep' section");
  const auto& values = cfg.sweep->values;
  const int n = static_cast<int>(values.size());
  std::vector<Config> points;
  for (double v : values) points.push_back(with_axis(cfg, cfg.sweep->axis, v));
  std::vector<Outcome> out(values.size());
  parallel_for(n, jobs, [&](int i) { out[i] = guarded([&] { return execute_config(points[i]); }); });

  Table t;
  t.precision = cfg.precision;
  t.header = report_header();
  t.header.insert(t.header.begin(), cfg.sweep->axis);
  for (int i = 0; i < n; ++i) {
    std::vector<Cell> row;
    if (out[i].report) {
      row = report_row(points[i], *out[i].report);
    } else {
      row.assign(t.header.size() - 1, std::monostate{});
      row.front() = to_string(cfg.run.kind);
      row[1] = to_string(cfg.run.engine);
      row.back() = out[i].error;
      t.numerical_failure = t.numerical_failure || out[i].numerical;
    }
    row.insert(row.begin(), values[i]);
    t.rows.push_back(std::move(row));
  }
  // values are strictly increasing, so index order is axis order
  return t;
}

std::vector<double> default_xi_grid() {
  std::vector<double> xi;
  const int n = 120;
  for (int i = 0; i < n; ++i) xi.push_back(0.5 * std::pow(400.0, static_cast<double>(i) / (n - 1)));
  return xi;
}

std::vector<double> default_tbar_grid() {
  std::vector<double> t;
  for (int i = 1; i <= 20; ++i) t.push_back(0.05 * i);
  return t;
}

std::vector<double> default_gamma0_ladder() {
  const double kappa = ModelParams::figure_defaults(99.0).effective_coupling();
  return {0.0, 1e-3 * kappa, 1e-2 * kappa, 1e-1 * kappa, kappa};
}

Table fig2_table(const Config& cfg, int jobs) {
  const std::vector<double> xis = cfg.xi_grid.value_or(default_xi_grid());
  const std::vector<double> tbars = cfg.tbar_grid.value_or(std::vector<double>{0.1, 0.4});
  struct Point {
    double tbar, xi;
    Config c;
  };
  std::vector<Point> pts;
  for (double tb : tbars) {
    for (double xi : xis) {
      Config c = figure_config(cfg, xi);
      c.run.kind = ProtocolKind::kSingleShot;
      c.run.engine = Engine::kAnalytic;
      c.run.thermal = ThermalSpec::tbar(tb);
      c.gamma0 = 0.0;
      pts.push_back({tb, xi, std::move(c)});
    }
  }
  std::vector<Outcome> out(pts.size());
  parallel_for(static_cast<int>(pts.size()), jobs,
               [&](int i) { out[i] = guarded([&] { return single_shot_quantum(pts[i].c.run); }); });
  Table t;
  t.precision = cfg.precision;
  t.header = {"xi", "tbar", "k_q", "eta", "tau_star", "s_star", "status"};
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Point& p = pts[i];
    if (!out[i].report) {
      t.rows.push_back({p.xi, p.tbar, std::monostate{}, std::monostate{}, std::monostate{},
                        std::monostate{}, out[i].error});
      t.numerical_failure = t.numerical_failure || out[i].numerical;
      continue;
    }
    const ChargingReport& r = *out[i].report;
    std::string status = r.status;
    const double bound = 2.0 / (1.0 + p.xi);
    if (!(r.eta > 0.0) || r.eta > bound * (1.0 + 1e-12)) {
      status += fmt::format("{}eta {} outside (0, 2/(1+xi)]", status.empty() ? "" : "; ", r.eta);
    }
    t.rows.push_back({p.xi, p.tbar, r.k_q, r.eta, r.tau_used, r.s_value, status});
  }
  std::stable_sort(t.rows.begin(), t.rows.end(), [](const auto& a, const auto& b) {
    const double ta = std::get<double>(a[1]), tb = std::get<double>(b[1]);
    if (ta != tb) return ta < tb;
    return std::get<double>(a[0]) < std::get<double>(b[0]);
  });
  return t;
}

Table open_figure_table(const Config& cfg, int which, int jobs) {
  if (which != 3 && which != 4) throw UsageError("figure must be 3 or 4");
  const std::vector<double> tbars = cfg.tbar_grid.value_or(default_tbar_grid());
  const std::vector<double> ladder = cfg.gamma0_ladder.value_or(default_gamma0_ladder());
  const double xi = 99.0;
  struct Point {
    double tbar, gamma0;
    Config c;
  };
  auto base = [&](double tb) {
    Config c = figure_config(cfg, xi);
    c.run.thermal = ThermalSpec::tbar(tb);
    c.run.n_max = cfg.explicit_keys.count("n_max") ? cfg.run.n_max : std::optional<int>(kFigureNmax);
    c.run.tail_eps = cfg.explicit_keys.count("eps_trunc") ? cfg.run.tail_eps : kFigureEps;
    c.run.tau.reset();
    return c;
  };
  std::vector<Point> pts;
  for (double tb : tbars) {
    Config ref = base(tb);
    ref.run.kind = ProtocolKind::kSingleShot;
    ref.run.engine = Engine::kEffNumeric;
    ref.gamma0 = 0.0;
    pts.push_back({tb, 0.0, std::move(ref)});
    for (double g : ladder) {
      Config c = base(tb);
      c.run.kind = ProtocolKind::kOpenSystem;
      c.run.engine = Engine::kLindblad;
      c.gamma0 = g;
      pts.push_back({tb, g, std::move(c)});
    }
  }
  std::vector<Outcome> out(pts.size());
  parallel_for(static_cast<int>(pts.size()), jobs,
               [&](int i) { out[i] = guarded([&] { return execute_config(pts[i].c); }); });
  Table t;
  t.precision = cfg.precision;
  if (which == 3) {
    t.header = {"tbar", "gamma0", "k_q", "tau_star", "engine", "status"};
  } else {
    t.header = {"tbar", "gamma0", "eta", "eta_corrected", "tau_star", "engine", "status"};
  }
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Point& p = pts[i];
    const std::string engine = to_string(p.c.run.engine);
    std::vector<Cell> row = {p.tbar, p.gamma0};
    if (!out[i].report) {
      t.numerical_failure = t.numerical_failure || out[i].numerical;
      row.emplace_back(std::monostate{});
      if (which == 4) row.emplace_back(std::monostate{});
      row.emplace_back(std::monostate{});
      row.emplace_back(engine);
      row.emplace_back(out[i].error);
    } else {
      const ChargingReport& r = *out[i].report;
      std::string status = r.status;
      if (p.c.run.kind == ProtocolKind::kOpenSystem &&
          std::abs(r.closure_residual) > 1e-6 * p.c.run.params.omega_m) {
        status += fmt::format("{}first-law residual {}", status.empty() ? "" : "; ",
                              r.closure_residual);
      }
      if (which == 3) {
        row.emplace_back(r.k_q);
      } else {
        row.emplace_back(r.eta);
        row.push_back(optional_cell(r.eta_corrected));
      }
      row.emplace_back(r.tau_used);
      row.emplace_back(engine);
      row.emplace_back(status);
    }
    t.rows.push_back(std::move(row));
  }
  const std::size_t engine_col = which == 3 ? 4 : 5;
  std::stable_sort(t.rows.begin(), t.rows.end(), [&](const auto& a, const auto& b) {
    for (std::size_t c : {std::size_t{0}, std::size_t{1}}) {
      const double x = std::get<double>(a[c]), y = std::get<double>(b[c]);
      if (x != y) return x < y;
    }
    return std::get<std::string>(a[engine_col]) < std::get<std::string>(b[engine_col]);
  });
  return t;
}

}  // namespace qbat::cli
