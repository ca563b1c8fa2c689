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

#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "qbat/cli.hpp"
#include "qbat/errors.hpp"
#include "qbat/units.hpp"

namespace qbat::cli {

using nlohmann::json;

namespace {

const std::set<std::string> kAxes = {"xi", "tbar", "gamma0", "tau"};

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw UsageError(fmt::format("config field '{}': {}", field, what));
}

double number(const json& j, const std::string& key) {
  const json& v = j.at(key);
  if (!v.is_number()) fail(key, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(key, "must be finite");
  return x;
}

double positive(const json& j, const std::string& key) {
  const double x = number(j, key);
  if (!(x > 0.0)) fail(key, fmt::format("must be > 0 (got {})", x));
  return x;
}

double non_negative(const json& j, const std::string& key) {
  const double x = number(j, key);
  if (!(x >= 0.0)) fail(key, fmt::format("must be >= 0 (got {})", x));
  return x;
}

int integer(const json& j, const std::string& key, int min_value) {
  const json& v = j.at(key);
  if (!v.is_number_integer()) fail(key, "expected an integer");
  const long x = v.get<long>();
  if (x < min_value) fail(key, fmt::format("must be >= {} (got {})", min_value, x));
  return static_cast<int>(x);
}

std::string text(const json& j, const std::string& key) {
  const json& v = j.at(key);
  if (!v.is_string()) fail(key, "expected a string");
  return v.get<std::string>();
}

void require_monotone(const std::vector<double>& v, const std::string& key) {
  if (v.empty()) fail(key, "must not be empty");
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) fail(key, "values must be strictly increasing");
  }
}

std::vector<double> number_list(const json& j, const std::string& key) {
  const json& v = j.at(key);
  if (!v.is_array()) fail(key, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) fail(key, "expected an array of numbers");
    out.push_back(x.get<double>());
    if (!std::isfinite(out.back())) fail(key, "values must be finite");
  }
  require_monotone(out, key);
  return out;
}

// Explicit list or {start, stop, count, spacing}.
std::vector<double> axis_values(const json& s) {
  const std::string key = "sweep.values";
  if (!s.contains("values")) fail(key, "missing");
  const json& v = s.at("values");
  if (v.is_array()) return number_list(s, "values");
  if (!v.is_object()) fail(key, "expected a list or {start, stop, count, spacing}");
  for (const auto& [k, _] : v.items()) {
    if (k != "start" && k != "stop" && k != "count" && k != "spacing") fail(key + "." + k, "unknown key");
  }
  if (!v.contains("start") || !v.contains("stop") || !v.contains("count")) {
    fail(key, "range needs start, stop and count");
  }
  const double a = number(v, "start");
  const double b = number(v, "stop");
  const int n = integer(v, "count", 1);
  const std::string spacing = v.contains("spacing") ? text(v, "spacing") : "linear";
  std::vector<double> out;
  if (spacing == "linear") {
    for (int i = 0; i < n; ++i) out.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
  } else if (spacing == "geometric") {
    if (!(a > 0.0 && b > 0.0)) fail(key, "geometric range needs positive start and stop");
    for (int i = 0; i < n; ++i) {
      out.push_back(n == 1 ? a : a * std::pow(b / a, static_cast<double>(i) / (n - 1)));
    }
  } else {
    fail(key + ".spacing", "must be 'linear' or 'geometric'");
  }
  require_monotone(out, key);
  return out;
}

}  // namespace

json default_config() {
  return json{
      {"protocol", "quantum_single_shot"},
      {"engine", "analytic"},
      {"delta_hz", 1e6},
      {"omega_m_hz", 1e12},
      {"rabi_drive_hz", 1e6 / 20.0},
      {"g_q_hz", 1e6 / 600.0},
      {"rabi_fc_hz", nullptr},
      {"xi", 99.0},
      {"omega_eg_hz", nullptr},
      {"target_n", 1},
      {"stark_compensation", true},
      {"tbar", 0.1},
      {"temperature_k", nullptr},
      {"tau", nullptr},
      {"steps", nullptr},
      {"n_max", nullptr},
      {"eps_trunc", kDefaultTailEps},
      {"t_max", nullptr},
      {"grid", 400},
      {"gamma0", 0.0},
      {"gamma0_ladder", nullptr},
      {"tbar_grid", nullptr},
      {"xi_grid", nullptr},
      {"sweep", nullptr},
      {"output", json{{"path", ""}, {"precision", 12}}},
  };
}

json effective_config(const json& user) {
  if (!user.is_object()) throw UsageError("config must be a JSON object");
  json merged = default_config();
  for (const auto& [k, v] : user.items()) {
    if (!merged.contains(k)) fail(k, "unknown key");
    if (k == "output" && v.is_object()) {
      for (const auto& [ok, ov] : v.items()) {
        if (!merged["output"].contains(ok)) fail("output." + ok, "unknown key");
        merged["output"][ok] = ov;
      }
    } else {
      merged[k] = v;
    }
  }
  return merged;
}

Config parse_config(const json& user) {
  const json j = effective_config(user);
  Config c;
  for (const auto& [k, v] : user.items()) {
    if (!v.is_null()) c.explicit_keys.insert(k);
  }
  ProtocolRun& run = c.run;
  try {
    run.kind = parse_protocol(text(j, "protocol"));
  } catch (const UsageError& e) {
    fail("protocol", e.what());
  }
  try {
    run.engine = parse_engine(text(j, "engine"));
  } catch (const UsageError& e) {
    fail("engine", e.what());
  }

  const double delta = units::hz(positive(j, "delta_hz"));
  const double omega_m = units::hz(positive(j, "omega_m_hz"));
  const double rabi_drive = units::hz(positive(j, "rabi_drive_hz"));
  const double g_q = units::hz(positive(j, "g_q_hz"));
  const bool has_eg = !j.at("omega_eg_hz").is_null();
  if (has_eg && c.explicit_keys.count("xi")) fail("xi", "give either xi or omega_eg_hz, not both");
  double xi = 0.0;
  if (has_eg) {
    const double omega_eg = units::hz(positive(j, "omega_eg_hz"));
    const double omega_l = omega_m - delta;
    if (!(omega_eg < omega_l)) fail("omega_eg_hz", "must lie below the drive frequency");
    xi = (omega_l - omega_eg) / omega_eg;
  } else {
    xi = positive(j, "xi");
  }
  if (!(omega_m > delta)) fail("delta_hz", "must be smaller than omega_m_hz");
  run.params = ModelParams::from_xi(omega_m, delta, rabi_drive, g_q, xi);
  if (!j.at("rabi_fc_hz").is_null()) run.params.rabi_fc = units::hz(positive(j, "rabi_fc_hz"));

  run.proto.target_n = integer(j, "target_n", 1);
  if (!j.at("stark_compensation").is_boolean()) fail("stark_compensation", "expected a boolean");
  run.proto.stark_compensation = j.at("stark_compensation").get<bool>();

  const bool has_kelvin = !j.at("temperature_k").is_null();
  if (has_kelvin && c.explicit_keys.count("tbar")) {
    fail("tbar", "give either tbar or temperature_k, not both");
  }
  run.thermal = has_kelvin ? ThermalSpec::kelvin(non_negative(j, "temperature_k"))
                           : ThermalSpec::tbar(non_negative(j, "tbar"));

  if (!j.at("tau").is_null()) run.tau = positive(j, "tau");
  if (!j.at("steps").is_null()) run.steps = integer(j, "steps", 1);
  if (!j.at("n_max").is_null()) run.n_max = integer(j, "n_max", 1);
  run.tail_eps = positive(j, "eps_trunc");
  if (!(run.tail_eps < 1.0)) fail("eps_trunc", "must be < 1");
  if (!j.at("t_max").is_null()) run.t_max = positive(j, "t_max");
  run.grid = integer(j, "grid", 100);
  c.gamma0 = non_negative(j, "gamma0");
  if (c.gamma0 > 0.0 && run.kind != ProtocolKind::kOpenSystem) {
    fail("gamma0", "only meaningful for protocol open_system");
  }

  if (!j.at("gamma0_ladder").is_null()) {
    c.gamma0_ladder = number_list(j, "gamma0_ladder");
    if (c.gamma0_ladder->front() < 0.0) fail("gamma0_ladder", "rates must be >= 0");
  }
  if (!j.at("tbar_grid").is_null()) {
    c.tbar_grid = number_list(j, "tbar_grid");
    if (c.tbar_grid->front() < 0.0) fail("tbar_grid", "values must be >= 0");
  }
  if (!j.at("xi_grid").is_null()) {
    c.xi_grid = number_list(j, "xi_grid");
    if (!(c.xi_grid->front() > 0.0)) fail("xi_grid", "values must be > 0");
  }

  if (!j.at("sweep").is_null()) {
    const json& s = j.at("sweep");
    if (!s.is_object()) fail("sweep", "expected an object {axis, values}");
    for (const auto& [k, _] : s.items()) {
      if (k != "axis" && k != "values") fail("sweep." + k, "unknown key");
    }
    if (!s.contains("axis")) fail("sweep.axis", "missing");
    SweepSpec sw;
    sw.axis = text(s, "axis");
    if (!kAxes.count(sw.axis)) fail("sweep.axis", "must be one of xi, tbar, gamma0, tau");
    if (c.explicit_keys.count(sw.axis)) {
      fail(sw.axis, "also given as the sweep axis; remove it from the base config");
    }
    if (sw.axis == "xi" && c.explicit_keys.count("omega_eg_hz")) {
      fail("omega_eg_hz", "cannot be combined with a sweep over xi");
    }
    if (sw.axis == "tbar" && has_kelvin) fail("temperature_k", "cannot be combined with a sweep over tbar");
    sw.values = axis_values(s);
    c.sweep = std::move(sw);
  }

  const json& out = j.at("output");
  if (!out.is_object()) fail("output", "expected an object {path, precision}");
  c.output_path = text(out, "path");
  c.precision = integer(out, "precision", 1);
  if (c.precision > 17) fail("output.precision", "must be <= 17");

  try {
    run.validate();
  } catch (const UsageError& e) {
    throw UsageError(fmt::format("config: {}", e.what()));
  }
  if (c.sweep) {
    // Validate every point up front so a sweep never starts on bad input.
    for (double v : c.sweep->values) with_axis(c, c.sweep->axis, v).run.validate();
  }
  return c;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError(fmt::format("cannot open config file '{}'", path));
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError(fmt::format("config '{}' is not valid JSON: {}", path, e.what()));
  }
  return parse_config(j);
}

Config with_axis(const Config& base, const std::string& axis, double value) {
  Config c = base;
  if (axis == "xi") {
    if (!(value > 0.0)) fail("sweep.values", "xi must be > 0");
    const ModelParams& p = base.run.params;
    const double rabi_fc = p.rabi_fc;
    c.run.params = ModelParams::from_xi(p.omega_m, p.delta, p.rabi_drive, p.g_q, value);
    c.run.params.rabi_fc = rabi_fc;
  } else if (axis == "tbar") {
    if (!(value >= 0.0)) fail("sweep.values", "tbar must be >= 0");
    c.run.thermal = ThermalSpec::tbar(value);
  } else if (axis == "gamma0") {
    if (!(value >= 0.0)) fail("sweep.values", "gamma0 must be >= 0");
    if (base.run.kind != ProtocolKind::kOpenSystem) fail("sweep.axis", "gamma0 needs protocol open_system");
    c.gamma0 = value;
  } else if (axis == "tau") {
    if (!(value > 0.0)) fail("sweep.values", "tau must be > 0");
    c.run.tau = value;
  } else {
    fail("sweep.axis", fmt::format("unknown axis '{}'", axis));
  }
  return c;
}

}  // namespace qbat::cli
