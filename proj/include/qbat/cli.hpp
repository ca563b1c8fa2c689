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

// Configuration, sweeps, figure tables and CSV output for the command line
// tool. Frequencies are configured in Hz and converted to rad/s; rates
// (gamma0) are in 1/s; times in s.

#include <functional>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "qbat/protocols.hpp"

namespace qbat::cli {

enum ExitCode { kOk = 0, kValidationError = 1, kNumericalError = 2 };

struct SweepSpec {
  std::string axis;  // xi, tbar, gamma0, tau
  std::vector<double> values;
};

struct Config {
  ProtocolRun run;
  double gamma0 = 0.0;  // 1/s, open_system only
  std::optional<SweepSpec> sweep;
  std::string output_path;
  int precision = 12;
  std::optional<std::vector<double>> gamma0_ladder;  // 1/s
  std::optional<std::vector<double>> tbar_grid;
  std::optional<std::vector<double>> xi_grid;
  std::set<std::string> explicit_keys;
};

/// Every recognised key with its default value.
nlohmann::json default_config();

/// Validates a flat JSON config; throws UsageError naming the field.
Config parse_config(const nlohmann::json& j);
Config load_config(const std::string& path);

/// Effective configuration (defaults merged with the given keys).
nlohmann::json effective_config(const nlohmann::json& user);

/// Copy of the base run with one axis parameter replaced.
Config with_axis(const Config& base, const std::string& axis, double value);

using Cell = std::variant<double, long, std::string, std::monostate>;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;
  int precision = 12;
  bool numerical_failure = false;
};

/// Header row, comma separated, LF; doubles in scientific notation with
/// `precision` significant digits; monostate cells are empty.
void write_csv(std::ostream& os, const Table& t);
void write_csv_file(const std::string& path, const Table& t);

/// Runs f(0..n-1) on `jobs` workers (0: hardware concurrency). Results are
/// returned in index order.
void parallel_for(int n, int jobs, const std::function<void(int)>& f);

/// Report columns shared by `run` and `sweep`.
std::vector<std::string> report_header();
std::vector<Cell> report_row(const Config& cfg, const ChargingReport& r);

/// Human-readable report.
std::string format_report(const Config& cfg, const ChargingReport& r);

ChargingReport execute_config(const Config& cfg);

Table sweep_table(const Config& cfg, int jobs);

/// xi grid of the gain/efficiency figure (at least 100 points over [0.5, 200]).
std::vector<double> default_xi_grid();
/// T_bar grid of the open-system figures.
std::vector<double> default_tbar_grid();
/// {0, 1e-3, 1e-2, 1e-1, 1} g_q W_L / Delta for the figure parameters.
std::vector<double> default_gamma0_ladder();

Table fig2_table(const Config& cfg, int jobs);
/// which = 3 (gain) or 4 (efficiency).
Table open_figure_table(const Config& cfg, int which, int jobs);

}  // namespace qbat::cli
