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

// qbattery: charge a Raman-driven two-level battery and reproduce the gain
// and efficiency figures.
//
//   qbattery run --config run.json [--out row.csv]
//   qbattery sweep --config sweep.json --out sweep.csv [--jobs N]
//   qbattery fig2 --out fig2.csv
//   qbattery fig3 --out fig3.csv
//   qbattery fig4 --out fig4.csv
//   qbattery print-config [--config run.json]

#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "qbat/cli.hpp"
#include "qbat/errors.hpp"

namespace {

using namespace qbat::cli;

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw qbat::UsageError(fmt::format("cannot open config file '{}'", path));
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw qbat::UsageError(fmt::format("config '{}' is not valid JSON: {}", path, e.what()));
  }
}

Config config_or_default(const std::string& path) {
  return path.empty() ? parse_config(nlohmann::json::object()) : load_config(path);
}

std::string output_path(const std::string& flag, const Config& cfg, const char* fallback) {
  if (!flag.empty()) return flag;
  if (!cfg.output_path.empty()) return cfg.output_path;
  return fallback;
}

int emit(const Table& t, const std::string& path) {
  write_csv_file(path, t);
  std::cerr << fmt::format("wrote {} rows to {}\n", t.rows.size(), path);
  return t.numerical_failure ? kNumericalError : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Raman-driven quantum battery charging simulator"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_path;
  int jobs = 0;
  long seed = 0;
  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", config_path, "JSON configuration file");
    if (needs_config) opt->required();
    opt->check(CLI::ExistingFile);
    sub->add_option("--out", out_path, "CSV output path");
    sub->add_option("--jobs", jobs, "worker threads (0: hardware concurrency)")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--seed", seed, "reserved; every path is deterministic");
  };
  auto* run = app.add_subcommand("run", "execute one protocol run");
  add_common(run, true);
  auto* sweep = app.add_subcommand("sweep", "sweep one axis and write a CSV");
  add_common(sweep, true);
  auto* fig2 = app.add_subcommand("fig2", "gain and efficiency versus xi");
  add_common(fig2, false);
  auto* fig3 = app.add_subcommand("fig3", "open-system gain versus T_bar");
  add_common(fig3, false);
  auto* fig4 = app.add_subcommand("fig4", "open-system efficiency versus T_bar");
  add_common(fig4, false);
  auto* print = app.add_subcommand("print-config", "print the effective configuration");
  print->add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidationError;
  }

  try {
    if (print->parsed()) {
      const nlohmann::json user = config_path.empty() ? nlohmann::json::object() : read_json(config_path);
      parse_config(user);
      std::cout << effective_config(user).dump(2) << '\n';
      return kOk;
    }
    if (run->parsed()) {
      const Config cfg = load_config(config_path);
      const qbat::ChargingReport r = execute_config(cfg);
      std::cout << format_report(cfg, r);
      const std::string path = output_path(out_path, cfg, "");
      if (!path.empty()) {
        Table t;
        t.precision = cfg.precision;
        t.header = report_header();
        t.rows.push_back(report_row(cfg, r));
        write_csv_file(path, t);
      }
      return kOk;
    }
    if (sweep->parsed()) {
      const Config cfg = load_config(config_path);
      return emit(sweep_table(cfg, jobs), output_path(out_path, cfg, "sweep.csv"));
    }
    const Config cfg = config_or_default(config_path);
    if (fig2->parsed()) return emit(fig2_table(cfg, jobs), output_path(out_path, cfg, "fig2.csv"));
    if (fig3->parsed()) {
      return emit(open_figure_table(cfg, 3, jobs), output_path(out_path, cfg, "fig3.csv"));
    }
    if (fig4->parsed()) {
      return emit(open_figure_table(cfg, 4, jobs), output_path(out_path, cfg, "fig4.csv"));
    }
  } catch (const qbat::UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const qbat::CutoffError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  }
  return kOk;
}
