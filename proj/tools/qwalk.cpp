// Copyright 2026 The qwalk Authors
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

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qwalk/experiment.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> t;
  std::optional<int> traj;
  std::optional<double> tol;
  std::optional<std::string> grid;
};

void add_common_flags(CLI::App* cmd, Overrides& o, bool config_required) {
  auto* c = cmd->add_option("--config", o.config, "experiment config (JSON)");
  if (config_required) c->required();
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--seed", o.seed, "Monte Carlo seed");
  cmd->add_option("--t", o.t, "number of steps")->check(CLI::NonNegativeNumber);
  cmd->add_option("--traj", o.traj, "Monte Carlo trajectories")->check(CLI::PositiveNumber);
  cmd->add_option("--tol", o.tol, "series tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--grid", o.grid, "parameter grid, a:b:n or x,y,z");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Asymptotics and simulation of quantum walks with random coins"};
  app.require_subcommand(1);
  Overrides o;
  int figure = 0;
  for (const char* name : {"certify", "drift", "diffusion", "simulate", "montecarlo"}) {
    add_common_flags(app.add_subcommand(name, std::string(name) + " task"), o, true);
  }
  auto* fig = app.add_subcommand("figure", "regenerate figure data");
  fig->add_option("number", figure, "figure number")->required()->check(CLI::Range(1, 4));
  add_common_flags(fig, o, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : qwalk::kExitConfig;
  }

  try {
    qwalk::ExperimentConfig cfg;
    if (!o.config.empty()) cfg = qwalk::load_config(o.config);
    const std::string sub = app.get_subcommands().front()->get_name();
    cfg.task = sub == "figure" ? "figure" + std::to_string(figure) : sub;
    if (o.out) cfg.out_dir = *o.out;
    if (o.seed) cfg.seed = *o.seed;
    if (o.t) cfg.t = *o.t;
    if (o.traj) cfg.n_traj = *o.traj;
    if (o.tol) cfg.tol = *o.tol;
    if (o.grid) cfg.grid = qwalk::parse_grid(*o.grid);
    return qwalk::run(cfg, std::cout, std::cerr);
  } catch (const qwalk::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return qwalk::kExitConfig;
  }
}
