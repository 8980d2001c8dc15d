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

#ifndef QWALK_EXPERIMENT_HPP
#define QWALK_EXPERIMENT_HPP

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qwalk/coin_ensemble.hpp"
#include "qwalk/walk_channel.hpp"

namespace qwalk {

/// Invalid configuration. line is 1-based, or 0 when no position is known.
class ConfigError : public InvalidArgument {
 public:
  ConfigError(const std::string& source, int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

struct WalkSpec {
  std::vector<Offset> shifts;
  int lattice_dim = 1;
  EnsembleSpec ensemble = BrokenLinks{0.5};
};

struct ExperimentConfig {
  std::string task;
  /// Composition order: walks[0] acts first on observables.
  std::vector<WalkSpec> walks;
  int t = 100;
  int n_traj = 10000;
  std::uint64_t seed = 1;
  double tol = 1e-10;
  double coherence_tol = 1e-12;
  /// Main parameter grid of figure tasks.
  std::optional<std::vector<double>> grid;
  /// Secondary grid (sigma values of figure 3).
  std::optional<std::vector<double>> sigma_grid;
  /// "mixed" or "basis:<i>".
  std::string initial_state = "mixed";
  std::size_t max_blocks = 4'000'000;
  std::string out_dir = ".";
};

inline const std::vector<std::string>& known_tasks() {
  static const std::vector<std::string> tasks{"certify",  "drift",   "diffusion", "simulate", "montecarlo",
                                              "figure1", "figure2", "figure3",   "figure4"};
  return tasks;
}

/// Parses the JSON config text; source names the file in error messages.
ExperimentConfig parse_config(const std::string& text, const std::string& source);
ExperimentConfig load_config(const std::string& path);

/// "a:b:n" (n evenly spaced points including both ends) or "x,y,z".
std::vector<double> parse_grid(const std::string& spec);

GeneralizedWalk build_walk(const ExperimentConfig& cfg);

/// Process exit codes.
enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitRefused = 3, kExitResource = 4 };

/// Runs cfg.task, writing result files into cfg.out_dir and a summary to out.
int run(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);

/// printf "%.12g".
std::string format_number(double x);

}  // namespace qwalk

#endif  // QWALK_EXPERIMENT_HPP
