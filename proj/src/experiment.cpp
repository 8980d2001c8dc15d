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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "qwalk/asymptotics.hpp"
#include "qwalk/experiment.hpp"
#include "qwalk/oracle_sim.hpp"

namespace qwalk {

using nlohmann::json;

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x + 0.0);  // + 0.0 folds -0 into 0
  return buf;
}

namespace {

constexpr int kExact2dStepLimit = 60;
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

class Csv {
 public:
  Csv(const std::vector<std::string>& header, const std::vector<std::string>& units) {
    row_strings(header);
    out_ << "# units:";
    for (std::size_t k = 0; k < units.size(); ++k) out_ << (k ? "," : " ") << header[k] << "=" << units[k];
    out_ << "\n";
  }

  void row(const std::vector<double>& values) {
    for (std::size_t k = 0; k < values.size(); ++k) out_ << (k ? "," : "") << format_number(values[k]);
    out_ << "\n";
  }

  std::string str() const { return out_.str(); }

 private:
  void row_strings(const std::vector<std::string>& values) {
    for (std::size_t k = 0; k < values.size(); ++k) out_ << (k ? "," : "") << values[k];
    out_ << "\n";
  }
  std::ostringstream out_;
};

class Writer {
 public:
  Writer(std::string dir, std::ostream& log) : dir_(std::move(dir)), log_(log) {
    std::filesystem::create_directories(dir_);
  }

  void write(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::path(dir_) / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InvalidArgument("cannot write output file " + path.string());
    f << content;
    log_ << "wrote " << path.string() << "\n";
  }

  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

 private:
  std::string dir_;
  std::ostream& log_;
};

json matrix_json(const RealMatrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j) + 0.0);
    out.push_back(row);
  }
  return out;
}

json vector_json(const RealVector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i) + 0.0);
  return out;
}

std::string tuple_string(const RealVector& v) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_number(v(i));
  return s + ")";
}

std::string matrix_string(const RealMatrix& m) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    s += i ? ", [" : "[";
    for (Eigen::Index j = 0; j < m.cols(); ++j) s += (j ? ", " : "") + format_number(m(i, j));
    s += "]";
  }
  return s + "]";
}

json certificate_json(const ContractivityCertificate& c) {
  return {{"verdict", c.verdict},     {"power", c.power},
          {"eta", c.eta},             {"mean_coin_norm", c.mean_coin_norm},
          {"unimodular_count", c.unimodular_count}, {"twirl_gap", c.twirl_gap},
          {"mixing_sigma", c.mixing_sigma}};
}

DensityBlockState initial_density(const ExperimentConfig& cfg, int s, int d) {
  if (cfg.initial_state == "mixed") return default_initial_state(s, d);
  const int i = std::stoi(cfg.initial_state.substr(6));
  CoinMatrix rho = CoinMatrix::Zero(d, d);
  rho(i, i) = 1.0;
  return DensityBlockState::localized(s, rho);
}

MixedInitialState initial_mixture(const ExperimentConfig& cfg, int d) {
  if (cfg.initial_state == "mixed") return default_mixture(d);
  MixedInitialState out;
  PureState p;
  p.amplitudes[Offset{}] = CoinVector::Unit(d, std::stoi(cfg.initial_state.substr(6)));
  out.components.emplace_back(1.0, std::move(p));
  return out;
}

std::vector<std::string> coordinate_names(int s) {
  std::vector<std::string> out;
  for (int a = 0; a < s; ++a) out.push_back("x" + std::to_string(a + 1));
  return out;
}

SeriesOptions series_options(const ExperimentConfig& cfg) {
  SeriesOptions o;
  o.tol = cfg.tol;
  return o;
}

SimulationOptions simulation_options(const ExperimentConfig& cfg) {
  return {cfg.coherence_tol, cfg.max_blocks};
}

double variance_over_t(const WalkChannel& w, int t, const ExperimentConfig& cfg) {
  const auto dists = simulate(GeneralizedWalk(w), default_initial_state(w.lattice_dim(), w.coin_dim()), t,
                              simulation_options(cfg));
  return moments(dists.back()).covariance(0, 0) / t;
}

// Task implementations.

int task_certify(const ExperimentConfig& cfg, Writer& out, std::ostream& log) {
  const GeneralizedWalk w = build_walk(cfg);
  const ContractivityCertificate c = certify_contractive(w);
  log << "verdict: " << c.verdict << "\n"
      << "power: " << c.power << "\n"
      << "eta: " << format_number(c.eta) << "\n"
      << "mean_coin_norm: " << format_number(c.mean_coin_norm) << "\n";
  out.write_json("certify.json", certificate_json(c));
  return kExitOk;
}

int task_drift(const ExperimentConfig& cfg, Writer& out, std::ostream& log) {
  const GeneralizedWalk w = build_walk(cfg);
  const DriftResult r = ballistic_drift(w);
  log << "velocity: " << tuple_string(r.velocity) << "\n";
  json idx = json::array();
  for (const auto& x : r.factor_indices) {
    json v = json::array();
    for (int a = 0; a < w.lattice_dim(); ++a) v.push_back(x[a]);
    idx.push_back(v);
  }
  out.write_json("drift.json", {{"velocity", vector_json(r.velocity)},
                                {"factor_indices", idx},
                                {"units", {{"velocity", "sites/step"}, {"factor_indices", "sites"}}}});
  return kExitOk;
}

int task_diffusion(const ExperimentConfig& cfg, Writer& out, std::ostream& log) {
  const GeneralizedWalk w = build_walk(cfg);
  const DiffusionResult r = diffusion_matrix(w, series_options(cfg));
  log << "velocity: " << tuple_string(r.velocity) << "\n"
      << "D: " << matrix_string(r.D) << "\n"
      << "verdict: " << r.certificate.verdict << "\n";
  json j{{"D", matrix_json(r.D)},
         {"velocity", vector_json(r.velocity)},
         {"method", r.method},
         {"certificate", certificate_json(r.certificate)},
         {"terms", r.terms},
         {"tail_estimate", r.tail_estimate},
         {"residuals", r.residuals},
         {"max_imaginary", r.max_imaginary},
         {"units", {{"D", "sites^2/step"}, {"velocity", "sites/step"}}}};
  if (r.quadratic_check.size() > 0) j["quadratic_check"] = matrix_json(r.quadratic_check);
  out.write_json("diffusion.json", j);
  return kExitOk;
}

void write_distribution(Writer& out, const std::string& name, const PositionDistribution& p,
                        const std::map<Offset, double>* standard_error) {
  std::vector<std::string> header = coordinate_names(p.lattice_dim);
  std::vector<std::string> units(header.size(), "sites");
  header.push_back("probability");
  units.push_back("1");
  if (standard_error) {
    header.push_back("standard_error");
    units.push_back("1");
  }
  Csv csv(header, units);
  for (const auto& [x, q] : p.p) {
    std::vector<double> row;
    for (int a = 0; a < p.lattice_dim; ++a) row.push_back(static_cast<double>(x[a]));
    row.push_back(q);
    if (standard_error) {
      auto it = standard_error->find(x);
      row.push_back(it == standard_error->end() ? 0.0 : it->second);
    }
    csv.row(row);
  }
  out.write(name, csv.str());
}

int task_montecarlo(const ExperimentConfig& cfg, Writer& out, std::ostream& log) {
  const GeneralizedWalk w = build_walk(cfg);
  const MonteCarloResult r = monte_carlo(w, initial_mixture(cfg, w.coin_dim()), cfg.t, cfg.n_traj, cfg.seed);
  const Moments m = moments(r.mean);
  log << "mean: " << tuple_string(m.mean) << "\n"
      << "covariance_over_t: " << matrix_string(cfg.t > 0 ? RealMatrix(m.covariance / cfg.t) : m.covariance) << "\n"
      << "aggregate_standard_error: " << format_number(r.aggregate_standard_error) << "\n";
  write_distribution(out, "montecarlo.csv", r.mean, &r.standard_error);
  out.write_json("montecarlo.json", {{"t", cfg.t},
                                     {"n_traj", r.n_traj},
                                     {"seed", cfg.seed},
                                     {"mean", vector_json(m.mean)},
                                     {"covariance", matrix_json(m.covariance)},
                                     {"aggregate_standard_error", r.aggregate_standard_error},
                                     {"units", {{"mean", "sites"}, {"covariance", "sites^2"}}}});
  return kExitOk;
}

int task_simulate(const ExperimentConfig& cfg, Writer& out, std::ostream& log) {
  const GeneralizedWalk w = build_walk(cfg);
  const int s = w.lattice_dim();
  if (s >= 2 && cfg.t > kExact2dStepLimit) {
    log << "note: exact simulation in " << s << " dimensions is limited to t <= " << kExact2dStepLimit
        << "; using Monte Carlo\n";
    return task_montecarlo(cfg, out, log);
  }
  const auto dists = simulate(w, initial_density(cfg, s, w.coin_dim()), cfg.t, simulation_options(cfg));
  std::vector<std::string> header{"t"};
  std::vector<std::string> units{"steps"};
  for (int a = 0; a < s; ++a) {
    header.push_back("mean_" + std::to_string(a + 1));
    units.push_back("sites");
  }
  for (int a = 0; a < s; ++a) {
    for (int b = 0; b < s; ++b) {
      header.push_back("cov_" + std::to_string(a + 1) + std::to_string(b + 1));
      units.push_back("sites^2");
    }
  }
  Csv csv(header, units);
  for (const auto& p : dists) {
    const Moments m = moments(p);
    std::vector<double> row{static_cast<double>(p.t)};
    for (int a = 0; a < s; ++a) row.push_back(m.mean(a));
    for (int a = 0; a < s; ++a) {
      for (int b = 0; b < s; ++b) row.push_back(m.covariance(a, b));
    }
    csv.row(row);
  }
  const Moments last = moments(dists.back());
  log << "mean: " << tuple_string(last.mean) << "\n"
      << "covariance_over_t: " << matrix_string(cfg.t > 0 ? RealMatrix(last.covariance / cfg.t) : last.covariance)
      << "\n";
  out.write("simulate_moments.csv", csv.str());
  write_distribution(out, "simulate.csv", dists.back(), nullptr);
  return kExitOk;
}

int task_figure1(const ExperimentConfig& cfg, Writer& out, std::ostream& log) {
  const auto grid = cfg.grid.value_or(parse_grid("0.1:0.9:9"));
  Csv csv({"w", "D_series", "var_over_t_t100", "romanelli_guess"},
          {"probability", "sites^2/step", "sites^2/step", "sites^2/step"});
  for (double w : grid) {
    const WalkChannel walk(ShiftTable::line(), build_ensemble(BrokenLinks{w}));
    const double d = diffusion_matrix(walk, series_options(cfg)).D(0, 0);
    const double var = variance_over_t(walk, 100, cfg);
    csv.row({w, d, var, w / (1.0 - w)});
    log << "w=" << format_number(w) << " D=" << format_number(d) << " var/t=" << format_number(var) << "\n";
  }
  out.write("figure1.csv", csv.str());
  return kExitOk;
}

int task_figure2(const ExperimentConfig& cfg, Writer& out, std::ostream& log) {
  const auto grid = cfg.grid.value_or(parse_grid("0.2:3:15"));
  Csv curve({"delta", "D"}, {"rad", "sites^2/step"});
  for (double delta : grid) {
    const WalkChannel walk(ShiftTable::line(), build_ensemble(DephasingUniform{delta}));
    const double d = diffusion_matrix(walk, series_options(cfg)).D(0, 0);
    curve.row({delta, d});
    log << "delta=" << format_number(delta) << " D=" << format_number(d) << "\n";
  }
  out.write("figure2_diffusion.csv", curve.str());

  const double delta = std::numbers::pi / 8;
  const WalkChannel walk(ShiftTable::line(), build_ensemble(DephasingUniform{delta}));
  const double d = diffusion_matrix(walk, series_options(cfg)).D(0, 0);
  const auto dists = simulate(GeneralizedWalk(walk), default_initial_state(1, 2), 80, simulation_options(cfg));
  Csv layers({"t", "x", "p_neighbor_avg", "gaussian"}, {"steps", "sites", "1/site", "1/site"});
  json tv = json::object();
  for (int t : {10, 30, 80}) {
    const PositionDistribution avg = neighbor_average(dists[static_cast<std::size_t>(t)]);
    double dist = 0.0, covered = 0.0;
    for (const auto& [x, q] : avg.p) {
      const double xc = static_cast<double>(x[0]) + 0.5;
      const double g = gaussian_density(RealMatrix::Constant(1, 1, d * t), std::span<const double>(&xc, 1));
      layers.row({static_cast<double>(t), static_cast<double>(x[0]), q, g});
      dist += 0.5 * std::abs(q - g);
      covered += g;
    }
    // Gaussian mass outside the support counts fully.
    tv[std::to_string(t)] = dist + 0.5 * std::max(0.0, 1.0 - covered);
  }
  out.write("figure2_distributions.csv", layers.str());
  out.write_json("figure2.json", {{"delta", delta},
                                  {"D", d},
                                  {"initial_state", "mixed coin at the origin"},
                                  {"total_variation_to_gaussian", tv},
                                  {"units", {{"delta", "rad"}, {"D", "sites^2/step"}}}});
  return kExitOk;
}

int task_figure3(const ExperimentConfig& cfg, Writer& out, std::ostream& log) {
  std::vector<double> r0_grid;
  if (cfg.grid) {
    r0_grid = *cfg.grid;
  } else {
    for (int k = 0; k < 32; ++k) r0_grid.push_back(2.0 * std::numbers::pi * k / 32);
  }
  const auto sigma_grid = cfg.sigma_grid.value_or(std::vector<double>{0.25, 0.5, 0.75, 1.0});
  Csv surface({"r0", "sigma", "D"}, {"rad", "rad", "sites^2/step"});
  for (double sigma : sigma_grid) {
    for (double r0 : r0_grid) {
      const WalkChannel walk(ShiftTable::line(), build_ensemble(GaussianCoin{r0, sigma}));
      surface.row({r0, sigma, diffusion_matrix(walk, series_options(cfg)).D(0, 0)});
    }
    log << "sigma=" << format_number(sigma) << " done\n";
  }
  out.write("figure3_surface.csv", surface.str());

  // Distributions at the Hadamard peak in diffusive scaling.
  const int t = 200;
  const double r0 = std::numbers::pi / 4;
  Csv layers({"sigma", "x_scaled", "density_scaled", "gaussian"}, {"rad", "sites/sqrt(step)", "sqrt(step)/site", "sqrt(step)/site"});
  json ds = json::object();
  for (double sigma : {0.01, 0.1, 0.2, 1.0, 2.0}) {
    const WalkChannel walk(ShiftTable::line(), build_ensemble(GaussianCoin{r0, sigma}));
    // Below sigma = 0.05 the series needs far more terms than the budget allows.
    const double d = sigma >= 0.05 ? diffusion_matrix(walk, series_options(cfg)).D(0, 0) : kNan;
    ds[format_number(sigma)] = std::isnan(d) ? json(nullptr) : json(d);
    const auto dists = simulate(GeneralizedWalk(walk), default_initial_state(1, 2), t, simulation_options(cfg));
    const PositionDistribution avg = neighbor_average(dists.back());
    const double root = std::sqrt(static_cast<double>(t));
    for (const auto& [x, q] : avg.p) {
      const double xs = (static_cast<double>(x[0]) + 0.5) / root;
      const double g = std::isnan(d) ? kNan : gaussian_density(RealMatrix::Constant(1, 1, d), std::span<const double>(&xs, 1));
      layers.row({sigma, xs, q * root, g});
    }
    log << "distribution sigma=" << format_number(sigma) << " done\n";
  }
  out.write("figure3_distributions.csv", layers.str());
  out.write_json("figure3.json", {{"t", t}, {"r0", r0}, {"D", ds}, {"units", {{"D", "sites^2/step"}}}});
  return kExitOk;
}

int task_figure4(const ExperimentConfig& cfg, Writer& out, std::ostream& log) {
  const auto grid = cfg.grid.value_or(std::vector<double>{0.1, 0.9});
  std::vector<double> axis;
  for (int k = -24; k <= 24; ++k) axis.push_back(0.25 * k);
  Csv csv({"w", "x1", "x2", "density"}, {"probability", "sites/sqrt(step)", "sites/sqrt(step)", "step/site^2"});
  json panels = json::array();
  for (double w : grid) {
    const WalkChannel walk(ShiftTable::square(), build_ensemble(TwoDim{w}));
    const DiffusionResult r = diffusion_matrix(walk, series_options(cfg));
    json density = json::array();
    for (double x1 : axis) {
      json row = json::array();
      for (double x2 : axis) {
        const double x[2] = {x1, x2};
        const double p = gaussian_density(r.D, x);
        csv.row({w, x1, x2, p});
        row.push_back(p);
      }
      density.push_back(row);
    }
    panels.push_back({{"w", w}, {"D", matrix_json(r.D)}, {"density", density}});
    log << "w=" << format_number(w) << " D=" << matrix_string(r.D) << "\n";
  }
  out.write("figure4_grid.csv", csv.str());
  out.write_json("figure4.json", {{"axis", axis},
                                  {"panels", panels},
                                  {"units", {{"axis", "sites/sqrt(step)"}, {"D", "sites^2/step"}, {"density", "step/site^2"}}}});
  return kExitOk;
}

}  // namespace

int run(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    Writer writer(cfg.out_dir, out);
    if (cfg.task == "certify") return task_certify(cfg, writer, out);
    if (cfg.task == "drift") return task_drift(cfg, writer, out);
    if (cfg.task == "diffusion") return task_diffusion(cfg, writer, out);
    if (cfg.task == "simulate") return task_simulate(cfg, writer, out);
    if (cfg.task == "montecarlo") return task_montecarlo(cfg, writer, out);
    if (cfg.task == "figure1") return task_figure1(cfg, writer, out);
    if (cfg.task == "figure2") return task_figure2(cfg, writer, out);
    if (cfg.task == "figure3") return task_figure3(cfg, writer, out);
    if (cfg.task == "figure4") return task_figure4(cfg, writer, out);
    err << "error: unknown task '" << cfg.task << "'\n";
    return kExitConfig;
  } catch (const CertificateRefusal& ex) {
    err << "refused: " << ex.what() << "\n";
    return kExitRefused;
  } catch (const ResourceLimitError& ex) {
    err << "resource cap: " << ex.what() << "\n";
    return kExitResource;
  } catch (const DivergenceError& ex) {
    err << "resource cap: " << ex.what() << "\n";
    return kExitResource;
  } catch (const InvalidArgument& ex) {
    err << ex.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace qwalk
