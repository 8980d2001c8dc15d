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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qwalk/experiment.hpp"

namespace qwalk {

using nlohmann::json;

ConfigError::ConfigError(const std::string& source, int line, const std::string& what)
    : InvalidArgument(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

namespace {

// Finds the line of a key path by scanning for each quoted key after the previous one.
class Locator {
 public:
  Locator(const std::string& text, std::string source) : text_(text), source_(std::move(source)) {}

  int line_of(const std::vector<std::string>& path) const {
    std::size_t pos = 0, found = std::string::npos;
    for (const auto& key : path) {
      const std::size_t at = text_.find("\"" + key + "\"", pos);
      if (at == std::string::npos) break;
      found = at;
      pos = at + key.size() + 2;
    }
    if (found == std::string::npos) return 1;
    return 1 + static_cast<int>(std::count(text_.begin(), text_.begin() + static_cast<std::ptrdiff_t>(found), '\n'));
  }

  [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& what) const {
    throw ConfigError(source_, line_of(path), what);
  }

 private:
  const std::string& text_;
  std::string source_;
};

using Path = std::vector<std::string>;

Path extend(Path p, const std::string& key) {
  p.push_back(key);
  return p;
}

double get_number(const json& obj, const std::string& key, const Path& path, const Locator& loc) {
  if (!obj.contains(key)) loc.fail(path, "missing required field '" + key + "'");
  const json& v = obj.at(key);
  if (!v.is_number()) loc.fail(extend(path, key), "field '" + key + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) loc.fail(extend(path, key), "field '" + key + "' must be finite");
  return x;
}

std::int64_t get_integer(const json& v, const Path& path, const Locator& loc, const std::string& what) {
  if (!v.is_number_integer()) loc.fail(path, what + " must be an integer");
  return v.get<std::int64_t>();
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const Path& path, const Locator& loc) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) loc.fail(extend(path, key), "unknown field '" + key + "'");
  }
}

CoinMatrix parse_matrix(const json& m, const Path& path, const Locator& loc) {
  if (!m.is_array() || m.empty()) loc.fail(path, "matrix must be a nonempty array of rows");
  const auto n = static_cast<Eigen::Index>(m.size());
  CoinMatrix out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const json& row = m[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) loc.fail(path, "matrix must be square");
    for (Eigen::Index j = 0; j < n; ++j) {
      const json& e = row[static_cast<std::size_t>(j)];
      if (e.is_number()) {
        out(i, j) = e.get<double>();
      } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
        out(i, j) = Complex(e[0].get<double>(), e[1].get<double>());
      } else {
        loc.fail(path, "matrix entries must be numbers or [re, im] pairs");
      }
    }
  }
  return out;
}

EnsembleSpec parse_ensemble(const json& e, const Path& path, const Locator& loc) {
  if (!e.is_object()) loc.fail(path, "ensemble must be an object");
  if (!e.contains("family") || !e.at("family").is_string()) loc.fail(path, "ensemble needs a string 'family'");
  const std::string family = e.at("family").get<std::string>();
  auto nodes = [&](int fallback) {
    if (!e.contains("n_nodes")) return fallback;
    const auto n = get_integer(e.at("n_nodes"), extend(path, "n_nodes"), loc, "n_nodes");
    if (n < 1 || n > 4096) loc.fail(extend(path, "n_nodes"), "n_nodes must lie in [1, 4096]");
    return static_cast<int>(n);
  };
  if (family == "broken_links") {
    check_keys(e, {"family", "w"}, path, loc);
    return BrokenLinks{get_number(e, "w", path, loc)};
  }
  if (family == "dephasing_uniform") {
    check_keys(e, {"family", "delta", "n_nodes"}, path, loc);
    return DephasingUniform{get_number(e, "delta", path, loc), nodes(64)};
  }
  if (family == "gaussian_coin") {
    check_keys(e, {"family", "r0", "sigma", "n_nodes"}, path, loc);
    return GaussianCoin{get_number(e, "r0", path, loc), get_number(e, "sigma", path, loc), nodes(64)};
  }
  if (family == "two_dim") {
    check_keys(e, {"family", "w"}, path, loc);
    return TwoDim{get_number(e, "w", path, loc)};
  }
  if (family == "custom") {
    check_keys(e, {"family", "atoms"}, path, loc);
    const Path ap = extend(path, "atoms");
    if (!e.contains("atoms") || !e.at("atoms").is_array() || e.at("atoms").empty()) {
      loc.fail(path, "custom ensemble needs a nonempty 'atoms' array");
    }
    CustomEnsemble out;
    for (const auto& atom : e.at("atoms")) {
      if (!atom.is_object()) loc.fail(ap, "each atom must be an object");
      check_keys(atom, {"weight", "coin", "matrix"}, ap, loc);
      const double w = get_number(atom, "weight", ap, loc);
      CoinMatrix u;
      if (atom.contains("coin") == atom.contains("matrix")) loc.fail(ap, "each atom needs exactly one of 'coin' or 'matrix'");
      if (atom.contains("coin")) {
        if (!atom.at("coin").is_string()) loc.fail(extend(ap, "coin"), "'coin' must be a name such as \"H\"");
        try {
          u = named_coin(atom.at("coin").get<std::string>());
        } catch (const InvalidArgument& ex) {
          loc.fail(extend(ap, "coin"), ex.what());
        }
      } else {
        u = parse_matrix(atom.at("matrix"), extend(ap, "matrix"), loc);
      }
      out.atoms.push_back({w, std::move(u)});
    }
    return out;
  }
  loc.fail(extend(path, "family"), "unknown ensemble family '" + family + "'");
}

int ensemble_dim(const EnsembleSpec& spec) {
  if (std::holds_alternative<TwoDim>(spec)) return 4;
  if (const auto* c = std::get_if<CustomEnsemble>(&spec)) return static_cast<int>(c->atoms.front().unitary.rows());
  return 2;
}

WalkSpec parse_walk(const json& w, const Path& path, const Locator& loc) {
  if (!w.is_object()) loc.fail(path, "walk must be an object");
  check_keys(w, {"shifts", "ensemble"}, path, loc);
  if (!w.contains("ensemble")) loc.fail(path, "walk needs an 'ensemble'");
  WalkSpec out;
  out.ensemble = parse_ensemble(w.at("ensemble"), extend(path, "ensemble"), loc);
  const int d = ensemble_dim(out.ensemble);
  if (w.contains("shifts")) {
    const Path sp = extend(path, "shifts");
    const json& s = w.at("shifts");
    if (!s.is_array() || s.empty()) loc.fail(sp, "shifts must be a nonempty array of integer vectors");
    std::size_t dim = 0;
    for (const auto& v : s) {
      if (!v.is_array() || v.empty() || v.size() > static_cast<std::size_t>(kMaxLatticeDim)) {
        loc.fail(sp, "each shift must be an integer vector of length 1 to " + std::to_string(kMaxLatticeDim));
      }
      if (dim == 0) dim = v.size();
      if (v.size() != dim) loc.fail(sp, "all shift vectors must have the same length");
      Offset x;
      for (std::size_t a = 0; a < dim; ++a) x[static_cast<int>(a)] = get_integer(v[a], sp, loc, "shift entries");
      out.shifts.push_back(x);
    }
    out.lattice_dim = static_cast<int>(dim);
  } else if (d == 4 && std::holds_alternative<TwoDim>(out.ensemble)) {
    out.shifts = ShiftTable::square().vectors();
    out.lattice_dim = 2;
  } else if (d == 2) {
    out.shifts = ShiftTable::line().vectors();
    out.lattice_dim = 1;
  } else {
    loc.fail(path, "walk needs explicit 'shifts' for coin dimension " + std::to_string(d));
  }
  if (static_cast<int>(out.shifts.size()) != d) {
    loc.fail(extend(path, "shifts"), "walk has " + std::to_string(out.shifts.size()) + " shift vectors but coin dimension " +
                                         std::to_string(d));
  }
  try {
    WalkChannel(ShiftTable(out.lattice_dim, out.shifts), build_ensemble(out.ensemble));
  } catch (const InvalidArgument& ex) {
    loc.fail(extend(path, "ensemble"), ex.what());
  }
  return out;
}

std::vector<double> grid_field(const json& g, const Path& path, const Locator& loc) {
  try {
    if (g.is_string()) return parse_grid(g.get<std::string>());
    if (g.is_array() && !g.empty()) {
      std::vector<double> out;
      for (const auto& x : g) {
        if (!x.is_number()) loc.fail(path, "grid entries must be numbers");
        out.push_back(x.get<double>());
      }
      return out;
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidArgument& ex) {
    loc.fail(path, ex.what());
  }
  loc.fail(path, "grid must be a \"a:b:n\" string or a nonempty array");
}

}  // namespace

std::vector<double> parse_grid(const std::string& spec) {
  auto to_double = [&](const std::string& s) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(s, &used);
    } catch (const std::exception&) {
      throw InvalidArgument("grid: cannot parse number '" + s + "'");
    }
    if (used != s.size() || !std::isfinite(x)) throw InvalidArgument("grid: cannot parse number '" + s + "'");
    return x;
  };
  std::vector<double> out;
  if (spec.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string tok; std::getline(ss, tok, ':');) parts.push_back(tok);
    if (parts.size() != 3) throw InvalidArgument("grid: expected a:b:n, got '" + spec + "'");
    const double a = to_double(parts[0]), b = to_double(parts[1]);
    const double nd = to_double(parts[2]);
    if (nd < 1 || nd != std::floor(nd)) throw InvalidArgument("grid: point count must be a positive integer");
    const int n = static_cast<int>(nd);
    for (int k = 0; k < n; ++k) out.push_back(n == 1 ? a : a + (b - a) * k / (n - 1));
  } else {
    std::stringstream ss(spec);
    for (std::string tok; std::getline(ss, tok, ',');) out.push_back(to_double(tok));
  }
  if (out.empty()) throw InvalidArgument("grid: empty grid");
  return out;
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& ex) {
    const std::size_t pos = std::min<std::size_t>(ex.byte, text.size());
    const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
    throw ConfigError(source, line, std::string("malformed JSON: ") + ex.what());
  }
  const Locator loc(text, source);
  if (!doc.is_object()) loc.fail({}, "config must be a JSON object");
  check_keys(doc,
             {"task", "walk", "compose", "t", "n_traj", "seed", "tol", "coherence_tol", "grid", "sigma_grid",
              "initial_state", "max_blocks", "out"},
             {}, loc);

  ExperimentConfig cfg;
  if (doc.contains("task")) {
    if (!doc.at("task").is_string()) loc.fail({"task"}, "task must be a string");
    cfg.task = doc.at("task").get<std::string>();
    const auto& tasks = known_tasks();
    if (std::find(tasks.begin(), tasks.end(), cfg.task) == tasks.end()) loc.fail({"task"}, "unknown task '" + cfg.task + "'");
  }
  if (doc.contains("walk") && doc.contains("compose")) loc.fail({"compose"}, "give either 'walk' or 'compose', not both");
  if (doc.contains("walk")) cfg.walks.push_back(parse_walk(doc.at("walk"), {"walk"}, loc));
  if (doc.contains("compose")) {
    const json& c = doc.at("compose");
    if (!c.is_array() || c.empty()) loc.fail({"compose"}, "compose must be a nonempty array of walks");
    for (const auto& w : c) cfg.walks.push_back(parse_walk(w, {"compose"}, loc));
    for (const auto& w : cfg.walks) {
      if (w.lattice_dim != cfg.walks.front().lattice_dim || w.shifts.size() != cfg.walks.front().shifts.size()) {
        loc.fail({"compose"}, "composed walks must share lattice and coin dimensions");
      }
    }
  }
  auto positive_int = [&](const char* key, auto& field, std::int64_t lo) {
    if (!doc.contains(key)) return;
    const auto v = get_integer(doc.at(key), {key}, loc, key);
    if (v < lo) loc.fail({key}, std::string(key) + " must be at least " + std::to_string(lo));
    field = static_cast<std::remove_reference_t<decltype(field)>>(v);
  };
  positive_int("t", cfg.t, 0);
  positive_int("n_traj", cfg.n_traj, 1);
  positive_int("seed", cfg.seed, 0);
  positive_int("max_blocks", cfg.max_blocks, 1);
  if (doc.contains("tol")) {
    cfg.tol = get_number(doc, "tol", {}, loc);
    if (!(cfg.tol > 0.0)) loc.fail({"tol"}, "tol must be positive");
  }
  if (doc.contains("coherence_tol")) {
    cfg.coherence_tol = get_number(doc, "coherence_tol", {}, loc);
    if (cfg.coherence_tol < 0.0) loc.fail({"coherence_tol"}, "coherence_tol must be nonnegative");
  }
  if (doc.contains("grid")) cfg.grid = grid_field(doc.at("grid"), {"grid"}, loc);
  if (doc.contains("sigma_grid")) cfg.sigma_grid = grid_field(doc.at("sigma_grid"), {"sigma_grid"}, loc);
  if (doc.contains("initial_state")) {
    const json& s = doc.at("initial_state");
    if (!s.is_string()) loc.fail({"initial_state"}, "initial_state must be \"mixed\" or \"basis:<i>\"");
    cfg.initial_state = s.get<std::string>();
    bool ok = cfg.initial_state == "mixed";
    if (!ok && cfg.initial_state.rfind("basis:", 0) == 0) {
      const std::string idx = cfg.initial_state.substr(6);
      ok = !idx.empty() && std::all_of(idx.begin(), idx.end(), [](char ch) { return ch >= '0' && ch <= '9'; });
      if (ok && !cfg.walks.empty() && std::stoul(idx) >= cfg.walks.front().shifts.size()) ok = false;
    }
    if (!ok) loc.fail({"initial_state"}, "initial_state must be \"mixed\" or \"basis:<i>\" with i below the coin dimension");
  }
  if (doc.contains("out")) {
    if (!doc.at("out").is_string()) loc.fail({"out"}, "out must be a directory path string");
    cfg.out_dir = doc.at("out").get<std::string>();
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

GeneralizedWalk build_walk(const ExperimentConfig& cfg) {
  if (cfg.walks.empty()) throw ConfigError("config", 0, "task '" + cfg.task + "' needs a 'walk' or 'compose' entry");
  std::vector<WalkChannel> walks;
  for (const auto& w : cfg.walks) walks.emplace_back(ShiftTable(w.lattice_dim, w.shifts), build_ensemble(w.ensemble));
  return compose(std::move(walks));
}

}  // namespace qwalk
