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
#include <limits>

#include "qwalk/counter_rng.hpp"
#include "qwalk/oracle_sim.hpp"

namespace qwalk {

namespace {

// Dense amplitude window covering every site reachable within the run.
class Window {
 public:
  Window(int lattice_dim, int coin_dim, std::int64_t radius)
      : s_(lattice_dim), d_(coin_dim), radius_(radius), width_(2 * radius + 1) {
    std::size_t sites = 1;
    for (int a = 0; a < s_; ++a) sites *= static_cast<std::size_t>(width_);
    amp_.assign(sites * static_cast<std::size_t>(d_), Complex(0.0, 0.0));
    next_ = amp_;
  }

  std::size_t sites() const { return amp_.size() / static_cast<std::size_t>(d_); }

  std::size_t index(const Offset& x) const {
    std::size_t k = 0;
    for (int a = s_ - 1; a >= 0; --a) {
      const std::int64_t c = x[a] + radius_;
      if (c < 0 || c >= width_) throw ResourceLimitError("monte_carlo: amplitude left the simulation window");
      k = k * static_cast<std::size_t>(width_) + static_cast<std::size_t>(c);
    }
    return k;
  }

  Offset position(std::size_t k) const {
    Offset x;
    for (int a = 0; a < s_; ++a) {
      x[a] = static_cast<std::int64_t>(k % static_cast<std::size_t>(width_)) - radius_;
      k /= static_cast<std::size_t>(width_);
    }
    return x;
  }

  Eigen::Map<CoinVector> site(std::size_t k) { return {amp_.data() + k * static_cast<std::size_t>(d_), d_}; }

  bool occupied(std::size_t k) const {
    const Complex* p = amp_.data() + k * static_cast<std::size_t>(d_);
    for (int i = 0; i < d_; ++i) {
      if (p[i] != Complex(0.0, 0.0)) return true;
    }
    return false;
  }

  void clear() { std::fill(amp_.begin(), amp_.end(), Complex(0.0, 0.0)); }

  /// Component i of site x moves to x + v_i.
  void shift(const std::vector<std::ptrdiff_t>& strides) {
    std::fill(next_.begin(), next_.end(), Complex(0.0, 0.0));
    const std::size_t n = sites();
    for (std::size_t k = 0; k < n; ++k) {
      const Complex* src = amp_.data() + k * static_cast<std::size_t>(d_);
      for (int i = 0; i < d_; ++i) {
        if (src[i] == Complex(0.0, 0.0)) continue;
        const auto dst = static_cast<std::ptrdiff_t>(k) + strides[static_cast<std::size_t>(i)];
        if (dst < 0 || dst >= static_cast<std::ptrdiff_t>(n)) {
          throw ResourceLimitError("monte_carlo: amplitude left the simulation window");
        }
        next_[static_cast<std::size_t>(dst) * static_cast<std::size_t>(d_) + static_cast<std::size_t>(i)] = src[i];
      }
    }
    amp_.swap(next_);
  }

  std::vector<std::ptrdiff_t> strides(const ShiftTable& table) const {
    std::vector<std::ptrdiff_t> out;
    for (int i = 0; i < d_; ++i) {
      std::ptrdiff_t k = 0, scale = 1;
      for (int a = 0; a < s_; ++a) {
        k += static_cast<std::ptrdiff_t>(table[i][a]) * scale;
        scale *= static_cast<std::ptrdiff_t>(width_);
      }
      out.push_back(k);
    }
    return out;
  }

 private:
  int s_;
  int d_;
  std::int64_t radius_;
  std::int64_t width_;
  std::vector<Complex> amp_;
  std::vector<Complex> next_;
};

struct FactorData {
  const WalkChannel* walk;
  std::vector<double> cumulative;
  std::vector<std::ptrdiff_t> strides;
};

std::size_t draw_atom(const std::vector<double>& cumulative, double u) {
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

}  // namespace

MonteCarloResult monte_carlo(const GeneralizedWalk& w, const MixedInitialState& psi0, int steps, int n_traj,
                             std::uint64_t seed) {
  if (n_traj < 1) throw InvalidArgument("monte_carlo: n_traj must be at least 1");
  if (steps < 0) throw InvalidArgument("monte_carlo: negative step count");
  if (psi0.components.empty()) throw InvalidArgument("monte_carlo: empty initial state");
  const int s = w.lattice_dim(), d = w.coin_dim();

  std::vector<double> mix_cumulative;
  double mix_total = 0.0;
  std::int64_t radius = 0;
  for (const auto& [p, state] : psi0.components) {
    if (!(p > 0.0)) throw InvalidArgument("monte_carlo: mixture weights must be positive");
    double norm2 = 0.0;
    for (const auto& [x, v] : state.amplitudes) {
      if (v.size() != d) throw InvalidArgument("monte_carlo: amplitude has wrong coin dimension");
      norm2 += v.squaredNorm();
      for (int a = 0; a < s; ++a) radius = std::max(radius, std::abs(x[a]));
    }
    if (std::abs(norm2 - 1.0) > 1e-10) throw InvalidArgument("monte_carlo: pure state is not normalized");
    mix_total += p;
    mix_cumulative.push_back(mix_total);
  }
  if (std::abs(mix_total - 1.0) > 1e-10) throw InvalidArgument("monte_carlo: mixture weights must sum to 1");

  for (const auto& f : w.factors()) {
    std::int64_t vmax = 0;
    for (const auto& v : f.shift().vectors()) {
      for (int a = 0; a < s; ++a) vmax = std::max(vmax, std::abs(v[a]));
    }
    radius += vmax * steps;
  }

  Window win(s, d, radius);
  std::vector<FactorData> factors;
  for (const auto& f : w.factors()) {
    FactorData fd{&f, {}, win.strides(f.shift())};
    double c = 0.0;
    for (const auto& atom : f.ensemble().atoms()) fd.cumulative.push_back(c += atom.weight);
    factors.push_back(std::move(fd));
  }
  // One factor: coin then shift. Compositions: factors in reverse, shift then coin.
  const bool single = w.size() == 1;
  const std::uint64_t levels = w.size();

  const CounterRng rng(seed);
  const std::size_t n_sites = win.sites();
  std::vector<double> sum(n_sites, 0.0), sum_sq(n_sites, 0.0);
  CoinVector tmp(d);

  auto coin_all = [&](const FactorData& fd, std::uint64_t traj, std::uint64_t counter) {
    const auto& atoms = fd.walk->ensemble().atoms();
    for (std::size_t k = 0; k < n_sites; ++k) {
      if (!win.occupied(k)) continue;
      auto v = win.site(k);
      const std::size_t which =
          atoms.size() == 1 ? 0 : draw_atom(fd.cumulative, rng.uniform(traj, counter, CounterRng::site_hash(win.position(k))));
      tmp.noalias() = atoms[which].unitary * v;
      v = tmp;
    }
  };

  for (int traj = 0; traj < n_traj; ++traj) {
    const auto tr = static_cast<std::uint64_t>(traj);
    const double u0 = rng.uniform(tr, std::numeric_limits<std::uint64_t>::max(), 0);
    const auto& start = psi0.components[draw_atom(mix_cumulative, u0 * mix_total)].second;
    win.clear();
    for (const auto& [x, v] : start.amplitudes) win.site(win.index(x)) = v;

    for (int t = 0; t < steps; ++t) {
      if (single) {
        coin_all(factors[0], tr, static_cast<std::uint64_t>(t));
        win.shift(factors[0].strides);
      } else {
        for (std::size_t f = w.size(); f-- > 0;) {
          win.shift(factors[f].strides);
          coin_all(factors[f], tr, static_cast<std::uint64_t>(t) * levels + f);
        }
      }
    }
    for (std::size_t k = 0; k < n_sites; ++k) {
      const double q = win.site(k).squaredNorm();
      sum[k] += q;
      sum_sq[k] += q * q;
    }
  }

  MonteCarloResult out;
  out.n_traj = n_traj;
  out.mean.lattice_dim = s;
  out.mean.t = steps;
  const double n = n_traj;
  for (std::size_t k = 0; k < n_sites; ++k) {
    if (sum[k] == 0.0) continue;
    const Offset x = win.position(k);
    const double mean = sum[k] / n;
    out.mean.p[x] = mean;
    double se = 0.0;
    if (n_traj > 1) {
      const double var = std::max(0.0, (sum_sq[k] - n * mean * mean) / (n - 1.0));
      se = std::sqrt(var / n);
    }
    out.standard_error[x] = se;
    out.aggregate_standard_error += 0.5 * se;
  }
  return out;
}

}  // namespace qwalk
