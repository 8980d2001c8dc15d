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

#ifndef QWALK_ORACLE_SIM_HPP
#define QWALK_ORACLE_SIM_HPP

#include <cstdint>
#include <map>
#include <vector>

#include "qwalk/block_table.hpp"
#include "qwalk/walk_channel.hpp"

namespace qwalk {

/// Density operator as finitely many blocks rho_{xy}.
class DensityBlockState {
 public:
  DensityBlockState(int lattice_dim, int coin_dim);

  /// |x><x| (x) coin_state.
  static DensityBlockState localized(int lattice_dim, const CoinMatrix& coin_state, const Offset& x = {});

  int lattice_dim() const { return lattice_dim_; }
  int coin_dim() const { return table_.dim(); }
  const BlockTable<SitePair>& table() const { return table_; }
  BlockTable<SitePair>& table() { return table_; }
  std::size_t block_count() const { return table_.size(); }

  Complex trace() const;
  /// Largest Frobenius norm among the x != y blocks.
  double max_coherence() const;

 private:
  int lattice_dim_;
  BlockTable<SitePair> table_;
};

struct PositionDistribution {
  int lattice_dim = 1;
  int t = 0;
  std::map<Offset, double> p;

  double at(const Offset& x) const {
    auto it = p.find(x);
    return it == p.end() ? 0.0 : it->second;
  }
};

/// Coin then shift: diagonal blocks get the Schrodinger twirl, off-diagonal ones
/// U~ rho U~^*, then element (i,j) of block (x,y) moves to (x+v_i, y+v_j).
/// Off-diagonal blocks with norm <= coherence_tol are dropped.
DensityBlockState channel_step(const WalkChannel& w, const DensityBlockState& rho, double coherence_tol = 0.0);

/// Shift then coin: the exact adjoint of apply_heisenberg.
DensityBlockState adjoint_step(const WalkChannel& w, const DensityBlockState& rho, double coherence_tol = 0.0);

/// One factor uses channel_step. A composition W_n o ... o W_1 applies the
/// adjoint steps of W_n first, matching the order of the Heisenberg composite.
DensityBlockState channel_step(const GeneralizedWalk& w, const DensityBlockState& rho, double coherence_tol = 0.0);

PositionDistribution position_distribution(const DensityBlockState& rho, int t = 0);

struct SimulationOptions {
  double coherence_tol = 0.0;
  std::size_t max_blocks = 4'000'000;
};

/// Distributions at t = 0 .. steps.
std::vector<PositionDistribution> simulate(const GeneralizedWalk& w, const DensityBlockState& rho0, int steps,
                                           const SimulationOptions& opts = {});

/// rho_0 = |0><0| (x) 1/d.
DensityBlockState default_initial_state(int lattice_dim, int coin_dim);

struct PureState {
  std::map<Offset, CoinVector> amplitudes;
};

/// Convex mixture of pure states; weights sum to 1.
struct MixedInitialState {
  std::vector<std::pair<double, PureState>> components;
};

/// The maximally mixed coin at the origin as a mixture of basis states.
MixedInitialState default_mixture(int coin_dim);

struct MonteCarloResult {
  PositionDistribution mean;
  std::map<Offset, double> standard_error;
  /// (1/2) sum_x standard_error(x), the scale of the total-variation noise.
  double aggregate_standard_error = 0.0;
  int n_traj = 0;
};

MonteCarloResult monte_carlo(const GeneralizedWalk& w, const MixedInitialState& psi0, int steps, int n_traj,
                             std::uint64_t seed);

struct Moments {
  RealVector mean;
  RealMatrix covariance;
};

Moments moments(const PositionDistribution& p);

/// (P(x) + P(x+1)) / 2 on the hull [min-1, max]. One-dimensional only.
PositionDistribution neighbor_average(const PositionDistribution& p);

double total_variation(const PositionDistribution& a, const PositionDistribution& b);

}  // namespace qwalk

#endif  // QWALK_ORACLE_SIM_HPP
