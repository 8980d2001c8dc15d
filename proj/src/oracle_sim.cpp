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

#include "qwalk/oracle_sim.hpp"

#include "coin_kernel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

namespace qwalk {

namespace {

std::vector<ScatterClass<SitePair>> site_pair_classes(const ShiftTable& shift) {
  const int d = shift.coin_dim();
  std::map<SitePair, std::vector<int>> classes;
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i) classes[SitePair{shift[i], shift[j]}].push_back(i + j * d);
  }
  std::vector<ScatterClass<SitePair>> out;
  for (auto& [disp, entries] : classes) out.push_back({disp, std::move(entries)});
  return out;
}

void check_state(const WalkChannel& w, const DensityBlockState& rho) {
  if (rho.lattice_dim() != w.lattice_dim() || rho.coin_dim() != w.coin_dim()) {
    throw InvalidArgument("channel_step: state and walk dimensions differ");
  }
}

void coin_stage(const WalkChannel& w, BlockTable<SitePair>& table) {
  const int d = w.coin_dim();
  // U~ rho U~^* = m^* rho m with m = U~^*.
  detail::Conjugator mean(w.mean_unitary().adjoint());
  CoinVector scratch(d * d);
  for (std::size_t k = 0; k < table.size(); ++k) {
    auto b = table.block(k);
    if (table.key(k).diagonal()) {
      Eigen::Map<CoinVector> v(b.data(), d * d);
      scratch.noalias() = w.schrodinger_twirl() * v;
      v = scratch;
    } else {
      mean.apply(b.data(), b.data());
    }
  }
}

// Element (i,j) of block (x,y) moves to (x+v_i, y+v_j). Output rows are
// filled one at a time: each source row is found by binary search and its
// columns are scattered through a dense index over the column bounding box.
BlockTable<SitePair> shift_stage(const WalkChannel& w, const BlockTable<SitePair>& table) {
  const int d = w.coin_dim();
  const std::size_t stride = table.stride();
  BlockTable<SitePair> out(d);
  const std::size_t n = table.size();
  if (n == 0) return out;

  struct ColClass {
    Offset disp;
    std::vector<int> entries;
  };
  struct RowClass {
    Offset disp;
    std::vector<ColClass> cols;
  };
  std::map<Offset, std::map<Offset, std::vector<int>>> grouped;
  std::int64_t reach = 0;
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i) {
      grouped[w.shift()[i]][w.shift()[j]].push_back(i + j * d);
      for (int a = 0; a < kMaxLatticeDim; ++a) reach = std::max(reach, std::abs(w.shift()[i][a]));
    }
  }
  std::vector<RowClass> classes;
  for (auto& [rd, cols] : grouped) {
    RowClass rc{rd, {}};
    for (auto& [cd, entries] : cols) rc.cols.push_back({cd, std::move(entries)});
    classes.push_back(std::move(rc));
  }

  std::vector<Offset> rows;
  std::vector<std::size_t> starts;
  std::array<std::int64_t, kMaxLatticeDim> lo{}, hi{}, ext{};
  lo = hi = table.key(0).col.c;
  for (std::size_t k = 0; k < n; ++k) {
    const SitePair& key = table.key(k);
    if (rows.empty() || rows.back() != key.row) {
      rows.push_back(key.row);
      starts.push_back(k);
    }
    for (int a = 0; a < kMaxLatticeDim; ++a) {
      lo[a] = std::min(lo[a], key.col[a]);
      hi[a] = std::max(hi[a], key.col[a]);
    }
  }
  starts.push_back(n);
  for (int a = 0; a < kMaxLatticeDim; ++a) {
    if (a < w.lattice_dim()) {
      lo[a] -= reach;
      hi[a] += reach;
    }
    ext[a] = hi[a] - lo[a] + 1;
  }
  const double volume = static_cast<double>(ext[0]) * static_cast<double>(ext[1]) * static_cast<double>(ext[2]);
  if (volume > static_cast<double>(std::int64_t{1} << 25)) {
    return scatter_merge<SitePair>(table, site_pair_classes(w.shift()));
  }
  auto cell = [&](const Offset& y) {
    return static_cast<std::size_t>(((y[0] - lo[0]) * ext[1] + (y[1] - lo[1])) * ext[2] + (y[2] - lo[2]));
  };

  std::vector<Offset> out_rows;
  out_rows.reserve(rows.size() * classes.size());
  for (const auto& r : rows) {
    for (const auto& rc : classes) out_rows.push_back(r + rc.disp);
  }
  std::sort(out_rows.begin(), out_rows.end());
  out_rows.erase(std::unique(out_rows.begin(), out_rows.end()), out_rows.end());

  out.reserve(n + n / 2);
  std::vector<std::int32_t> slot(static_cast<std::size_t>(volume), -1);
  std::vector<std::pair<Offset, std::int32_t>> touched;
  std::vector<Complex> buf;
  for (const Offset& target : out_rows) {
    touched.clear();
    buf.clear();
    for (const auto& rc : classes) {
      const Offset source = target - rc.disp;
      auto it = std::lower_bound(rows.begin(), rows.end(), source);
      if (it == rows.end() || *it != source) continue;
      const auto g = static_cast<std::size_t>(it - rows.begin());
      for (std::size_t k = starts[g]; k < starts[g + 1]; ++k) {
        const Complex* blk = table.data() + k * stride;
        for (const auto& cc : rc.cols) {
          const Offset y = table.key(k).col + cc.disp;
          std::int32_t& s = slot[cell(y)];
          if (s < 0) {
            s = static_cast<std::int32_t>(touched.size());
            touched.push_back({y, s});
            buf.resize(buf.size() + stride, Complex(0.0));
          }
          Complex* dst = buf.data() + static_cast<std::size_t>(s) * stride;
          for (int e : cc.entries) dst[e] = blk[e];
        }
      }
    }
    std::sort(touched.begin(), touched.end());
    for (const auto& [y, s] : touched) {
      out.append_raw(SitePair{target, y}, buf.data() + static_cast<std::size_t>(s) * stride);
      slot[cell(y)] = -1;
    }
  }
  return out;
}

void prune_coherences(BlockTable<SitePair>& table, double tol) {
  // Keep diagonal blocks; drop off-diagonal blocks at or below tol (exact zeros included).
  const double tol2 = tol * tol;
  table.remove_if([tol2](const SitePair& key, const auto& b) {
    const double n2 = b.squaredNorm();
    return key.diagonal() ? n2 == 0.0 : n2 <= tol2;
  });
}

}  // namespace

DensityBlockState::DensityBlockState(int lattice_dim, int coin_dim) : lattice_dim_(lattice_dim), table_(coin_dim) {
  if (lattice_dim < 1 || lattice_dim > kMaxLatticeDim) throw InvalidArgument("DensityBlockState: bad lattice dimension");
  if (coin_dim < 1) throw InvalidArgument("DensityBlockState: bad coin dimension");
}

DensityBlockState DensityBlockState::localized(int lattice_dim, const CoinMatrix& coin_state, const Offset& x) {
  if (coin_state.rows() != coin_state.cols()) throw InvalidArgument("DensityBlockState: coin state must be square");
  if (std::abs(coin_state.trace() - 1.0) > 1e-10) throw InvalidArgument("DensityBlockState: coin state must have unit trace");
  DensityBlockState out(lattice_dim, static_cast<int>(coin_state.rows()));
  out.table_.append(SitePair{x, x}, coin_state);
  return out;
}

Complex DensityBlockState::trace() const {
  Complex t(0.0, 0.0);
  for (std::size_t k = 0; k < table_.size(); ++k) {
    if (table_.key(k).diagonal()) t += table_.block(k).trace();
  }
  return t;
}

double DensityBlockState::max_coherence() const {
  double m = 0.0;
  for (std::size_t k = 0; k < table_.size(); ++k) {
    if (!table_.key(k).diagonal()) m = std::max(m, table_.block(k).norm());
  }
  return m;
}

DensityBlockState channel_step(const WalkChannel& w, const DensityBlockState& rho, double coherence_tol) {
  check_state(w, rho);
  DensityBlockState out = rho;
  coin_stage(w, out.table());
  out.table() = shift_stage(w, out.table());
  prune_coherences(out.table(), coherence_tol);
  return out;
}

DensityBlockState adjoint_step(const WalkChannel& w, const DensityBlockState& rho, double coherence_tol) {
  check_state(w, rho);
  DensityBlockState out = rho;
  out.table() = shift_stage(w, rho.table());
  coin_stage(w, out.table());
  prune_coherences(out.table(), coherence_tol);
  return out;
}

DensityBlockState channel_step(const GeneralizedWalk& w, const DensityBlockState& rho, double coherence_tol) {
  if (w.size() == 1) return channel_step(w.factor(0), rho, coherence_tol);
  DensityBlockState out = rho;
  for (std::size_t f = w.size(); f-- > 0;) out = adjoint_step(w.factor(f), out, coherence_tol);
  return out;
}

PositionDistribution position_distribution(const DensityBlockState& rho, int t) {
  PositionDistribution out;
  out.lattice_dim = rho.lattice_dim();
  out.t = t;
  const auto& table = rho.table();
  for (std::size_t k = 0; k < table.size(); ++k) {
    if (table.key(k).diagonal()) out.p[table.key(k).row] += table.block(k).trace().real();
  }
  return out;
}

std::vector<PositionDistribution> simulate(const GeneralizedWalk& w, const DensityBlockState& rho0, int steps,
                                           const SimulationOptions& opts) {
  if (steps < 0) throw InvalidArgument("simulate: negative step count");
  std::vector<PositionDistribution> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  DensityBlockState rho = rho0;
  out.push_back(position_distribution(rho, 0));
  for (int t = 1; t <= steps; ++t) {
    rho = channel_step(w, rho, opts.coherence_tol);
    if (rho.block_count() > opts.max_blocks) {
      throw ResourceLimitError("simulate: " + std::to_string(rho.block_count()) + " density blocks at step " +
                               std::to_string(t) + " exceed the cap of " + std::to_string(opts.max_blocks));
    }
    out.push_back(position_distribution(rho, t));
  }
  return out;
}

DensityBlockState default_initial_state(int lattice_dim, int coin_dim) {
  return DensityBlockState::localized(lattice_dim, CoinMatrix::Identity(coin_dim, coin_dim) / coin_dim);
}

MixedInitialState default_mixture(int coin_dim) {
  MixedInitialState out;
  for (int i = 0; i < coin_dim; ++i) {
    PureState s;
    s.amplitudes[Offset{}] = CoinVector::Unit(coin_dim, i);
    out.components.emplace_back(1.0 / coin_dim, std::move(s));
  }
  return out;
}

Moments moments(const PositionDistribution& p) {
  const int s = p.lattice_dim;
  Moments m{RealVector::Zero(s), RealMatrix::Zero(s, s)};
  double total = 0.0;
  for (const auto& [x, q] : p.p) {
    total += q;
    for (int a = 0; a < s; ++a) m.mean(a) += q * static_cast<double>(x[a]);
  }
  if (total > 0.0) m.mean /= total;
  for (const auto& [x, q] : p.p) {
    RealVector dx(s);
    for (int a = 0; a < s; ++a) dx(a) = static_cast<double>(x[a]) - m.mean(a);
    m.covariance += q * dx * dx.transpose();
  }
  if (total > 0.0) m.covariance /= total;
  return m;
}

PositionDistribution neighbor_average(const PositionDistribution& p) {
  if (p.lattice_dim != 1) throw InvalidArgument("neighbor_average: only defined for one-dimensional distributions");
  PositionDistribution out;
  out.lattice_dim = 1;
  out.t = p.t;
  if (p.p.empty()) return out;
  const std::int64_t lo = p.p.begin()->first[0] - 1;
  const std::int64_t hi = p.p.rbegin()->first[0];
  for (std::int64_t x = lo; x <= hi; ++x) out.p[Offset{x}] = 0.5 * (p.at(Offset{x}) + p.at(Offset{x + 1}));
  return out;
}

double total_variation(const PositionDistribution& a, const PositionDistribution& b) {
  double sum = 0.0;
  for (const auto& [x, q] : a.p) sum += std::abs(q - b.at(x));
  for (const auto& [x, q] : b.p) {
    if (!a.p.contains(x)) sum += std::abs(q);
  }
  return 0.5 * sum;
}

}  // namespace qwalk
