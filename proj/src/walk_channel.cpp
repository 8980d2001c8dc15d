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

#include "qwalk/walk_channel.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <map>

#include "coin_kernel.hpp"

namespace qwalk {

ShiftTable::ShiftTable(int lattice_dim, std::vector<Offset> vectors)
    : lattice_dim_(lattice_dim), vectors_(std::move(vectors)) {
  if (lattice_dim < 1 || lattice_dim > kMaxLatticeDim) {
    throw InvalidArgument("ShiftTable: lattice dimension out of range");
  }
  if (vectors_.empty()) throw InvalidArgument("ShiftTable: no shift vectors");
  for (const auto& v : vectors_) {
    for (int a = lattice_dim; a < kMaxLatticeDim; ++a) {
      if (v[a] != 0) throw InvalidArgument("ShiftTable: vector has coordinates beyond lattice_dim");
    }
  }
}

ShiftTable ShiftTable::line() { return ShiftTable(1, {{1}, {-1}}); }

ShiftTable ShiftTable::square() { return ShiftTable(2, {{1, 0}, {-1, 0}, {0, -1}, {0, 1}}); }

WalkChannel::WalkChannel(ShiftTable shift, CoinEnsemble ensemble)
    : shift_(std::move(shift)), ensemble_(std::move(ensemble)) {
  if (shift_.coin_dim() != ensemble_.coin_dim()) {
    throw InvalidArgument("WalkChannel: shift table has " + std::to_string(shift_.coin_dim()) +
                          " vectors but the coin dimension is " + std::to_string(ensemble_.coin_dim()));
  }
  mean_unitary_ = qwalk::mean_unitary(ensemble_);
  twirl_h_ = twirl_superoperator(ensemble_, Picture::heisenberg);
  twirl_s_ = twirl_superoperator(ensemble_, Picture::schrodinger);

  const int d = coin_dim();
  std::map<Offset, std::vector<int>> classes;
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i) {
      const Offset disp = shift_[j] - shift_[i];
      for (int a = 0; a < kMaxLatticeDim; ++a) max_growth_ = std::max(max_growth_, std::abs(disp[a]));
      classes[disp].push_back(i + j * d);
    }
  }
  for (auto& [disp, entries] : classes) shift_classes_.push_back({disp, std::move(entries)});
}

BandedOperator apply_coin_stage(const WalkChannel& w, const BandedOperator& a) {
  if (a.lattice_dim() != w.lattice_dim() || a.coin_dim() != w.coin_dim()) {
    throw InvalidArgument("apply_heisenberg: operator and walk dimensions differ");
  }
  const int d = w.coin_dim();
  const auto n = static_cast<Eigen::Index>(a.block_count());
  BlockTable<Offset> out = a.table();
  Eigen::Map<const CoinMatrix> src(a.table().data(), d * d, n);
  Eigen::Map<CoinMatrix> dst(out.data(), d * d, n);
  detail::Conjugator(w.mean_unitary()).apply_all(a.table().data(), out.data(), a.block_count());
  if (auto k0 = a.table().find(Offset{})) {
    const auto k = static_cast<Eigen::Index>(*k0);
    dst.col(k).noalias() = w.heisenberg_twirl() * src.col(k);
  }
  return BandedOperator::from_table(a.lattice_dim(), std::move(out));
}

BandedOperator apply_shift_stage(const WalkChannel& w, const BandedOperator& a) {
  if (a.lattice_dim() != w.lattice_dim() || a.coin_dim() != w.coin_dim()) {
    throw InvalidArgument("apply_heisenberg: operator and walk dimensions differ");
  }
  auto table = scatter_merge<Offset>(a.table(), w.shift_classes());
  return BandedOperator::from_table(a.lattice_dim(), std::move(table));
}

namespace {

// Shift stage followed by pruning, gathering each output block through a
// dense offset index over the bounding box. Falls back to the sorted merge
// when the box is much larger than the support.
BlockTable<Offset> shift_and_prune(const WalkChannel& w, const BlockTable<Offset>& src, double tol) {
  const int d = w.coin_dim();
  const std::size_t n = src.size();
  BlockTable<Offset> out(d);
  if (n == 0) return out;
  const auto& classes = w.shift_classes();
  const std::int64_t g = w.max_offset_growth();
  const int s = w.lattice_dim();

  std::array<std::int64_t, kMaxLatticeDim> lo{}, hi{}, ext{};
  for (int a = 0; a < kMaxLatticeDim; ++a) {
    lo[a] = hi[a] = src.key(0)[a];
    for (std::size_t k = 1; k < n; ++k) {
      lo[a] = std::min(lo[a], src.key(k)[a]);
      hi[a] = std::max(hi[a], src.key(k)[a]);
    }
    // Index covers the support widened by 2g; outputs lie within g.
    if (a < s) {
      lo[a] -= 2 * g;
      hi[a] += 2 * g;
    }
    ext[a] = hi[a] - lo[a] + 1;
  }
  const double volume = static_cast<double>(ext[0]) * static_cast<double>(ext[1]) * static_cast<double>(ext[2]);
  if (volume > 16.0 * static_cast<double>(n) + 65536.0 || n >= (std::size_t{1} << 31)) {
    out = scatter_merge<Offset>(src, classes);
    out.prune(tol);
    return out;
  }
  auto cell = [&](const Offset& x) {
    return ((x[0] - lo[0]) * ext[1] + (x[1] - lo[1])) * ext[2] + (x[2] - lo[2]);
  };
  std::vector<std::int32_t> index(static_cast<std::size_t>(volume), -1);
  for (std::size_t k = 0; k < n; ++k) index[static_cast<std::size_t>(cell(src.key(k)))] = static_cast<std::int32_t>(k);
  std::vector<std::int64_t> delta;
  for (const auto& c : classes) delta.push_back(((c.displacement[0]) * ext[1] + c.displacement[1]) * ext[2] + c.displacement[2]);

  out.reserve(n + n / 2);
  const double tol2 = tol * tol;
  CoinVector buf(d * d);
  std::array<std::int64_t, kMaxLatticeDim> from{}, to{};
  for (int a = 0; a < kMaxLatticeDim; ++a) {
    from[a] = a < s ? lo[a] + g : lo[a];
    to[a] = a < s ? hi[a] - g : hi[a];
  }
  Offset z;
  for (z[0] = from[0]; z[0] <= to[0]; ++z[0]) {
    for (z[1] = from[1]; z[1] <= to[1]; ++z[1]) {
      for (z[2] = from[2]; z[2] <= to[2]; ++z[2]) {
        const std::int64_t here = cell(z);
        bool hit = false;
        for (std::size_t c = 0; c < classes.size(); ++c) {
          const std::int32_t k = index[static_cast<std::size_t>(here - delta[c])];
          if (k < 0) continue;
          if (!hit) {
            buf.setZero();
            hit = true;
          }
          const Complex* blk = src.data() + static_cast<std::size_t>(k) * src.stride();
          for (int e : classes[c].entries) buf(e) = blk[e];
        }
        if (hit && buf.squaredNorm() >= tol2) out.append_raw(z, buf.data());
      }
    }
  }
  return out;
}

}  // namespace

BandedOperator apply_heisenberg(const WalkChannel& w, const BandedOperator& a) {
  return BandedOperator::from_table(a.lattice_dim(),
                                    shift_and_prune(w, apply_coin_stage(w, a).table(), kDefaultDropTolerance));
}

ShiftIndex shift_index(const WalkChannel& w) {
  ShiftIndex out{Offset{}, RealVector::Zero(w.lattice_dim())};
  for (const auto& v : w.shift().vectors()) out.index = out.index + v;
  for (int a = 0; a < w.lattice_dim(); ++a) {
    out.mean_shift(a) = static_cast<double>(out.index[a]) / w.coin_dim();
  }
  return out;
}

std::vector<CoinMatrix> lambda_matrices(const ShiftTable& shift) {
  std::vector<CoinMatrix> out;
  const int d = shift.coin_dim();
  for (int a = 0; a < shift.lattice_dim(); ++a) {
    CoinMatrix m = CoinMatrix::Zero(d, d);
    for (int i = 0; i < d; ++i) m(i, i) = static_cast<double>(shift[i][a]);
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<CoinMatrix> lambda_matrices(const WalkChannel& w) { return lambda_matrices(w.shift()); }

GeneralizedWalk::GeneralizedWalk(std::vector<WalkChannel> factors) : factors_(std::move(factors)) {
  if (factors_.empty()) throw InvalidArgument("compose: empty walk list");
  for (const auto& f : factors_) {
    if (f.lattice_dim() != lattice_dim() || f.coin_dim() != coin_dim()) {
      throw InvalidArgument("compose: walks have mismatched lattice or coin dimensions");
    }
  }
}

GeneralizedWalk::GeneralizedWalk(WalkChannel single) : GeneralizedWalk(std::vector<WalkChannel>{std::move(single)}) {}

GeneralizedWalk compose(std::vector<WalkChannel> walks) { return GeneralizedWalk(std::move(walks)); }

BandedOperator apply_heisenberg(const GeneralizedWalk& w, const BandedOperator& a) {
  BandedOperator out = a;
  for (const auto& f : w.factors()) out = apply_heisenberg(f, out);
  return out;
}

namespace {

bool same_walk(const WalkChannel& a, const WalkChannel& b) {
  if (a.shift().vectors() != b.shift().vectors()) return false;
  const auto& x = a.ensemble().atoms();
  const auto& y = b.ensemble().atoms();
  if (x.size() != y.size()) return false;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (x[k].weight != y[k].weight || x[k].unitary != y[k].unitary) return false;
  }
  return true;
}

}  // namespace

ContractivityCertificate certify_contractive(const GeneralizedWalk& w, double tau) {
  if (w.size() == 1) return certify_contractive(w.factor(0), tau);
  const std::size_t n = w.size();
  // Factors are contractions preserving {1}^perp, so any window of r equal
  // factors certified at power p <= r makes the whole product contract. A
  // window that wraps around the end of the product appears in its square.
  std::vector<bool> equal_next(n);
  bool all_equal = true;
  for (std::size_t i = 0; i < n; ++i) {
    equal_next[i] = same_walk(w.factor(i), w.factor((i + 1) % n));
    all_equal = all_equal && equal_next[i];
  }
  ContractivityCertificate best;
  best.mean_coin_norm = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    ContractivityCertificate c = certify_contractive(w.factor(i), tau);
    best.mean_coin_norm = std::min(best.mean_coin_norm, c.mean_coin_norm);
    if (!c.certified()) continue;
    std::size_t linear = 1;
    while (i + linear < n && equal_next[i + linear - 1]) ++linear;
    std::size_t cyclic = linear;
    while (cyclic < n && equal_next[(i + cyclic - 1) % n]) ++cyclic;
    int power = 0;
    if (all_equal) {
      power = static_cast<int>((static_cast<std::size_t>(c.power) + n - 1) / n);
    } else if (linear >= static_cast<std::size_t>(c.power)) {
      power = 1;
    } else if (cyclic >= static_cast<std::size_t>(c.power)) {
      power = 2;
    } else {
      continue;
    }
    if (!best.certified() || power < best.power || (power == best.power && c.eta > best.eta)) {
      const double mean_norm = best.mean_coin_norm;
      best = c;
      best.power = power;
      best.mean_coin_norm = mean_norm;
    }
  }
  return best;
}

}  // namespace qwalk
