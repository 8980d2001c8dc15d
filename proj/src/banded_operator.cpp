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

#include "qwalk/banded_operator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qwalk {

BandedOperator::BandedOperator(int lattice_dim, int coin_dim) : lattice_dim_(lattice_dim), table_(coin_dim) {
  if (lattice_dim < 1 || lattice_dim > kMaxLatticeDim) {
    throw InvalidArgument("BandedOperator: lattice dimension must be in [1, " +
                          std::to_string(kMaxLatticeDim) + "]");
  }
  if (coin_dim < 1) throw InvalidArgument("BandedOperator: coin dimension must be positive");
}

BandedOperator BandedOperator::from_blocks(int lattice_dim, int coin_dim,
                                           std::vector<std::pair<Offset, CoinMatrix>> blocks) {
  BandedOperator out(lattice_dim, coin_dim);
  std::stable_sort(blocks.begin(), blocks.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [x, m] : blocks) {
    if (m.rows() != coin_dim || m.cols() != coin_dim) {
      throw InvalidArgument("BandedOperator: block has wrong dimension");
    }
    for (int a = lattice_dim; a < kMaxLatticeDim; ++a) {
      if (x[a] != 0) throw InvalidArgument("BandedOperator: offset has coordinates beyond lattice_dim");
    }
    if (!out.table_.empty() && out.table_.key(out.table_.size() - 1) == x) {
      out.table_.block(out.table_.size() - 1) += m;
    } else {
      out.table_.append(x, m);
    }
  }
  return out;
}

BandedOperator BandedOperator::identity(int lattice_dim, int coin_dim) {
  return local(lattice_dim, CoinMatrix::Identity(coin_dim, coin_dim));
}

BandedOperator BandedOperator::local(int lattice_dim, const CoinMatrix& block) {
  if (block.rows() != block.cols()) throw InvalidArgument("BandedOperator: block must be square");
  BandedOperator out(lattice_dim, static_cast<int>(block.rows()));
  out.table_.append(Offset{}, block);
  return out;
}

BandedOperator BandedOperator::from_table(int lattice_dim, BlockTable<Offset> table) {
  BandedOperator out(lattice_dim, table.dim());
  out.table_ = std::move(table);
  return out;
}

void BandedOperator::check_compatible(const BandedOperator& other) const {
  if (lattice_dim_ != other.lattice_dim_ || coin_dim() != other.coin_dim()) {
    throw InvalidArgument("BandedOperator: lattice or coin dimension mismatch");
  }
}

CoinMatrix BandedOperator::block_at(const Offset& x) const {
  if (auto k = table_.find(x)) return table_.block(*k);
  return CoinMatrix::Zero(coin_dim(), coin_dim());
}

BandedOperator BandedOperator::adjoint() const {
  BandedOperator out(lattice_dim_, coin_dim());
  out.table_.reserve(block_count());
  for (std::size_t k = block_count(); k-- > 0;) {
    out.table_.append(-offset(k), block(k).adjoint());
  }
  return out;
}

BandedOperator BandedOperator::times_right(const CoinMatrix& m) const {
  if (m.rows() != coin_dim() || m.cols() != coin_dim()) {
    throw InvalidArgument("BandedOperator::times_right: dimension mismatch");
  }
  BandedOperator out(lattice_dim_, coin_dim());
  out.table_.reserve(block_count());
  for (std::size_t k = 0; k < block_count(); ++k) out.table_.append(offset(k), block(k) * m);
  return out;
}

BandedOperator BandedOperator::operator+(const BandedOperator& other) const {
  check_compatible(other);
  return from_table(lattice_dim_, linear_combination(Complex(1.0), table_, Complex(1.0), other.table_));
}

BandedOperator& BandedOperator::operator+=(const BandedOperator& other) {
  check_compatible(other);
  if (!table_.add_in_place(other.table_)) {
    table_ = linear_combination(Complex(1.0), table_, Complex(1.0), other.table_);
  }
  return *this;
}

BandedOperator BandedOperator::operator-(const BandedOperator& other) const {
  check_compatible(other);
  return from_table(lattice_dim_, linear_combination(Complex(1.0), table_, Complex(-1.0), other.table_));
}

BandedOperator BandedOperator::operator*(Complex alpha) const {
  BandedOperator out = *this;
  for (std::size_t k = 0; k < out.block_count(); ++k) out.table_.block(k) *= alpha;
  return out;
}

std::pair<std::int64_t, std::int64_t> BandedOperator::support_range(int axis) const {
  if (table_.empty()) return {0, 0};
  std::int64_t lo = offset(0)[axis], hi = lo;
  for (const auto& x : table_.keys()) {
    lo = std::min(lo, x[axis]);
    hi = std::max(hi, x[axis]);
  }
  return {lo, hi};
}

BandedOperator BandedOperator::pruned(double tol) const {
  BandedOperator out = *this;
  out.table_.prune(tol);
  return out;
}

Complex hs_inner(const BandedOperator& a, const BandedOperator& b) {
  if (a.lattice_dim() != b.lattice_dim() || a.coin_dim() != b.coin_dim()) {
    throw InvalidArgument("hs_inner: lattice or coin dimension mismatch");
  }
  Complex sum(0.0, 0.0);
  std::size_t i = 0, j = 0;
  while (i < a.block_count() && j < b.block_count()) {
    if (a.offset(i) < b.offset(j)) {
      ++i;
    } else if (b.offset(j) < a.offset(i)) {
      ++j;
    } else {
      // tr(A^* B) = sum of conj(a_kl) b_kl
      sum += a.block(i).cwiseProduct(b.block(j).conjugate()).sum();
      ++i;
      ++j;
    }
  }
  return std::conj(sum) / static_cast<double>(a.coin_dim());
}

double hs_norm(const BandedOperator& a) {
  double sum = 0.0;
  for (std::size_t k = 0; k < a.block_count(); ++k) sum += a.block(k).squaredNorm();
  return std::sqrt(sum / a.coin_dim());
}

CoinMatrix zero_mode(const BandedOperator& a) { return a.block_at(Offset{}); }

CoinMatrix evaluate_at_momentum(const BandedOperator& a, std::span<const double> p) {
  if (p.size() != static_cast<std::size_t>(a.lattice_dim())) {
    throw InvalidArgument("evaluate_at_momentum: momentum has wrong length");
  }
  CoinMatrix out = CoinMatrix::Zero(a.coin_dim(), a.coin_dim());
  for (std::size_t k = 0; k < a.block_count(); ++k) {
    double phase = 0.0;
    for (int ax = 0; ax < a.lattice_dim(); ++ax) phase += p[static_cast<std::size_t>(ax)] * a.offset(k)[ax];
    out += std::polar(1.0, phase) * a.block(k);
  }
  return out;
}

BandedOperator project_off_identity(const BandedOperator& a) {
  const Complex overlap = zero_mode(a).trace() / static_cast<double>(a.coin_dim());
  BandedOperator id = BandedOperator::identity(a.lattice_dim(), a.coin_dim());
  return (a - id * overlap).pruned(0.0);
}

CoinMatrix pauli_x() {
  CoinMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

CoinMatrix pauli_y() {
  CoinMatrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}

CoinMatrix pauli_z() {
  CoinMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

CoinMatrix hadamard() {
  CoinMatrix m(2, 2);
  m << 1, 1, 1, -1;
  return m / std::numbers::sqrt2;
}

double operator_norm(const CoinMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<CoinMatrix> svd(m);
  return svd.singularValues()(0);
}

}  // namespace qwalk
