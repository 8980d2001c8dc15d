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

#ifndef QWALK_BANDED_OPERATOR_HPP
#define QWALK_BANDED_OPERATOR_HPP

#include <span>
#include <utility>
#include <vector>

#include "qwalk/block_table.hpp"
#include "qwalk/types.hpp"

namespace qwalk {

/// Blocks with Frobenius norm below this are dropped after arithmetic.
inline constexpr double kDefaultDropTolerance = 1e-14;

/// Translation-invariant operator on l2(Z^s) (x) C^d with finite band.
///
/// Stored as the blocks A_{x0}: the operator's momentum representation is
/// A(p) = sum_x exp(i p.x) A_{x0}, and its position-space matrix elements are
/// A_{xy} = A_{x-y,0}. Values are immutable in the public API.
class BandedOperator {
 public:
  BandedOperator(int lattice_dim, int coin_dim);

  /// Builds from (offset, block) pairs in any order; duplicate offsets are summed.
  static BandedOperator from_blocks(int lattice_dim, int coin_dim,
                                    std::vector<std::pair<Offset, CoinMatrix>> blocks);
  static BandedOperator identity(int lattice_dim, int coin_dim);
  /// A p-independent operator: a single block at offset 0.
  static BandedOperator local(int lattice_dim, const CoinMatrix& block);

  int lattice_dim() const { return lattice_dim_; }
  int coin_dim() const { return table_.dim(); }
  std::size_t block_count() const { return table_.size(); }
  const Offset& offset(std::size_t k) const { return table_.key(k); }
  BlockTable<Offset>::ConstBlock block(std::size_t k) const { return table_.block(k); }
  const BlockTable<Offset>& table() const { return table_; }

  /// Block at the given offset, or zero when absent.
  CoinMatrix block_at(const Offset& x) const;

  /// Operator adjoint: the block at x becomes the adjoint of the block at -x.
  BandedOperator adjoint() const;
  /// Pointwise product A(p) M with a p-independent matrix M.
  BandedOperator times_right(const CoinMatrix& m) const;
  BandedOperator operator+(const BandedOperator& other) const;
  BandedOperator& operator+=(const BandedOperator& other);
  BandedOperator operator-(const BandedOperator& other) const;
  BandedOperator operator*(Complex alpha) const;
  friend BandedOperator operator*(Complex alpha, const BandedOperator& a) { return a * alpha; }

  /// Smallest and largest occupied coordinate along an axis; {0,0} when empty.
  std::pair<std::int64_t, std::int64_t> support_range(int axis) const;

  BandedOperator pruned(double tol = kDefaultDropTolerance) const;

  /// Wraps an already sorted table. Used by the walk channel.
  static BandedOperator from_table(int lattice_dim, BlockTable<Offset> table);

 private:
  void check_compatible(const BandedOperator& other) const;

  int lattice_dim_;
  BlockTable<Offset> table_;
};

/// Normalized trace inner product <A,B> = (1/d) sum_x tr(A_{x0}^* B_{x0}).
Complex hs_inner(const BandedOperator& a, const BandedOperator& b);
double hs_norm(const BandedOperator& a);

/// The p-independent term A_0, i.e. the offset-0 block.
CoinMatrix zero_mode(const BandedOperator& a);

/// A(p) = sum_x exp(i p.x) A_{x0}.
CoinMatrix evaluate_at_momentum(const BandedOperator& a, std::span<const double> p);

/// A - <1,A> 1, the component orthogonal to the identity.
BandedOperator project_off_identity(const BandedOperator& a);

// Small matrix helpers shared across modules.
CoinMatrix pauli_x();
CoinMatrix pauli_y();
CoinMatrix pauli_z();
CoinMatrix hadamard();
double operator_norm(const CoinMatrix& m);

}  // namespace qwalk

#endif  // QWALK_BANDED_OPERATOR_HPP
