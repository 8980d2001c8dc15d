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

#ifndef QWALK_WALK_CHANNEL_HPP
#define QWALK_WALK_CHANNEL_HPP

#include <string>
#include <vector>

#include "qwalk/banded_operator.hpp"
#include "qwalk/block_table.hpp"
#include "qwalk/coin_ensemble.hpp"

namespace qwalk {

/// Shift vectors v_i: internal state i moves by v_i per step.
class ShiftTable {
 public:
  ShiftTable(int lattice_dim, std::vector<Offset> vectors);

  int lattice_dim() const { return lattice_dim_; }
  int coin_dim() const { return static_cast<int>(vectors_.size()); }
  const Offset& operator[](int i) const { return vectors_[static_cast<std::size_t>(i)]; }
  const std::vector<Offset>& vectors() const { return vectors_; }

  /// v = (+1, -1) on the line.
  static ShiftTable line();
  /// (up, down, left, right) = (1,0), (-1,0), (0,-1), (0,1).
  static ShiftTable square();

 private:
  int lattice_dim_;
  std::vector<Offset> vectors_;
};

/// Numerical witness that some power of the walk contracts {1}^perp.
///
/// verdict is "irreducible_n1", "spectral_n<power>" or "unknown". For a
/// certified walk, |W^power(A)| <= (1 - eta)|A| for every A orthogonal to 1.
struct ContractivityCertificate {
  std::string verdict = "unknown";
  int power = 0;
  double eta = 0.0;
  double mean_coin_norm = 1.0;
  /// Number of traceless directions on which the twirl is (numerically) isometric.
  int unimodular_count = 0;
  /// One minus the largest remaining singular value squared of the twirl on traceless matrices.
  double twirl_gap = 0.0;
  /// Smallest singular value of the shift-mixing map at the certified power.
  double mixing_sigma = 0.0;

  bool certified() const { return power > 0; }
};

/// The averaged walk superoperator W(A) = S^* C(A) S in the Heisenberg picture.
class WalkChannel {
 public:
  WalkChannel(ShiftTable shift, CoinEnsemble ensemble);

  int lattice_dim() const { return shift_.lattice_dim(); }
  int coin_dim() const { return shift_.coin_dim(); }
  const ShiftTable& shift() const { return shift_; }
  const CoinEnsemble& ensemble() const { return ensemble_; }
  const CoinMatrix& mean_unitary() const { return mean_unitary_; }
  /// max over i, j of |v_j - v_i|_inf.
  std::int64_t max_offset_growth() const { return max_growth_; }

  /// Heisenberg and Schrodinger twirls on column-major vec.
  const CoinMatrix& heisenberg_twirl() const { return twirl_h_; }
  const CoinMatrix& schrodinger_twirl() const { return twirl_s_; }

  /// Relocation classes of the shift stage: element (i,j) moves by v_j - v_i.
  const std::vector<ScatterClass<Offset>>& shift_classes() const { return shift_classes_; }

 private:
  ShiftTable shift_;
  CoinEnsemble ensemble_;
  CoinMatrix mean_unitary_;
  CoinMatrix twirl_h_;
  CoinMatrix twirl_s_;
  std::int64_t max_growth_ = 0;
  std::vector<ScatterClass<Offset>> shift_classes_;
};

BandedOperator apply_heisenberg(const WalkChannel& w, const BandedOperator& a);

/// Only the coin stage: twirl on the offset-0 block, mean-coin conjugation elsewhere.
BandedOperator apply_coin_stage(const WalkChannel& w, const BandedOperator& a);
/// Only the shift stage: element (i,j) at offset x moves to x + v_j - v_i.
BandedOperator apply_shift_stage(const WalkChannel& w, const BandedOperator& a);

struct ShiftIndex {
  Offset index;
  RealVector mean_shift;
};

ShiftIndex shift_index(const WalkChannel& w);

/// Diagonal matrices diag(v_{i,alpha}), one per lattice axis.
std::vector<CoinMatrix> lambda_matrices(const ShiftTable& shift);
std::vector<CoinMatrix> lambda_matrices(const WalkChannel& w);

inline constexpr double kCertificateTolerance = 1e-8;

ContractivityCertificate certify_contractive(const WalkChannel& w, double tau = kCertificateTolerance,
                                             int max_power = 8);

/// Sequential application W_n o ... o W_1; factors[0] acts first on the observable.
class GeneralizedWalk {
 public:
  explicit GeneralizedWalk(std::vector<WalkChannel> factors);
  GeneralizedWalk(WalkChannel single);  // NOLINT: implicit by design

  int lattice_dim() const { return factors_.front().lattice_dim(); }
  int coin_dim() const { return factors_.front().coin_dim(); }
  std::size_t size() const { return factors_.size(); }
  const WalkChannel& factor(std::size_t i) const { return factors_[i]; }
  const std::vector<WalkChannel>& factors() const { return factors_; }

 private:
  std::vector<WalkChannel> factors_;
};

GeneralizedWalk compose(std::vector<WalkChannel> walks);

BandedOperator apply_heisenberg(const GeneralizedWalk& w, const BandedOperator& a);

/// A single factor keeps its own certificate. A composition is certified when
/// some run of r equal consecutive factors has a factor certificate of power
/// p <= r; power is then 1, or 2 if the run wraps around the end. A product of
/// n copies of one walk gets power ceil(p / n). verdict and eta are those of
/// the factor.
ContractivityCertificate certify_contractive(const GeneralizedWalk& w, double tau = kCertificateTolerance);

}  // namespace qwalk

#endif  // QWALK_WALK_CHANNEL_HPP
