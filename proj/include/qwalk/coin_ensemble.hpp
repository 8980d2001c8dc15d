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

#ifndef QWALK_COIN_ENSEMBLE_HPP
#define QWALK_COIN_ENSEMBLE_HPP

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "qwalk/types.hpp"

namespace qwalk {

struct CoinAtom {
  double weight;
  CoinMatrix unitary;
};

/// Finitely supported probability measure on coin unitaries.
class CoinEnsemble {
 public:
  /// Validates weights (positive, summing to 1 within 1e-12) and unitarity (1e-10).
  explicit CoinEnsemble(std::vector<CoinAtom> atoms);

  int coin_dim() const { return static_cast<int>(atoms_.front().unitary.rows()); }
  std::size_t size() const { return atoms_.size(); }
  const std::vector<CoinAtom>& atoms() const { return atoms_; }

 private:
  std::vector<CoinAtom> atoms_;
};

enum class Picture { heisenberg, schrodinger };

/// Sum of w_k U_k.
CoinMatrix mean_unitary(const CoinEnsemble& e);

/// Heisenberg: sum w_k U_k^* A U_k. Schrodinger: sum w_k U_k A U_k^*.
CoinMatrix twirl(const CoinEnsemble& e, const CoinMatrix& a, Picture picture);

/// The twirl as a d^2 x d^2 matrix acting on column-major vec(A).
CoinMatrix twirl_superoperator(const CoinEnsemble& e, Picture picture);

/// True iff the unital algebra generated by the set is the full matrix algebra.
bool is_irreducible(std::span<const CoinMatrix> generators);

/// All U_j^* U_k over atom pairs, deduplicated within 1e-12.
std::vector<CoinMatrix> pair_products(const CoinEnsemble& e);

struct PhaseMoments {
  double r1;
  double r2;
  double theta1;
  double theta2;
};

/// Moments of the phase measure for atoms of the form exp(i phi sigma_z) H.
PhaseMoments phase_moments(const CoinEnsemble& e);

// Family descriptors.

/// H with probability w, sigma_x otherwise.
struct BrokenLinks {
  double w;
};

/// exp(i phi sigma_z) H with phi uniform on [-delta, delta].
struct DephasingUniform {
  double delta;
  int n_nodes = 64;
};

/// U_r = [[cos r, sin r], [sin r, -cos r]] with density ~ exp(-(r-r0)^2/sigma^2) on [r0-pi, r0+pi].
struct GaussianCoin {
  double r0;
  double sigma;
  int n_nodes = 64;
};

/// H (x) H with probability 1-w, sigma_x (x) 1 with probability w.
struct TwoDim {
  double w;
};

struct CustomEnsemble {
  std::vector<CoinAtom> atoms;
};

using EnsembleSpec = std::variant<BrokenLinks, DephasingUniform, GaussianCoin, TwoDim, CustomEnsemble>;

CoinEnsemble build_ensemble(const EnsembleSpec& spec);

/// Dephased Hadamard atoms exp(i phi sigma_z) H with the given (weight, phi) pairs.
/// Weights are renormalized.
CoinEnsemble dephasing_ensemble(std::span<const std::pair<double, double>> weighted_phases);

/// U_r of the Gaussian family.
CoinMatrix reflection_coin(double r);

/// Parses "H", "-H", "X", "Y", "Z", "I" into a 2x2 unitary.
CoinMatrix named_coin(const std::string& name);

/// Gauss-Legendre nodes and weights on [a, b].
std::vector<std::pair<double, double>> gauss_legendre(double a, double b, int n);

}  // namespace qwalk

#endif  // QWALK_COIN_ENSEMBLE_HPP
