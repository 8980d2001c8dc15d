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

#include "qwalk/walk_channel.hpp"

// The n-step bound. Split A orthogonal to 1 into its offset-0 block a and the
// rest. One step loses at least h * (|P a|^2 + |rest|^2) in squared norm, where
// P projects off the directions N on which the twirl is isometric and
// h = min(twirl gap, 1 - |U~|^4). If every step loses little, the offset-0
// block evolves like L = (keep v_i = v_j entries) o T, so the linear map
//   Psi_n(a) = (P L^k a for k < n ; (drop v_i = v_j entries) T L^k a for k < n-1)
// is small on a. A lower bound sigma on Psi_n then turns into
//   |W^n A|^2 <= (1 - h sigma^2 / (K_n^2 + sigma^2)) |A|^2,
// with K_n^2 = sum_{k<n} (k+1) + sum_{k<n-1} (k+2) from Cauchy-Schwarz.

namespace qwalk {

namespace {

CoinMatrix traceless_basis(int d) {
  // Orthonormal basis (Euclidean on vec) of the complement of vec(1).
  const int n = d * d;
  CoinVector one = CoinVector::Zero(n);
  for (int i = 0; i < d; ++i) one(i + i * d) = 1.0 / std::sqrt(static_cast<double>(d));
  CoinMatrix proj = CoinMatrix::Identity(n, n) - one * one.adjoint();
  Eigen::SelfAdjointEigenSolver<CoinMatrix> es(proj);
  return es.eigenvectors().rightCols(n - 1);
}

bool pair_products_irreducible(const CoinEnsemble& e) {
  // Span of the pair products, grown incrementally; the generated algebra only
  // depends on the span.
  const int d = e.coin_dim();
  const int full = d * d;
  CoinMatrix basis(full, 0);
  std::vector<CoinMatrix> members;
  for (const auto& a : e.atoms()) {
    for (const auto& b : e.atoms()) {
      if (basis.cols() == full) break;
      CoinMatrix p = a.unitary.adjoint() * b.unitary;
      CoinVector v = Eigen::Map<const CoinVector>(p.data(), full);
      const double n0 = v.norm();
      for (int pass = 0; pass < 2; ++pass) v -= basis * (basis.adjoint() * v);
      if (v.norm() <= 1e-8 * n0) continue;
      basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
      basis.col(basis.cols() - 1) = v / v.norm();
      members.push_back(std::move(p));
    }
  }
  return is_irreducible(members);
}

}  // namespace

ContractivityCertificate certify_contractive(const WalkChannel& w, double tau, int max_power) {
  ContractivityCertificate cert;
  const int d = w.coin_dim();
  const int n = d * d;
  cert.mean_coin_norm = operator_norm(w.mean_unitary());
  const double q = cert.mean_coin_norm * cert.mean_coin_norm;
  if (d == 1) {
    // {1}^perp is trivial.
    cert.verdict = "irreducible_n1";
    cert.power = 1;
    cert.eta = 1.0;
    return cert;
  }

  const CoinMatrix basis = traceless_basis(d);
  const CoinMatrix& t = w.heisenberg_twirl();
  const CoinMatrix t_restricted = basis.adjoint() * t * basis;
  Eigen::SelfAdjointEigenSolver<CoinMatrix> es(t_restricted.adjoint() * t_restricted);
  const RealVector& evals = es.eigenvalues();  // ascending
  int unimodular = 0;
  for (Eigen::Index i = 0; i < evals.size(); ++i) {
    if (evals(i) >= 1.0 - tau) ++unimodular;
  }
  const int rest = n - 1 - unimodular;
  cert.unimodular_count = unimodular;
  cert.twirl_gap = rest > 0 ? 1.0 - std::max(0.0, evals(rest - 1)) : 1.0;
  const double h = std::min(cert.twirl_gap, 1.0 - q * q);

  // One-step bound: |W A| <= max(|T on traceless|, q) |A|.
  const double one_step = 1.0 - std::max(std::sqrt(std::max(0.0, evals(n - 2))), q);

  if (pair_products_irreducible(w.ensemble())) {
    cert.verdict = "irreducible_n1";
    cert.power = 1;
    cert.eta = std::max(0.0, one_step);
    cert.mixing_sigma = 1.0;
    return cert;
  }
  if (cert.mean_coin_norm > 1.0 - tau) return cert;
  if (unimodular == 0) {
    cert.verdict = "spectral_n1";
    cert.power = 1;
    cert.eta = one_step;
    cert.mixing_sigma = 1.0;
    return cert;
  }

  // Projectors in vec coordinates.
  const CoinMatrix rest_vectors = basis * es.eigenvectors().leftCols(rest);
  const CoinMatrix p_off_n = rest_vectors * rest_vectors.adjoint();
  CoinMatrix keep = CoinMatrix::Zero(n, n);
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i) {
      if (w.shift()[i] == w.shift()[j]) keep(i + j * d, i + j * d) = 1.0;
    }
  }
  const CoinMatrix drop = CoinMatrix::Identity(n, n) - keep;
  const CoinMatrix l = keep * t;

  std::vector<CoinMatrix> rows;
  CoinMatrix lk = basis;  // L^k restricted to traceless inputs
  for (int power = 1; power <= max_power; ++power) {
    // Psi_power adds P L^{power-1} and, from power 2 on, drop T L^{power-2}.
    if (power >= 2) rows.push_back(drop * t * lk);
    if (power >= 2) lk = l * lk;
    rows.push_back(p_off_n * lk);

    Eigen::Index total = 0;
    for (const auto& r : rows) total += r.rows();
    CoinMatrix stacked(total, n - 1);
    Eigen::Index at = 0;
    for (const auto& r : rows) {
      stacked.middleRows(at, r.rows()) = r;
      at += r.rows();
    }
    Eigen::JacobiSVD<CoinMatrix> svd(stacked);
    const double sigma = svd.singularValues()(n - 2);
    if (sigma >= tau) {
      double k2 = 0.0;
      for (int k = 0; k < power; ++k) k2 += k + 1;
      for (int k = 0; k + 1 < power; ++k) k2 += k + 2;
      const double s2 = sigma * sigma;
      cert.verdict = "spectral_n" + std::to_string(power);
      cert.power = power;
      cert.mixing_sigma = sigma;
      cert.eta = 1.0 - std::sqrt(1.0 - h * s2 / (k2 + s2));
      return cert;
    }
  }
  return cert;
}

}  // namespace qwalk
