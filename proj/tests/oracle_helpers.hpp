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

// Reference computations used only by the tests. They share no code paths
// with the library beyond the public data types.
#ifndef QWALK_TESTS_ORACLE_HELPERS_HPP
#define QWALK_TESTS_ORACLE_HELPERS_HPP

#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "qwalk/coin_ensemble.hpp"
#include "qwalk/walk_channel.hpp"

namespace qwalk::oracle {

/// vec(M^* X M) = (M^T (x) M^*) vec(X), column-major.
inline CoinMatrix conjugation_matrix(const CoinMatrix& m) {
  const auto d = m.rows();
  CoinMatrix out(d * d, d * d);
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = 0; b < d; ++b) out.block(a * d, b * d, d, d) = m(b, a) * m.adjoint();
  }
  return out;
}

inline CoinMatrix vec(const CoinMatrix& x) {
  return Eigen::Map<const CoinMatrix>(x.data(), x.size(), 1);
}

inline CoinMatrix unvec(const CoinMatrix& v, Eigen::Index d) {
  return Eigen::Map<const CoinMatrix>(v.data(), d, d);
}

struct MomentumResult {
  RealMatrix D;
  RealVector velocity;
};

/// Diffusion matrix from the momentum-space resolvent of the first-order
/// equation, integrated with the trapezoid rule on an n^s periodic grid.
///
/// The first-order solution A' obeys A'(p) = R_p [i L + S_p^* K(Z) S_p] with
/// R_p = (1 - G_p)^{-1}, G_p(X) = (U S_p)^* X (U S_p), U the mean coin,
/// K = twirl - Ad_U and Z the zero mode of A'. Averaging over p gives a
/// d^2-dimensional system for Z, closed by tr Z = 0.
inline MomentumResult momentum_diffusion(const ShiftTable& shift, const CoinEnsemble& ens, int n) {
  const int s = shift.lattice_dim();
  const int d = shift.coin_dim();
  const int dd = d * d;
  CoinMatrix mean = CoinMatrix::Zero(d, d);
  CoinMatrix twirl = CoinMatrix::Zero(dd, dd);
  for (const auto& a : ens.atoms()) {
    mean += a.weight * a.unitary;
    twirl += a.weight * conjugation_matrix(a.unitary);
  }
  const CoinMatrix k_map = twirl - conjugation_matrix(mean);

  RealVector v = RealVector::Zero(s);
  for (int i = 0; i < d; ++i) {
    for (int a = 0; a < s; ++a) v(a) += static_cast<double>(shift[i][a]) / d;
  }
  std::vector<CoinMatrix> lam(static_cast<std::size_t>(s), CoinMatrix::Zero(d, d));
  for (int a = 0; a < s; ++a) {
    for (int i = 0; i < d; ++i) lam[static_cast<std::size_t>(a)](i, i) = static_cast<double>(shift[i][a]) - v(a);
  }

  CoinMatrix r_mean = CoinMatrix::Zero(dd, dd);
  CoinMatrix m_mean = CoinMatrix::Zero(dd, dd);
  std::vector<int> idx(static_cast<std::size_t>(s), 0);
  const double cell = 2.0 * std::numbers::pi / n;
  long total = 1;
  for (int a = 0; a < s; ++a) total *= n;
  for (long flat = 0; flat < total; ++flat) {
    long rem = flat;
    std::vector<double> p(static_cast<std::size_t>(s));
    for (int a = 0; a < s; ++a) {
      p[static_cast<std::size_t>(a)] = cell * static_cast<double>(rem % n);
      rem /= n;
    }
    CoinMatrix sp = CoinMatrix::Zero(d, d);
    for (int i = 0; i < d; ++i) {
      double phase = 0.0;
      for (int a = 0; a < s; ++a) phase += p[static_cast<std::size_t>(a)] * static_cast<double>(shift[i][a]);
      sp(i, i) = std::polar(1.0, phase);
    }
    const CoinMatrix g = conjugation_matrix(mean * sp);
    const CoinMatrix r = (CoinMatrix::Identity(dd, dd) - g).partialPivLu().inverse();
    r_mean += r;
    m_mean += r * conjugation_matrix(sp);
  }
  r_mean /= static_cast<double>(total);
  m_mean /= static_cast<double>(total);
  const CoinMatrix system = CoinMatrix::Identity(dd, dd) - m_mean * k_map;

  CoinMatrix aug = CoinMatrix::Zero(dd + 1, dd);
  aug.topRows(dd) = system;
  for (int i = 0; i < d; ++i) aug(dd, i * d + i) = 1.0;
  std::vector<CoinMatrix> z;
  for (int a = 0; a < s; ++a) {
    CoinMatrix rhs = CoinMatrix::Zero(dd + 1, 1);
    rhs.topRows(dd) = Complex(0, 1) * r_mean * vec(lam[static_cast<std::size_t>(a)]);
    const CoinMatrix sol = aug.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(rhs);
    z.push_back(unvec(sol, d));
  }
  MomentumResult out{RealMatrix::Zero(s, s), v};
  const Complex i(0, 1);
  for (int a = 0; a < s; ++a) {
    for (int b = 0; b < s; ++b) {
      const auto ua = static_cast<std::size_t>(a), ub = static_cast<std::size_t>(b);
      const Complex val = -(lam[ua] * lam[ub]).trace() / double(d) -
                          i / double(d) * ((z[ua] * lam[ub]).trace() + (z[ub] * lam[ua]).trace());
      out.D(a, b) = val.real();
    }
  }
  return out;
}

/// Position distribution of a pure state under a fixed coin on the line,
/// coin then shift, by direct amplitude propagation.
inline std::map<long, double> pure_walk_distribution(const ShiftTable& shift, const CoinMatrix& coin,
                                                     const CoinVector& psi0, int steps) {
  const int d = shift.coin_dim();
  std::map<long, CoinVector> psi{{0L, psi0}};
  for (int t = 0; t < steps; ++t) {
    std::map<long, CoinVector> next;
    for (const auto& [x, amp] : psi) {
      const CoinVector c = coin * amp;
      for (int i = 0; i < d; ++i) {
        auto [it, fresh] = next.try_emplace(x + shift[i][0], CoinVector::Zero(d));
        it->second(i) += c(i);
      }
    }
    psi = std::move(next);
  }
  std::map<long, double> out;
  for (const auto& [x, amp] : psi) out[x] = amp.squaredNorm();
  return out;
}

inline double binomial_probability(int t, long x) {
  if ((t + x) % 2 != 0 || std::labs(x) > t) return 0.0;
  const int k = static_cast<int>((t + x) / 2);
  return std::exp(std::lgamma(t + 1.0) - std::lgamma(k + 1.0) - std::lgamma(t - k + 1.0) - t * std::log(2.0));
}

/// Symmetric three-point phase measure a*delta_0 + (1-a)/2 (delta_phi + delta_-phi)
/// with E cos(phi) = r1 and E cos(2 phi) = r2. Returns (weight, phase) pairs.
inline std::vector<std::pair<double, double>> three_point_phases(double r1, double r2) {
  // With c = cos(phi): r1 = a + (1-a) c and r2 = a + (1-a)(2c^2 - 1).
  // Eliminating c leaves a linear equation for a.
  const double a = (2.0 * r1 * r1 - 1.0 - r2) / (4.0 * r1 - 3.0 - r2);
  const double cphi = (r1 - a) / (1.0 - a);
  const double phi = std::acos(cphi);
  return {{a, 0.0}, {(1.0 - a) / 2, phi}, {(1.0 - a) / 2, -phi}};
}

}  // namespace qwalk::oracle

#endif  // QWALK_TESTS_ORACLE_HELPERS_HPP
