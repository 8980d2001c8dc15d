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

#include "qwalk/coin_ensemble.hpp"

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

#include <unsupported/Eigen/KroneckerProduct>

#include "qwalk/banded_operator.hpp"

namespace qwalk {

namespace {

constexpr double kWeightTolerance = 1e-12;
constexpr double kUnitaryTolerance = 1e-10;
constexpr double kRankThreshold = 1e-8;
constexpr double kDedupTolerance = 1e-12;

Eigen::Map<const CoinVector> as_vec(const CoinMatrix& m) { return {m.data(), m.size()}; }

void require_probability_range(double w, const char* what) {
  if (!(w > 0.0 && w < 1.0)) {
    throw InvalidArgument(std::string(what) + ": w must lie in (0, 1), got " + std::to_string(w));
  }
}

CoinEnsemble normalized(std::vector<CoinAtom> atoms) {
  double total = 0.0;
  for (const auto& a : atoms) total += a.weight;
  for (auto& a : atoms) a.weight /= total;
  return CoinEnsemble(std::move(atoms));
}

}  // namespace

CoinEnsemble::CoinEnsemble(std::vector<CoinAtom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw InvalidArgument("CoinEnsemble: no atoms");
  const Eigen::Index d = atoms_.front().unitary.rows();
  if (d < 1) throw InvalidArgument("CoinEnsemble: empty coin matrix");
  double total = 0.0;
  for (const auto& a : atoms_) {
    if (a.unitary.rows() != d || a.unitary.cols() != d) {
      throw InvalidArgument("CoinEnsemble: atoms have inconsistent dimensions");
    }
    if (!(a.weight > 0.0) || !std::isfinite(a.weight)) {
      throw InvalidArgument("CoinEnsemble: weights must be positive and finite");
    }
    const double defect = (a.unitary.adjoint() * a.unitary - CoinMatrix::Identity(d, d)).norm();
    if (!(defect <= kUnitaryTolerance)) throw InvalidArgument("CoinEnsemble: atom is not unitary");
    total += a.weight;
  }
  if (std::abs(total - 1.0) > kWeightTolerance) {
    throw InvalidArgument("CoinEnsemble: weights sum to " + std::to_string(total) + ", expected 1");
  }
}

CoinMatrix mean_unitary(const CoinEnsemble& e) {
  const int d = e.coin_dim();
  CoinMatrix out = CoinMatrix::Zero(d, d);
  for (const auto& a : e.atoms()) out += a.weight * a.unitary;
  return out;
}

CoinMatrix twirl(const CoinEnsemble& e, const CoinMatrix& a, Picture picture) {
  const int d = e.coin_dim();
  if (a.rows() != d || a.cols() != d) throw InvalidArgument("twirl: dimension mismatch");
  CoinMatrix out = CoinMatrix::Zero(d, d);
  for (const auto& atom : e.atoms()) {
    const CoinMatrix& u = atom.unitary;
    if (picture == Picture::heisenberg) {
      out += atom.weight * (u.adjoint() * a * u);
    } else {
      out += atom.weight * (u * a * u.adjoint());
    }
  }
  return out;
}

CoinMatrix twirl_superoperator(const CoinEnsemble& e, Picture picture) {
  const int d = e.coin_dim();
  CoinMatrix out = CoinMatrix::Zero(d * d, d * d);
  // vec(B A C) = (C^T (x) B) vec(A)
  for (const auto& atom : e.atoms()) {
    const CoinMatrix& u = atom.unitary;
    if (picture == Picture::heisenberg) {
      out += atom.weight * Eigen::kroneckerProduct(u.transpose(), u.adjoint()).eval();
    } else {
      out += atom.weight * Eigen::kroneckerProduct(u.conjugate(), u).eval();
    }
  }
  return out;
}

bool is_irreducible(std::span<const CoinMatrix> generators) {
  if (generators.empty()) throw InvalidArgument("is_irreducible: empty generator list");
  const Eigen::Index d = generators.front().rows();
  for (const auto& g : generators) {
    if (g.rows() != d || g.cols() != d) throw InvalidArgument("is_irreducible: inconsistent dimensions");
  }
  const Eigen::Index full = d * d;

  // Orthonormal basis of the span found so far, as columns over vec(M).
  CoinMatrix basis(full, 0);
  std::vector<CoinMatrix> members;
  double scale = 0.0;
  auto try_add = [&](const CoinMatrix& m) {
    CoinVector v = as_vec(m);
    const double n0 = v.norm();
    scale = std::max(scale, n0);
    if (n0 <= kRankThreshold * scale) return false;
    for (int pass = 0; pass < 2; ++pass) v -= basis * (basis.adjoint() * v);
    if (v.norm() <= kRankThreshold * n0) return false;
    basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
    basis.col(basis.cols() - 1) = v / v.norm();
    members.push_back(m);
    return true;
  };

  try_add(CoinMatrix::Identity(d, d));
  for (const auto& g : generators) try_add(g);
  // Left-multiply until stable; new members are appended and visited in turn.
  for (std::size_t k = 0; k < members.size() && basis.cols() < full; ++k) {
    for (const auto& g : generators) {
      try_add(g * members[k]);
      if (basis.cols() == full) break;
    }
  }

  CoinMatrix stacked(full, static_cast<Eigen::Index>(members.size()));
  for (std::size_t k = 0; k < members.size(); ++k) stacked.col(static_cast<Eigen::Index>(k)) = as_vec(members[k]);
  Eigen::JacobiSVD<CoinMatrix> svd(stacked);
  const auto& s = svd.singularValues();
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > kRankThreshold * s(0)) ++rank;
  }
  return rank == full;
}

std::vector<CoinMatrix> pair_products(const CoinEnsemble& e) {
  std::vector<CoinMatrix> out;
  for (const auto& a : e.atoms()) {
    for (const auto& b : e.atoms()) {
      CoinMatrix p = a.unitary.adjoint() * b.unitary;
      bool seen = false;
      for (const auto& q : out) {
        if ((q - p).cwiseAbs().maxCoeff() <= kDedupTolerance) {
          seen = true;
          break;
        }
      }
      if (!seen) out.push_back(std::move(p));
    }
  }
  return out;
}

PhaseMoments phase_moments(const CoinEnsemble& e) {
  if (e.coin_dim() != 2) throw InvalidArgument("phase_moments: ensemble is not a dephasing family");
  const CoinMatrix h = hadamard();
  Complex m1(0.0, 0.0), m2(0.0, 0.0);
  for (const auto& atom : e.atoms()) {
    // U = exp(i phi sigma_z) H, so U H = diag(e^{i phi}, e^{-i phi})
    const CoinMatrix g = atom.unitary * h;
    const Complex z = g(0, 0);
    if (std::abs(g(0, 1)) > 1e-10 || std::abs(g(1, 0)) > 1e-10 || std::abs(g(1, 1) - std::conj(z)) > 1e-10) {
      throw InvalidArgument("phase_moments: atom is not of the form exp(i phi sigma_z) H");
    }
    const double phi = std::arg(z);
    m1 += atom.weight * std::polar(1.0, phi);
    m2 += atom.weight * std::polar(1.0, 2.0 * phi);
  }
  auto angle = [](Complex z) {
    double a = std::arg(z);
    return a >= std::numbers::pi ? a - 2.0 * std::numbers::pi : a;
  };
  return {std::min(1.0, std::abs(m1)), std::min(1.0, std::abs(m2)), angle(m1), angle(m2)};
}

std::vector<std::pair<double, double>> gauss_legendre(double a, double b, int n) {
  if (n < 1) throw InvalidArgument("gauss_legendre: need at least one node");
  std::unique_ptr<gsl_integration_glfixed_table, decltype(&gsl_integration_glfixed_table_free)> table(
      gsl_integration_glfixed_table_alloc(static_cast<std::size_t>(n)), &gsl_integration_glfixed_table_free);
  if (!table) throw InvalidArgument("gauss_legendre: table allocation failed");
  std::vector<std::pair<double, double>> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x = 0.0, w = 0.0;
    gsl_integration_glfixed_point(a, b, static_cast<std::size_t>(i), &x, &w, table.get());
    out[static_cast<std::size_t>(i)] = {x, w};
  }
  return out;
}

CoinEnsemble dephasing_ensemble(std::span<const std::pair<double, double>> weighted_phases) {
  const CoinMatrix h = hadamard();
  std::vector<CoinAtom> atoms;
  atoms.reserve(weighted_phases.size());
  for (const auto& [w, phi] : weighted_phases) {
    CoinMatrix phase = CoinMatrix::Zero(2, 2);
    phase(0, 0) = std::polar(1.0, phi);
    phase(1, 1) = std::polar(1.0, -phi);
    atoms.push_back({w, phase * h});
  }
  return normalized(std::move(atoms));
}

CoinMatrix reflection_coin(double r) {
  CoinMatrix m(2, 2);
  m << std::cos(r), std::sin(r), std::sin(r), -std::cos(r);
  return m;
}

CoinMatrix named_coin(const std::string& name) {
  if (name == "H") return hadamard();
  if (name == "-H") return -hadamard();
  if (name == "X") return pauli_x();
  if (name == "Y") return pauli_y();
  if (name == "Z") return pauli_z();
  if (name == "I") return CoinMatrix::Identity(2, 2);
  throw InvalidArgument("unknown coin name '" + name + "'");
}

namespace {

struct Builder {
  CoinEnsemble operator()(const BrokenLinks& s) const {
    require_probability_range(s.w, "broken_links");
    return CoinEnsemble({{s.w, hadamard()}, {1.0 - s.w, pauli_x()}});
  }

  CoinEnsemble operator()(const DephasingUniform& s) const {
    if (!(s.delta > 0.0 && s.delta < std::numbers::pi)) {
      throw InvalidArgument("dephasing_uniform: delta must lie in (0, pi)");
    }
    std::vector<std::pair<double, double>> weighted;
    for (const auto& [phi, w] : gauss_legendre(-s.delta, s.delta, s.n_nodes)) weighted.emplace_back(w, phi);
    return dephasing_ensemble(weighted);
  }

  CoinEnsemble operator()(const GaussianCoin& s) const {
    if (!(s.sigma > 0.0) || !std::isfinite(s.sigma) || !std::isfinite(s.r0)) {
      throw InvalidArgument("gaussian_coin: sigma must be positive and r0 finite");
    }
    // The density is below exp(-100) beyond 10 sigma; integrating only there keeps
    // narrow peaks resolved by the fixed node count.
    const double half = std::min(std::numbers::pi, 10.0 * s.sigma);
    std::vector<CoinAtom> atoms;
    for (const auto& [r, w] : gauss_legendre(s.r0 - half, s.r0 + half, s.n_nodes)) {
      const double z = (r - s.r0) / s.sigma;
      atoms.push_back({w * std::exp(-z * z), reflection_coin(r)});
    }
    return normalized(std::move(atoms));
  }

  CoinEnsemble operator()(const TwoDim& s) const {
    require_probability_range(s.w, "two_dim");
    const CoinMatrix h = hadamard();
    CoinMatrix hh = Eigen::kroneckerProduct(h, h).eval();
    CoinMatrix x1 = Eigen::kroneckerProduct(pauli_x(), CoinMatrix::Identity(2, 2)).eval();
    return CoinEnsemble({{1.0 - s.w, hh}, {s.w, x1}});
  }

  CoinEnsemble operator()(const CustomEnsemble& s) const { return CoinEnsemble(s.atoms); }
};

}  // namespace

CoinEnsemble build_ensemble(const EnsembleSpec& spec) { return std::visit(Builder{}, spec); }

}  // namespace qwalk
