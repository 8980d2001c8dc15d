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

#ifndef QWALK_ASYMPTOTICS_HPP
#define QWALK_ASYMPTOTICS_HPP

#include <span>
#include <string>
#include <vector>

#include "qwalk/banded_operator.hpp"
#include "qwalk/walk_channel.hpp"

namespace qwalk {

struct DriftResult {
  /// Mean velocity in lattice units per step.
  RealVector velocity;
  /// ind S of each factor.
  std::vector<Offset> factor_indices;
};

DriftResult ballistic_drift(const GeneralizedWalk& w);

struct SeriesOptions {
  /// Stop once a term's D contribution and its relative norm are both below tol.
  double tol = 1e-10;
  int max_terms = 10000;
  /// Refuse walks whose certificate verdict is unknown.
  bool require_certificate = true;
};

enum class FirstOrderMethod { neumann, zero_mean_closed_form };

/// A' for one lattice axis, solving W(A') - A' = -i Lambda~ with <1, A'> = 0.
struct FirstOrderSolution {
  int axis = 0;
  BandedOperator a_prime{1, 1};
  FirstOrderMethod method = FirstOrderMethod::neumann;
  int terms_used = 0;
  /// |W(A') - A' + i Lambda~|
  double residual = 0.0;
  /// |W^k Lambda~| for k = 0 .. terms_used-1 (Neumann only).
  std::vector<double> term_norms;
};

/// Centered shift data: Q~ = Q - v~ t, Lambda~ = Lambda - v~ 1.
struct DriftSubtraction {
  RealVector velocity;
  std::vector<CoinMatrix> centered_lambdas;
  /// (1/d) tr(Lambda_a Lambda_b) with the uncentered Lambda.
  RealMatrix raw_first_term;
};

DriftSubtraction drift_subtract(const WalkChannel& w);

FirstOrderSolution solve_first_order(const WalkChannel& w, int axis, const SeriesOptions& opts = {});

/// Requires a mean coin of norm at most 1e-12; solves the d^2-dimensional projected system.
FirstOrderSolution solve_first_order_zero_mean(const WalkChannel& w, int axis);

struct DiffusionResult {
  /// Covariance per step of Q~ / sqrt(t), lattice units squared.
  RealMatrix D;
  RealVector velocity;
  std::string method;
  ContractivityCertificate certificate;
  /// Neumann terms per axis (or per polarization direction for compositions).
  std::vector<int> terms;
  std::vector<std::vector<double>> term_norms;
  /// Bound on the neglected part of the series, from the certificate's eta.
  double tail_estimate = 0.0;
  /// First-order residuals per axis.
  std::vector<double> residuals;
  /// Polarized quadratic form <A',A'> - <W A', W A'>; absent for compositions.
  RealMatrix quadratic_check;
  /// Largest imaginary part discarded from the trace formula.
  double max_imaginary = 0.0;
};

DiffusionResult diffusion_matrix(const WalkChannel& w, const SeriesOptions& opts = {});
DiffusionResult diffusion_matrix(const GeneralizedWalk& w, const SeriesOptions& opts = {});

/// D from first-order solutions: D_ab = -(1/d) tr(L~_a L~_b) - (i/d)[tr(A'_a,0 L~_b) + tr(A'_b,0 L~_a)].
RealMatrix diffusion_from_first_order(const WalkChannel& w, std::span<const FirstOrderSolution> sols);

/// Re(<A'_a, A'_b> - <W A'_a, W A'_b>).
RealMatrix diffusion_quadratic_check(const WalkChannel& w, std::span<const FirstOrderSolution> sols);

/// Drift-subtracted second-order eigenvalue correction mu~''(lambda) = -lambda^T D lambda,
/// evaluated by differentiating the perturbed composition factor by factor.
struct SecondOrderResult {
  Complex mu2;
  BandedOperator a_prime{1, 1};
  int terms = 0;
  std::vector<double> term_norms;
};

SecondOrderResult second_order_eigenvalue(const GeneralizedWalk& w, const RealVector& lambda,
                                          const SeriesOptions& opts = {});

/// The explicit formula for W = W_2 o W_1.
SecondOrderResult second_order_two_factor(const GeneralizedWalk& w, const RealVector& lambda,
                                          const SeriesOptions& opts = {});

/// Centered Gaussian density with covariance D.
double gaussian_density(const RealMatrix& D, std::span<const double> x);

}  // namespace qwalk

#endif  // QWALK_ASYMPTOTICS_HPP
