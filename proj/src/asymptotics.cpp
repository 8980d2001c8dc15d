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

#include "qwalk/asymptotics.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

namespace qwalk {

namespace {

constexpr double kZeroMeanTolerance = 1e-12;

Complex unit_trace(const BandedOperator& a) { return zero_mode(a).trace() / static_cast<double>(a.coin_dim()); }

void refuse_unless_certified(const ContractivityCertificate& cert, const SeriesOptions& opts) {
  if (opts.require_certificate && !cert.certified()) {
    throw CertificateRefusal("diffusion refused: contractivity certificate verdict is " + cert.verdict);
  }
}

[[noreturn]] void diverged(int terms, double last_norm) {
  std::ostringstream msg;
  msg << "Neumann series did not decay within " << terms << " terms (last term norm " << last_norm << ")";
  throw DivergenceError(msg.str());
}

/// Upper bound on sum_{k > K} |T_k| given |T_{k+n}| <= (1-eta)|T_k|.
double geometric_tail(double last_norm, const ContractivityCertificate& cert) {
  if (!cert.certified() || cert.eta <= 0.0) return std::numeric_limits<double>::infinity();
  return last_norm * cert.power / cert.eta;
}

CoinMatrix lambda_combination(const ShiftTable& shift, const RealVector& lambda) {
  const auto lambdas = lambda_matrices(shift);
  CoinMatrix out = CoinMatrix::Zero(shift.coin_dim(), shift.coin_dim());
  for (std::size_t a = 0; a < lambdas.size(); ++a) out += lambda(static_cast<Eigen::Index>(a)) * lambdas[a];
  return out;
}

double residual_norm(const WalkChannel& w, const BandedOperator& a_prime, const CoinMatrix& centered) {
  const BandedOperator w_a = apply_heisenberg(w, a_prime);
  return hs_norm(w_a - a_prime + BandedOperator::local(w.lattice_dim(), centered) * Complex(0.0, 1.0));
}

struct ChainValue {
  BandedOperator b;
  BandedOperator b1;
  BandedOperator b2;
};

/// Value and first two epsilon-derivatives of the perturbed composition at X,
/// where each factor acts as X -> W_i(X) exp(i eps lambda.Lambda_i).
ChainValue perturbed_chain(const GeneralizedWalk& w, const std::vector<CoinMatrix>& lambdas,
                           const BandedOperator& x, bool second) {
  const int s = w.lattice_dim(), d = w.coin_dim();
  ChainValue out{x, BandedOperator(s, d), BandedOperator(s, d)};
  const Complex i(0.0, 1.0);
  for (std::size_t f = 0; f < w.size(); ++f) {
    const WalkChannel& wf = w.factor(f);
    const CoinMatrix& l = lambdas[f];
    BandedOperator wb = apply_heisenberg(wf, out.b);
    BandedOperator wb1 = apply_heisenberg(wf, out.b1);
    if (second) {
      BandedOperator wb2 = apply_heisenberg(wf, out.b2);
      out.b2 = (wb2 + wb1.times_right(2.0 * i * l) - wb.times_right(l * l)).pruned();
    }
    out.b1 = (wb1 + wb.times_right(i * l)).pruned();
    out.b = std::move(wb);
  }
  return out;
}

RealVector composite_velocity(const GeneralizedWalk& w) { return ballistic_drift(w).velocity; }

RealMatrix polarize(int s, const std::function<double(const RealVector&)>& quadratic) {
  RealMatrix out = RealMatrix::Zero(s, s);
  for (int a = 0; a < s; ++a) out(a, a) = quadratic(RealVector::Unit(s, a));
  for (int a = 0; a < s; ++a) {
    for (int b = a + 1; b < s; ++b) {
      const double both = quadratic(RealVector::Unit(s, a) + RealVector::Unit(s, b));
      out(a, b) = out(b, a) = 0.5 * (both - out(a, a) - out(b, b));
    }
  }
  return out;
}

}  // namespace

DriftResult ballistic_drift(const GeneralizedWalk& w) {
  DriftResult out{RealVector::Zero(w.lattice_dim()), {}};
  for (const auto& f : w.factors()) {
    const ShiftIndex si = shift_index(f);
    out.factor_indices.push_back(si.index);
    out.velocity += si.mean_shift;
  }
  return out;
}

DriftSubtraction drift_subtract(const WalkChannel& w) {
  const int s = w.lattice_dim(), d = w.coin_dim();
  DriftSubtraction out{shift_index(w).mean_shift, {}, RealMatrix::Zero(s, s)};
  const auto lambdas = lambda_matrices(w);
  for (int a = 0; a < s; ++a) {
    out.centered_lambdas.push_back(lambdas[a] - out.velocity(a) * CoinMatrix::Identity(d, d));
    for (int b = 0; b < s; ++b) out.raw_first_term(a, b) = (lambdas[a] * lambdas[b]).trace().real() / d;
  }
  return out;
}

FirstOrderSolution solve_first_order(const WalkChannel& w, int axis, const SeriesOptions& opts) {
  if (axis < 0 || axis >= w.lattice_dim()) throw InvalidArgument("solve_first_order: axis out of range");
  refuse_unless_certified(certify_contractive(w), opts);
  const DriftSubtraction ds = drift_subtract(w);
  const CoinMatrix& lt = ds.centered_lambdas[static_cast<std::size_t>(axis)];
  const double scale = lt.norm() / std::sqrt(static_cast<double>(w.coin_dim()));

  FirstOrderSolution sol;
  sol.axis = axis;
  sol.method = FirstOrderMethod::neumann;
  BandedOperator term = BandedOperator::local(w.lattice_dim(), lt);
  BandedOperator sum = term;
  sol.term_norms.push_back(scale);
  const double d = w.coin_dim();
  for (int k = 1; scale > 0.0; ++k) {
    if (k >= opts.max_terms) diverged(k, sol.term_norms.back());
    term = apply_heisenberg(w, term);
    const double contribution = std::abs((zero_mode(term) * lt).trace()) / d;
    const double nrm = hs_norm(term);
    sol.term_norms.push_back(nrm);
    sum += term;
    if (contribution < opts.tol && nrm < opts.tol * scale) break;
  }
  sol.terms_used = static_cast<int>(sol.term_norms.size());
  sol.a_prime = sum * Complex(0.0, 1.0);
  sol.residual = residual_norm(w, sol.a_prime, lt);
  return sol;
}

FirstOrderSolution solve_first_order_zero_mean(const WalkChannel& w, int axis) {
  if (axis < 0 || axis >= w.lattice_dim()) throw InvalidArgument("solve_first_order_zero_mean: axis out of range");
  if (operator_norm(w.mean_unitary()) > kZeroMeanTolerance) {
    throw InvalidArgument("solve_first_order_zero_mean: mean coin is not zero");
  }
  const int d = w.coin_dim(), n = d * d;
  const CoinMatrix lt = drift_subtract(w).centered_lambdas[static_cast<std::size_t>(axis)];

  // (T o P - 1) vec X = -i vec Lambda~, plus tr X = 0 to remove the kernel spanned by 1.
  CoinMatrix keep = CoinMatrix::Zero(n, n);
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i) {
      if (w.shift()[i] == w.shift()[j]) keep(i + j * d, i + j * d) = 1.0;
    }
  }
  CoinMatrix system = CoinMatrix::Zero(n + 1, n);
  system.topRows(n) = w.heisenberg_twirl() * keep - CoinMatrix::Identity(n, n);
  for (int i = 0; i < d; ++i) system(n, i + i * d) = 1.0;
  CoinVector rhs = CoinVector::Zero(n + 1);
  rhs.head(n) = Complex(0.0, -1.0) * Eigen::Map<const CoinVector>(lt.data(), n);

  Eigen::JacobiSVD<CoinMatrix> svd(system, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv(n - 1) <= 1e-10 * sv(0)) {
    throw DegeneracyError("solve_first_order_zero_mean: projected first-order system is singular");
  }
  const CoinVector x = svd.solve(rhs);

  std::vector<std::pair<Offset, CoinMatrix>> blocks;
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i) {
      CoinMatrix e = CoinMatrix::Zero(d, d);
      e(i, j) = x(i + j * d);
      blocks.emplace_back(w.shift()[j] - w.shift()[i], std::move(e));
    }
  }
  FirstOrderSolution sol;
  sol.axis = axis;
  sol.method = FirstOrderMethod::zero_mean_closed_form;
  sol.terms_used = 0;
  sol.a_prime = BandedOperator::from_blocks(w.lattice_dim(), d, std::move(blocks)).pruned();
  sol.residual = residual_norm(w, sol.a_prime, lt);
  return sol;
}

RealMatrix diffusion_from_first_order(const WalkChannel& w, std::span<const FirstOrderSolution> sols) {
  const int s = w.lattice_dim();
  if (sols.size() != static_cast<std::size_t>(s)) throw InvalidArgument("need one first-order solution per axis");
  const double d = w.coin_dim();
  const auto lt = drift_subtract(w).centered_lambdas;
  RealMatrix out(s, s);
  const Complex i(0.0, 1.0);
  for (int a = 0; a < s; ++a) {
    for (int b = 0; b < s; ++b) {
      const Complex trs = (zero_mode(sols[a].a_prime) * lt[b]).trace() + (zero_mode(sols[b].a_prime) * lt[a]).trace();
      out(a, b) = (-(lt[a] * lt[b]).trace() / d - i * trs / d).real();
    }
  }
  return out;
}

RealMatrix diffusion_quadratic_check(const WalkChannel& w, std::span<const FirstOrderSolution> sols) {
  const int s = w.lattice_dim();
  if (sols.size() != static_cast<std::size_t>(s)) throw InvalidArgument("need one first-order solution per axis");
  std::vector<BandedOperator> images;
  for (const auto& sol : sols) images.push_back(apply_heisenberg(w, sol.a_prime));
  RealMatrix out(s, s);
  for (int a = 0; a < s; ++a) {
    for (int b = a; b < s; ++b) {
      out(a, b) = out(b, a) =
          (hs_inner(sols[a].a_prime, sols[b].a_prime) - hs_inner(images[a], images[b])).real();
    }
  }
  return out;
}

DiffusionResult diffusion_matrix(const WalkChannel& w, const SeriesOptions& opts) {
  DiffusionResult res;
  res.certificate = certify_contractive(w);
  refuse_unless_certified(res.certificate, opts);
  const int s = w.lattice_dim();
  const double d = w.coin_dim();
  const DriftSubtraction ds = drift_subtract(w);
  res.velocity = ds.velocity;
  res.method = "neumann";

  // R(a, b) = (1/d) sum_{k>=1} tr((W^k L~_a)_0 L~_b)
  Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(s, s);
  std::vector<FirstOrderSolution> sols;
  for (int a = 0; a < s; ++a) {
    const CoinMatrix& lt = ds.centered_lambdas[a];
    const double scale = lt.norm() / std::sqrt(d);
    FirstOrderSolution sol;
    sol.axis = a;
    BandedOperator term = BandedOperator::local(s, lt);
    BandedOperator sum = term;
    sol.term_norms.push_back(scale);
    for (int k = 1; scale > 0.0; ++k) {
      if (k >= opts.max_terms) diverged(k, sol.term_norms.back());
      term = apply_heisenberg(w, term);
      const CoinMatrix z = zero_mode(term);
      double contribution = 0.0;
      for (int b = 0; b < s; ++b) {
        const Complex c = (z * ds.centered_lambdas[b]).trace() / d;
        r(a, b) += c;
        contribution = std::max(contribution, std::abs(c));
      }
      const double nrm = hs_norm(term);
      sol.term_norms.push_back(nrm);
      sum += term;
      if (contribution < opts.tol && nrm < opts.tol * scale) break;
    }
    sol.terms_used = static_cast<int>(sol.term_norms.size());
    sol.a_prime = sum * Complex(0.0, 1.0);
    sol.residual = residual_norm(w, sol.a_prime, lt);
    double lmax = 0.0;
    for (const auto& l : ds.centered_lambdas) lmax = std::max(lmax, l.norm() / std::sqrt(d));
    res.tail_estimate = std::max(res.tail_estimate, 2.0 * lmax * geometric_tail(sol.term_norms.back(), res.certificate));
    res.terms.push_back(sol.terms_used);
    res.term_norms.push_back(sol.term_norms);
    res.residuals.push_back(sol.residual);
    sols.push_back(std::move(sol));
  }

  const Eigen::MatrixXcd sym = r + r.transpose();
  res.max_imaginary = sym.imag().cwiseAbs().maxCoeff();
  res.D = ds.raw_first_term - ds.velocity * ds.velocity.transpose() + sym.real();
  res.D = 0.5 * (res.D + res.D.transpose());
  res.quadratic_check = diffusion_quadratic_check(w, sols);
  return res;
}

SecondOrderResult second_order_eigenvalue(const GeneralizedWalk& w, const RealVector& lambda,
                                          const SeriesOptions& opts) {
  if (lambda.size() != w.lattice_dim()) throw InvalidArgument("second_order_eigenvalue: lambda has wrong length");
  refuse_unless_certified(certify_contractive(w), opts);
  const int s = w.lattice_dim(), d = w.coin_dim();
  std::vector<CoinMatrix> ls;
  for (const auto& f : w.factors()) ls.push_back(lambda_combination(f.shift(), lambda));
  const double c = lambda.dot(composite_velocity(w));
  const Complex i(0.0, 1.0);

  const BandedOperator one = BandedOperator::identity(s, d);
  const ChainValue at_one = perturbed_chain(w, ls, one, true);
  // W(A') - A' = -i Gamma~ with Gamma = -i B'(1)
  const BandedOperator gamma = project_off_identity(at_one.b1 * Complex(0.0, -1.0));
  const double scale = hs_norm(gamma);

  SecondOrderResult out;
  out.mu2 = unit_trace(at_one.b2) + c * c;
  BandedOperator term = gamma;
  BandedOperator sum(s, d);
  for (int k = 0; scale > 0.0; ++k) {
    if (k >= opts.max_terms) diverged(k, out.term_norms.back());
    const double nrm = hs_norm(term);
    out.term_norms.push_back(nrm);
    const ChainValue v = perturbed_chain(w, ls, term, false);
    // A' = i sum_k W^k Gamma~, so this term adds 2 <1, B'(i T_k)>.
    const Complex contribution = 2.0 * i * unit_trace(v.b1);
    out.mu2 += contribution;
    sum += term;
    if (k > 0 && std::abs(contribution) < opts.tol && nrm < opts.tol * scale) break;
    term = v.b;
  }
  out.terms = static_cast<int>(out.term_norms.size());
  out.a_prime = sum * i;
  return out;
}

SecondOrderResult second_order_two_factor(const GeneralizedWalk& w, const RealVector& lambda,
                                          const SeriesOptions& opts) {
  if (w.size() != 2) throw InvalidArgument("second_order_two_factor: needs exactly two factors");
  if (lambda.size() != w.lattice_dim()) throw InvalidArgument("second_order_two_factor: lambda has wrong length");
  refuse_unless_certified(certify_contractive(w), opts);
  const int s = w.lattice_dim(), d = w.coin_dim();
  const WalkChannel& w1 = w.factor(0);
  const WalkChannel& w2 = w.factor(1);
  const CoinMatrix l1 = lambda_combination(w1.shift(), lambda);
  const CoinMatrix l2 = lambda_combination(w2.shift(), lambda);
  const double c = lambda.dot(composite_velocity(w));
  const Complex i(0.0, 1.0);

  auto local = [s](const CoinMatrix& m) { return BandedOperator::local(s, m); };
  const BandedOperator w2_l1 = apply_heisenberg(w2, local(l1));
  const BandedOperator gamma = project_off_identity(w2_l1 + local(l2));
  const double scale = hs_norm(gamma);

  SecondOrderResult out;
  out.mu2 = unit_trace(apply_heisenberg(w2, local(l1 * l1)) * Complex(-1.0) - local(l2 * l2) -
                       w2_l1.times_right(l2) * Complex(2.0)) +
            c * c;
  BandedOperator term = gamma;
  BandedOperator sum(s, d);
  for (int k = 0; scale > 0.0; ++k) {
    if (k >= opts.max_terms) diverged(k, out.term_norms.back());
    const double nrm = hs_norm(term);
    out.term_norms.push_back(nrm);
    const BandedOperator w1_t = apply_heisenberg(w1, term);
    const BandedOperator next = apply_heisenberg(w2, w1_t);
    // 2i <W_2(W_1(A') L_1) + W_2(W_1(A')) L_2> with A' = i sum_k T_k
    const Complex contribution =
        2.0 * i * i * unit_trace(apply_heisenberg(w2, w1_t.times_right(l1)) + next.times_right(l2));
    out.mu2 += contribution;
    sum += term;
    if (k > 0 && std::abs(contribution) < opts.tol && nrm < opts.tol * scale) break;
    term = next;
  }
  out.terms = static_cast<int>(out.term_norms.size());
  out.a_prime = sum * i;
  return out;
}

DiffusionResult diffusion_matrix(const GeneralizedWalk& w, const SeriesOptions& opts) {
  if (w.size() == 1) return diffusion_matrix(w.factor(0), opts);
  DiffusionResult res;
  res.certificate = certify_contractive(w);
  refuse_unless_certified(res.certificate, opts);
  res.velocity = composite_velocity(w);
  res.method = w.size() == 2 ? "two_factor" : "composed_chain";
  double imag = 0.0;
  auto quadratic = [&](const RealVector& lambda) {
    const SecondOrderResult r =
        w.size() == 2 ? second_order_two_factor(w, lambda, opts) : second_order_eigenvalue(w, lambda, opts);
    res.terms.push_back(r.terms);
    res.term_norms.push_back(r.term_norms);
    if (!r.term_norms.empty()) {
      res.tail_estimate = std::max(res.tail_estimate, 2.0 * r.term_norms.front() *
                                                          geometric_tail(r.term_norms.back(), res.certificate));
    }
    imag = std::max(imag, std::abs(r.mu2.imag()));
    return -r.mu2.real();
  };
  res.D = polarize(w.lattice_dim(), quadratic);
  res.max_imaginary = imag;
  return res;
}

double gaussian_density(const RealMatrix& D, std::span<const double> x) {
  const Eigen::Index s = D.rows();
  if (D.cols() != s || static_cast<Eigen::Index>(x.size()) != s) {
    throw InvalidArgument("gaussian_density: dimension mismatch");
  }
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(0.5 * (D + D.transpose()));
  const RealVector& ev = es.eigenvalues();
  if (ev(0) <= 1e-14 * std::max(1.0, ev(s - 1))) {
    std::ostringstream msg;
    msg << "gaussian_density: covariance is singular; null direction (" << es.eigenvectors().col(0).transpose()
        << ")";
    throw DegeneracyError(msg.str());
  }
  const RealVector xv = Eigen::Map<const RealVector>(x.data(), s);
  const RealVector y = es.eigenvectors().transpose() * xv;
  double quad = 0.0, log_det = 0.0;
  for (Eigen::Index k = 0; k < s; ++k) {
    quad += y(k) * y(k) / ev(k);
    log_det += std::log(ev(k));
  }
  return std::exp(-0.5 * quad - 0.5 * log_det - 0.5 * static_cast<double>(s) * std::log(2.0 * std::numbers::pi));
}

}  // namespace qwalk
