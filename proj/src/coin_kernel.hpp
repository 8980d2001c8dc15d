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

// Internal: per-block conjugation kernels shared by the walk and the oracle.
#ifndef QWALK_SRC_COIN_KERNEL_HPP
#define QWALK_SRC_COIN_KERNEL_HPP

#include <array>

#include "qwalk/types.hpp"

namespace qwalk::detail {

/// dst = m^* src m for column-major d x d blocks; src may alias dst.
///
/// Written with plain real arithmetic: std::complex products go through the
/// NaN-recovering library routine, which otherwise dominates both the series
/// and the simulation. Real mean coins take the cheaper branch.
class Conjugator {
 public:
  explicit Conjugator(const CoinMatrix& m) : m_(m), d_(static_cast<int>(m.rows())) {
    real_ = m.imag().isZero(0.0);
    if (d_ <= kMax) {
      for (int r = 0; r < d_; ++r) {
        for (int c = 0; c < d_; ++c) {
          re_[r * kMax + c] = m(r, c).real();
          im_[r * kMax + c] = m(r, c).imag();
        }
      }
    }
    tmp_.resize(d_, d_);
  }

  void apply(const Complex* src, Complex* dst) {
    switch (d_) {
      case 2: real_ ? run<2, true>(src, dst) : run<2, false>(src, dst); return;
      case 4: real_ ? run<4, true>(src, dst) : run<4, false>(src, dst); return;
      default: {
        Eigen::Map<const CoinMatrix> x(src, d_, d_);
        tmp_.noalias() = m_.adjoint() * x;
        Eigen::Map<CoinMatrix>(dst, d_, d_).noalias() = tmp_ * m_;
      }
    }
  }

  void apply_all(const Complex* src, Complex* dst, std::size_t n) {
    const std::size_t stride = static_cast<std::size_t>(d_) * d_;
    for (std::size_t k = 0; k < n; ++k) apply(src + k * stride, dst + k * stride);
  }

 private:
  static constexpr int kMax = 4;

  template <int D, bool Real>
  void run(const Complex* src, Complex* dst) const {
    const double* x = reinterpret_cast<const double*>(src);
    double tr[D][D], ti[D][D];
    // t = m^* x, interleaved real and imaginary parts.
    for (int i = 0; i < D; ++i) {
      for (int j = 0; j < D; ++j) {
        double re = 0.0, im = 0.0;
        for (int l = 0; l < D; ++l) {
          const double mr = re_[l * kMax + i];
          const double xr = x[2 * (l + j * D)], xi = x[2 * (l + j * D) + 1];
          re += mr * xr;
          im += mr * xi;
          if constexpr (!Real) {
            const double mi = im_[l * kMax + i];
            re += mi * xi;
            im -= mi * xr;
          }
        }
        tr[i][j] = re;
        ti[i][j] = im;
      }
    }
    double* y = reinterpret_cast<double*>(dst);
    for (int j = 0; j < D; ++j) {
      for (int i = 0; i < D; ++i) {
        double re = 0.0, im = 0.0;
        for (int l = 0; l < D; ++l) {
          const double mr = re_[l * kMax + j];
          re += tr[i][l] * mr;
          im += ti[i][l] * mr;
          if constexpr (!Real) {
            const double mi = im_[l * kMax + j];
            re -= ti[i][l] * mi;
            im += tr[i][l] * mi;
          }
        }
        y[2 * (i + j * D)] = re;
        y[2 * (i + j * D) + 1] = im;
      }
    }
  }

  CoinMatrix m_;
  int d_;
  bool real_ = false;
  std::array<double, kMax * kMax> re_{};
  std::array<double, kMax * kMax> im_{};
  CoinMatrix tmp_;
};

}  // namespace qwalk::detail

#endif  // QWALK_SRC_COIN_KERNEL_HPP
