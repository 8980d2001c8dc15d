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

#ifndef QWALK_TYPES_HPP
#define QWALK_TYPES_HPP

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qwalk {

using Complex = std::complex<double>;

/// Operator on the internal (coin) space.
using CoinMatrix = Eigen::MatrixXcd;
using CoinVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Largest supported lattice dimension. Unused coordinates of an Offset are zero.
inline constexpr int kMaxLatticeDim = 3;

/// Lattice vector in Z^s. Ordering is lexicographic over all coordinates.
struct Offset {
  std::array<std::int64_t, kMaxLatticeDim> c{};

  Offset() = default;
  Offset(std::initializer_list<std::int64_t> coords) {
    if (coords.size() > static_cast<std::size_t>(kMaxLatticeDim)) {
      throw std::invalid_argument("Offset: more coordinates than kMaxLatticeDim");
    }
    std::size_t i = 0;
    for (auto v : coords) c[i++] = v;
  }

  std::int64_t& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
  std::int64_t operator[](int i) const { return c[static_cast<std::size_t>(i)]; }

  bool is_zero() const { return c[0] == 0 && c[1] == 0 && c[2] == 0; }

  friend Offset operator+(Offset a, const Offset& b) {
    for (int i = 0; i < kMaxLatticeDim; ++i) a[i] += b[i];
    return a;
  }
  friend Offset operator-(Offset a, const Offset& b) {
    for (int i = 0; i < kMaxLatticeDim; ++i) a[i] -= b[i];
    return a;
  }
  friend Offset operator-(Offset a) {
    for (int i = 0; i < kMaxLatticeDim; ++i) a[i] = -a[i];
    return a;
  }
  friend auto operator<=>(const Offset&, const Offset&) = default;
};

/// Position pair (x, y) labelling the block rho_{xy} of a density operator.
struct SitePair {
  Offset row;
  Offset col;

  bool diagonal() const { return row == col; }
  friend SitePair operator+(const SitePair& a, const SitePair& b) {
    return {a.row + b.row, a.col + b.col};
  }
  friend auto operator<=>(const SitePair&, const SitePair&) = default;
};

// Error taxonomy. The CLI maps these onto exit codes.

/// Rejected input: dimension mismatch, parameter out of range, malformed data.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A diffusion computation was requested for a walk without a contractivity certificate.
class CertificateRefusal : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Neumann series terms failed to decay within the term budget.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A linear system that should be regular turned out singular.
class DegeneracyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A block-count or memory budget was exceeded.
class ResourceLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qwalk

#endif  // QWALK_TYPES_HPP
