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

#ifndef QWALK_BLOCK_TABLE_HPP
#define QWALK_BLOCK_TABLE_HPP

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "qwalk/types.hpp"

namespace qwalk {

/// Sorted, contiguous storage of square blocks keyed by lattice labels.
///
/// Keys are kept strictly increasing; block k occupies dim*dim consecutive
/// complex numbers in column-major order. This is the storage behind both the
/// banded operators (keyed by Offset) and the density states (keyed by
/// SitePair). Lookups are binary searches; bulk updates go through merges.
template <class Key>
class BlockTable {
 public:
  using Block = Eigen::Map<CoinMatrix>;
  using ConstBlock = Eigen::Map<const CoinMatrix>;

  explicit BlockTable(int dim = 1) : dim_(dim) {}

  int dim() const { return dim_; }
  std::size_t size() const { return keys_.size(); }
  bool empty() const { return keys_.empty(); }
  std::size_t stride() const { return static_cast<std::size_t>(dim_) * dim_; }

  const Key& key(std::size_t k) const { return keys_[k]; }
  /// All blocks back to back, stride() entries each.
  Complex* data() { return data_.data(); }
  const Complex* data() const { return data_.data(); }
  std::span<const Key> keys() const { return keys_; }

  ConstBlock block(std::size_t k) const { return ConstBlock(data_.data() + k * stride(), dim_, dim_); }
  Block block(std::size_t k) { return Block(data_.data() + k * stride(), dim_, dim_); }

  std::optional<std::size_t> find(const Key& key) const {
    auto it = std::lower_bound(keys_.begin(), keys_.end(), key);
    if (it == keys_.end() || *it != key) return std::nullopt;
    return static_cast<std::size_t>(it - keys_.begin());
  }

  void reserve(std::size_t n) {
    keys_.reserve(n);
    data_.reserve(n * stride());
  }

  /// Appends a zero block. Keys must arrive in strictly increasing order.
  Block append(const Key& key) {
    keys_.push_back(key);
    data_.resize(data_.size() + stride(), Complex(0.0, 0.0));
    return block(keys_.size() - 1);
  }

  void append(const Key& key, const Eigen::Ref<const CoinMatrix>& m) { append(key) = m; }

  /// Appends a block copied from stride() contiguous entries.
  void append_raw(const Key& key, const Complex* entries) {
    keys_.push_back(key);
    data_.insert(data_.end(), entries, entries + stride());
  }

  /// Removes blocks whose Frobenius norm is below tol.
  void prune(double tol) {
    const double tol2 = tol * tol;
    remove_if([tol2](const Key&, const ConstBlock& b) { return b.squaredNorm() < tol2; });
  }

  /// Removes blocks for which drop(key, block) holds, preserving order.
  template <class Drop>
  void remove_if(Drop&& drop) {
    std::size_t out = 0;
    for (std::size_t k = 0; k < keys_.size(); ++k) {
      if (drop(keys_[k], std::as_const(*this).block(k))) continue;
      if (out != k) {
        keys_[out] = keys_[k];
        std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(k * stride()), stride(),
                    data_.begin() + static_cast<std::ptrdiff_t>(out * stride()));
      }
      ++out;
    }
    keys_.resize(out);
    data_.resize(out * stride());
  }

  /// Adds b block by block when every key of b is already present. Returns
  /// false, leaving the table unchanged, otherwise.
  bool add_in_place(const BlockTable& b) {
    std::vector<std::size_t> at(b.size());
    std::size_t i = 0;
    for (std::size_t j = 0; j < b.size(); ++j) {
      while (i < keys_.size() && keys_[i] < b.keys_[j]) ++i;
      if (i == keys_.size() || keys_[i] != b.keys_[j]) return false;
      at[j] = i;
    }
    for (std::size_t j = 0; j < b.size(); ++j) {
      Complex* dst = data_.data() + at[j] * stride();
      const Complex* src = b.data_.data() + j * stride();
      for (std::size_t e = 0; e < stride(); ++e) dst[e] += src[e];
    }
    return true;
  }

  template <class F>
  void for_each(F&& f) const {
    for (std::size_t k = 0; k < size(); ++k) f(key(k), block(k));
  }

 private:
  int dim_;
  std::vector<Key> keys_;
  std::vector<Complex> data_;
};

/// One relocation rule of a scatter: every listed matrix element
/// (column-major linear index) of a block keyed k moves to key k + displacement.
template <class Key>
struct ScatterClass {
  Key displacement;
  std::vector<int> entries;
};

/// Applies a set of relocation rules to all blocks of src and sums collisions.
///
/// Each class maps the sorted key sequence to another sorted sequence, so the
/// result is a k-way merge of the shifted streams.
template <class Key>
BlockTable<Key> scatter_merge(const BlockTable<Key>& src, std::span<const ScatterClass<Key>> classes) {
  BlockTable<Key> out(src.dim());
  const std::size_t n = src.size();
  if (n == 0 || classes.empty()) return out;
  out.reserve(n + n / 2);

  struct Head {
    Key key;
    std::size_t cls;
  };
  auto later = [](const Head& a, const Head& b) { return b.key < a.key; };
  std::vector<Head> heap;
  std::vector<std::size_t> cursor(classes.size(), 0);
  heap.reserve(classes.size());
  for (std::size_t c = 0; c < classes.size(); ++c) {
    heap.push_back({src.key(0) + classes[c].displacement, c});
  }
  std::make_heap(heap.begin(), heap.end(), later);

  while (!heap.empty()) {
    std::pop_heap(heap.begin(), heap.end(), later);
    Head h = heap.back();
    heap.pop_back();
    if (out.empty() || out.key(out.size() - 1) != h.key) out.append(h.key);
    Complex* dst = out.block(out.size() - 1).data();
    const std::size_t m = cursor[h.cls];
    const Complex* from = src.block(m).data();
    for (int e : classes[h.cls].entries) dst[e] += from[e];
    if (++cursor[h.cls] < n) {
      heap.push_back({src.key(cursor[h.cls]) + classes[h.cls].displacement, h.cls});
      std::push_heap(heap.begin(), heap.end(), later);
    }
  }
  return out;
}

/// Returns alpha*a + beta*b over the union of keys.
template <class Key>
BlockTable<Key> linear_combination(Complex alpha, const BlockTable<Key>& a, Complex beta,
                                   const BlockTable<Key>& b) {
  BlockTable<Key> out(a.dim());
  out.reserve(std::max(a.size(), b.size()));
  const std::size_t m = a.stride();
  std::vector<Complex> buf(m);
  auto emit = [&](const Key& key, const Complex* x, Complex cx, const Complex* y, Complex cy) {
    for (std::size_t e = 0; e < m; ++e) buf[e] = cx * x[e] + (y ? cy * y[e] : Complex(0.0));
    out.append_raw(key, buf.data());
  };
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a.key(i) < b.key(j))) {
      emit(a.key(i), a.data() + i * m, alpha, nullptr, 0.0);
      ++i;
    } else if (i == a.size() || b.key(j) < a.key(i)) {
      emit(b.key(j), b.data() + j * m, beta, nullptr, 0.0);
      ++j;
    } else {
      emit(a.key(i), a.data() + i * m, alpha, b.data() + j * m, beta);
      ++i;
      ++j;
    }
  }
  return out;
}

}  // namespace qwalk

#endif  // QWALK_BLOCK_TABLE_HPP
