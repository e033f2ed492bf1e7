/*
 * Copyright 2026 The iapdf Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "iapdf/curve.hpp"
#include "iapdf/measures.hpp"
#include "iapdf/rng.hpp"

namespace iapdf {

/// A probability measure with finitely many atoms; `mass` holds the weights.
struct DiscreteMeasure {
  std::vector<Atom> atoms;
  /// Stick mass left when the construction stopped (assigned to the last atom).
  double remainder = 0.0;

  double weight_sum() const;
  template <class F>
  double integrate(F&& f) const {
    double s = 0.0;
    for (const Atom& a : atoms) s += a.mass * f(a.location);
    return s;
  }
};

/// Sethuraman stick-breaking draw of a Dirichlet process with parameter
/// alpha: breaks v_k ~ Beta(1, a), locations i.i.d. from alpha / a, stopping
/// once the unbroken stick is below remainder_tol; the leftover goes to one
/// extra atom.
DiscreteMeasure stick_breaking_dp(const BaseMeasure& alpha, double remainder_tol, Rng& rng);

/// Empirical d.f. of int h dD over `samples` stick-breaking draws, with
/// binomial standard errors. For a posterior pass alpha* = alpha + sum delta_u.
DistCurve mc_mean_cdf(const BaseMeasure& alpha, const std::function<double(double)>& h, int samples,
                      std::span<const double> grid, Rng& rng, double remainder_tol = 1e-8);

/// The sampled means themselves, in draw order.
std::vector<double> mc_mean_samples(const BaseMeasure& alpha, const std::function<double(double)>& h, int samples,
                                    Rng& rng, double remainder_tol = 1e-8);

/// A set partition of {0, ..., n-1}: each cell is a bitmask.
struct Partition {
  std::vector<std::uint32_t> cells;

  std::size_t num_cells() const { return cells.size(); }
  std::vector<int> cell_sizes() const;
};

std::uint64_t bell_number(int n);

/// Set partitions in lexicographic order of their restricted-growth strings.
class PartitionEnumerator {
 public:
  static constexpr int kMaxN = 10;

  explicit PartitionEnumerator(int n);

  /// Current partition; valid until next().
  const Partition& current() const { return partition_; }
  /// Restricted-growth string of the current partition.
  const std::vector<int>& rgs() const { return rgs_; }
  /// Advances; false once every partition has been visited.
  bool next();

 private:
  void rebuild();

  int n_;
  std::vector<int> rgs_;
  std::vector<int> max_prefix_;  // max of rgs_[0..i]
  Partition partition_;
};

std::vector<Partition> enumerate_partitions(int n);

}  // namespace iapdf
