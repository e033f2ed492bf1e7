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

#include "iapdf/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "iapdf/error.hpp"

namespace iapdf {

double DiscreteMeasure::weight_sum() const {
  double s = 0.0;
  for (const Atom& a : atoms) s += a.mass;
  return s;
}

DiscreteMeasure stick_breaking_dp(const BaseMeasure& alpha, double remainder_tol, Rng& rng) {
  if (!(remainder_tol > 0.0 && remainder_tol < 1.0))
    throw Error(ErrorKind::config, "stick-breaking remainder tolerance must lie in (0, 1)");
  const double a = alpha.total_mass();
  DiscreteMeasure d;
  double rest = 1.0;
  while (rest >= remainder_tol) {
    const double v = rng.beta(1.0, a);
    const double w = rest * v;
    rest *= 1.0 - v;
    if (w > 0.0) d.atoms.push_back({alpha.quantile(rng.uniform()), w});
  }
  d.remainder = rest;
  if (rest > 0.0) d.atoms.push_back({alpha.quantile(rng.uniform()), rest});
  return d;
}

std::vector<double> mc_mean_samples(const BaseMeasure& alpha, const std::function<double(double)>& h, int samples,
                                    Rng& rng, double remainder_tol) {
  if (samples < 1) throw Error(ErrorKind::config, "need at least one sample");
  std::vector<double> means(static_cast<std::size_t>(samples));
  for (double& m : means) m = stick_breaking_dp(alpha, remainder_tol, rng).integrate(h);
  return means;
}

DistCurve mc_mean_cdf(const BaseMeasure& alpha, const std::function<double(double)>& h, int samples,
                      std::span<const double> grid, Rng& rng, double remainder_tol) {
  if (samples < 1000) throw Error(ErrorKind::config, "mc_mean_cdf needs at least 1000 samples");
  std::vector<double> means = mc_mean_samples(alpha, h, samples, rng, remainder_tol);
  std::sort(means.begin(), means.end());
  DistCurve c;
  c.kind = CurveKind::cdf;
  c.grid.assign(grid.begin(), grid.end());
  c.values.resize(grid.size());
  c.std_error.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double F =
        static_cast<double>(std::upper_bound(means.begin(), means.end(), grid[i]) - means.begin()) / samples;
    c.values[i] = F;
    c.std_error[i] = std::sqrt(F * (1.0 - F) / samples);
  }
  c.ess = samples;
  return c;
}

std::vector<int> Partition::cell_sizes() const {
  std::vector<int> s;
  s.reserve(cells.size());
  for (std::uint32_t c : cells) s.push_back(std::popcount(c));
  return s;
}

std::uint64_t bell_number(int n) {
  if (n < 0 || n > 25) throw Error(ErrorKind::size, "bell_number defined here for 0 <= n <= 25");
  // Bell triangle.
  std::vector<std::uint64_t> row = {1};
  for (int i = 0; i < n; ++i) {
    std::vector<std::uint64_t> next = {row.back()};
    for (std::uint64_t v : row) next.push_back(next.back() + v);
    row = std::move(next);
  }
  return row.front();
}

PartitionEnumerator::PartitionEnumerator(int n) : n_(n) {
  if (n < 1 || n > kMaxN) throw Error(ErrorKind::size, "partition enumeration needs 1 <= n <= 10");
  rgs_.assign(n, 0);
  max_prefix_.assign(n, 0);
  rebuild();
}

bool PartitionEnumerator::next() {
  for (int i = n_ - 1; i >= 1; --i) {
    if (rgs_[i] <= max_prefix_[i - 1]) {
      ++rgs_[i];
      max_prefix_[i] = std::max(max_prefix_[i - 1], rgs_[i]);
      for (int j = i + 1; j < n_; ++j) {
        rgs_[j] = 0;
        max_prefix_[j] = max_prefix_[i];
      }
      rebuild();
      return true;
    }
  }
  return false;
}

void PartitionEnumerator::rebuild() {
  partition_.cells.assign(static_cast<std::size_t>(max_prefix_[n_ - 1]) + 1, 0u);
  for (int i = 0; i < n_; ++i) partition_.cells[rgs_[i]] |= 1u << i;
}

std::vector<Partition> enumerate_partitions(int n) {
  PartitionEnumerator e(n);
  std::vector<Partition> out;
  out.reserve(bell_number(n));
  do out.push_back(e.current());
  while (e.next());
  return out;
}

}  // namespace iapdf
