// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sfpc/rng.hpp"

namespace sfpc::data {

struct Dataset {
  int features = 0;
  int classes = 0;
  std::vector<float> x; // size() x features, row-major
  std::vector<int> y;   // class indices

  std::size_t size() const { return y.size(); }
};

// Balanced Gaussian clusters centred on a circle of radius 2.5; `noise` is
// the per-coordinate standard deviation.
Dataset gaussian_blobs(std::size_t n, int classes, double noise, CounterRng& rng);

// Two interleaved spiral arms, binary labels; `noise` jitters coordinates.
Dataset two_spirals(std::size_t n, double noise, CounterRng& rng);

// Rows of "f0,f1,...,label"; '#' comments and blank lines are skipped.
// Labels must be non-negative integers; classes = max label + 1.
Dataset load_csv(const std::string& path);

} // namespace sfpc::data
