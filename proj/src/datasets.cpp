// SPDX-License-Identifier: Apache-2.0
#include "sfpc/datasets.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace sfpc::data {

Dataset gaussian_blobs(std::size_t n, int classes, double noise, CounterRng& rng) {
  if (n == 0) throw std::invalid_argument("dataset size must be positive");
  if (classes < 2) throw std::invalid_argument("need at least two classes");
  if (noise < 0) throw std::invalid_argument("noise must be non-negative");
  Dataset d;
  d.features = 2;
  d.classes = classes;
  d.x.reserve(n * 2);
  d.y.reserve(n);
  const double radius = 2.5;
  for (std::size_t i = 0; i < n; ++i) {
    const int c = static_cast<int>(i % static_cast<std::size_t>(classes));
    const double angle = 2.0 * std::numbers::pi * c / classes;
    d.x.push_back(static_cast<float>(radius * std::cos(angle) + noise * rng.normal()));
    d.x.push_back(static_cast<float>(radius * std::sin(angle) + noise * rng.normal()));
    d.y.push_back(c);
  }
  return d;
}

Dataset two_spirals(std::size_t n, double noise, CounterRng& rng) {
  if (n == 0) throw std::invalid_argument("dataset size must be positive");
  if (noise < 0) throw std::invalid_argument("noise must be non-negative");
  Dataset d;
  d.features = 2;
  d.classes = 2;
  d.x.reserve(n * 2);
  d.y.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int c = static_cast<int>(i % 2);
    const double t = rng.uniform();
    const double r = 0.4 + 2.1 * t;
    const double theta = 3.5 * std::numbers::pi * t + std::numbers::pi * c;
    d.x.push_back(static_cast<float>(r * std::cos(theta) + noise * rng.normal()));
    d.x.push_back(static_cast<float>(r * std::sin(theta) + noise * rng.normal()));
    d.y.push_back(c);
  }
  return d;
}

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open dataset file: " + path);
  Dataset d;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::vector<double> fields;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
        if (used != cell.size()) throw std::invalid_argument(cell);
        fields.push_back(v);
      } catch (const std::exception&) {
        throw std::invalid_argument("bad numeric field at line " + std::to_string(lineno));
      }
    }
    if (fields.size() < 2)
      throw std::invalid_argument("need at least one feature and a label at line " +
                                  std::to_string(lineno));
    const int feats = static_cast<int>(fields.size()) - 1;
    if (d.features == 0)
      d.features = feats;
    else if (feats != d.features)
      throw std::invalid_argument("inconsistent column count at line " + std::to_string(lineno));
    const double raw_label = fields.back();
    const int label = static_cast<int>(raw_label);
    if (label < 0 || static_cast<double>(label) != raw_label)
      throw std::invalid_argument("label must be a non-negative integer at line " +
                                  std::to_string(lineno));
    for (int f = 0; f < feats; ++f) d.x.push_back(static_cast<float>(fields[static_cast<std::size_t>(f)]));
    d.y.push_back(label);
    d.classes = std::max(d.classes, label + 1);
  }
  if (d.y.empty()) throw std::invalid_argument("dataset file has no samples: " + path);
  if (d.classes < 2) throw std::invalid_argument("dataset needs at least two classes");
  return d;
}

} // namespace sfpc::data
