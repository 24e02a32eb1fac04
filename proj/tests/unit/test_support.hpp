#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "asaukit/rng.hpp"
#include "asaukit/tensor.hpp"

namespace asaukit::test {

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-12}); }

// Central difference of f over every element of t.
inline std::vector<double> fd_gradient(Tensor t, const std::function<double(const Tensor&)>& f, double h) {
  std::vector<double> g(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double keep = t[i];
    t[i] = keep + h;
    const double up = f(t);
    t[i] = keep - h;
    const double down = f(t);
    t[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

inline Tensor random_tensor(Shape shape, SplitMix64& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

inline Tensor random_mask(Shape shape, SplitMix64& rng, double p = 0.5) {
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = rng.uniform() < p ? 1.0 : 0.0;
  return t;
}

}  // namespace asaukit::test
