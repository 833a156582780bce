#pragma once

// Random generators shared by the unit tests.

#include <random>
#include <vector>

#include "curvgate/tensor.hpp"

namespace curvgate::testing {

inline Vec random_vec(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = nd(rng);
  return v;
}

inline Mat random_symmetric(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = nd(rng);
  return 0.5 * (a + a.transpose());
}

// A tensor with the index symmetries of a curvature tensor but, generically,
// violating the first Bianchi identity: a symmetric form on 2-vectors.
inline Tensor4 random_algebraic_tensor(int n, std::mt19937_64& rng) {
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  const int np = static_cast<int>(pairs.size());
  const Mat m = random_symmetric(np, rng);
  Tensor4 t(n);
  for (int p = 0; p < np; ++p)
    for (int q = 0; q < np; ++q) {
      const auto [i, j] = pairs[p];
      const auto [k, l] = pairs[q];
      const double v = m(p, q);
      t(i, j, k, l) = v;
      t(j, i, k, l) = -v;
      t(i, j, l, k) = -v;
      t(j, i, l, k) = v;
    }
  return t;
}

// Random curvature tensor satisfying Bianchi.
inline CurvatureTensor random_bianchi_tensor(int n, std::mt19937_64& rng) {
  return kulkarni_nomizu_tensor(random_symmetric(n, rng));
}

}  // namespace curvgate::testing
