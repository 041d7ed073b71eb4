#pragma once

#include <Eigen/Dense>
#include <vector>

#include "qwloc/coin.hpp"
#include "qwloc/rng.hpp"
#include "qwloc/types.hpp"

namespace qwloc::testing {

// All permutations of the coin index set for small d, in lexicographic
// order of their canonical image arrays.
inline std::vector<Permutation> all_permutations(int d) {
  std::vector<int> codes(static_cast<std::size_t>(2 * d));
  for (int i = 0; i < 2 * d; ++i) codes[static_cast<std::size_t>(i)] = i;
  std::vector<Permutation> out;
  do {
    std::vector<int> images;
    for (int c : codes) images.push_back(coin_from_code(c, d));
    out.emplace_back(d, images);
  } while (std::next_permutation(codes.begin(), codes.end()));
  return out;
}

inline std::vector<Permutation> fixed_point_free_permutations(int d) {
  std::vector<Permutation> out;
  for (const auto& pi : all_permutations(d))
    if (pi.is_fixed_point_free()) out.push_back(pi);
  return out;
}

// Independent operator-norm oracle: largest singular value via the
// eigenvalues of A* A.
inline double operator_norm_oracle(const Eigen::MatrixXcd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a.adjoint() * a);
  return std::sqrt(es.eigenvalues().maxCoeff());
}

// Deterministic pseudo-random permutation of I_pm.
inline Permutation random_permutation(int d, std::uint64_t seed) {
  std::vector<int> codes(static_cast<std::size_t>(2 * d));
  for (int i = 0; i < 2 * d; ++i) codes[static_cast<std::size_t>(i)] = i;
  CounterRng rng(seed);
  for (std::size_t i = codes.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.next_u64() % i);
    std::swap(codes[i - 1], codes[j]);
  }
  std::vector<int> images;
  for (int c : codes) images.push_back(coin_from_code(c, d));
  return Permutation(d, images);
}

}  // namespace qwloc::testing
