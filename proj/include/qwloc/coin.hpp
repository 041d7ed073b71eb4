#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "qwloc/types.hpp"

namespace qwloc {

using CoinMatrix = Eigen::MatrixXcd;

// Unit displacement attached to coin index tau: sign(tau) * e_{|tau|}.
Site displacement(int tau, int d);

// Permutation of the coin index set {+1,-1,...,+d,-d}, stored as the
// image of each index in canonical order.
class Permutation {
 public:
  Permutation(int d, std::vector<int> images_canonical_order);

  static Permutation identity(int d);
  // Builds from disjoint cycles given as lists of coin indices.
  static Permutation from_cycles(int d, const std::vector<std::vector<int>>& cycles);

  int dim() const { return d_; }
  int apply(int tau) const { return images_[static_cast<std::size_t>(coin_code(tau, d_))]; }
  int inverse_apply(int tau) const;
  const std::vector<int>& images() const { return images_; }
  bool is_fixed_point_free() const;

  friend bool operator==(const Permutation& a, const Permutation& b) {
    return a.d_ == b.d_ && a.images_ == b.images_;
  }

 private:
  int d_;
  std::vector<int> images_;
};

struct Cycle {
  std::vector<int> elements;  // (tau, pi(tau), ..., pi^{m-1}(tau))
  int length() const { return static_cast<int>(elements.size()); }
};

struct CycleDecomposition {
  int d = 1;
  std::vector<Cycle> cycles;       // leaders ascending in canonical order
  std::vector<int> fixed_points;   // canonical order
  int cycle_count() const { return static_cast<int>(cycles.size()); }
};

// Cycles of the non-fixed points, each starting at the smallest canonical
// index of its support; leaders ascend in canonical order.
CycleDecomposition decompose_cycles(const Permutation& pi);

// Rebuild the permutation from its decomposition (test oracle companion).
Permutation recompose(const CycleDecomposition& dec);

struct LocalizationCheck {
  bool localizing = false;
  bool fixed_point_free = false;
  std::vector<Site> cycle_displacement_sums;  // one per cycle
};

// True iff pi is fixed-point-free and every cycle's net displacement
// vanishes; the per-cycle integer sums are returned for diagnostics.
LocalizationCheck check_localizing(const Permutation& pi);

// C_pi with (C_pi)_{sigma,tau} = 1 iff sigma = pi(tau); exact 0/1 entries.
CoinMatrix permutation_matrix(const Permutation& pi);

// Operator norm (largest singular value) of C - D.
double coin_distance(const CoinMatrix& c, const CoinMatrix& d);

// Unitary C = exp(A) * base with A random anti-Hermitian, rescaled so
// that ||C - base|| lands in [0.9*delta, delta]. delta = 0 returns base.
CoinMatrix perturb_coin(const CoinMatrix& base, double delta, std::uint64_t seed);

// 2d-dimensional discrete-Fourier coin; ballistic control case.
CoinMatrix dft_coin(int d);

// Haar-ish random unitary from QR of a seeded Gaussian matrix (test helper).
CoinMatrix random_unitary(int n, std::uint64_t seed);

double unitarity_residual(const CoinMatrix& c);

}  // namespace qwloc
