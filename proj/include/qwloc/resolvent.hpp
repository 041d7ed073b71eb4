#pragma once

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <cstdint>
#include <vector>

#include "qwloc/coin.hpp"
#include "qwloc/disorder.hpp"
#include "qwloc/walk.hpp"

namespace qwloc {

inline constexpr double kResolventResidualTol = 1e-9;

// Shifted solver for (U - z) w = b backed by a sparse LU factorization;
// every solve is residual-checked against kResolventResidualTol * ||w||.
class ShiftedSolver {
 public:
  ShiftedSolver(const SparseOp& u, Complex z);

  // Throws std::runtime_error when the factorization or the residual
  // check fails; Monte Carlo callers catch and discard the realization.
  Eigen::VectorXcd solve(const Eigen::VectorXcd& rhs) const;
  Complex z() const { return z_; }
  int dim() const { return static_cast<int>(shifted_.rows()); }

 private:
  Complex z_;
  SparseOp shifted_;
  Eigen::SparseLU<SparseOp> lu_;
};

void require_off_circle(Complex z);

// Single resolvent matrix element <target| (U - z)^{-1} |source>.
Complex resolvent_element(const SparseOp& u, Complex z, int source_index, int target_index);

// Resolvent of the decoupled operator U^{Lambda_L} (+) U^{Lambda_L^c}:
// the two invariant index sets are solved independently, so the
// cross-subspace entries of the result are zero by construction.
class DecoupledResolvent {
 public:
  // `inside` marks the indices of the box subspace within the outer basis.
  DecoupledResolvent(const SparseOp& u_l, const std::vector<bool>& inside, Complex z);

  Eigen::VectorXcd solve(const Eigen::VectorXcd& rhs) const;
  bool is_inside(int index) const { return inside_[static_cast<std::size_t>(index)]; }
  int inside_dim() const { return static_cast<int>(inside_map_.size()); }
  int outside_dim() const { return static_cast<int>(outside_map_.size()); }

 private:
  std::vector<bool> inside_;
  std::vector<int> inside_map_, outside_map_;   // subspace -> outer index
  std::vector<int> position_;                   // outer index -> position in its subspace
  Complex z_;
  SparseOp in_shifted_, out_shifted_;
  Eigen::SparseLU<SparseOp> in_lu_, out_lu_;
};

// Marks outer-basis states that belong to the box side of the partition
// at radius L (blocks anchored in the inner box).
std::vector<bool> box_side_mask(const BlockBasis& outer_basis, const Permutation& pi,
                                const BoxRegion& inner);

// --- Geometric resolvent identities --------------------------------------

struct IdentityCheckResult {
  double single_identity_dev = 0.0;   // R = R^L - R^L T^L R
  double double_identity_dev = 0.0;   // R = R^L - R^L T^L R^{L+3} + R^L T^L R T^{L+3} R^{L+3}
  double expansion_dev = 0.0;         // <tau,0|R|sigma,y> = <tau,0|R^L T^L R T^{L+3} R^{L+3}|sigma,y>
  int probe_columns = 0;
  double defect_norm = 0.0;
  double defect_norm_l3 = 0.0;
};

// Verifies the identities on a set of probe columns (states near the
// origin, the expansion states at |y| >= L+5, and seeded random columns);
// deviations are reported as the max entry error over the probed columns.
IdentityCheckResult verify_geometric_identity(int L, const CoinMatrix& coin,
                                              const Permutation& pi, const PhaseField& field,
                                              Complex z, int outer_radius, const Site& center,
                                              int random_probes, std::uint64_t probe_seed);

// --- Fractional moment Monte Carlo ---------------------------------------

struct FmPair {
  BasisState source;
  BasisState target;
};

enum class EnsembleKind {
  OuterClosed,   // walk on the closed outer box (desk-scale full operator)
  FiniteVolume,  // finite-volume restriction U^{Lambda_L}, box side
};

struct FmEnsemble {
  EnsembleKind kind = EnsembleKind::OuterClosed;
  int d = 2;
  Permutation pi;
  CoinMatrix coin;
  PhaseDistribution dist;
  int radius = 8;  // box radius L (FiniteVolume) or outer radius (OuterClosed)
  Site center;
};

struct FMEstimate {
  double s = 0.2;
  Complex z;
  std::vector<FmPair> pairs;
  std::vector<double> mean;       // per pair, E |<target|R|source>|^s
  std::vector<double> std_error;  // per pair
  std::vector<std::vector<double>> raw;  // [pair][kept realization]
  int realizations = 0;
  int discarded = 0;
  std::uint64_t seed = 0;
};

// Independent realizations indexed from the master seed; solver failures
// discard the whole realization and abort the estimate above 1% failures.
FMEstimate fractional_moment_mc(const FmEnsemble& ensemble, double s, Complex z,
                                const std::vector<FmPair>& pairs, int realizations,
                                std::uint64_t seed);

// --- Exponential decay fit ------------------------------------------------

struct FMFitResult {
  double gamma = 0.0;      // decay rate, positive for decaying data
  double prefactor = 0.0;  // c in c * exp(-gamma * r)
  double r_squared = 0.0;
  double gamma_ci_low = 0.0, gamma_ci_high = 0.0;  // bootstrap 95%
  int excluded_zeros = 0;
  bool decaying = false;  // gamma > 0 with CI excluding 0
};

// Least squares on log(mean) vs distance. Distances whose mean is zero
// are excluded (their count is reported): exact zeros are the signature
// of block decoupling, not data.
FMFitResult decay_fit(const std::vector<double>& distances, const std::vector<double>& means);

// Same, plus a percentile bootstrap over realizations (raw[d][i] must be
// indexed consistently across distances).
FMFitResult decay_fit_bootstrap(const std::vector<double>& distances,
                                const std::vector<std::vector<double>>& raw, int bootstrap_reps,
                                std::uint64_t seed);

// --- Finite-volume bound scan ----------------------------------------------

struct ScanConfig {
  int d = 2;
  double s = 0.2;
  double a = 1.0;
  double p = 2.0;
  double eta = 0.0625;
  std::vector<int> box_radii;
  Complex z{1.1, 0.0};
  int realizations = 200;
  double eta_cap = 0.5;  // upper bound on eta * L^d over the scan

  double q() const { return p / (p - 1.0); }
  double delta_rule(int L) const;
  void validate() const;  // s in (0,1/3), p > 1/(1-s), eta * L^d <= cap
};

struct ScanRow {
  int L = 0;
  double delta = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
  double envelope = 0.0;  // (eta L^d)^{1/p} + delta^s / eta^{2s}
  int discarded = 0;
};

struct ScanResult {
  std::vector<ScanRow> rows;
  double fitted_c = 0.0;  // least squares of estimate on envelope, through origin
};

// For each L: delta by the closed-form rule, a perturbed coin at that
// distance, and the fractional moment of the finite-volume resolvent for
// the given pair, reported against the two-term theoretical envelope.
ScanResult finite_volume_bound_scan(const ScanConfig& config, const Permutation& pi,
                                    const PhaseDistribution& dist, const FmPair& pair,
                                    std::uint64_t seed);

}  // namespace qwloc
