#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "qwloc/disorder.hpp"
#include "qwloc/walk.hpp"

namespace qwloc {

struct SpectrumResult {
  enum class Source { ExactFormula, Numerical };
  Source source = Source::Numerical;
  Eigen::VectorXcd eigenvalues;  // sorted by argument in (-pi, pi]
  Eigen::VectorXd residuals;     // ||M v - lambda v|| per pair (zero for exact source)

  double max_modulus_deviation() const;
  double max_residual() const { return residuals.size() ? residuals.maxCoeff() : 0.0; }
};

// Full eigendecomposition of a (numerically) unitary matrix with
// per-pair residuals. Rejects grossly non-unitary input.
SpectrumResult unitary_spectrum(const Eigen::MatrixXcd& m);

// Spectrum of the random walk restricted to one invariant block:
// the m-th roots of e^{i theta}, where theta is the sum of the phases
// over the block's members.
SpectrumResult block_spectrum_exact(const InvariantBlock& block, const PhaseField& field);

// Largest circular distance between the two eigenvalue sets.
double hausdorff_distance(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b);

// --- Fourier dispersion -----------------------------------------------

// Multiplication-operator symbol of the translation-invariant walk:
// Phi(k) C with Phi(k) = diag(e^{-i k.r(tau)}).
Eigen::MatrixXcd coin_symbol(const CoinMatrix& coin, int d, const std::vector<double>& k);

std::vector<std::vector<double>> kgrid_uniform(int d, int points_per_axis);

struct DispersionResult {
  int d = 1;
  std::vector<std::vector<double>> kpoints;
  // bands(g, b): eigenvalue of band b at grid point g. Bands are matched
  // across the grid by argument-sorted order, with the branch cut placed
  // inside the largest spectral gap of the first grid point so that a
  // k-independent spectrum never straddles the cut.
  Eigen::MatrixXcd bands;
  std::vector<double> flatness;  // max_g |band(g) - band(0)| per band
  double max_flatness() const;
};

DispersionResult dispersion(const CoinMatrix& coin, int d,
                            const std::vector<std::vector<double>>& kgrid);

// Flat-band dichotomy for permutation coins: true iff every band of
// C_pi is flat to flat_tol on a grid_points^d grid. A permutation whose
// largest band variation lands between the two thresholds is neither
// clearly flat nor clearly dispersive and fails loudly.
bool flat_band_test(const Permutation& pi, int grid_points = 16, double flat_tol = 1e-10,
                    double nonflat_tol = 1e-3);

// --- Arc avoidance ------------------------------------------------------

// Arc on the unit circle: {e^{i t} : |t - center| <= length/2 (mod 2pi)}.
struct Arc {
  double center = 0.0;
  double length = 0.0;
};

bool arc_contains(const Arc& arc, const Complex& z);

struct ArcAvoidanceResult {
  double probability = 0.0;
  double ci_low = 0.0, ci_high = 0.0;  // Wilson 95%
  int realizations = 0;
  std::uint64_t seed = 0;
  // Closed form P = 1 - m|A|/2pi (single block) or the product over the
  // blocks at one site; only available for the uniform law.
  double exact_uniform = -1.0;
};

// Probability that the spectrum of one cycle block avoids the arc,
// estimated over disorder realizations via the exact block spectra.
ArcAvoidanceResult arc_avoidance_probability(const Permutation& pi, int cycle_index,
                                             const PhaseDistribution& dist, const Arc& arc,
                                             int realizations, std::uint64_t seed);

// Same for the full local space at one site (all blocks anchored there).
ArcAvoidanceResult site_arc_avoidance_probability(const Permutation& pi,
                                                  const PhaseDistribution& dist, const Arc& arc,
                                                  int realizations, std::uint64_t seed);

// --- Spectral distance scaling ------------------------------------------

struct DistanceScalingResult {
  Complex z;
  int box_radius = 0;
  std::vector<double> etas;
  std::vector<double> probabilities;  // P(dist(z, spectrum) <= eta), per eta
  std::vector<double> ci_low, ci_high;
  int realizations = 0;
  std::uint64_t seed = 0;
};

// Monte Carlo estimate of P(dist(z, sigma(U^{Lambda_L}(C_pi))) <= eta)
// over the disorder, using the exact block spectra (no dense solves).
// All etas share realizations, so the estimates are coupled.
DistanceScalingResult spectral_distance_statistics(const Complex& z, std::vector<double> etas,
                                                   int box_radius, const Permutation& pi,
                                                   const PhaseDistribution& dist,
                                                   int realizations, std::uint64_t seed);

}  // namespace qwloc
