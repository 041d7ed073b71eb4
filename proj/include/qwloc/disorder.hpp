#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "qwloc/coin.hpp"
#include "qwloc/types.hpp"

namespace qwloc {

// Phase law on [0, 2pi): either the uniform law or a tabulated density
// sampled by inverse CDF on a fixed grid.
class PhaseDistribution {
 public:
  static PhaseDistribution uniform();
  // density values on the uniform grid theta_k = 2pi k / values.size();
  // must be nonnegative and integrate to 1 within 1e-8.
  static PhaseDistribution tabulated(std::vector<double> values);
  // All phases identically zero: the deterministic walk D = I. Outside
  // the density assumption; meant for exact algebra tests and controls.
  static PhaseDistribution zero_phases();

  bool is_uniform() const { return uniform_ && !zero_; }
  bool is_zero() const { return zero_; }
  double sup_density() const { return sup_density_; }

  // Inverse CDF applied to u in [0,1); returns theta in [0, 2pi).
  double sample(double u) const;

  // Density of the law (piecewise constant for tabulated input).
  double density(double theta) const;

  bool operator==(const PhaseDistribution& other) const {
    return uniform_ == other.uniform_ && zero_ == other.zero_ && values_ == other.values_;
  }

  const std::vector<double>& table() const { return values_; }

 private:
  PhaseDistribution() = default;
  bool uniform_ = true;
  bool zero_ = false;
  double sup_density_ = 1.0 / (2.0 * M_PI);
  std::vector<double> values_;  // empty for uniform
  std::vector<double> cdf_;     // cumulative, cdf_[k] = integral up to grid point k
};

inline constexpr int kInverseCdfGridSize = 4096;

// One disorder realization: phases omega_y^tau for (y, tau) in
// region x I_pm. Values are pure functions of (seed, y, tau), so the
// field stores nothing and two fields with overlapping regions agree
// on the overlap. Translation is an index shift, hence exact.
class PhaseField {
 public:
  PhaseField(int d, BoxRegion region, PhaseDistribution dist, std::uint64_t seed,
             Site offset = Site::zero());

  int dim() const { return d_; }
  std::uint64_t seed() const { return seed_; }
  const BoxRegion& region() const { return region_; }
  const PhaseDistribution& distribution() const { return dist_; }
  const Site& offset() const { return offset_; }

  double phase(const Site& y, int tau) const;
  Complex phase_factor(const Site& y, int tau) const;

  bool covers(const Site& y) const { return region_.contains(y); }

  // Field with phases'(y, tau) = phases(y + a, tau).
  PhaseField translated(const Site& a) const;

 private:
  int d_;
  BoxRegion region_;
  PhaseDistribution dist_;
  std::uint64_t seed_;
  Site offset_;
};

// Region must be nonempty; the region records which sites the caller
// may legitimately query.
PhaseField sample_field(const BoxRegion& region, const PhaseDistribution& dist,
                        std::uint64_t seed);

// Sum of the m phases collected along the cycle path started at
// (tau_1, x), where tau_1 is the first element of `cycle`:
//   omega_x^{tau_1} + omega_{x+r(pi(tau_1))}^{pi(tau_1)} + ...
// Throws if the path leaves the field's region. Result in [0, 2pi*m).
double cycle_phase(const PhaseField& field, const Site& x, const Cycle& cycle);

}  // namespace qwloc
