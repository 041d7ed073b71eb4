#include "qwloc/disorder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qwloc/rng.hpp"

namespace qwloc {

PhaseDistribution PhaseDistribution::uniform() { return PhaseDistribution(); }

PhaseDistribution PhaseDistribution::zero_phases() {
  PhaseDistribution dist;
  dist.zero_ = true;
  dist.sup_density_ = std::numeric_limits<double>::infinity();
  return dist;
}

PhaseDistribution PhaseDistribution::tabulated(std::vector<double> values) {
  if (values.size() < 2) throw std::invalid_argument("phase density: need at least 2 grid values");
  double sup = 0.0;
  for (double v : values) {
    if (!(v >= 0.0)) throw std::invalid_argument("phase density: negative or NaN value");
    sup = std::max(sup, v);
  }
  const double h = 2.0 * M_PI / static_cast<double>(values.size());
  double integral = 0.0;
  for (double v : values) integral += v * h;
  if (std::abs(integral - 1.0) > 1e-8)
    throw std::invalid_argument("phase density: does not integrate to 1 (got " +
                                std::to_string(integral) + ")");

  PhaseDistribution dist;
  dist.uniform_ = false;
  dist.sup_density_ = sup;
  dist.values_ = std::move(values);
  dist.cdf_.resize(dist.values_.size() + 1, 0.0);
  for (std::size_t k = 0; k < dist.values_.size(); ++k)
    dist.cdf_[k + 1] = dist.cdf_[k] + dist.values_[k] * h;
  // Remove the 1e-8 rounding slack so sample() maps [0,1) onto [0,2pi).
  const double total = dist.cdf_.back();
  for (double& c : dist.cdf_) c /= total;
  return dist;
}

double PhaseDistribution::sample(double u) const {
  if (zero_) return 0.0;
  if (uniform_) return 2.0 * M_PI * u;
  // Locate the grid cell containing u, then interpolate linearly (the
  // density is treated as piecewise constant on the cells). Zero-mass
  // cells are skipped by upper_bound over the strictly increasing part.
  const std::size_t n = values_.size();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  std::size_t lo = (it == cdf_.begin()) ? 0 : static_cast<std::size_t>(it - cdf_.begin()) - 1;
  if (lo >= n) lo = n - 1;
  const double cell_mass = cdf_[lo + 1] - cdf_[lo];
  const double frac = cell_mass > 0.0 ? (u - cdf_[lo]) / cell_mass : 0.0;
  const double h = 2.0 * M_PI / static_cast<double>(n);
  double theta = (static_cast<double>(lo) + frac) * h;
  if (theta >= 2.0 * M_PI) theta = std::nextafter(2.0 * M_PI, 0.0);
  return theta;
}

double PhaseDistribution::density(double theta) const {
  if (uniform_) return 1.0 / (2.0 * M_PI);
  double t = std::fmod(theta, 2.0 * M_PI);
  if (t < 0) t += 2.0 * M_PI;
  const std::size_t n = values_.size();
  auto k = static_cast<std::size_t>(t / (2.0 * M_PI) * static_cast<double>(n));
  if (k >= n) k = n - 1;
  return values_[k];
}

PhaseField::PhaseField(int d, BoxRegion region, PhaseDistribution dist, std::uint64_t seed,
                       Site offset)
    : d_(d), region_(region), dist_(std::move(dist)), seed_(seed), offset_(offset) {
  if (d < 1 || d > kMaxDim) throw std::invalid_argument("phase field: bad dimension");
  if (region.site_count() <= 0) throw std::invalid_argument("phase field: empty region");
}

double PhaseField::phase(const Site& y, int tau) const {
  require_coin_index(tau, d_);
  if (!region_.contains(y))
    throw std::out_of_range("phase field: site " + to_string(y, d_) + " outside region");
  const Site shifted = y + offset_;
  return dist_.sample(unit_double(state_key(seed_, shifted, d_, tau)));
}

Complex PhaseField::phase_factor(const Site& y, int tau) const {
  const double t = phase(y, tau);
  return Complex(std::cos(t), std::sin(t));
}

PhaseField PhaseField::translated(const Site& a) const {
  BoxRegion region = region_;
  region.center = region.center - a;
  return PhaseField(d_, region, dist_, seed_, offset_ + a);
}

PhaseField sample_field(const BoxRegion& region, const PhaseDistribution& dist,
                        std::uint64_t seed) {
  return PhaseField(region.d, region, dist, seed);
}

double cycle_phase(const PhaseField& field, const Site& x, const Cycle& cycle) {
  if (cycle.length() == 0) throw std::invalid_argument("cycle_phase: empty cycle");
  const int d = field.dim();
  double theta = 0.0;
  Site y = x;
  for (int t = 0; t < cycle.length(); ++t) {
    const int tau = cycle.elements[static_cast<std::size_t>(t)];
    if (t > 0) y = y + displacement(tau, d);
    theta += field.phase(y, tau);  // throws if the path leaves the region
  }
  return theta;
}

}  // namespace qwloc
