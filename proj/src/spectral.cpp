#include "qwloc/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qwloc/parallel.hpp"
#include "qwloc/rng.hpp"
#include "qwloc/stats.hpp"

namespace qwloc {

double SpectrumResult::max_modulus_deviation() const {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i)
    worst = std::max(worst, std::abs(std::abs(eigenvalues(i)) - 1.0));
  return worst;
}

namespace {

void sort_by_argument(Eigen::VectorXcd& vals, Eigen::VectorXd* residuals) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(vals.size()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double aa = std::arg(vals(a)), bb = std::arg(vals(b));
    if (aa != bb) return aa < bb;
    const Complex va = vals(a), vb = vals(b);
    if (va.real() != vb.real()) return va.real() < vb.real();
    return va.imag() < vb.imag();
  });
  Eigen::VectorXcd v(vals.size());
  Eigen::VectorXd r(vals.size());
  for (Eigen::Index i = 0; i < vals.size(); ++i) {
    v(i) = vals(order[static_cast<std::size_t>(i)]);
    if (residuals) r(i) = (*residuals)(order[static_cast<std::size_t>(i)]);
  }
  vals = v;
  if (residuals) *residuals = r;
}

}  // namespace

SpectrumResult unitary_spectrum(const Eigen::MatrixXcd& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("unitary_spectrum: matrix not square");
  const double unit = unitarity_residual(m);
  if (unit > 1e-6)
    throw std::invalid_argument("unitary_spectrum: input grossly non-unitary (residual " +
                                std::to_string(unit) + ")");
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m);
  if (es.info() != Eigen::Success) throw std::runtime_error("unitary_spectrum: solver failed");

  SpectrumResult out;
  out.source = SpectrumResult::Source::Numerical;
  out.eigenvalues = es.eigenvalues();
  out.residuals.resize(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const auto v = es.eigenvectors().col(i);
    out.residuals(i) = (m * v - out.eigenvalues(i) * v).norm();
  }
  sort_by_argument(out.eigenvalues, &out.residuals);
  return out;
}

SpectrumResult block_spectrum_exact(const InvariantBlock& block, const PhaseField& field) {
  const int m = block.length();
  if (m == 0) throw std::invalid_argument("block_spectrum_exact: empty block");
  double theta = 0.0;
  for (const auto& member : block.members) theta += field.phase(member.site, member.tau);

  SpectrumResult out;
  out.source = SpectrumResult::Source::ExactFormula;
  out.eigenvalues.resize(m);
  for (int k = 0; k < m; ++k) {
    const double a = (theta + 2.0 * M_PI * k) / m;
    out.eigenvalues(k) = Complex(std::cos(a), std::sin(a));
  }
  out.residuals = Eigen::VectorXd::Zero(m);
  sort_by_argument(out.eigenvalues, &out.residuals);
  return out;
}

double hausdorff_distance(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  const auto one_sided = [](const Eigen::VectorXcd& from, const Eigen::VectorXcd& to) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < from.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < to.size(); ++j)
        best = std::min(best, std::abs(from(i) - to(j)));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(one_sided(a, b), one_sided(b, a));
}

Eigen::MatrixXcd coin_symbol(const CoinMatrix& coin, int d, const std::vector<double>& k) {
  if (static_cast<int>(k.size()) != d) throw std::invalid_argument("coin_symbol: k has wrong dim");
  const int n = 2 * d;
  if (coin.rows() != n || coin.cols() != n)
    throw std::invalid_argument("coin_symbol: coin must be 2d x 2d");
  Eigen::MatrixXcd m(n, n);
  for (int row = 0; row < n; ++row) {
    const int tau = coin_from_code(row, d);
    const Site r = displacement(tau, d);
    double kr = 0.0;
    for (int i = 0; i < d; ++i) kr += k[static_cast<std::size_t>(i)] * r[i];
    const Complex factor(std::cos(-kr), std::sin(-kr));
    for (int col = 0; col < n; ++col) m(row, col) = factor * coin(row, col);
  }
  return m;
}

std::vector<std::vector<double>> kgrid_uniform(int d, int points_per_axis) {
  if (points_per_axis < 1) throw std::invalid_argument("kgrid: need at least one point per axis");
  std::int64_t total = 1;
  for (int i = 0; i < d; ++i) total *= points_per_axis;
  std::vector<std::vector<double>> grid;
  grid.reserve(static_cast<std::size_t>(total));
  for (std::int64_t g = 0; g < total; ++g) {
    std::vector<double> k(static_cast<std::size_t>(d));
    std::int64_t rem = g;
    for (int i = d - 1; i >= 0; --i) {
      k[static_cast<std::size_t>(i)] =
          2.0 * M_PI * static_cast<double>(rem % points_per_axis) / points_per_axis;
      rem /= points_per_axis;
    }
    grid.push_back(std::move(k));
  }
  return grid;
}

namespace {

// Branch cut in the largest angular gap of the reference spectrum makes
// the argument order stable under the tiny eigensolver jitter of a
// k-independent spectrum.
double gap_cut(const Eigen::VectorXcd& ref) {
  std::vector<double> args;
  for (Eigen::Index i = 0; i < ref.size(); ++i) args.push_back(std::arg(ref(i)));
  std::sort(args.begin(), args.end());
  double best_gap = -1.0, cut = M_PI;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const double next = (i + 1 < args.size()) ? args[i + 1] : args[0] + 2.0 * M_PI;
    const double gap = next - args[i];
    if (gap > best_gap) {
      best_gap = gap;
      cut = args[i] + gap / 2.0;
    }
  }
  return cut;
}

}  // namespace

DispersionResult dispersion(const CoinMatrix& coin, int d,
                            const std::vector<std::vector<double>>& kgrid) {
  if (kgrid.empty()) throw std::invalid_argument("dispersion: empty k grid");
  const int n = 2 * d;
  DispersionResult out;
  out.d = d;
  out.kpoints = kgrid;
  out.bands.resize(static_cast<Eigen::Index>(kgrid.size()), n);

  double cut = 0.0;
  for (std::size_t g = 0; g < kgrid.size(); ++g) {
    const Eigen::MatrixXcd symbol = coin_symbol(coin, d, kgrid[g]);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(symbol, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) throw std::runtime_error("dispersion: eigensolver failed");
    Eigen::VectorXcd vals = es.eigenvalues();
    if (g == 0) cut = gap_cut(vals);
    std::sort(vals.data(), vals.data() + vals.size(), [&](const Complex& a, const Complex& b) {
      double aa = std::arg(a) - cut, bb = std::arg(b) - cut;
      aa -= 2.0 * M_PI * std::floor(aa / (2.0 * M_PI));
      bb -= 2.0 * M_PI * std::floor(bb / (2.0 * M_PI));
      if (aa != bb) return aa < bb;
      if (a.real() != b.real()) return a.real() < b.real();
      return a.imag() < b.imag();
    });
    out.bands.row(static_cast<Eigen::Index>(g)) = vals.transpose();
  }

  out.flatness.assign(static_cast<std::size_t>(n), 0.0);
  for (int b = 0; b < n; ++b) {
    double worst = 0.0;
    for (Eigen::Index g = 1; g < out.bands.rows(); ++g)
      worst = std::max(worst, std::abs(out.bands(g, b) - out.bands(0, b)));
    out.flatness[static_cast<std::size_t>(b)] = worst;
  }
  return out;
}

double DispersionResult::max_flatness() const {
  return flatness.empty() ? 0.0 : *std::max_element(flatness.begin(), flatness.end());
}

bool flat_band_test(const Permutation& pi, int grid_points, double flat_tol, double nonflat_tol) {
  const DispersionResult disp =
      dispersion(permutation_matrix(pi), pi.dim(), kgrid_uniform(pi.dim(), grid_points));
  const double worst = disp.max_flatness();
  if (worst <= flat_tol) return true;
  if (worst >= nonflat_tol) return false;
  throw std::runtime_error("flat_band_test: band variation " + std::to_string(worst) +
                           " falls in the guard gap (" + std::to_string(flat_tol) + ", " +
                           std::to_string(nonflat_tol) + ")");
}

bool arc_contains(const Arc& arc, const Complex& z) {
  double delta = std::arg(z) - arc.center;
  delta -= 2.0 * M_PI * std::round(delta / (2.0 * M_PI));  // wrap to (-pi, pi]
  return std::abs(delta) <= arc.length / 2.0;
}

namespace {

ArcAvoidanceResult avoidance_over_blocks(const std::vector<InvariantBlock>& blocks, int d,
                                         const PhaseDistribution& dist, const Arc& arc,
                                         int realizations, std::uint64_t seed) {
  if (realizations < 100)
    throw std::invalid_argument("arc_avoidance: need at least 100 realizations");
  int max_len = 0;
  for (const auto& b : blocks) max_len = std::max(max_len, b.length());
  if (arc.length >= 2.0 * M_PI / max_len)
    throw std::invalid_argument("arc_avoidance: arc too long for cycle length " +
                                std::to_string(max_len));

  // Fields only need to cover the block paths; radius 2 around the anchors.
  const BoxRegion region{d, Site::zero(), 2 + 2};
  std::vector<std::uint8_t> avoided(static_cast<std::size_t>(realizations), 0);
  parallel_for(realizations, [&](std::int64_t i) {
    const PhaseField field(d, region, dist, derive_seed(seed, static_cast<std::uint64_t>(i)));
    bool ok = true;
    for (const auto& block : blocks) {
      const SpectrumResult spec = block_spectrum_exact(block, field);
      for (Eigen::Index e = 0; e < spec.eigenvalues.size() && ok; ++e)
        if (arc_contains(arc, spec.eigenvalues(e))) ok = false;
      if (!ok) break;
    }
    avoided[static_cast<std::size_t>(i)] = ok ? 1 : 0;
  });

  int hits = 0;
  for (auto v : avoided) hits += v;
  ArcAvoidanceResult out;
  out.realizations = realizations;
  out.seed = seed;
  out.probability = static_cast<double>(hits) / realizations;
  const WilsonCI ci = wilson_ci(hits, realizations);
  out.ci_low = ci.low;
  out.ci_high = ci.high;
  if (dist.is_uniform()) {
    double p = 1.0;
    for (const auto& b : blocks) p *= 1.0 - b.length() * arc.length / (2.0 * M_PI);
    out.exact_uniform = p;
  }
  return out;
}

}  // namespace

ArcAvoidanceResult arc_avoidance_probability(const Permutation& pi, int cycle_index,
                                             const PhaseDistribution& dist, const Arc& arc,
                                             int realizations, std::uint64_t seed) {
  const CycleDecomposition dec = decompose_cycles(pi);
  if (cycle_index < 0 || cycle_index >= dec.cycle_count())
    throw std::invalid_argument("arc_avoidance: cycle index out of range");
  const int leader = dec.cycles[static_cast<std::size_t>(cycle_index)].elements.front();
  std::vector<InvariantBlock> blocks{make_block(pi, leader, Site::zero())};
  return avoidance_over_blocks(blocks, pi.dim(), dist, arc, realizations, seed);
}

ArcAvoidanceResult site_arc_avoidance_probability(const Permutation& pi,
                                                  const PhaseDistribution& dist, const Arc& arc,
                                                  int realizations, std::uint64_t seed) {
  const int d = pi.dim();
  std::vector<InvariantBlock> blocks;
  for (int c = 0; c < 2 * d; ++c) blocks.push_back(make_block(pi, coin_from_code(c, d), Site::zero()));
  return avoidance_over_blocks(blocks, d, dist, arc, realizations, seed);
}

DistanceScalingResult spectral_distance_statistics(const Complex& z, std::vector<double> etas,
                                                   int box_radius, const Permutation& pi,
                                                   const PhaseDistribution& dist,
                                                   int realizations, std::uint64_t seed) {
  if (!(std::abs(z) > 0.0) || !std::isfinite(std::abs(z)))
    throw std::invalid_argument("spectral_distance_statistics: bad z");
  if (std::abs(std::abs(z) - 1.0) < 1e-12)
    throw std::invalid_argument("spectral_distance_statistics: z must stay off the unit circle");
  for (double eta : etas)
    if (!(eta > 0.0)) throw std::invalid_argument("spectral_distance_statistics: eta must be > 0");

  const int d = pi.dim();
  const BoxRegion box{d, Site::zero(), box_radius};
  const BlockBasis basis = box_basis(pi, box);
  const BoxRegion field_region{d, Site::zero(), box_radius + 2};

  std::vector<double> min_dist(static_cast<std::size_t>(realizations), 0.0);
  parallel_for(realizations, [&](std::int64_t i) {
    const PhaseField field(d, field_region, dist, derive_seed(seed, static_cast<std::uint64_t>(i)));
    double best = std::numeric_limits<double>::infinity();
    for (const auto& block : basis.blocks) {
      const int m = block.length();
      double theta = 0.0;
      for (const auto& member : block.members) theta += field.phase(member.site, member.tau);
      for (int k = 0; k < m; ++k) {
        const double a = (theta + 2.0 * M_PI * k) / m;
        best = std::min(best, std::abs(z - Complex(std::cos(a), std::sin(a))));
      }
    }
    min_dist[static_cast<std::size_t>(i)] = best;
  });

  DistanceScalingResult out;
  out.z = z;
  out.box_radius = box_radius;
  out.etas = std::move(etas);
  out.realizations = realizations;
  out.seed = seed;
  for (double eta : out.etas) {
    int hits = 0;
    for (double m : min_dist)
      if (m <= eta) ++hits;
    out.probabilities.push_back(static_cast<double>(hits) / realizations);
    const WilsonCI ci = wilson_ci(hits, realizations);
    out.ci_low.push_back(ci.low);
    out.ci_high.push_back(ci.high);
  }
  return out;
}

}  // namespace qwloc
