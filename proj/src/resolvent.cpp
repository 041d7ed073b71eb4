#include "qwloc/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "qwloc/parallel.hpp"
#include "qwloc/rng.hpp"
#include "qwloc/stats.hpp"

namespace qwloc {

void require_off_circle(Complex z) {
  const double m = std::abs(z);
  if (!std::isfinite(m) || m == 0.0)
    throw std::invalid_argument("resolvent: z must be finite and nonzero");
  if (std::abs(m - 1.0) < 1e-12)
    throw std::invalid_argument("resolvent: |z| too close to the unit circle");
}

namespace {

SparseOp shift_by(const SparseOp& u, Complex z) {
  SparseOp id(u.rows(), u.cols());
  id.setIdentity();
  SparseOp s = u - SparseOp(id * z);
  s.makeCompressed();
  return s;
}

}  // namespace

ShiftedSolver::ShiftedSolver(const SparseOp& u, Complex z) : z_(z), shifted_(shift_by(u, z)) {
  require_off_circle(z);
  lu_.compute(shifted_);
  if (lu_.info() != Eigen::Success)
    throw std::runtime_error("resolvent: sparse LU factorization failed");
}

Eigen::VectorXcd ShiftedSolver::solve(const Eigen::VectorXcd& rhs) const {
  Eigen::VectorXcd x = lu_.solve(rhs);
  if (lu_.info() != Eigen::Success) throw std::runtime_error("resolvent: solve failed");
  const double residual = (shifted_ * x - rhs).norm();
  const double scale = std::max(x.norm(), rhs.norm());
  if (!(residual <= kResolventResidualTol * std::max(scale, 1e-300)))
    throw std::runtime_error("resolvent: residual " + std::to_string(residual) +
                             " above tolerance");
  return x;
}

Complex resolvent_element(const SparseOp& u, Complex z, int source_index, int target_index) {
  if (source_index < 0 || source_index >= u.rows() || target_index < 0 ||
      target_index >= u.rows())
    throw std::invalid_argument("resolvent_element: index out of range");
  ShiftedSolver solver(u, z);
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(u.rows());
  rhs(source_index) = Complex(1, 0);
  return solver.solve(rhs)(target_index);
}

DecoupledResolvent::DecoupledResolvent(const SparseOp& u_l, const std::vector<bool>& inside,
                                       Complex z)
    : inside_(inside), z_(z) {
  require_off_circle(z);
  const int n = static_cast<int>(u_l.rows());
  if (static_cast<int>(inside.size()) != n)
    throw std::invalid_argument("decoupled resolvent: mask size mismatch");
  position_.assign(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < n; ++i) {
    if (inside_[static_cast<std::size_t>(i)]) {
      position_[static_cast<std::size_t>(i)] = static_cast<int>(inside_map_.size());
      inside_map_.push_back(i);
    } else {
      position_[static_cast<std::size_t>(i)] = static_cast<int>(outside_map_.size());
      outside_map_.push_back(i);
    }
  }

  std::vector<Eigen::Triplet<Complex>> in_trip, out_trip;
  for (int k = 0; k < u_l.outerSize(); ++k) {
    for (SparseOp::InnerIterator it(u_l, k); it; ++it) {
      const bool ri = inside_[static_cast<std::size_t>(it.row())];
      const bool ci = inside_[static_cast<std::size_t>(it.col())];
      if (ri != ci) {
        if (it.value() != Complex(0, 0))
          throw std::invalid_argument(
              "decoupled resolvent: operator couples the two subspaces (entry " +
              std::to_string(std::abs(it.value())) + ")");
        continue;
      }
      const int r = position_[static_cast<std::size_t>(it.row())];
      const int c = position_[static_cast<std::size_t>(it.col())];
      if (ri)
        in_trip.emplace_back(r, c, it.value());
      else
        out_trip.emplace_back(r, c, it.value());
    }
  }
  SparseOp in_op(inside_dim(), inside_dim());
  in_op.setFromTriplets(in_trip.begin(), in_trip.end());
  SparseOp out_op(outside_dim(), outside_dim());
  out_op.setFromTriplets(out_trip.begin(), out_trip.end());
  in_shifted_ = shift_by(in_op, z);
  out_shifted_ = shift_by(out_op, z);
  in_lu_.compute(in_shifted_);
  if (in_lu_.info() != Eigen::Success)
    throw std::runtime_error("decoupled resolvent: box factorization failed");
  if (outside_dim() > 0) {
    out_lu_.compute(out_shifted_);
    if (out_lu_.info() != Eigen::Success)
      throw std::runtime_error("decoupled resolvent: complement factorization failed");
  }
}

Eigen::VectorXcd DecoupledResolvent::solve(const Eigen::VectorXcd& rhs) const {
  const int n = static_cast<int>(inside_.size());
  if (rhs.size() != n) throw std::invalid_argument("decoupled resolvent: rhs size mismatch");
  Eigen::VectorXcd in_rhs(inside_dim()), out_rhs(outside_dim());
  for (int i = 0; i < inside_dim(); ++i) in_rhs(i) = rhs(inside_map_[static_cast<std::size_t>(i)]);
  for (int i = 0; i < outside_dim(); ++i)
    out_rhs(i) = rhs(outside_map_[static_cast<std::size_t>(i)]);

  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(n);
  const auto check = [](const SparseOp& m, const Eigen::VectorXcd& x,
                        const Eigen::VectorXcd& b) {
    const double residual = (m * x - b).norm();
    const double scale = std::max(x.norm(), b.norm());
    if (!(residual <= kResolventResidualTol * std::max(scale, 1e-300)))
      throw std::runtime_error("decoupled resolvent: residual above tolerance");
  };
  if (inside_dim() > 0) {
    Eigen::VectorXcd x = in_lu_.solve(in_rhs);
    if (in_lu_.info() != Eigen::Success)
      throw std::runtime_error("decoupled resolvent: box solve failed");
    check(in_shifted_, x, in_rhs);
    for (int i = 0; i < inside_dim(); ++i) out(inside_map_[static_cast<std::size_t>(i)]) = x(i);
  }
  if (outside_dim() > 0) {
    Eigen::VectorXcd x = out_lu_.solve(out_rhs);
    if (out_lu_.info() != Eigen::Success)
      throw std::runtime_error("decoupled resolvent: complement solve failed");
    check(out_shifted_, x, out_rhs);
    for (int i = 0; i < outside_dim(); ++i) out(outside_map_[static_cast<std::size_t>(i)]) = x(i);
  }
  return out;
}

std::vector<bool> box_side_mask(const BlockBasis& outer_basis, const Permutation& pi,
                                const BoxRegion& inner) {
  std::vector<bool> mask(static_cast<std::size_t>(outer_basis.dim()), false);
  int offset = 0;
  const int d = pi.dim();
  for (const auto& block : outer_basis.blocks) {
    const bool in = block_anchored_in(block, inner, d);
    for (int t = 0; t < block.length(); ++t)
      mask[static_cast<std::size_t>(offset + t)] = in;
    offset += block.length();
  }
  return mask;
}

IdentityCheckResult verify_geometric_identity(int L, const CoinMatrix& coin,
                                              const Permutation& pi, const PhaseField& field,
                                              Complex z, int outer_radius, const Site& center,
                                              int random_probes, std::uint64_t probe_seed) {
  require_off_circle(z);
  const int d = pi.dim();
  if (outer_radius < L + 6)
    throw std::invalid_argument(
        "verify_geometric_identity: outer box too small to host the L+3 decoupling and |y| = L+5");

  const BlockBasis basis = box_basis(pi, BoxRegion{d, center, outer_radius});
  const CoinMatrix cpi = permutation_matrix(pi);
  const std::vector<int> outer_collar{outer_radius};

  const auto mat = [&](std::vector<int> collars) {
    CoinAssignment coins{d, center, coin, cpi, std::move(collars)};
    return materialize_sparse(basis, coins, field);
  };
  const SparseOp u = mat({outer_radius});
  const SparseOp u_l = mat({L, outer_radius});
  const SparseOp u_l3 = mat({L + 3, outer_radius});

  const DefectOperator t_l = defect_operator(L, coin, pi, field, basis, center);
  const DefectOperator t_l3 = defect_operator(L + 3, coin, pi, field, basis, center);

  const ShiftedSolver full(u, z);
  const DecoupledResolvent r_l(u_l, box_side_mask(basis, pi, BoxRegion{d, center, L}), z);
  const DecoupledResolvent r_l3(u_l3, box_side_mask(basis, pi, BoxRegion{d, center, L + 3}), z);

  // Probe columns: everything near the center, plus random columns.
  std::vector<int> probes;
  for (int i = 0; i < basis.dim(); ++i) {
    if ((basis.states[static_cast<std::size_t>(i)].site - center).sup_norm() <= 1)
      probes.push_back(i);
  }
  CounterRng rng(derive_seed(probe_seed, 0x9f0be5));
  for (int k = 0; k < random_probes; ++k)
    probes.push_back(static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(basis.dim())));
  std::sort(probes.begin(), probes.end());
  probes.erase(std::unique(probes.begin(), probes.end()), probes.end());

  IdentityCheckResult out;
  out.probe_columns = static_cast<int>(probes.size());
  out.defect_norm = t_l.norm;
  out.defect_norm_l3 = t_l3.norm;

  for (int j : probes) {
    Eigen::VectorXcd ej = Eigen::VectorXcd::Zero(basis.dim());
    ej(j) = Complex(1, 0);
    const Eigen::VectorXcd r_col = full.solve(ej);
    const Eigen::VectorXcd rl_col = r_l.solve(ej);

    // R = R^L - R^L T^L R
    const Eigen::VectorXcd single = rl_col - r_l.solve(t_l.matrix * r_col);
    out.single_identity_dev =
        std::max(out.single_identity_dev, (r_col - single).cwiseAbs().maxCoeff());

    // R = R^L - R^L T^L R^{L+3} + R^L T^L R T^{L+3} R^{L+3}
    const Eigen::VectorXcd rl3_col = r_l3.solve(ej);
    const Eigen::VectorXcd term2 = r_l.solve(t_l.matrix * rl3_col);
    const Eigen::VectorXcd term3 =
        r_l.solve(t_l.matrix * full.solve(t_l3.matrix * rl3_col));
    const Eigen::VectorXcd dbl = rl_col - term2 + term3;
    out.double_identity_dev =
        std::max(out.double_identity_dev, (r_col - dbl).cwiseAbs().maxCoeff());
  }

  // Expansion <tau,0|R|sigma,y> = <tau,0|R^L T^L R T^{L+3} R^{L+3}|sigma,y>
  // for |y| >= L+5: probe all states on the axis shells at exactly L+5.
  std::vector<int> origin_rows;
  for (int i = 0; i < basis.dim(); ++i)
    if (basis.states[static_cast<std::size_t>(i)].site == center) origin_rows.push_back(i);
  for (int axis = 0; axis < d; ++axis) {
    for (int sign = -1; sign <= 1; sign += 2) {
      const Site y = center + Site::axis(axis, sign * (L + 5));
      for (int c = 0; c < 2 * d; ++c) {
        const auto it = basis.index.find(BasisState{coin_from_code(c, d), y});
        if (it == basis.index.end()) continue;
        Eigen::VectorXcd ej = Eigen::VectorXcd::Zero(basis.dim());
        ej(it->second) = Complex(1, 0);
        const Eigen::VectorXcd lhs = full.solve(ej);
        const Eigen::VectorXcd rhs =
            r_l.solve(t_l.matrix * full.solve(t_l3.matrix * r_l3.solve(ej)));
        for (int row : origin_rows)
          out.expansion_dev = std::max(out.expansion_dev, std::abs(lhs(row) - rhs(row)));
      }
    }
  }
  return out;
}

FMEstimate fractional_moment_mc(const FmEnsemble& ensemble, double s, Complex z,
                                const std::vector<FmPair>& pairs, int realizations,
                                std::uint64_t seed) {
  if (!(s > 0.0 && s < 1.0))
    throw std::invalid_argument("fractional_moment_mc: s must lie in (0,1)");
  if (realizations < 100)
    throw std::invalid_argument("fractional_moment_mc: need at least 100 realizations");
  if (pairs.empty()) throw std::invalid_argument("fractional_moment_mc: no pairs");
  require_off_circle(z);

  const int d = ensemble.d;
  const Permutation& pi = ensemble.pi;
  const BoxRegion box{d, ensemble.center, ensemble.radius};
  const BlockBasis basis = box_basis(pi, box);
  // Both ensembles are the collar-substituted walk on the blocks anchored
  // in the box; for OuterClosed the box is the desk-scale outer region,
  // for FiniteVolume it is Lambda_L itself.
  const CoinAssignment coins{d, ensemble.center, ensemble.coin, permutation_matrix(pi),
                             {ensemble.radius}};
  const BoxRegion field_region{d, ensemble.center, ensemble.radius + 2};

  // Pair indices, grouped by source so one solve serves all its targets.
  std::vector<int> src_idx(pairs.size()), tgt_idx(pairs.size());
  std::map<int, std::vector<std::size_t>> by_source;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto si = basis.index.find(pairs[p].source);
    const auto ti = basis.index.find(pairs[p].target);
    if (si == basis.index.end() || ti == basis.index.end())
      throw std::invalid_argument("fractional_moment_mc: pair state outside the basis");
    src_idx[p] = si->second;
    tgt_idx[p] = ti->second;
    by_source[si->second].push_back(p);
  }

  std::vector<std::vector<double>> per_real(static_cast<std::size_t>(realizations));
  std::vector<std::uint8_t> ok(static_cast<std::size_t>(realizations), 0);
  parallel_for(realizations, [&](std::int64_t i) {
    const PhaseField field(d, field_region, ensemble.dist,
                           derive_seed(seed, static_cast<std::uint64_t>(i)));
    std::vector<double> vals(pairs.size(), 0.0);
    try {
      const SparseOp u = materialize_sparse(basis, coins, field);
      const ShiftedSolver solver(u, z);
      for (const auto& [src, plist] : by_source) {
        Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(basis.dim());
        rhs(src) = Complex(1, 0);
        const Eigen::VectorXcd w = solver.solve(rhs);
        for (std::size_t p : plist)
          vals[p] = std::pow(std::abs(w(tgt_idx[p])), s);
      }
    } catch (const std::runtime_error&) {
      return;  // realization discarded, slot stays marked invalid
    }
    per_real[static_cast<std::size_t>(i)] = std::move(vals);
    ok[static_cast<std::size_t>(i)] = 1;
  });

  FMEstimate est;
  est.s = s;
  est.z = z;
  est.pairs = pairs;
  est.realizations = realizations;
  est.seed = seed;
  est.raw.assign(pairs.size(), {});
  for (int i = 0; i < realizations; ++i) {
    if (!ok[static_cast<std::size_t>(i)]) {
      ++est.discarded;
      continue;
    }
    for (std::size_t p = 0; p < pairs.size(); ++p)
      est.raw[p].push_back(per_real[static_cast<std::size_t>(i)][p]);
  }
  if (est.discarded > realizations / 100)
    throw std::runtime_error("fractional_moment_mc: more than 1% of realizations discarded (" +
                             std::to_string(est.discarded) + "/" +
                             std::to_string(realizations) + ")");
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const MeanSE ms = mean_se(est.raw[p]);
    est.mean.push_back(ms.mean);
    est.std_error.push_back(ms.se);
  }
  return est;
}

namespace {

FMFitResult fit_log_means(const std::vector<double>& distances, const std::vector<double>& means,
                          int* excluded) {
  if (distances.size() != means.size())
    throw std::invalid_argument("decay_fit: distances and means must match");
  std::vector<double> xs, ys;
  int zeros = 0;
  for (std::size_t i = 0; i < means.size(); ++i) {
    if (means[i] > 0.0) {
      xs.push_back(distances[i]);
      ys.push_back(std::log(means[i]));
    } else {
      ++zeros;
    }
  }
  if (excluded) *excluded = zeros;
  if (xs.size() < 3)
    throw std::runtime_error("decay_fit: fewer than 3 positive estimates (degenerate fit)");
  const LineFit line = least_squares(xs, ys);
  FMFitResult out;
  out.gamma = -line.slope;
  out.prefactor = std::exp(line.intercept);
  out.r_squared = line.r_squared;
  out.excluded_zeros = zeros;
  return out;
}

}  // namespace

FMFitResult decay_fit(const std::vector<double>& distances, const std::vector<double>& means) {
  if (distances.size() < 4) throw std::invalid_argument("decay_fit: need >= 4 distances");
  int zeros = 0;
  FMFitResult out = fit_log_means(distances, means, &zeros);
  out.gamma_ci_low = out.gamma;
  out.gamma_ci_high = out.gamma;
  out.decaying = out.gamma > 0.0;
  return out;
}

FMFitResult decay_fit_bootstrap(const std::vector<double>& distances,
                                const std::vector<std::vector<double>>& raw, int bootstrap_reps,
                                std::uint64_t seed) {
  if (distances.size() != raw.size())
    throw std::invalid_argument("decay_fit_bootstrap: distances and raw data must match");
  if (distances.size() < 4) throw std::invalid_argument("decay_fit_bootstrap: need >= 4 distances");
  std::size_t n = raw.empty() ? 0 : raw.front().size();
  for (const auto& r : raw)
    if (r.size() != n)
      throw std::invalid_argument("decay_fit_bootstrap: ragged raw data");
  if (n < 2) throw std::invalid_argument("decay_fit_bootstrap: need >= 2 realizations");

  std::vector<double> means;
  for (const auto& r : raw) means.push_back(mean_se(r).mean);
  FMFitResult out = fit_log_means(distances, means, &out.excluded_zeros);

  CounterRng rng(derive_seed(seed, 0xb0075));
  std::vector<double> gammas;
  gammas.reserve(static_cast<std::size_t>(bootstrap_reps));
  for (int rep = 0; rep < bootstrap_reps; ++rep) {
    std::vector<std::size_t> pick(n);
    for (std::size_t i = 0; i < n; ++i)
      pick[i] = static_cast<std::size_t>(rng.next_u64() % n);
    std::vector<double> bmeans;
    for (const auto& r : raw) {
      double sum = 0.0;
      for (std::size_t i : pick) sum += r[i];
      bmeans.push_back(sum / static_cast<double>(n));
    }
    try {
      gammas.push_back(fit_log_means(distances, bmeans, nullptr).gamma);
    } catch (const std::runtime_error&) {
      // resample collapsed to zeros; skip
    }
  }
  if (gammas.size() >= 20) {
    std::sort(gammas.begin(), gammas.end());
    const auto lo = static_cast<std::size_t>(0.025 * static_cast<double>(gammas.size()));
    const auto hi = static_cast<std::size_t>(0.975 * static_cast<double>(gammas.size()));
    out.gamma_ci_low = gammas[lo];
    out.gamma_ci_high = gammas[std::min(hi, gammas.size() - 1)];
  } else {
    out.gamma_ci_low = out.gamma;
    out.gamma_ci_high = out.gamma;
  }
  out.decaying = out.gamma > 0.0 && out.gamma_ci_low > 0.0;
  return out;
}

double ScanConfig::delta_rule(int L) const {
  return std::pow(static_cast<double>(L), -(2.0 * (a * p + d) + a / s));
}

void ScanConfig::validate() const {
  if (!(s > 0.0 && s < 1.0 / 3.0))
    throw std::invalid_argument("scan: decoupling-regime scans require s in (0, 1/3)");
  if (!(p > 1.0 / (1.0 - s)))
    throw std::invalid_argument("scan: p must exceed 1/(1-s)");
  if (!(a >= 0.0)) throw std::invalid_argument("scan: a must be >= 0");
  if (box_radii.empty()) throw std::invalid_argument("scan: empty L list");
  for (int L : box_radii) {
    if (L < 2) throw std::invalid_argument("scan: L must be >= 2");
    double vol = eta;
    for (int i = 0; i < d; ++i) vol *= L;
    if (vol > eta_cap)
      throw std::invalid_argument("scan: eta * L^d = " + std::to_string(vol) +
                                  " exceeds the smallness cap " + std::to_string(eta_cap));
  }
  if (realizations < 100) throw std::invalid_argument("scan: need at least 100 realizations");
}

ScanResult finite_volume_bound_scan(const ScanConfig& config, const Permutation& pi,
                                    const PhaseDistribution& dist, const FmPair& pair,
                                    std::uint64_t seed) {
  config.validate();
  if ((pair.source.site - pair.target.site).sup_norm() <= 2)
    throw std::invalid_argument("scan: pair must satisfy |x - y| > 2");

  const CoinMatrix cpi = permutation_matrix(pi);
  ScanResult out;
  std::vector<double> ests, envs;
  for (int L : config.box_radii) {
    ScanRow row;
    row.L = L;
    row.delta = config.delta_rule(L);
    const CoinMatrix coin =
        perturb_coin(cpi, row.delta, derive_seed(seed, 0x5ca0000ULL + static_cast<std::uint64_t>(L)));
    const FmEnsemble ens{EnsembleKind::FiniteVolume, config.d, pi, coin, dist, L, Site::zero()};
    const FMEstimate est = fractional_moment_mc(
        ens, config.s, config.z, {pair}, config.realizations,
        derive_seed(seed, 0xe57000ULL + static_cast<std::uint64_t>(L)));
    row.estimate = est.mean.front();
    row.std_error = est.std_error.front();
    row.discarded = est.discarded;
    double vol = config.eta;
    for (int i = 0; i < config.d; ++i) vol *= L;
    row.envelope = std::pow(vol, 1.0 / config.p) +
                   std::pow(row.delta, config.s) / std::pow(config.eta, 2.0 * config.s);
    ests.push_back(row.estimate);
    envs.push_back(row.envelope);
    out.rows.push_back(row);
  }
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < ests.size(); ++i) {
    num += ests[i] * envs[i];
    den += envs[i] * envs[i];
  }
  out.fitted_c = den > 0 ? num / den : 0.0;
  return out;
}

}  // namespace qwloc
