#include "qwloc/walk.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace qwloc {

InvariantBlock make_block(const Permutation& pi, int tau, const Site& anchor) {
  const int d = pi.dim();
  require_coin_index(tau, d);
  InvariantBlock block;
  block.anchor_tau = tau;
  block.anchor_site = anchor;
  int sigma = tau;
  Site y = anchor + displacement(tau, d);
  // Walk until the path returns to member 0; localizing cycles close
  // after exactly the cycle length.
  const BasisState first{tau, y};
  for (int t = 0; t < 2 * d + 1; ++t) {
    block.members.push_back(BasisState{sigma, y});
    sigma = pi.apply(sigma);
    y = y + displacement(sigma, d);
    if (BasisState{sigma, y} == first) return block;
  }
  throw std::invalid_argument("make_block: cycle does not close (non-localizing permutation)");
}

std::vector<Site> block_anchor_sites(const InvariantBlock& block, int d) {
  std::vector<Site> anchors;
  anchors.reserve(block.members.size());
  for (const auto& m : block.members) anchors.push_back(m.site - displacement(m.tau, d));
  return anchors;
}

bool block_anchored_in(const InvariantBlock& block, const BoxRegion& box, int d) {
  for (const auto& m : block.members)
    if (box.contains(m.site - displacement(m.tau, d))) return true;
  return false;
}

namespace {

// Orbits are disjoint or identical, so the lexicographically smallest
// member identifies an orbit.
BasisState orbit_key(const InvariantBlock& block) {
  return *std::min_element(block.members.begin(), block.members.end());
}

}  // namespace

std::vector<InvariantBlock> enumerate_blocks(const Permutation& pi,
                                             const std::vector<Site>& anchors) {
  if (!check_localizing(pi).localizing)
    throw std::invalid_argument("enumerate_blocks: permutation is not localizing");
  const int d = pi.dim();
  std::vector<InvariantBlock> out;
  std::unordered_set<BasisState, BasisStateHash> seen;
  for (const auto& x : anchors) {
    for (int c = 0; c < 2 * d; ++c) {
      InvariantBlock block = make_block(pi, coin_from_code(c, d), x);
      if (seen.insert(orbit_key(block)).second) out.push_back(std::move(block));
    }
  }
  return out;
}

void BlockBasis::append_block(InvariantBlock block) {
  for (const auto& m : block.members) {
    index.emplace(m, static_cast<int>(states.size()));
    states.push_back(m);
  }
  blocks.push_back(std::move(block));
}

BlockBasis box_basis(const Permutation& pi, const BoxRegion& box) {
  BlockBasis basis;
  for (auto& block : enumerate_blocks(pi, box.sites())) basis.append_block(std::move(block));
  return basis;
}

BlockBasis complement_basis(const Permutation& pi, const BoxRegion& inner,
                            const BoxRegion& outer) {
  if (!(outer.center == inner.center) || outer.d != inner.d)
    throw std::invalid_argument("complement_basis: boxes must share center and dimension");
  if (outer.radius <= inner.radius)
    throw std::invalid_argument("complement_basis: outer radius must exceed inner radius");
  std::vector<Site> annulus;
  for (const auto& s : outer.sites())
    if (!inner.contains(s)) annulus.push_back(s);
  BlockBasis basis;
  const int d = pi.dim();
  for (auto& block : enumerate_blocks(pi, annulus)) {
    if (!block_anchored_in(block, inner, d)) basis.append_block(std::move(block));
  }
  return basis;
}

WalkSpec open_walk_spec(int d, const CoinMatrix& coin, const PhaseField& field,
                        const BoxRegion& box) {
  if (coin.rows() != 2 * d || coin.cols() != 2 * d)
    throw std::invalid_argument("open_walk_spec: coin must be 2d x 2d");
  return WalkSpec{d, box, CoinAssignment{d, box.center, coin, CoinMatrix(), {}}, field, false};
}

WalkSpec closed_walk_spec(int d, const CoinMatrix& coin, const Permutation& pi,
                          int outer_radius, const Site& center, const PhaseField& field,
                          const std::vector<int>& inner_collars) {
  if (outer_radius < 2) throw std::invalid_argument("closed_walk_spec: outer radius must be >= 2");
  if (!check_localizing(pi).localizing)
    throw std::invalid_argument("closed_walk_spec: permutation is not localizing");
  for (int l : inner_collars) {
    if (l < 2) throw std::invalid_argument("closed_walk_spec: collar radius must be >= 2");
    if (l + 4 > outer_radius)
      throw std::invalid_argument("closed_walk_spec: inner collar too close to the outer one");
  }
  std::vector<int> radii = inner_collars;
  radii.push_back(outer_radius);
  return WalkSpec{d, BoxRegion{d, center, outer_radius + 1},
                  CoinAssignment{d, center, coin, permutation_matrix(pi), std::move(radii)},
                  field, true};
}

StateVector StateVector::zero(int d, const BoxRegion& region) {
  StateVector psi;
  psi.d = d;
  psi.region = region;
  psi.amp.assign(static_cast<std::size_t>(region.site_count() * 2 * d), Complex(0, 0));
  return psi;
}

StateVector StateVector::point(int d, const BoxRegion& region, int tau, const Site& site) {
  StateVector psi = zero(d, region);
  psi.at(tau, site) = Complex(1, 0);
  return psi;
}

double StateVector::norm() const {
  double s = 0.0;
  for (const auto& a : amp) s += std::norm(a);
  return std::sqrt(s);
}

StateVector apply_walk(const WalkSpec& spec, const StateVector& psi) {
  const int d = spec.d;
  const int nc = 2 * d;
  if (psi.d != d || !(psi.region == spec.box))
    throw std::invalid_argument("apply_walk: state region does not match the spec");

  if (!spec.closed) {
    // Without a closing collar a step from the boundary would silently
    // leave the array and lose norm.
    for (std::int64_t si = 0; si < spec.box.site_count(); ++si) {
      const Site s = spec.box.site_at(si);
      if ((s - spec.box.center).sup_norm() < spec.box.radius) continue;
      for (int c = 0; c < nc; ++c) {
        if (psi.amp[static_cast<std::size_t>(si * nc + c)] != Complex(0, 0))
          throw std::runtime_error("apply_walk: support touches the region boundary");
      }
    }
  }

  StateVector out = StateVector::zero(d, spec.box);
  const std::int64_t nsites = spec.box.site_count();
  for (std::int64_t ti = 0; ti < nsites; ++ti) {
    const Site y = spec.box.site_at(ti);
    for (int c = 0; c < nc; ++c) {
      const int tau = coin_from_code(c, d);
      const Site src = y - displacement(tau, d);
      if (!spec.box.contains(src)) continue;
      const CoinMatrix& coin = spec.coins.at(src);
      const std::int64_t sbase = spec.box.linear_index(src) * nc;
      Complex acc(0, 0);
      for (int sc = 0; sc < nc; ++sc) {
        const Complex amp = coin(c, sc);
        if (amp != Complex(0, 0)) acc += amp * psi.amp[static_cast<std::size_t>(sbase + sc)];
      }
      if (acc != Complex(0, 0))
        out.amp[static_cast<std::size_t>(ti * nc + c)] = spec.field.phase_factor(y, tau) * acc;
    }
  }
  return out;
}

namespace {

std::vector<Eigen::Triplet<Complex>> walk_triplets(const BlockBasis& basis,
                                                   const CoinAssignment& coins,
                                                   const PhaseField& field) {
  const int d = coins.d;
  const int nc = 2 * d;
  std::vector<Eigen::Triplet<Complex>> trip;
  trip.reserve(static_cast<std::size_t>(basis.dim()) * static_cast<std::size_t>(nc));
  for (int col = 0; col < basis.dim(); ++col) {
    const BasisState& src = basis.states[static_cast<std::size_t>(col)];
    const CoinMatrix& coin = coins.at(src.site);
    const int sc = coin_code(src.tau, d);
    for (int c = 0; c < nc; ++c) {
      const Complex amp = coin(c, sc);
      if (amp == Complex(0, 0)) continue;
      const int tau = coin_from_code(c, d);
      const BasisState dst{tau, src.site + displacement(tau, d)};
      const auto it = basis.index.find(dst);
      if (it == basis.index.end())
        throw std::runtime_error("materialize: walk leaves the block basis at " +
                                 to_string(src, d) + " -> " + to_string(dst, d) +
                                 " (invariance violated)");
      trip.emplace_back(it->second, col, field.phase_factor(dst.site, tau) * amp);
    }
  }
  return trip;
}

}  // namespace

SparseOp materialize_sparse(const BlockBasis& basis, const CoinAssignment& coins,
                            const PhaseField& field, int dim_cap) {
  if (basis.dim() > dim_cap)
    throw std::runtime_error("materialize: dimension " + std::to_string(basis.dim()) +
                             " exceeds cap " + std::to_string(dim_cap));
  SparseOp m(basis.dim(), basis.dim());
  const auto trip = walk_triplets(basis, coins, field);
  m.setFromTriplets(trip.begin(), trip.end());
  m.makeCompressed();
  return m;
}

Eigen::MatrixXcd materialize_dense(const BlockBasis& basis, const CoinAssignment& coins,
                                   const PhaseField& field, int dim_cap) {
  return Eigen::MatrixXcd(materialize_sparse(basis, coins, field, dim_cap));
}

double unitarity_residual_sparse(const SparseOp& m) {
  SparseOp g = (SparseOp(m.adjoint()) * m).pruned();
  double worst = 0.0;
  for (int k = 0; k < g.outerSize(); ++k) {
    for (SparseOp::InnerIterator it(g, k); it; ++it) {
      const Complex expect = (it.row() == it.col()) ? Complex(1, 0) : Complex(0, 0);
      worst = std::max(worst, std::abs(it.value() - expect));
    }
  }
  // Diagonal entries absent from the product pattern count as zeros.
  for (int i = 0; i < g.rows(); ++i)
    worst = std::max(worst, std::abs(g.coeff(i, i) - Complex(1, 0)));
  return worst;
}

FiniteRestriction build_finite_restriction(int L, const CoinMatrix& coin, const Permutation& pi,
                                           const PhaseField& field, RestrictionSide side,
                                           const Site& center, int outer_radius, int dim_cap) {
  const int d = pi.dim();
  if (L < 2) throw std::invalid_argument("finite restriction: L must be >= 2");
  if (!check_localizing(pi).localizing)
    throw std::invalid_argument("finite restriction: permutation is not localizing");
  if (coin.rows() != 2 * d || coin.cols() != 2 * d)
    throw std::invalid_argument("finite restriction: coin must be 2d x 2d");

  FiniteRestriction fr;
  fr.side = side;
  fr.boundary_radius = L;

  CoinAssignment coins{d, center, coin, permutation_matrix(pi), {L}};
  if (side == RestrictionSide::Box) {
    fr.basis = box_basis(pi, BoxRegion{d, center, L});
  } else {
    if (outer_radius < L + 4)
      throw std::invalid_argument("finite restriction: outer radius must be >= L + 4");
    coins.collar_radii.push_back(outer_radius);
    fr.basis = complement_basis(pi, BoxRegion{d, center, L}, BoxRegion{d, center, outer_radius});
  }
  fr.matrix = materialize_sparse(fr.basis, coins, field, dim_cap);
  fr.unitarity_residual = unitarity_residual_sparse(fr.matrix);
  return fr;
}

DefectOperator defect_operator(int L, const CoinMatrix& coin, const Permutation& pi,
                               const PhaseField& field, const BlockBasis& outer_basis,
                               const Site& center) {
  const int d = pi.dim();
  const int nc = 2 * d;
  const CoinMatrix cpi = permutation_matrix(pi);
  const CoinMatrix diff = coin - cpi;

  DefectOperator out;
  std::vector<Eigen::Triplet<Complex>> trip;
  std::vector<int> rows, cols;  // support for the dense norm block
  std::unordered_map<int, int> row_slot;
  for (int col = 0; col < outer_basis.dim(); ++col) {
    const BasisState& src = outer_basis.states[static_cast<std::size_t>(col)];
    const int shell = (src.site - center).sup_norm();
    if (std::abs(shell - L) > 1) continue;  // T^L columns live on the collar sources
    const int sc = coin_code(src.tau, d);
    bool used = false;
    for (int c = 0; c < nc; ++c) {
      const Complex amp = diff(c, sc);
      if (amp == Complex(0, 0)) continue;
      const int tau = coin_from_code(c, d);
      const BasisState dst{tau, src.site + displacement(tau, d)};
      const auto it = outer_basis.index.find(dst);
      if (it == outer_basis.index.end())
        throw std::runtime_error("defect_operator: target outside the outer basis");
      trip.emplace_back(it->second, col, field.phase_factor(dst.site, tau) * amp);
      if (!row_slot.count(it->second)) {
        row_slot.emplace(it->second, static_cast<int>(rows.size()));
        rows.push_back(it->second);
      }
      used = true;
    }
    if (used) cols.push_back(col);
  }

  out.matrix = SparseOp(outer_basis.dim(), outer_basis.dim());
  out.matrix.setFromTriplets(trip.begin(), trip.end());
  out.matrix.makeCompressed();

  // The defect is compactly supported; its norm is the norm of the dense
  // support block.
  Eigen::MatrixXcd block = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(rows.size()),
                                                  static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    for (SparseOp::InnerIterator it(out.matrix, cols[j]); it; ++it)
      block(row_slot.at(static_cast<int>(it.row())), static_cast<Eigen::Index>(j)) = it.value();
  }
  if (block.size() > 0) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(block);
    out.norm = svd.singularValues()(0);
  }
  const double dist = coin_distance(coin, cpi);
  out.norm_ratio = dist > 0 ? out.norm / dist : 0.0;
  return out;
}

}  // namespace qwloc
